// Copyright (c) 2026 The rgbwkit authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line surface of the toolkit. Exit codes: 0 success, 1 usage
// error, 2 data error. Logs go to stderr; machine-readable results go to
// stdout or to the files named by --out.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rgbwkit/bench.hpp"
#include "rgbwkit/datagen.hpp"
#include "rgbwkit/dataset.hpp"
#include "rgbwkit/isp.hpp"
#include "rgbwkit/metrics.hpp"
#include "rgbwkit/mraw.hpp"
#include "rgbwkit/noise.hpp"
#include "rgbwkit/plugin.hpp"
#include "rgbwkit/remosaic.hpp"

namespace {

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

const CLI::Validator MultipleOf4(
    [](std::string& s) -> std::string {
      try {
        const long v = std::stol(s);
        if (v > 0 && v % 4 == 0) return {};
      } catch (const std::exception&) {
      }
      return "must be a positive multiple of 4";
    },
    "MULT4");

void setup_datagen(CLI::App& app) {
  auto opts = std::make_shared<rgbwkit::DatagenOptions>();
  auto out = std::make_shared<std::string>();
  auto upsample = std::make_shared<std::string>("nearest");
  auto black = std::make_shared<int>(0);
  auto white = std::make_shared<int>(1023);

  CLI::App* cmd =
      app.add_subcommand("datagen", "Generate an aligned noisy-RGBW / clean-Bayer dataset");
  cmd->add_option("--out", *out, "Output dataset directory")->required();
  cmd->add_option("--scenes", opts->n_scenes, "Number of procedural scenes")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--width", opts->width, "Image width")
      ->check(MultipleOf4)
      ->capture_default_str();
  cmd->add_option("--height", opts->height, "Image height")
      ->check(MultipleOf4)
      ->capture_default_str();
  cmd->add_option("--gains", opts->gains, "Gain levels in dB (space separated)")
      ->capture_default_str();
  cmd->add_option("--seed", opts->seed, "Master RNG seed")->capture_default_str();
  cmd->add_option("--upsample", *upsample, "Upsampling filter for pair synthesis")
      ->check(CLI::IsMember({"nearest", "bilinear"}))
      ->capture_default_str();
  cmd->add_flag("--anti-diagonal", opts->anti_diagonal,
                "Place block colors on the 2x2 anti-diagonal (pattern id 2)");
  cmd->add_option("--split", opts->split, "Split tag recorded for every scene")
      ->check(CLI::IsMember({"train", "val", "test"}))
      ->capture_default_str();
  cmd->add_option("--bit-depth", opts->bit_depth, "Sample bit depth")
      ->check(CLI::Range(1, 16))
      ->capture_default_str();
  cmd->add_option("--black", *black, "Black level in DN")->capture_default_str();
  cmd->add_option("--white", *white, "White level in DN")->capture_default_str();

  cmd->callback([opts, out, upsample, black, white] {
    opts->upsample = *upsample == "bilinear" ? rgbwkit::UpsampleMode::kBilinear
                                             : rgbwkit::UpsampleMode::kNearest;
    opts->black_level = static_cast<std::uint16_t>(*black);
    opts->white_level = static_cast<std::uint16_t>(*white);
    const rgbwkit::DatasetManifest manifest = rgbwkit::generate_dataset(*out, *opts);
    std::cerr << "datagen: wrote " << manifest.scenes.size() << " scene(s) x "
              << manifest.gains.size() << " gain(s) to " << *out << "\n";
  });
}

std::unique_ptr<rgbwkit::RemosaicAlgo> build_algo(const std::string& algo,
                                                  const std::string& command,
                                                  const std::string& label, double timeout,
                                                  bool denoise) {
  if (algo == "plugin") {
    if (command.empty()) {
      throw CLI::ValidationError("remosaic", "--algo plugin requires --cmd");
    }
    return std::make_unique<rgbwkit::PluginRemosaic>(
        command, label.empty() ? "plugin" : label, timeout);
  }
  if (!command.empty()) {
    throw CLI::ValidationError("remosaic", "--cmd is only valid with --algo plugin");
  }
  return rgbwkit::make_remosaic(algo, denoise);
}

void setup_remosaic(CLI::App& app) {
  auto in = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto algo = std::make_shared<std::string>("wguided");
  auto command = std::make_shared<std::string>();
  auto label = std::make_shared<std::string>();
  auto timeout = std::make_shared<double>(600.0);
  auto denoise = std::make_shared<bool>(false);

  CLI::App* cmd = app.add_subcommand("remosaic", "Convert one RGBW image to Bayer");
  cmd->add_option("--in", *in, "Input .rgbw (MRAW1)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", *out, "Output .bayer (MRAW1)")->required();
  cmd->add_option("--algo", *algo, "Algorithm")
      ->check(CLI::IsMember({"nearest", "bilinear", "wguided", "plugin"}))
      ->capture_default_str();
  cmd->add_option("--cmd", *command, "Plugin command (with --algo plugin)");
  cmd->add_option("--name", *label, "Label for the plugin in logs");
  cmd->add_option("--timeout", *timeout, "Plugin timeout in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_flag("--denoise", *denoise, "Apply the per-site denoise prefilter first");

  cmd->callback([in, out, algo, command, label, timeout, denoise] {
    const auto impl = build_algo(*algo, *command, *label, *timeout, *denoise);
    const double seconds = rgbwkit::run_remosaic(*impl, *in, *out);
    std::cout << "runtime_seconds=" << fmt6(seconds) << "\n";
    std::cerr << "remosaic: " << impl->name() << " wrote " << *out << "\n";
  });
}

void setup_isp(CLI::App& app) {
  auto in = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto config = std::make_shared<std::string>();

  CLI::App* cmd = app.add_subcommand("isp", "Render a Bayer image to an 8-bit PPM");
  cmd->add_option("--in", *in, "Input .bayer (MRAW1)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", *out, "Output .ppm")->required();
  cmd->add_option("--config", *config, "ISP config JSON (wb, ccm, gamma)")
      ->check(CLI::ExistingFile);

  cmd->callback([in, out, config] {
    const rgbwkit::IspConfig cfg =
        config->empty() ? rgbwkit::IspConfig{} : rgbwkit::load_isp_config(*config);
    const rgbwkit::DisplayImage img = rgbwkit::run_isp(rgbwkit::read_mraw(*in), cfg);
    rgbwkit::write_ppm(*out, img);
    std::cerr << "isp: wrote " << *out << " (" << img.width << "x" << img.height << ")\n";
  });
}

void setup_eval(CLI::App& app) {
  auto pred = std::make_shared<std::string>();
  auto gt = std::make_shared<std::string>();
  auto scene_id = std::make_shared<std::string>("scene");
  auto gain = std::make_shared<double>(0.0);
  auto lpips_csv = std::make_shared<std::string>();
  auto config = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();

  CLI::App* cmd = app.add_subcommand("eval", "Score one Bayer prediction against ground truth");
  cmd->add_option("--pred", *pred, "Predicted .bayer")->required()->check(CLI::ExistingFile);
  cmd->add_option("--gt", *gt, "Ground-truth .bayer")->required()->check(CLI::ExistingFile);
  cmd->add_option("--scene-id", *scene_id, "Scene id for the record")->capture_default_str();
  cmd->add_option("--gain", *gain, "Gain in dB for the record")->capture_default_str();
  cmd->add_option("--lpips", *lpips_csv, "External LPIPS CSV (scene_id,gain_db,lpips)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--config", *config, "ISP config JSON used for rendering")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", *out, "Also write a one-row metrics CSV here");

  cmd->callback([pred, gt, scene_id, gain, lpips_csv, config, out] {
    std::optional<double> lpips;
    if (!lpips_csv->empty()) {
      const rgbwkit::LpipsTable table = rgbwkit::load_lpips_csv(*lpips_csv);
      const auto it = table.find({*scene_id, *gain});
      if (it != table.end()) {
        lpips = it->second;
      } else {
        std::cerr << "eval: no LPIPS row for (" << *scene_id << ", "
                  << rgbwkit::format_gain(*gain) << "db); recorded as absent\n";
      }
    }
    const rgbwkit::IspConfig cfg =
        config->empty() ? rgbwkit::IspConfig{} : rgbwkit::load_isp_config(*config);
    const rgbwkit::MetricRecord rec =
        rgbwkit::evaluate_pair(rgbwkit::read_mraw(*pred), rgbwkit::read_mraw(*gt),
                               *scene_id, *gain, lpips, cfg);
    std::cout << "psnr=" << fmt6(rec.psnr) << " ssim=" << fmt6(rec.ssim) << " lpips="
              << (rec.lpips_source == "external" ? fmt6(rec.lpips) : std::string("absent"))
              << " kld=" << fmt6(rec.kld) << " m4=" << fmt6(rec.m4)
              << (rec.m4_clamped ? " m4_clamped=1" : "") << "\n";
    if (!out->empty()) rgbwkit::write_metrics_csv(*out, {rec});
  });
}

void setup_bench(CLI::App& app) {
  auto dataset = std::make_shared<std::string>();
  auto algos = std::make_shared<std::vector<std::string>>();
  auto plugins = std::make_shared<std::vector<std::string>>();
  auto plugin_names = std::make_shared<std::vector<std::string>>();
  auto denoise = std::make_shared<bool>(false);
  auto format = std::make_shared<std::string>("both");
  auto out = std::make_shared<std::string>(".");
  auto lpips_csv = std::make_shared<std::string>();
  auto config = std::make_shared<std::string>();
  auto split = std::make_shared<std::string>();
  auto repeats = std::make_shared<int>(3);
  auto warmup = std::make_shared<int>(1);
  auto timeout = std::make_shared<double>(600.0);
  auto predictions = std::make_shared<std::string>();

  CLI::App* cmd =
      app.add_subcommand("bench", "Run algorithms over a dataset and emit a report");
  cmd->add_option("--dataset", *dataset, "Dataset root (datagen layout)")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--algo", *algos, "Builtin algorithm (repeatable)")
      ->check(CLI::IsMember({"nearest", "bilinear", "wguided"}));
  cmd->add_option("--plugin", *plugins, "External plugin command (repeatable)");
  cmd->add_option("--plugin-name", *plugin_names,
                  "Labels for --plugin entries, matched by position");
  cmd->add_flag("--denoise", *denoise, "Apply the denoise prefilter to builtins");
  cmd->add_option("--report", *format, "Report format")
      ->check(CLI::IsMember({"md", "csv", "both"}))
      ->capture_default_str();
  cmd->add_option("--out", *out, "Output directory for report files")->capture_default_str();
  cmd->add_option("--lpips", *lpips_csv, "External LPIPS CSV applied to matching rows")
      ->check(CLI::ExistingFile);
  cmd->add_option("--config", *config, "ISP config JSON used for metric rendering")
      ->check(CLI::ExistingFile);
  cmd->add_option("--split", *split, "Only score scenes with this split tag")
      ->check(CLI::IsMember({"train", "val", "test"}));
  cmd->add_option("--repeats", *repeats, "Timed in-process runs per builtin pair")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--warmup", *warmup, "Warm-up runs per builtin pair")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--timeout", *timeout, "Plugin timeout in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--predictions", *predictions,
                  "Score pre-computed predictions (<dir>/<scene>/pred_<gain>db.bayer) "
                  "instead of running algorithms")
      ->check(CLI::ExistingDirectory);

  cmd->callback([=] {
    rgbwkit::DatasetManifest manifest = rgbwkit::ingest(*dataset);
    for (const auto& warning : manifest.failures) {
      std::cerr << "bench: dataset warning: " << warning << "\n";
    }

    rgbwkit::BenchOptions opts;
    opts.split = *split;
    opts.repeats = *repeats;
    opts.warmup = *warmup;
    if (!config->empty()) opts.isp = rgbwkit::load_isp_config(*config);
    if (!lpips_csv->empty()) opts.lpips = rgbwkit::load_lpips_csv(*lpips_csv);

    rgbwkit::BenchmarkReport report;
    if (!predictions->empty()) {
      if (!algos->empty() || !plugins->empty()) {
        throw CLI::ValidationError("bench",
                                   "--predictions cannot be combined with --algo/--plugin");
      }
      report = rgbwkit::run_predictions(manifest, *predictions, opts);
    } else {
      std::vector<std::unique_ptr<rgbwkit::RemosaicAlgo>> owned;
      for (const auto& name : *algos) owned.push_back(rgbwkit::make_remosaic(name, *denoise));
      for (std::size_t i = 0; i < plugins->size(); ++i) {
        std::string label = i < plugin_names->size()
                                ? (*plugin_names)[i]
                                : (plugins->size() == 1 ? std::string("plugin")
                                                        : "plugin" + std::to_string(i + 1));
        owned.push_back(std::make_unique<rgbwkit::PluginRemosaic>((*plugins)[i],
                                                                  std::move(label), *timeout));
      }
      if (owned.empty()) {
        throw CLI::ValidationError("bench", "specify at least one --algo or --plugin");
      }
      std::vector<const rgbwkit::RemosaicAlgo*> ptrs;
      for (const auto& p : owned) ptrs.push_back(p.get());
      report = rgbwkit::run_benchmark(manifest, ptrs, opts);
    }

    std::filesystem::create_directories(*out);
    const std::filesystem::path out_dir(*out);
    if (*format == "md" || *format == "both") {
      rgbwkit::emit_report_markdown(report, out_dir / "report.md");
      std::cerr << "bench: wrote " << (out_dir / "report.md").string() << "\n";
    }
    if (*format == "csv" || *format == "both") {
      rgbwkit::emit_report_csv(report, out_dir / "metrics.csv", out_dir / "runtime.csv");
      std::cerr << "bench: wrote " << (out_dir / "metrics.csv").string() << " and "
                << (out_dir / "runtime.csv").string() << "\n";
    }
    for (const auto& notice : report.notices) std::cerr << "bench: " << notice << "\n";
    for (const auto& f : report.failures) {
      std::cerr << "bench: failure: " << f.algorithm << " / " << f.scene_id << " / "
                << rgbwkit::format_gain(f.gain_db) << "db: " << f.reason << "\n";
    }
    std::cerr << "bench: " << report.rows.size() << " row(s) scored, "
              << report.failures.size() << " failure(s)\n";
  });
}

void setup_calibrate(CLI::App& app) {
  auto inputs = std::make_shared<std::vector<std::string>>();
  auto out = std::make_shared<std::string>();

  CLI::App* cmd = app.add_subcommand(
      "calibrate", "Photon-transfer noise calibration from flat-field MRAW1 frames");
  cmd->add_option("--in", *inputs, "Flat-field frames at distinct exposure levels (>= 2)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", *out, "Also write the fitted parameters as JSON here");

  cmd->callback([inputs, out] {
    if (inputs->size() < 2) {
      throw CLI::ValidationError("calibrate", "need at least 2 flat-field frames");
    }
    std::vector<std::pair<double, rgbwkit::RawImage>> patches;
    for (const auto& path : *inputs) {
      rgbwkit::RawImage img = rgbwkit::read_mraw(path);
      double mean = 0;
      for (std::uint16_t v : img.data) mean += v;
      mean /= static_cast<double>(img.data.size());
      patches.emplace_back(mean, std::move(img));
    }
    const rgbwkit::LineFit fit =
        rgbwkit::fit_line(rgbwkit::photon_transfer_points(patches));
    const rgbwkit::NoiseParams params = rgbwkit::calibrate_noise(patches);
    std::cout << "sigma_s_sq=" << fmt6(params.sigma_s_sq)
              << " sigma_c_sq=" << fmt6(params.sigma_c_sq)
              << " r_squared=" << fmt6(fit.r_squared) << "\n";
    if (!out->empty()) {
      nlohmann::json j = {{"sigma_s_sq", params.sigma_s_sq},
                          {"sigma_c_sq", params.sigma_c_sq},
                          {"r_squared", fit.r_squared}};
      std::ofstream f(*out, std::ios::trunc);
      if (!f) throw rgbwkit::Error("cannot write " + *out);
      f << j.dump(2) << "\n";
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rgbwkit — RGBW remosaic data generation, conversion and benchmarking"};
  app.require_subcommand(1);
  setup_datagen(app);
  setup_remosaic(app);
  setup_isp(app);
  setup_eval(app);
  setup_bench(app);
  setup_calibrate(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const rgbwkit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
