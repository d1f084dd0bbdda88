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

#pragma once

#include <sys/utsname.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rgbwkit/dataset.hpp"
#include "rgbwkit/metrics.hpp"
#include "rgbwkit/mraw.hpp"
#include "rgbwkit/parallel.hpp"
#include "rgbwkit/plugin.hpp"
#include "rgbwkit/remosaic.hpp"

namespace rgbwkit {

// Benchmark orchestration: dataset ingest, per-pair conversion + scoring,
// runtime measurement with 64-megapixel extrapolation, and report emission.

/// Scales a per-image runtime measured at (width, height) to a hypothetical
/// 64-megapixel input with a linear-in-pixels model.
inline double extrapolate_runtime(double measured, int width, int height) {
  if (!(measured > 0)) {
    throw Error("extrapolate_runtime: measured time must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw Error("extrapolate_runtime: invalid resolution");
  }
  return measured * (64e6 / (static_cast<double>(width) * static_cast<double>(height)));
}

/// Validates a dataset directory against its manifest. Corrupt or missing
/// files are listed under failures rather than aborting; a missing gt.bayer
/// is tolerated (flagged) for test-split scenes, which ship without ground
/// truth in participant view. An empty dataset is rejected.
inline DatasetManifest ingest(const std::filesystem::path& root) {
  const std::filesystem::path mpath = manifest_path(root);
  std::ifstream in(mpath);
  if (!in) throw Error("no manifest.json under " + root.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed manifest " + mpath.string() + ": " + e.what());
  }
  DatasetManifest m = manifest_from_json(j, root);
  if (m.scenes.empty()) throw Error("dataset " + root.string() + " lists no scenes");

  std::sort(m.scenes.begin(), m.scenes.end(),
            [](const SceneEntry& a, const SceneEntry& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < m.scenes.size(); ++i) {
    if (m.scenes[i].id == m.scenes[i - 1].id) {
      throw Error("manifest lists scene " + m.scenes[i].id + " twice");
    }
  }

  for (auto& scene : m.scenes) {
    const auto gt = gt_path(root, scene.id);
    if (!std::filesystem::exists(gt)) {
      if (scene.split == "test") {
        scene.gt_available = false;  // hidden ground truth
      } else {
        m.failures.push_back(scene.id + "/gt.bayer: file missing");
      }
    } else {
      try {
        read_mraw(gt);
      } catch (const Error& e) {
        m.failures.push_back(scene.id + "/gt.bayer: " + e.what());
      }
    }
    for (double gain : m.gains) {
      const auto path = rgbw_path(root, scene.id, gain);
      try {
        read_mraw(path);
      } catch (const Error& e) {
        m.failures.push_back(scene.id + "/" + path.filename().string() + ": " + e.what());
      }
    }
  }
  return m;
}

struct BenchFailure {
  std::string algorithm;
  std::string scene_id;
  double gain_db = 0.0;
  std::string reason;
};

struct AlgoRuntime {
  int pairs = 0;                 // pairs that produced a timing
  double measured_mean = 0.0;    // seconds per image at the input resolution
  double estimated_mean = 0.0;   // seconds per image extrapolated to 64 MP
  std::string protocol;
};

struct BenchRow {
  std::string algorithm;
  MetricRecord rec;
};

struct BenchmarkReport {
  std::filesystem::path dataset_root;
  int width = 0;
  int height = 0;
  std::vector<std::string> algorithms;  // in invocation order
  std::vector<BenchRow> rows;
  std::map<std::string, std::vector<MetricAggregate>> aggregates;
  std::map<std::string, AlgoRuntime> runtimes;  // empty in predictions mode
  std::vector<BenchFailure> failures;
  std::vector<std::string> notices;
  std::string environment;
};

struct BenchOptions {
  std::string split;            // empty = all splits
  int repeats = 3;              // timed in-process runs per builtin pair
  int warmup = 1;               // discarded warm-up runs per builtin pair
  IspConfig isp;
  std::optional<LpipsTable> lpips;
};

inline std::string environment_note() {
  struct utsname u {};
  std::string s = "unknown host";
  if (::uname(&u) == 0) {
    s = std::string(u.sysname) + " " + u.release + " " + u.machine;
  }
  return s + ", " + std::to_string(thread_pool_width()) + " worker thread(s)";
}

namespace detail {

struct BenchPair {
  std::string scene_id;
  double gain_db = 0.0;
  std::filesystem::path input_path;
};

/// Scenes of the requested split whose ground truth loads, with notices for
/// the rest; fills `gt` keyed by scene id.
inline std::vector<detail::BenchPair> collect_pairs(const DatasetManifest& manifest,
                                                    const std::string& split,
                                                    std::map<std::string, RawImage>* gt,
                                                    std::vector<std::string>* notices) {
  std::vector<BenchPair> pairs;
  for (const auto& scene : manifest.scenes) {
    if (!split.empty() && scene.split != split) continue;
    if (!scene.gt_available) {
      notices->push_back("scene " + scene.id + " skipped: ground truth hidden");
      continue;
    }
    try {
      (*gt)[scene.id] = read_mraw(gt_path(manifest.root, scene.id));
    } catch (const Error& e) {
      notices->push_back("scene " + scene.id + " skipped: " + e.what());
      continue;
    }
    for (double gain : manifest.gains) {
      pairs.push_back({scene.id, gain, rgbw_path(manifest.root, scene.id, gain)});
    }
  }
  return pairs;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::optional<double> lpips_lookup(const std::optional<LpipsTable>& table,
                                          const std::string& scene_id, double gain_db) {
  if (!table) return std::nullopt;
  const auto it = table->find({scene_id, gain_db});
  if (it == table->end()) return std::nullopt;
  return it->second;
}

/// Scores already-converted predictions against ground truth in parallel,
/// appending rows (in pair order) and failures.
inline void score_pairs(const std::string& algo_name, const std::vector<BenchPair>& pairs,
                        const std::vector<std::optional<RawImage>>& preds,
                        const std::map<std::string, RawImage>& gt, const BenchOptions& opts,
                        BenchmarkReport* report) {
  std::vector<std::optional<MetricRecord>> records(pairs.size());
  std::vector<std::optional<std::string>> errors(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    if (!preds[i].has_value()) return;
    const BenchPair& pair = pairs[i];
    try {
      records[i] = evaluate_pair(*preds[i], gt.at(pair.scene_id), pair.scene_id,
                                 pair.gain_db,
                                 lpips_lookup(opts.lpips, pair.scene_id, pair.gain_db),
                                 opts.isp);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (records[i].has_value()) {
      report->rows.push_back({algo_name, std::move(*records[i])});
    } else if (errors[i].has_value()) {
      report->failures.push_back({algo_name, pairs[i].scene_id, pairs[i].gain_db,
                                  *errors[i]});
    }
  }
}

inline void finalize_algo(const std::string& algo_name, std::size_t pair_count,
                          BenchmarkReport* report) {
  std::vector<MetricRecord> algo_rows;
  for (const auto& row : report->rows) {
    if (row.algorithm == algo_name) algo_rows.push_back(row.rec);
  }
  if (algo_rows.empty()) {
    report->notices.push_back("algorithm " + algo_name + " excluded from aggregates: all " +
                              std::to_string(pair_count) + " pairs failed");
    return;
  }
  report->aggregates[algo_name] = aggregate_by_gain(algo_rows);
}

}  // namespace detail

/// Runs every algorithm over every (scene, gain) pair of the dataset and
/// scores the results. Conversions are timed serially — builtins as the
/// median of `repeats` in-process runs after `warmup` discarded runs,
/// plugins as a single subprocess wall-clock run — then scored on the
/// worker pool. Per-pair failures are recorded and the benchmark continues;
/// an algorithm whose pairs all fail is excluded from the aggregates.
inline BenchmarkReport run_benchmark(const DatasetManifest& manifest,
                                     const std::vector<const RemosaicAlgo*>& algos,
                                     const BenchOptions& opts = {}) {
  if (algos.empty()) throw Error("benchmark needs at least one algorithm");
  {
    std::set<std::string> names;
    for (const auto* algo : algos) {
      if (!names.insert(algo->name()).second) {
        throw Error("duplicate algorithm name: " + algo->name());
      }
    }
  }

  BenchmarkReport report;
  report.dataset_root = manifest.root;
  report.environment = environment_note();

  std::map<std::string, RawImage> gt;
  const std::vector<detail::BenchPair> pairs =
      detail::collect_pairs(manifest, opts.split, &gt, &report.notices);
  if (pairs.empty()) throw Error("no scorable (scene, gain) pairs in dataset");
  {
    const RawImage& first_gt = gt.begin()->second;
    report.width = first_gt.width;
    report.height = first_gt.height;
  }

  for (const auto* algo : algos) {
    const std::string name = algo->name();
    report.algorithms.push_back(name);

    std::vector<std::optional<RawImage>> preds(pairs.size());
    std::vector<double> runtimes;
    AlgoRuntime runtime;
    runtime.protocol = algo->is_external()
                           ? "subprocess wall-clock, single run (includes startup)"
                           : "median of " + std::to_string(opts.repeats) +
                                 " in-process runs after " + std::to_string(opts.warmup) +
                                 " warm-up, excluding file I/O";

    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const detail::BenchPair& pair = pairs[i];
      try {
        double seconds = 0;
        RawImage pred;
        if (algo->is_external()) {
          detail::ScopedTempDir tmp;
          pred = algo->run_file(pair.input_path, tmp.path() / "output.bayer", &seconds);
        } else {
          const RawImage input = read_mraw(pair.input_path);
          for (int r = 0; r < opts.warmup; ++r) algo->run(input);
          std::vector<double> trials;
          for (int r = 0; r < std::max(1, opts.repeats); ++r) {
            double t = 0;
            pred = algo->run_timed(input, &t);
            trials.push_back(t);
          }
          seconds = detail::median(trials);
        }
        runtime.pairs += 1;
        runtime.measured_mean += seconds;
        runtime.estimated_mean +=
            extrapolate_runtime(std::max(seconds, 1e-12), pred.width, pred.height);
        preds[i] = std::move(pred);
      } catch (const Error& e) {
        report.failures.push_back({name, pair.scene_id, pair.gain_db, e.what()});
      }
    }
    if (runtime.pairs > 0) {
      runtime.measured_mean /= runtime.pairs;
      runtime.estimated_mean /= runtime.pairs;
      report.runtimes[name] = runtime;
    }

    detail::score_pairs(name, pairs, preds, gt, opts, &report);
    detail::finalize_algo(name, pairs.size(), &report);
  }
  return report;
}

inline std::filesystem::path prediction_path(const std::filesystem::path& pred_dir,
                                             const std::string& scene_id, double gain_db) {
  return pred_dir / scene_id / ("pred_" + format_gain(gain_db) + "db.bayer");
}

/// Scores externally produced Bayer predictions laid out as
/// `<pred_dir>/<scene_id>/pred_<gain>db.bayer` against the dataset's ground
/// truth. No conversion runs and nothing is timed, so the report carries no
/// runtime section. Missing or malformed prediction files become per-pair
/// failures.
inline BenchmarkReport run_predictions(const DatasetManifest& manifest,
                                       const std::filesystem::path& pred_dir,
                                       const BenchOptions& opts = {},
                                       const std::string& label = "predictions") {
  BenchmarkReport report;
  report.dataset_root = manifest.root;
  report.environment = environment_note();
  report.algorithms.push_back(label);

  std::map<std::string, RawImage> gt;
  const std::vector<detail::BenchPair> pairs =
      detail::collect_pairs(manifest, opts.split, &gt, &report.notices);
  if (pairs.empty()) throw Error("no scorable (scene, gain) pairs in dataset");
  report.width = gt.begin()->second.width;
  report.height = gt.begin()->second.height;

  std::vector<std::optional<RawImage>> preds(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto path = prediction_path(pred_dir, pairs[i].scene_id, pairs[i].gain_db);
    try {
      preds[i] = read_mraw(path);
    } catch (const Error& e) {
      report.failures.push_back({label, pairs[i].scene_id, pairs[i].gain_db, e.what()});
    }
  }
  detail::score_pairs(label, pairs, preds, gt, opts, &report);
  detail::finalize_algo(label, pairs.size(), &report);
  return report;
}

// ---------------------------------------------------------------------------
// Report emission. Byte-deterministic given a report.

namespace detail {

inline const MetricAggregate* overall_aggregate(const BenchmarkReport& report,
                                                const std::string& algo) {
  const auto it = report.aggregates.find(algo);
  if (it == report.aggregates.end()) return nullptr;
  for (const auto& agg : it->second) {
    if (agg.group == "overall") return &agg;
  }
  return nullptr;
}

/// Algorithms ranked strictly by overall M4 descending, ties broken by PSNR
/// descending then name ascending. Excluded algorithms do not appear.
inline std::vector<std::string> ranked_algorithms(const BenchmarkReport& report) {
  std::vector<std::string> ranked;
  for (const auto& algo : report.algorithms) {
    if (overall_aggregate(report, algo) != nullptr) ranked.push_back(algo);
  }
  std::sort(ranked.begin(), ranked.end(), [&](const std::string& a, const std::string& b) {
    const MetricAggregate* aa = overall_aggregate(report, a);
    const MetricAggregate* bb = overall_aggregate(report, b);
    if (aa->m4 != bb->m4) return aa->m4 > bb->m4;
    if (aa->psnr != bb->psnr) return aa->psnr > bb->psnr;
    return a < b;
  });
  return ranked;
}

inline std::string lpips_cell(const MetricAggregate& agg, const char* absent) {
  return agg.lpips_count > 0 ? fmt6(agg.lpips) : std::string(absent);
}

}  // namespace detail

/// Renders the leaderboard (ranked by M4), the runtime table and per-gain
/// aggregates as Markdown.
inline void emit_report_markdown(const BenchmarkReport& report,
                                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());

  out << "# rgbwkit benchmark report\n\n";
  out << "- Dataset: `" << report.dataset_root.string() << "` (" << report.width << "x"
      << report.height << ")\n";
  out << "- Environment: " << report.environment << "\n\n";

  const auto ranked = detail::ranked_algorithms(report);
  out << "## Leaderboard (ranked by M4, higher is better)\n\n";
  out << "| Rank | Algorithm | PSNR | SSIM | LPIPS | KLD | M4 |\n";
  out << "|---:|:---|---:|---:|---:|---:|---:|\n";
  int rank = 1;
  for (const auto& algo : ranked) {
    const MetricAggregate* agg = detail::overall_aggregate(report, algo);
    out << "| " << rank++ << " | " << algo << " | " << detail::fmt6(agg->psnr) << " | "
        << detail::fmt6(agg->ssim) << " | " << detail::lpips_cell(*agg, "—") << " | "
        << detail::fmt6(agg->kld) << " | " << detail::fmt6(agg->m4) << " |\n";
  }
  out << "\nLPIPS shows — when no external perceptual scores were ingested; the\n"
         "M4 exponent then takes LPIPS as 0. Runtime never affects rank.\n\n";

  out << "## Runtime\n\n";
  if (report.runtimes.empty()) {
    out << "Not measured (externally produced predictions).\n\n";
  } else {
    out << "| Algorithm | Pairs | s/image (" << report.width << "x" << report.height
        << ") | s/image (64M, estimated) | Protocol |\n";
    out << "|:---|---:|---:|---:|:---|\n";
    for (const auto& algo : report.algorithms) {
      const auto it = report.runtimes.find(algo);
      if (it == report.runtimes.end()) continue;
      const AlgoRuntime& rt = it->second;
      out << "| " << algo << " | " << rt.pairs << " | " << detail::fmt6(rt.measured_mean)
          << " | " << detail::fmt6(rt.estimated_mean) << " | " << rt.protocol << " |\n";
    }
    out << "\nEstimated runtime scales the measured per-image time by 64·10⁶/(W·H).\n"
           "Builtin and plugin timings follow different protocols (in-process vs\n"
           "full subprocess including startup) and are not mutually comparable.\n\n";
  }

  out << "## Per-gain aggregates\n\n";
  for (const auto& algo : report.algorithms) {
    const auto it = report.aggregates.find(algo);
    if (it == report.aggregates.end()) continue;
    out << "### " << algo << "\n\n";
    out << "| Group | Pairs | PSNR | SSIM | LPIPS | KLD | M4 |\n";
    out << "|:---|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& agg : it->second) {
      out << "| " << agg.group << " | " << agg.count << " | " << detail::fmt6(agg.psnr)
          << " | " << detail::fmt6(agg.ssim) << " | " << detail::lpips_cell(agg, "—")
          << " | " << detail::fmt6(agg.kld) << " | " << detail::fmt6(agg.m4) << " |\n";
    }
    out << "\n";
  }

  if (!report.notices.empty()) {
    out << "## Notices\n\n";
    for (const auto& notice : report.notices) out << "- " << notice << "\n";
    out << "\n";
  }

  out << "## Failures\n\n";
  if (report.failures.empty()) {
    out << "None.\n";
  } else {
    for (const auto& f : report.failures) {
      out << "- " << f.algorithm << " / " << f.scene_id << " / " << format_gain(f.gain_db)
          << "db: " << f.reason << "\n";
    }
  }
}

/// Writes the per-pair metric CSV (algorithm-tagged) and the runtime CSV.
/// Metric rows are sorted by (algorithm, scene_id, gain_db) and contain no
/// timing, so they are identical across same-seed runs.
inline void emit_report_csv(const BenchmarkReport& report,
                            const std::filesystem::path& metrics_path,
                            const std::filesystem::path& runtime_path) {
  std::vector<BenchRow> rows = report.rows;
  std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    if (a.algorithm != b.algorithm) return a.algorithm < b.algorithm;
    if (a.rec.scene_id != b.rec.scene_id) return a.rec.scene_id < b.rec.scene_id;
    return a.rec.gain_db < b.rec.gain_db;
  });
  {
    std::ofstream out(metrics_path, std::ios::trunc | std::ios::binary);
    if (!out) throw Error("cannot write " + metrics_path.string());
    out << "algorithm,scene_id,gain_db,psnr,ssim,lpips,lpips_source,kld,m4\n";
    for (const auto& row : rows) {
      const MetricRecord& r = row.rec;
      out << row.algorithm << ',' << r.scene_id << ',' << format_gain(r.gain_db) << ','
          << detail::fmt6(r.psnr) << ',' << detail::fmt6(r.ssim) << ','
          << (r.lpips_source == "external" ? detail::fmt6(r.lpips) : std::string()) << ','
          << r.lpips_source << ',' << detail::fmt6(r.kld) << ',' << detail::fmt6(r.m4)
          << '\n';
    }
  }
  {
    std::ofstream out(runtime_path, std::ios::trunc | std::ios::binary);
    if (!out) throw Error("cannot write " + runtime_path.string());
    out << "algorithm,pairs,width,height,seconds_per_image_measured,"
           "seconds_per_image_64m_estimated,protocol\n";
    std::vector<std::string> names;
    for (const auto& [name, rt] : report.runtimes) names.push_back(name);
    std::sort(names.begin(), names.end());
    for (const auto& name : names) {
      const AlgoRuntime& rt = report.runtimes.at(name);
      out << name << ',' << rt.pairs << ',' << report.width << ',' << report.height << ','
          << detail::fmt6(rt.measured_mean) << ',' << detail::fmt6(rt.estimated_mean) << ','
          << '"' << rt.protocol << '"' << '\n';
    }
  }
}

}  // namespace rgbwkit
