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

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include <catch2/catch_amalgamated.hpp>

#include "rgbwkit/bench.hpp"
#include "rgbwkit/datagen.hpp"
#include "test_util.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

/// A small noise-free-ish dataset for orchestration tests.
rgbwkit::DatasetManifest make_dataset(const std::filesystem::path& root, int scenes,
                                      std::vector<double> gains,
                                      const std::string& split = "val") {
  rgbwkit::DatagenOptions opts;
  opts.n_scenes = scenes;
  opts.width = 32;
  opts.height = 32;
  opts.gains = std::move(gains);
  opts.seed = 99;
  opts.split = split;
  return rgbwkit::generate_dataset(root, opts);
}

}  // namespace

TEST_CASE("runtime extrapolation is linear in pixel count", "[bench]") {
  // 1200x1800 is 2.16 MP, so the 64 MP factor is 64/2.16 = 29.6296...
  REQUIRE_THAT(rgbwkit::extrapolate_runtime(0.26, 1200, 1800),
               WithinAbs(0.26 * 64e6 / (1200.0 * 1800.0), 1e-9));
  REQUIRE_THAT(rgbwkit::extrapolate_runtime(1.0, 8000, 8000), WithinRel(1.0, 1e-12));
  REQUIRE_THROWS_AS(rgbwkit::extrapolate_runtime(0.0, 100, 100), rgbwkit::Error);
  REQUIRE_THROWS_AS(rgbwkit::extrapolate_runtime(-1.0, 100, 100), rgbwkit::Error);
  REQUIRE_THROWS_AS(rgbwkit::extrapolate_runtime(1.0, 0, 100), rgbwkit::Error);
  REQUIRE_THROWS_AS(rgbwkit::extrapolate_runtime(1.0, 100, -4), rgbwkit::Error);
}

TEST_CASE("ingest validates a dataset and reports defects per file", "[bench]") {
  testutil::TempDir dir;

  SECTION("a clean dataset ingests without failures, scenes sorted") {
    make_dataset(dir.path() / "ds", 2, {0.0, 24.0});
    const rgbwkit::DatasetManifest m = rgbwkit::ingest(dir.path() / "ds");
    REQUIRE(m.scenes.size() == 2);
    REQUIRE(m.scenes[0].id == "scene001");
    REQUIRE(m.scenes[1].id == "scene002");
    REQUIRE(m.scenes[0].gt_available);
    REQUIRE(m.gains == std::vector<double>{0.0, 24.0});
    REQUIRE(m.failures.empty());
  }
  SECTION("a truncated input is listed as a failure, not an abort") {
    make_dataset(dir.path() / "ds", 2, {0.0});
    std::ofstream(rgbwkit::rgbw_path(dir.path() / "ds", "scene001", 0.0),
                  std::ios::trunc | std::ios::binary)
        << "bogus";
    const rgbwkit::DatasetManifest m = rgbwkit::ingest(dir.path() / "ds");
    REQUIRE(m.failures.size() == 1);
    REQUIRE_THAT(m.failures[0], ContainsSubstring("scene001"));
    REQUIRE(m.scenes.size() == 2);
  }
  SECTION("missing ground truth fails a val scene but is fine for test split") {
    make_dataset(dir.path() / "ds", 1, {0.0}, "val");
    std::filesystem::remove(rgbwkit::gt_path(dir.path() / "ds", "scene001"));
    const rgbwkit::DatasetManifest m = rgbwkit::ingest(dir.path() / "ds");
    REQUIRE(m.failures.size() == 1);
    REQUIRE_THAT(m.failures[0], ContainsSubstring("gt.bayer"));

    make_dataset(dir.path() / "ds_test", 1, {0.0}, "test");
    std::filesystem::remove(rgbwkit::gt_path(dir.path() / "ds_test", "scene001"));
    const rgbwkit::DatasetManifest t = rgbwkit::ingest(dir.path() / "ds_test");
    REQUIRE(t.failures.empty());
    REQUIRE_FALSE(t.scenes[0].gt_available);
  }
  SECTION("a directory without a manifest is rejected") {
    std::filesystem::create_directories(dir.path() / "empty");
    REQUIRE_THROWS_WITH(rgbwkit::ingest(dir.path() / "empty"),
                        ContainsSubstring("manifest"));
  }
  SECTION("duplicate scene ids are rejected") {
    std::filesystem::create_directories(dir.path() / "dup");
    std::ofstream(dir.path() / "dup" / "manifest.json")
        << R"({"scenes":[{"id":"a","split":"val"},{"id":"a","split":"val"}],)"
        << R"("gains":[0],"noise":{"0":{"sigma_s_sq":0,"sigma_c_sq":0}},"seed":0})";
    REQUIRE_THROWS_WITH(rgbwkit::ingest(dir.path() / "dup"), ContainsSubstring("twice"));
  }
  SECTION("syntactically broken manifest is rejected with context") {
    std::filesystem::create_directories(dir.path() / "bad");
    std::ofstream(dir.path() / "bad" / "manifest.json") << "{nope";
    REQUIRE_THROWS_WITH(rgbwkit::ingest(dir.path() / "bad"),
                        ContainsSubstring("malformed manifest"));
  }
}

TEST_CASE("run_benchmark scores every algorithm over every pair", "[bench]") {
  testutil::TempDir dir;
  make_dataset(dir.path() / "ds", 2, {0.0, 24.0});
  const rgbwkit::DatasetManifest manifest = rgbwkit::ingest(dir.path() / "ds");

  const auto nearest = rgbwkit::make_remosaic("nearest");
  const auto bilinear = rgbwkit::make_remosaic("bilinear");
  rgbwkit::BenchOptions opts;
  opts.repeats = 1;
  opts.warmup = 0;
  const rgbwkit::BenchmarkReport report =
      rgbwkit::run_benchmark(manifest, {nearest.get(), bilinear.get()}, opts);

  REQUIRE(report.width == 32);
  REQUIRE(report.height == 32);
  REQUIRE(report.rows.size() == 8);  // 2 algos x 2 scenes x 2 gains
  REQUIRE(report.failures.empty());
  REQUIRE(report.algorithms == std::vector<std::string>{"nearest", "bilinear"});

  // Aggregates must be exactly the mean of the per-pair rows.
  for (const auto& algo : report.algorithms) {
    std::vector<rgbwkit::MetricRecord> recs;
    for (const auto& row : report.rows) {
      if (row.algorithm == algo) recs.push_back(row.rec);
    }
    REQUIRE(recs.size() == 4);
    const auto expected = rgbwkit::aggregate_by_gain(recs);
    const auto& actual = report.aggregates.at(algo);
    REQUIRE(actual.size() == expected.size());
    for (std::size_t i = 0; i < actual.size(); ++i) {
      REQUIRE(actual[i].group == expected[i].group);
      REQUIRE(actual[i].count == expected[i].count);
      REQUIRE(actual[i].m4 == expected[i].m4);
      REQUIRE(actual[i].psnr == expected[i].psnr);
    }
  }

  // Runtime bookkeeping: positive means, the documented protocol strings.
  const rgbwkit::AlgoRuntime& rt = report.runtimes.at("nearest");
  REQUIRE(rt.pairs == 4);
  REQUIRE(rt.measured_mean > 0.0);
  REQUIRE(rt.estimated_mean > rt.measured_mean);  // 32x32 is far below 64 MP
  REQUIRE(rt.protocol ==
          "median of 1 in-process runs after 0 warm-up, excluding file I/O");
  REQUIRE_THAT(report.environment, ContainsSubstring("worker thread"));
}

TEST_CASE("run_benchmark rejects duplicate algorithm names", "[bench]") {
  testutil::TempDir dir;
  make_dataset(dir.path() / "ds", 1, {0.0});
  const rgbwkit::DatasetManifest manifest = rgbwkit::ingest(dir.path() / "ds");
  const auto a = rgbwkit::make_remosaic("nearest");
  const auto b = rgbwkit::make_remosaic("nearest");
  REQUIRE_THROWS_WITH(rgbwkit::run_benchmark(manifest, {a.get(), b.get()}),
                      ContainsSubstring("duplicate"));
  REQUIRE_THROWS_AS(rgbwkit::run_benchmark(manifest, {}), rgbwkit::Error);
}

TEST_CASE("an algorithm whose pairs all fail is excluded, not fatal", "[bench]") {
  testutil::TempDir dir;
  make_dataset(dir.path() / "ds", 1, {0.0, 24.0});
  const rgbwkit::DatasetManifest manifest = rgbwkit::ingest(dir.path() / "ds");

  const auto nearest = rgbwkit::make_remosaic("nearest");
  const rgbwkit::PluginRemosaic broken("false", "broken", 30.0);
  rgbwkit::BenchOptions opts;
  opts.repeats = 1;
  opts.warmup = 0;
  const rgbwkit::BenchmarkReport report =
      rgbwkit::run_benchmark(manifest, {nearest.get(), &broken}, opts);

  REQUIRE(report.rows.size() == 2);  // nearest only
  REQUIRE(report.failures.size() == 2);
  for (const auto& f : report.failures) REQUIRE(f.algorithm == "broken");
  REQUIRE(report.aggregates.count("nearest") == 1);
  REQUIRE(report.aggregates.count("broken") == 0);
  REQUIRE(report.runtimes.count("broken") == 0);
  bool noticed = false;
  for (const auto& n : report.notices) {
    if (n.find("broken") != std::string::npos &&
        n.find("excluded") != std::string::npos) {
      noticed = true;
    }
  }
  REQUIRE(noticed);
}

TEST_CASE("run_predictions scores files exactly like the in-process path",
          "[bench]") {
  testutil::TempDir dir;
  make_dataset(dir.path() / "ds", 1, {0.0, 24.0});
  const rgbwkit::DatasetManifest manifest = rgbwkit::ingest(dir.path() / "ds");

  // Stage bilinear outputs in the documented predictions layout.
  const auto algo = rgbwkit::make_remosaic("bilinear");
  const auto pred_dir = dir.path() / "preds";
  for (double gain : manifest.gains) {
    const rgbwkit::RawImage in =
        rgbwkit::read_mraw(rgbwkit::rgbw_path(manifest.root, "scene001", gain));
    const auto out = rgbwkit::prediction_path(pred_dir, "scene001", gain);
    std::filesystem::create_directories(out.parent_path());
    rgbwkit::write_mraw(out, algo->run(in));
  }

  const rgbwkit::BenchmarkReport scored =
      rgbwkit::run_predictions(manifest, pred_dir, {}, "theirs");
  REQUIRE(scored.rows.size() == 2);
  REQUIRE(scored.runtimes.empty());
  REQUIRE(scored.failures.empty());
  REQUIRE(scored.algorithms == std::vector<std::string>{"theirs"});

  rgbwkit::BenchOptions opts;
  opts.repeats = 1;
  opts.warmup = 0;
  const rgbwkit::BenchmarkReport inproc =
      rgbwkit::run_benchmark(manifest, {algo.get()}, opts);
  for (std::size_t i = 0; i < scored.rows.size(); ++i) {
    REQUIRE(scored.rows[i].rec.psnr == inproc.rows[i].rec.psnr);
    REQUIRE(scored.rows[i].rec.ssim == inproc.rows[i].rec.ssim);
    REQUIRE(scored.rows[i].rec.kld == inproc.rows[i].rec.kld);
    REQUIRE(scored.rows[i].rec.m4 == inproc.rows[i].rec.m4);
  }

  // A missing prediction becomes a per-pair failure, and scoring continues.
  std::filesystem::remove(rgbwkit::prediction_path(pred_dir, "scene001", 24.0));
  const rgbwkit::BenchmarkReport partial =
      rgbwkit::run_predictions(manifest, pred_dir, {}, "theirs");
  REQUIRE(partial.rows.size() == 1);
  REQUIRE(partial.failures.size() == 1);
  REQUIRE(partial.failures[0].gain_db == 24.0);
}

TEST_CASE("report emission is deterministic and correctly ordered", "[bench]") {
  testutil::TempDir dir;
  make_dataset(dir.path() / "ds", 2, {0.0, 24.0});
  const rgbwkit::DatasetManifest manifest = rgbwkit::ingest(dir.path() / "ds");
  const auto nearest = rgbwkit::make_remosaic("nearest");
  const auto wguided = rgbwkit::make_remosaic("wguided");
  rgbwkit::BenchOptions opts;
  opts.repeats = 1;
  opts.warmup = 0;
  const rgbwkit::BenchmarkReport report =
      rgbwkit::run_benchmark(manifest, {wguided.get(), nearest.get()}, opts);

  const auto m1 = dir.path() / "m1.csv";
  const auto r1 = dir.path() / "r1.csv";
  rgbwkit::emit_report_csv(report, m1, r1);
  const auto m2 = dir.path() / "m2.csv";
  const auto r2 = dir.path() / "r2.csv";
  rgbwkit::emit_report_csv(report, m2, r2);
  REQUIRE(testutil::read_bytes(m1) == testutil::read_bytes(m2));

  std::ifstream metrics(m1);
  std::string line;
  std::getline(metrics, line);
  REQUIRE(line == "algorithm,scene_id,gain_db,psnr,ssim,lpips,lpips_source,kld,m4");
  std::vector<std::string> firsts;
  while (std::getline(metrics, line)) {
    firsts.push_back(line.substr(0, line.find(',')));
  }
  REQUIRE(firsts == std::vector<std::string>{"nearest", "nearest", "nearest", "nearest",
                                             "wguided", "wguided", "wguided", "wguided"});

  std::ifstream runtime(r1);
  std::getline(runtime, line);
  REQUIRE(line ==
          "algorithm,pairs,width,height,seconds_per_image_measured,"
          "seconds_per_image_64m_estimated,protocol");
  std::getline(runtime, line);
  REQUIRE_THAT(line, ContainsSubstring("nearest,4,32,32,"));
  REQUIRE_THAT(line, ContainsSubstring("\"median of 1 in-process runs"));

  // Rank 1 in the Markdown leaderboard is whichever algorithm holds the
  // higher overall M4 in the aggregates.
  double m4_wguided = 0, m4_nearest = 0;
  for (const auto& agg : report.aggregates.at("wguided")) {
    if (agg.group == "overall") m4_wguided = agg.m4;
  }
  for (const auto& agg : report.aggregates.at("nearest")) {
    if (agg.group == "overall") m4_nearest = agg.m4;
  }
  const std::string winner = m4_wguided > m4_nearest ? "wguided" : "nearest";

  const auto md = dir.path() / "report.md";
  rgbwkit::emit_report_markdown(report, md);
  const auto md_bytes = testutil::read_bytes(md);
  const std::string text(md_bytes.begin(), md_bytes.end());
  REQUIRE_THAT(text, ContainsSubstring("## Leaderboard (ranked by M4"));
  REQUIRE_THAT(text, ContainsSubstring("| 1 | " + winner + " |"));
  REQUIRE_THAT(text, ContainsSubstring("## Runtime"));
  REQUIRE_THAT(text, ContainsSubstring("None."));
}

TEST_CASE("parallel_for covers every index once and rethrows failures",
          "[bench]") {
  std::vector<int> hits(997, 0);
  rgbwkit::parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  REQUIRE(std::accumulate(hits.begin(), hits.end(), 0) == 997);
  REQUIRE(*std::min_element(hits.begin(), hits.end()) == 1);
  REQUIRE(*std::max_element(hits.begin(), hits.end()) == 1);

  REQUIRE_THROWS_WITH(rgbwkit::parallel_for(50,
                                            [](std::size_t i) {
                                              if (i == 17) {
                                                throw rgbwkit::Error("index 17 boom");
                                              }
                                            }),
                      ContainsSubstring("boom"));

  rgbwkit::parallel_for(0, [](std::size_t) { throw rgbwkit::Error("never runs"); });
}

TEST_CASE("thread pool width honors RGBWKIT_THREADS", "[bench]") {
  const char* saved = std::getenv("RGBWKIT_THREADS");
  const std::string saved_copy = saved ? saved : "";

  ::setenv("RGBWKIT_THREADS", "3", 1);
  REQUIRE(rgbwkit::thread_pool_width() == 3);
  ::setenv("RGBWKIT_THREADS", "0", 1);
  REQUIRE(rgbwkit::thread_pool_width() >= 1);  // invalid -> hardware default
  ::setenv("RGBWKIT_THREADS", "garbage", 1);
  REQUIRE(rgbwkit::thread_pool_width() >= 1);

  if (saved) {
    ::setenv("RGBWKIT_THREADS", saved_copy.c_str(), 1);
  } else {
    ::unsetenv("RGBWKIT_THREADS");
  }
}
