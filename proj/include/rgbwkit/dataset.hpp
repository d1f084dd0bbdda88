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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgbwkit/noise.hpp"
#include "rgbwkit/raw.hpp"

namespace rgbwkit {

/// Formats a gain for filenames and JSON keys: integral gains print with
/// no decimal point ("24"), fractional ones minimally ("1.5").
inline std::string format_gain(double gain_db) {
  if (gain_db == std::floor(gain_db) && std::abs(gain_db) < 1e9) {
    return std::to_string(static_cast<long long>(gain_db));
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", gain_db);
  return buf;
}

// Dataset layout on disk:
//   <root>/<scene_id>/rgbw_<gain>db.rgbw   noisy RGBW input per gain
//   <root>/<scene_id>/gt.bayer             shared clean ground truth
//   <root>/manifest.json                   scenes, gains, noise table, seed

inline std::filesystem::path scene_dir(const std::filesystem::path& root,
                                       const std::string& scene_id) {
  return root / scene_id;
}

inline std::filesystem::path rgbw_path(const std::filesystem::path& root,
                                       const std::string& scene_id, double gain_db) {
  return scene_dir(root, scene_id) / ("rgbw_" + format_gain(gain_db) + "db.rgbw");
}

inline std::filesystem::path gt_path(const std::filesystem::path& root,
                                     const std::string& scene_id) {
  return scene_dir(root, scene_id) / "gt.bayer";
}

inline std::filesystem::path manifest_path(const std::filesystem::path& root) {
  return root / "manifest.json";
}

struct SceneEntry {
  std::string id;
  std::string split = "train";  // train, val, or test
  // Set by ingest: false when gt.bayer is absent (a participant view of a
  // test split ships without ground truth).
  bool gt_available = true;
};

/// Validated view of a dataset on disk.
struct DatasetManifest {
  std::filesystem::path root;
  std::vector<SceneEntry> scenes;  // sorted by id
  std::vector<double> gains;
  std::map<double, NoiseParams> noise;
  std::uint64_t seed = 0;
  std::vector<std::string> failures;  // corrupt files, with diagnostics
};

inline nlohmann::json manifest_to_json(const DatasetManifest& m) {
  nlohmann::json j;
  j["scenes"] = nlohmann::json::array();
  for (const auto& s : m.scenes) j["scenes"].push_back({{"id", s.id}, {"split", s.split}});
  j["gains"] = m.gains;
  j["noise"] = nlohmann::json::object();
  for (const auto& [gain, params] : m.noise)
    j["noise"][format_gain(gain)] = {{"sigma_s_sq", params.sigma_s_sq},
                                     {"sigma_c_sq", params.sigma_c_sq}};
  j["seed"] = m.seed;
  return j;
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j,
                                          const std::filesystem::path& root) {
  DatasetManifest m;
  m.root = root;
  try {
    for (const auto& s : j.at("scenes")) {
      SceneEntry entry;
      if (s.is_string()) {
        entry.id = s.get<std::string>();
      } else {
        entry.id = s.at("id").get<std::string>();
        if (s.contains("split")) entry.split = s.at("split").get<std::string>();
      }
      m.scenes.push_back(std::move(entry));
    }
    m.gains = j.at("gains").get<std::vector<double>>();
    for (const auto& [key, value] : j.at("noise").items()) {
      NoiseParams p;
      p.gain_db = std::stod(key);
      p.sigma_s_sq = value.at("sigma_s_sq").get<double>();
      p.sigma_c_sq = value.at("sigma_c_sq").get<double>();
      m.noise[p.gain_db] = p;
    }
    m.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

inline void write_manifest(const DatasetManifest& m) {
  std::filesystem::create_directories(m.root);
  std::ofstream out(manifest_path(m.root), std::ios::trunc);
  if (!out) throw Error("cannot write " + manifest_path(m.root).string());
  out << manifest_to_json(m).dump(2) << "\n";
}

}  // namespace rgbwkit
