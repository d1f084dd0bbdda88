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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "rgbwkit/demosaic.hpp"
#include "rgbwkit/image.hpp"
#include "rgbwkit/raw.hpp"

namespace rgbwkit {

// Minimal rendering ISP: linear demosaic, white balance, color matrix,
// gamma encode to 8-bit RGB. Deliberately simple — its job is to make Bayer
// results viewable and comparable, not to be a camera pipeline.

struct IspConfig {
  std::array<double, 3> wb = {1.0, 1.0, 1.0};           // per-channel gains
  std::array<std::array<double, 3>, 3> ccm = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  bool srgb_gamma = true;   // piecewise sRGB encode when true
  double gamma = 2.2;       // pure power curve 1/gamma when srgb_gamma is false
};

inline void validate(const IspConfig& cfg) {
  for (double g : cfg.wb) {
    if (!(g > 0) || !std::isfinite(g)) throw Error("ISP config: wb gains must be positive");
  }
  for (const auto& row : cfg.ccm) {
    for (double v : row) {
      if (!std::isfinite(v)) throw Error("ISP config: ccm entries must be finite");
    }
  }
  if (!cfg.srgb_gamma && !(cfg.gamma > 0)) {
    throw Error("ISP config: gamma must be positive");
  }
}

inline IspConfig isp_config_from_json(const nlohmann::json& j) {
  IspConfig cfg;
  try {
    if (j.contains("wb")) {
      const auto wb = j.at("wb").get<std::vector<double>>();
      if (wb.size() != 3) throw Error("ISP config: wb must have 3 entries");
      std::copy(wb.begin(), wb.end(), cfg.wb.begin());
    }
    if (j.contains("ccm")) {
      const auto ccm = j.at("ccm").get<std::vector<std::vector<double>>>();
      if (ccm.size() != 3 || ccm[0].size() != 3 || ccm[1].size() != 3 || ccm[2].size() != 3) {
        throw Error("ISP config: ccm must be a 3x3 matrix");
      }
      for (int r = 0; r < 3; ++r) std::copy(ccm[r].begin(), ccm[r].end(), cfg.ccm[r].begin());
    }
    if (j.contains("gamma")) {
      const auto& g = j.at("gamma");
      if (g.is_string()) {
        if (g.get<std::string>() != "srgb") {
          throw Error("ISP config: gamma must be \"srgb\" or a positive number");
        }
        cfg.srgb_gamma = true;
      } else {
        cfg.srgb_gamma = false;
        cfg.gamma = g.get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed ISP config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

inline IspConfig load_isp_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read ISP config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed ISP config " + path.string() + ": " + e.what());
  }
  return isp_config_from_json(j);
}

inline double srgb_encode(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

/// Renders a Bayer image to display RGB: linear demosaic, white balance,
/// color matrix (clamped to [0, 1]), gamma encode, quantize to 8 bits.
inline DisplayImage run_isp(const RawImage& bayer, const IspConfig& cfg = {}) {
  validate(cfg);
  const RgbImage rgb = demosaic_malvar_gbrg(bayer);
  DisplayImage out(rgb.width, rgb.height);

  for (int y = 0; y < rgb.height; ++y) {
    for (int x = 0; x < rgb.width; ++x) {
      const double balanced[3] = {rgb.r.at(x, y) * cfg.wb[0], rgb.g.at(x, y) * cfg.wb[1],
                                  rgb.b.at(x, y) * cfg.wb[2]};
      for (int c = 0; c < 3; ++c) {
        double v = cfg.ccm[c][0] * balanced[0] + cfg.ccm[c][1] * balanced[1] +
                   cfg.ccm[c][2] * balanced[2];
        v = std::clamp(v, 0.0, 1.0);
        v = cfg.srgb_gamma ? srgb_encode(v) : std::pow(v, 1.0 / cfg.gamma);
        out.at(x, y, c) =
            static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
      }
    }
  }
  return out;
}

/// Writes a binary PPM (P6), the no-dependency interchange format.
inline void write_ppm(const std::filesystem::path& path, const DisplayImage& img) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw Error("short write on " + path.string());
}

}  // namespace rgbwkit
