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
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rgbwkit/dataset.hpp"
#include "rgbwkit/demosaic.hpp"
#include "rgbwkit/image.hpp"
#include "rgbwkit/mraw.hpp"
#include "rgbwkit/noise.hpp"
#include "rgbwkit/raw.hpp"
#include "rgbwkit/scenes.hpp"

namespace rgbwkit {

// Aligned-pair synthesis. A full-resolution RGBW capture is diagonally
// binned to half resolution, demosaicked, then upsampled and re-mosaicked
// so the noisy RGBW input and the clean Bayer ground truth describe the
// same underlying image at the same resolution.

/// Half-resolution panchromatic plane produced by diagonal binning.
struct GrayImage {
  int width = 0;
  int height = 0;
  int bit_depth = 10;
  std::uint16_t black_level = 0;
  std::uint16_t white_level = 1023;
  std::vector<std::uint16_t> data;

  std::uint16_t at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
};

struct DiagonalBinned {
  RawImage dbinb;   // half-resolution GBRG Bayer (the two color samples)
  GrayImage dbinc;  // half-resolution W plane (the two white samples)
};

/// Averages each 2x2 block of an RGBW mosaic along its diagonals: the two
/// same-color samples form a GBRG Bayer image, the two W samples a W plane.
/// Means round half away from zero to integer DN.
inline DiagonalBinned diagonal_bin(const RawImage& rgbw) {
  validate(rgbw);
  if (!rgbw.pattern.has_white() || rgbw.pattern.period_x != 4) {
    throw Error("diagonal_bin requires a 4x4 RGBW mosaic, got " + rgbw.pattern.name);
  }
  const int half_w = rgbw.width / 2;
  const int half_h = rgbw.height / 2;

  DiagonalBinned out;
  out.dbinb = make_raw(half_w, half_h, bayer_gbrg(), rgbw.bit_depth, rgbw.black_level,
                       rgbw.white_level);
  out.dbinc = {half_w, half_h, rgbw.bit_depth, rgbw.black_level, rgbw.white_level,
               std::vector<std::uint16_t>(static_cast<std::size_t>(half_w) * half_h)};

  for (int by = 0; by < half_h; ++by) {
    for (int bx = 0; bx < half_w; ++bx) {
      const int x = 2 * bx;
      const int y = 2 * by;
      std::uint32_t color_sum = 0, white_sum = 0;
      int n_color = 0, n_white = 0;
      Channel block_color = Channel::W;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const Channel c = pattern_at(rgbw.pattern, x + dx, y + dy);
          const std::uint16_t v = rgbw.at(x + dx, y + dy);
          if (c == Channel::W) {
            white_sum += v;
            ++n_white;
          } else {
            color_sum += v;
            ++n_color;
            block_color = c;
          }
        }
      }
      if (n_white != 2 || n_color != 2) {
        throw Error("diagonal_bin: 2x2 block lacks a W pair and a color pair");
      }
      if (block_color != pattern_at(bayer_gbrg(), bx, by)) {
        throw Error("diagonal_bin: binned color lattice is not GBRG");
      }
      const std::size_t idx = static_cast<std::size_t>(by) * half_w + bx;
      out.dbinb.data[idx] = static_cast<std::uint16_t>((color_sum + 1) / 2);
      out.dbinc.data[idx] = static_cast<std::uint16_t>((white_sum + 1) / 2);
    }
  }
  return out;
}

/// Normalizes a DN plane to [0, 1] against its black/white levels.
inline FloatPlane normalize_plane(const GrayImage& g) {
  FloatPlane p(g.width, g.height);
  const double span = g.white_level - g.black_level;
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    p.data[i] = std::clamp((g.data[i] - static_cast<double>(g.black_level)) / span, 0.0, 1.0);
  }
  return p;
}

enum class UpsampleMode { kNearest, kBilinear };

namespace detail {

/// Samples a half-resolution plane at full-resolution pixel (x, y).
inline double upsample_at(const FloatPlane& half, int x, int y, UpsampleMode mode) {
  if (mode == UpsampleMode::kNearest) {
    return half.at(x / 2, y / 2);
  }
  // Standard 2x bilinear with half-pixel centers and edge clamping.
  const double sx = (x + 0.5) / 2.0 - 0.5;
  const double sy = (y + 0.5) / 2.0 - 0.5;
  const int x0 = static_cast<int>(std::floor(sx));
  const int y0 = static_cast<int>(std::floor(sy));
  const double tx = sx - x0;
  const double ty = sy - y0;
  auto tap = [&](int px, int py) {
    return half.at(std::clamp(px, 0, half.width - 1), std::clamp(py, 0, half.height - 1));
  };
  return (tap(x0, y0) * (1 - tx) + tap(x0 + 1, y0) * tx) * (1 - ty) +
         (tap(x0, y0 + 1) * (1 - tx) + tap(x0 + 1, y0 + 1) * tx) * ty;
}

}  // namespace detail

struct MosaicPair {
  RawImage rgbw;   // clean full-resolution RGBW
  RawImage bayer;  // clean full-resolution GBRG, pixel-aligned with rgbw
};

/// Upsamples half-resolution RGB+W planes 2x and samples them through both
/// the RGBW pattern and the GBRG pattern, producing an aligned clean pair.
inline MosaicPair upsample_and_mosaic(const RgbImage& rgb_half, const FloatPlane& w_half,
                                      const CfaPattern& rgbw_pattern, int bit_depth,
                                      std::uint16_t black_level, std::uint16_t white_level,
                                      UpsampleMode mode = UpsampleMode::kNearest) {
  if (rgb_half.width != w_half.width || rgb_half.height != w_half.height) {
    throw Error("upsample_and_mosaic: RGB and W planes disagree in size");
  }
  const int width = rgb_half.width * 2;
  const int height = rgb_half.height * 2;
  MosaicPair out;
  out.rgbw = make_raw(width, height, rgbw_pattern, bit_depth, black_level, white_level);
  out.bayer = make_raw(width, height, bayer_gbrg(), bit_depth, black_level, white_level);

  const double span = white_level - black_level;
  auto plane_of = [&](Channel c) -> const FloatPlane& {
    switch (c) {
      case Channel::R: return rgb_half.r;
      case Channel::G: return rgb_half.g;
      case Channel::B: return rgb_half.b;
      default: return w_half;
    }
  };
  auto to_dn = [&](double v01) {
    const long dn = std::lround(black_level + v01 * span);
    return static_cast<std::uint16_t>(std::clamp<long>(dn, 0, white_level));
  };

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * width + x;
      const Channel cw = pattern_at(rgbw_pattern, x, y);
      out.rgbw.data[idx] = to_dn(detail::upsample_at(plane_of(cw), x, y, mode));
      const Channel cb = pattern_at(bayer_gbrg(), x, y);
      out.bayer.data[idx] = to_dn(detail::upsample_at(plane_of(cb), x, y, mode));
    }
  }
  return out;
}

/// One benchmark sample: a noisy RGBW input aligned with its clean Bayer
/// ground truth at identical resolution.
struct ScenePair {
  std::string scene_id;
  double gain_db = 0.0;
  RawImage input_rgbw;
  RawImage gt_bayer;
};

struct GeneratedScene {
  std::string scene_id;
  RawImage clean_rgbw;
  RawImage gt_bayer;
  std::vector<ScenePair> pairs;  // one per gain, sharing gt_bayer
};

/// Runs the full synthesis pipeline for one capture: diagonal binning,
/// half-resolution demosaic, 2x upsample, re-mosaic to aligned RGBW/Bayer,
/// then per-gain noise synthesis on the RGBW input only. Gains absent from
/// `noise_table` fall back to the default gain law.
inline GeneratedScene generate_scene_pair(const RawImage& capture,
                                          const std::vector<double>& gains,
                                          const std::map<double, NoiseParams>& noise_table,
                                          std::uint64_t seed, const std::string& scene_id,
                                          UpsampleMode mode = UpsampleMode::kNearest) {
  const DiagonalBinned binned = diagonal_bin(capture);
  const RgbImage rgb_half = demosaic_malvar_gbrg(binned.dbinb);
  const FloatPlane w_half = normalize_plane(binned.dbinc);
  MosaicPair clean = upsample_and_mosaic(rgb_half, w_half, capture.pattern,
                                         capture.bit_depth, capture.black_level,
                                         capture.white_level, mode);

  GeneratedScene scene;
  scene.scene_id = scene_id;
  scene.gt_bayer = std::move(clean.bayer);
  scene.clean_rgbw = std::move(clean.rgbw);
  for (double gain : gains) {
    auto it = noise_table.find(gain);
    const NoiseParams params =
        it != noise_table.end() ? it->second : default_noise_params(gain);
    ScenePair pair;
    pair.scene_id = scene_id;
    pair.gain_db = gain;
    pair.input_rgbw =
        synthesize_noise(scene.clean_rgbw, params, rng::derive_seed(seed, scene_id, gain));
    pair.gt_bayer = scene.gt_bayer;
    scene.pairs.push_back(std::move(pair));
  }
  return scene;
}

struct DatagenOptions {
  int n_scenes = 5;
  int width = 256;
  int height = 256;
  std::vector<double> gains = {0.0, 24.0, 42.0};
  std::uint64_t seed = 0;
  UpsampleMode upsample = UpsampleMode::kNearest;
  bool anti_diagonal = false;  // place colors on the 2x2 anti-diagonal instead
  std::string split = "val";
  int bit_depth = 10;
  std::uint16_t black_level = 0;
  std::uint16_t white_level = 1023;
};

/// Generates a complete dataset under `root`: per-scene noisy inputs and
/// ground truth, plus manifest.json describing scenes, gains, noise and seed.
inline DatasetManifest generate_dataset(const std::filesystem::path& root,
                                        const DatagenOptions& opts) {
  if (opts.n_scenes < 1) throw Error("datagen: need at least one scene");
  if (opts.width % 4 != 0 || opts.height % 4 != 0) {
    throw Error("datagen: width and height must be multiples of 4");
  }
  const CfaPattern& pattern = opts.anti_diagonal ? rgbw_diag_anti() : rgbw_diag();

  DatasetManifest manifest;
  manifest.root = root;
  manifest.gains = opts.gains;
  manifest.noise = default_noise_table(opts.gains);
  manifest.seed = opts.seed;

  for (int i = 1; i <= opts.n_scenes; ++i) {
    const std::string id = scene_name(i);
    const RawImage capture =
        procedural_capture(id, opts.width, opts.height, opts.seed, pattern, opts.bit_depth,
                           opts.black_level, opts.white_level);
    GeneratedScene scene = generate_scene_pair(capture, opts.gains, manifest.noise,
                                               opts.seed, id, opts.upsample);
    std::filesystem::create_directories(scene_dir(root, id));
    write_mraw(gt_path(root, id), scene.gt_bayer);
    for (const auto& pair : scene.pairs) {
      write_mraw(rgbw_path(root, id, pair.gain_db), pair.input_rgbw);
    }
    manifest.scenes.push_back({id, opts.split});
  }
  write_manifest(manifest);
  return manifest;
}

}  // namespace rgbwkit
