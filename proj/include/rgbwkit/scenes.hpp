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
#include <random>
#include <string>
#include <vector>

#include "rgbwkit/noise.hpp"
#include "rgbwkit/raw.hpp"

namespace rgbwkit {

// Procedural RGBW captures. Each scene composites a smooth color ramp, a
// zone-plate/starburst resolution wedge, text-like rectangles and strokes,
// and a value-noise texture, so every scene carries both flat regions and
// frequencies near the sampling limit. All parameters are drawn from a
// seeded generator before the pixel loop; evaluation is then pure, so a
// (scene_id, seed, size) triple always yields the same capture.

namespace detail {

/// Bilinearly interpolated lattice noise in [0, 1].
class ValueNoise {
 public:
  ValueNoise(int width, int height, int cell, std::mt19937_64& gen)
      : cell_(cell), nx_(width / cell + 2), ny_(height / cell + 2), lattice_(nx_ * ny_) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (auto& v : lattice_) v = uni(gen);
  }

  double at(double x, double y) const {
    const double fx = x / cell_;
    const double fy = y / cell_;
    const int ix = static_cast<int>(fx);
    const int iy = static_cast<int>(fy);
    const double tx = smooth(fx - ix);
    const double ty = smooth(fy - iy);
    const double a = lattice_[iy * nx_ + ix];
    const double b = lattice_[iy * nx_ + ix + 1];
    const double c = lattice_[(iy + 1) * nx_ + ix];
    const double d = lattice_[(iy + 1) * nx_ + ix + 1];
    return (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
  }

 private:
  static double smooth(double t) { return t * t * (3 - 2 * t); }

  int cell_;
  int nx_, ny_;
  std::vector<double> lattice_;
};

struct SceneRect {
  int x0, y0, x1, y1;
  double r, g, b;
};

}  // namespace detail

struct SceneRecipe {
  // Color ramp: channel c = ramp_base[c] + ramp_slope[c] * (dx*x/W + dy*y/H).
  double ramp_base[3];
  double ramp_slope[3];
  double ramp_dx, ramp_dy;
  // Resolution wedge: zone plate centred at (cx, cy) plus a starburst.
  double wedge_cx, wedge_cy;
  double wedge_k;       // zone-plate chirp rate
  int burst_spokes;     // starburst spoke count
  double wedge_weight;  // modulation depth
  // Text-like rectangles and strokes.
  std::vector<detail::SceneRect> rects;
  // Fine texture.
  double texture_amp;
};

/// Draws all random parameters for one scene.
inline SceneRecipe make_scene_recipe(int width, int height, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  SceneRecipe r;
  for (int c = 0; c < 3; ++c) {
    r.ramp_base[c] = 0.25 + 0.5 * uni(gen);
    r.ramp_slope[c] = -0.4 + 0.8 * uni(gen);
  }
  const double angle = uni(gen) * 2 * 3.14159265358979323846;
  r.ramp_dx = std::cos(angle);
  r.ramp_dy = std::sin(angle);

  r.wedge_cx = width * (0.3 + 0.4 * uni(gen));
  r.wedge_cy = height * (0.3 + 0.4 * uni(gen));
  const double rmax = std::hypot(std::max(r.wedge_cx, width - r.wedge_cx),
                                 std::max(r.wedge_cy, height - r.wedge_cy));
  // Chirp so the instantaneous frequency reaches ~0.4 cycles/pixel at the
  // far corner: d/dr (k r^2) / (2 pi) = k r / pi.
  r.wedge_k = 0.4 * 3.14159265358979323846 / rmax;
  r.burst_spokes = 24 + static_cast<int>(uni(gen) * 24);
  r.wedge_weight = 0.25 + 0.15 * uni(gen);

  const int n_rects = 16 + static_cast<int>(uni(gen) * 8);
  for (int i = 0; i < n_rects; ++i) {
    detail::SceneRect rect;
    const int x = static_cast<int>(uni(gen) * width);
    const int y = static_cast<int>(uni(gen) * height);
    // Alternate chunky blocks with thin strokes (text-like edges).
    int w, h;
    if (i % 2 == 0) {
      w = 8 + static_cast<int>(uni(gen) * width / 6);
      h = 8 + static_cast<int>(uni(gen) * height / 6);
    } else if (i % 4 == 1) {
      w = 1 + static_cast<int>(uni(gen) * 3);
      h = 8 + static_cast<int>(uni(gen) * height / 4);
    } else {
      w = 8 + static_cast<int>(uni(gen) * width / 4);
      h = 1 + static_cast<int>(uni(gen) * 3);
    }
    rect.x0 = std::clamp(x, 0, width - 1);
    rect.y0 = std::clamp(y, 0, height - 1);
    rect.x1 = std::clamp(x + w, 0, width);
    rect.y1 = std::clamp(y + h, 0, height);
    rect.r = uni(gen);
    rect.g = uni(gen);
    rect.b = uni(gen);
    r.rects.push_back(rect);
  }

  r.texture_amp = 0.08 + 0.08 * uni(gen);
  return r;
}

/// Evaluates the linear scene RGB at one pixel, each channel in [0.02, 0.98].
inline void scene_rgb(const SceneRecipe& recipe, const detail::ValueNoise& tex,
                      int x, int y, int width, int height, double rgb[3]) {
  const double t = recipe.ramp_dx * (static_cast<double>(x) / width) +
                   recipe.ramp_dy * (static_cast<double>(y) / height);
  for (int c = 0; c < 3; ++c) rgb[c] = recipe.ramp_base[c] + recipe.ramp_slope[c] * t;

  for (const auto& rect : recipe.rects) {
    if (x >= rect.x0 && x < rect.x1 && y >= rect.y0 && y < rect.y1) {
      rgb[0] = rect.r;
      rgb[1] = rect.g;
      rgb[2] = rect.b;
    }
  }

  const double dx = x - recipe.wedge_cx;
  const double dy = y - recipe.wedge_cy;
  const double r2 = dx * dx + dy * dy;
  const double zone = std::sin(recipe.wedge_k * r2 * 0.5);
  const double burst = std::sin(recipe.burst_spokes * std::atan2(dy, dx));
  const double mod = 1.0 + recipe.wedge_weight * 0.5 * (zone + burst);
  const double grain = recipe.texture_amp * (tex.at(x, y) - 0.5);
  for (int c = 0; c < 3; ++c) {
    rgb[c] = std::clamp(rgb[c] * mod + grain, 0.02, 0.98);
  }
}

/// Renders a deterministic procedural capture mosaicked through `pattern`.
/// W sites record the panchromatic mean (R+G+B)/3.
inline RawImage procedural_capture(const std::string& scene_id, int width, int height,
                                   std::uint64_t seed, const CfaPattern& pattern,
                                   int bit_depth = 10, std::uint16_t black_level = 0,
                                   std::uint16_t white_level = 1023) {
  RawImage img = make_raw(width, height, pattern, bit_depth, black_level, white_level);
  std::mt19937_64 gen(rng::derive_seed(seed, scene_id + "#capture", 0.0));
  const SceneRecipe recipe = make_scene_recipe(width, height, gen);
  const detail::ValueNoise tex(width, height, 12, gen);

  const double span = white_level - black_level;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double rgb[3];
      scene_rgb(recipe, tex, x, y, width, height, rgb);
      double v;
      switch (pattern_at(pattern, x, y)) {
        case Channel::R: v = rgb[0]; break;
        case Channel::G: v = rgb[1]; break;
        case Channel::B: v = rgb[2]; break;
        default: v = (rgb[0] + rgb[1] + rgb[2]) / 3.0; break;
      }
      const long dn = std::lround(black_level + v * span);
      img.data[static_cast<std::size_t>(y) * width + x] =
          static_cast<std::uint16_t>(std::clamp<long>(dn, 0, white_level));
    }
  }
  return img;
}

/// Canonical scene naming for generated datasets: scene001, scene002, ...
inline std::string scene_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "scene%03d", index);
  return buf;
}

}  // namespace rgbwkit
