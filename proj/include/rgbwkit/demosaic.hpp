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

#include "rgbwkit/image.hpp"
#include "rgbwkit/raw.hpp"

namespace rgbwkit {
namespace demosaic_detail {

// Malvar-He-Cutler 5x5 linear kernels, coefficients in units of 1/8.
// Stored dense; zeros are skipped at tap-list build time.
using Kernel5 = std::array<std::array<double, 5>, 5>;

// Green at a red or blue site.
inline constexpr Kernel5 kCross = {{
    {0, 0, -1, 0, 0},
    {0, 0, 2, 0, 0},
    {-1, 2, 4, 2, -1},
    {0, 0, 2, 0, 0},
    {0, 0, -1, 0, 0},
}};

// Chroma at a green site whose same-chroma neighbors sit in the same row.
inline constexpr Kernel5 kRow = {{
    {0, 0, 0.5, 0, 0},
    {0, -1, 0, -1, 0},
    {-1, 4, 5, 4, -1},
    {0, -1, 0, -1, 0},
    {0, 0, 0.5, 0, 0},
}};

// Chroma at a green site whose same-chroma neighbors sit in the same column.
inline constexpr Kernel5 kColumn = {{
    {0, 0, -1, 0, 0},
    {0, -1, 4, -1, 0},
    {0.5, 0, 5, 0, 0.5},
    {0, -1, 4, -1, 0},
    {0, 0, -1, 0, 0},
}};

// Chroma at the opposite chroma site (diagonal neighbors).
inline constexpr Kernel5 kDiagonal = {{
    {0, 0, -1.5, 0, 0},
    {0, 2, 0, 2, 0},
    {-1.5, 0, 6, 0, -1.5},
    {0, 2, 0, 2, 0},
    {0, 0, -1.5, 0, 0},
}};

enum KernelId { kIdentity = 0, kIdCross, kIdRow, kIdColumn, kIdDiagonal };

// Kernel per GBRG phase ((y&1)*2 + (x&1)) and output channel (R, G, B).
// Phase 0 is G with B row-neighbors and R column-neighbors; phase 3 is G
// with R row-neighbors and B column-neighbors.
inline constexpr int kGbrgKernel[4][3] = {
    {kIdColumn, kIdentity, kIdRow},     // (0,0) G
    {kIdDiagonal, kIdCross, kIdentity}, // (1,0) B
    {kIdentity, kIdCross, kIdDiagonal}, // (0,1) R
    {kIdRow, kIdentity, kIdColumn},     // (1,1) G
};

struct Tap {
  int dx, dy;
  double w;
};

struct TapList {
  std::array<Tap, 16> taps{};
  int count = 0;
};

inline TapList build_taps(const Kernel5& k) {
  TapList list;
  for (int dy = -2; dy <= 2; ++dy)
    for (int dx = -2; dx <= 2; ++dx) {
      const double w = k[static_cast<std::size_t>(dy + 2)][static_cast<std::size_t>(dx + 2)];
      if (w != 0.0) list.taps[static_cast<std::size_t>(list.count++)] = {dx, dy, w / 8.0};
    }
  return list;
}

inline const TapList& taps_for(int kernel_id) {
  static const std::array<TapList, 5> lists = {
      TapList{}, build_taps(kCross), build_taps(kRow), build_taps(kColumn),
      build_taps(kDiagonal)};
  return lists[static_cast<std::size_t>(kernel_id)];
}

}  // namespace demosaic_detail

/// Malvar-He-Cutler linear demosaic of a GBRG Bayer image. Output is
/// linear RGB normalized by (white_level - black_level); the measured
/// channel at each site passes through unchanged. Interpolated samples are
/// the exact 5x5 convolutions and may overshoot [0, 1] slightly because the
/// kernels carry negative taps; consumers clamp when they quantize. Borders
/// are handled by mirror padding.
inline RgbImage demosaic_malvar_gbrg(const RawImage& bayer) {
  if (!(bayer.pattern == bayer_gbrg()))
    throw Error("demosaic expects a GBRG Bayer image, got pattern '" +
                bayer.pattern.name + "'");
  if (bayer.width < 2 || bayer.height < 2)
    throw Error("image too small to demosaic");

  const int w = bayer.width;
  const int h = bayer.height;
  const double scale = 1.0 / (bayer.white_level - bayer.black_level);

  FloatPlane norm(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      norm.at(x, y) = (static_cast<double>(bayer.at(x, y)) - bayer.black_level) * scale;

  using namespace demosaic_detail;
  RgbImage out(w, h);
  for (int y = 0; y < h; ++y) {
    const bool y_interior = y >= 2 && y < h - 2;
    for (int x = 0; x < w; ++x) {
      const int phase = (y & 1) * 2 + (x & 1);
      const bool interior = y_interior && x >= 2 && x < w - 2;
      for (int c = 0; c < 3; ++c) {
        const int kid = kGbrgKernel[phase][c];
        double v;
        if (kid == kIdentity) {
          v = norm.at(x, y);
        } else {
          const TapList& taps = taps_for(kid);
          v = 0.0;
          if (interior) {
            for (int t = 0; t < taps.count; ++t) {
              const Tap& tap = taps.taps[static_cast<std::size_t>(t)];
              v += tap.w * norm.at(x + tap.dx, y + tap.dy);
            }
          } else {
            for (int t = 0; t < taps.count; ++t) {
              const Tap& tap = taps.taps[static_cast<std::size_t>(t)];
              v += tap.w * norm.at(mirror_index(x + tap.dx, w), mirror_index(y + tap.dy, h));
            }
          }
        }
        out.plane(c).at(x, y) = v;
      }
    }
  }
  return out;
}

}  // namespace rgbwkit
