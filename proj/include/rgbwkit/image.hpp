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

#include <cstdint>
#include <vector>

#include "rgbwkit/raw.hpp"

namespace rgbwkit {

/// Single real-valued plane, row-major.
struct FloatPlane {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  FloatPlane() = default;
  FloatPlane(int w, int h) : width(w), height(h),
        data(static_cast<std::size_t>(w) * h, 0.0) {}

  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// Planar linear-domain RGB image, values nominally in [0, 1] after
/// normalization by (white_level - black_level).
struct RgbImage {
  int width = 0;
  int height = 0;
  FloatPlane r, g, b;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), r(w, h), g(w, h), b(w, h) {}

  FloatPlane& plane(int c) { return c == 0 ? r : (c == 1 ? g : b); }
  const FloatPlane& plane(int c) const { return c == 0 ? r : (c == 1 ? g : b); }
};

/// Interleaved 8-bit display-referred RGB.
struct DisplayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // r,g,b per pixel, row-major

  DisplayImage() = default;
  DisplayImage(int w, int h) : width(w), height(h),
        data(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::uint8_t& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
};

/// Reflects an out-of-range index back into [0, n) without repeating the
/// border sample (mirror: -1 -> 1, n -> n-2).
inline int mirror_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace rgbwkit
