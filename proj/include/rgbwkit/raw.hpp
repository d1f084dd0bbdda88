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

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rgbwkit {

/// Error type for all data/contract violations in the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-pixel color channel of a CFA. Bayer patterns never contain W.
enum class Channel : std::uint8_t { R = 0, G = 1, B = 2, W = 3 };

inline char channel_name(Channel c) {
  switch (c) {
    case Channel::R: return 'R';
    case Channel::G: return 'G';
    case Channel::B: return 'B';
    case Channel::W: return 'W';
  }
  return '?';
}

/// Periodic tile of channel labels. Periods of 2 (Bayer) and 4 (RGBW)
/// are supported; the tile is stored row-major.
struct CfaPattern {
  int period_x = 0;
  int period_y = 0;
  std::array<Channel, 16> tile{};  // period_y*period_x entries used
  std::string name;
  std::uint8_t container_id = 0;  // id byte used by the MRAW1 container

  Channel at(int x, int y) const {
    const int xm = ((x % period_x) + period_x) % period_x;
    const int ym = ((y % period_y) + period_y) % period_y;
    return tile[static_cast<std::size_t>(ym) * period_x + xm];
  }

  bool has_white() const {
    for (int i = 0; i < period_x * period_y; ++i)
      if (tile[static_cast<std::size_t>(i)] == Channel::W) return true;
    return false;
  }

  bool operator==(const CfaPattern& o) const {
    if (period_x != o.period_x || period_y != o.period_y) return false;
    for (int i = 0; i < period_x * period_y; ++i)
      if (tile[static_cast<std::size_t>(i)] != o.tile[static_cast<std::size_t>(i)]) return false;
    return true;
  }
};

namespace detail {

inline CfaPattern make_bayer_gbrg() {
  CfaPattern p;
  p.period_x = 2;
  p.period_y = 2;
  p.tile = {Channel::G, Channel::B,
            Channel::R, Channel::G};
  p.name = "BAYER_GBRG";
  p.container_id = 0;
  return p;
}

// 4x4 RGBW built from four 2x2 blocks arranged GBRG at block level.
// `color_on_main_diagonal` picks which diagonal of each block carries the
// block color; the other diagonal carries W.
inline CfaPattern make_rgbw_diag(bool color_on_main_diagonal) {
  static constexpr Channel kBlockColor[2][2] = {
      {Channel::G, Channel::B},
      {Channel::R, Channel::G}};
  CfaPattern p;
  p.period_x = 4;
  p.period_y = 4;
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      Channel color = kBlockColor[y / 2][x / 2];
      bool on_main = (x % 2) == (y % 2);
      bool is_color = color_on_main_diagonal ? on_main : !on_main;
      p.tile[static_cast<std::size_t>(y) * 4 + x] = is_color ? color : Channel::W;
    }
  }
  p.name = color_on_main_diagonal ? "RGBW_DIAG" : "RGBW_DIAG_ANTI";
  p.container_id = color_on_main_diagonal ? 1 : 2;
  return p;
}

}  // namespace detail

/// Builtin 2x2 GBRG Bayer layout.
inline const CfaPattern& bayer_gbrg() {
  static const CfaPattern p = detail::make_bayer_gbrg();
  return p;
}

/// Builtin 4x4 RGBW layout, block colors GBRG at block level, color on the
/// main diagonal of each 2x2 block and W on the anti-diagonal.
inline const CfaPattern& rgbw_diag() {
  static const CfaPattern p = detail::make_rgbw_diag(true);
  return p;
}

/// RGBW_DIAG with the opposite diagonal convention (W on the main diagonal).
inline const CfaPattern& rgbw_diag_anti() {
  static const CfaPattern p = detail::make_rgbw_diag(false);
  return p;
}

inline const CfaPattern& pattern_from_container_id(std::uint8_t id) {
  switch (id) {
    case 0: return bayer_gbrg();
    case 1: return rgbw_diag();
    case 2: return rgbw_diag_anti();
    default:
      throw Error("unknown CFA pattern id " + std::to_string(int(id)));
  }
}

/// Channel measured at pixel (x, y) under the pattern's periodic tiling.
inline Channel pattern_at(const CfaPattern& pattern, int x, int y) {
  return pattern.at(x, y);
}

/// Single-plane mosaiced sensor image (RGBW or Bayer). Samples are stored
/// in unsigned 16-bit containers regardless of bit depth.
struct RawImage {
  int width = 0;
  int height = 0;
  int bit_depth = 10;
  std::uint16_t black_level = 0;
  std::uint16_t white_level = 1023;
  CfaPattern pattern;
  std::vector<std::uint16_t> data;  // row-major, width*height samples

  std::uint16_t at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::uint16_t& at(int x, int y) {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t sample_count() const {
    return static_cast<std::size_t>(width) * height;
  }
  Channel channel_at(int x, int y) const { return pattern.at(x, y); }
};

/// Checks the RawImage invariants; throws Error naming the violated one.
inline void validate(const RawImage& img) {
  if (img.width <= 0 || img.height <= 0)
    throw Error("invalid image size " + std::to_string(img.width) + "x" +
                std::to_string(img.height));
  if (img.pattern.period_x <= 0 || img.pattern.period_y <= 0)
    throw Error("image has no CFA pattern");
  if (img.width % img.pattern.period_x != 0 || img.height % img.pattern.period_y != 0)
    throw Error("image size " + std::to_string(img.width) + "x" +
                std::to_string(img.height) + " not divisible by pattern period " +
                std::to_string(img.pattern.period_x) + "x" +
                std::to_string(img.pattern.period_y));
  if (img.bit_depth < 1 || img.bit_depth > 16)
    throw Error("unsupported bit depth " + std::to_string(img.bit_depth));
  const std::uint32_t max_code = (1u << img.bit_depth) - 1u;
  if (img.white_level > max_code)
    throw Error("white level " + std::to_string(img.white_level) +
                " exceeds bit depth maximum " + std::to_string(max_code));
  if (img.black_level >= img.white_level)
    throw Error("black level " + std::to_string(img.black_level) +
                " not below white level " + std::to_string(img.white_level));
  if (img.data.size() != img.sample_count())
    throw Error("sample buffer holds " + std::to_string(img.data.size()) +
                " samples, expected " + std::to_string(img.sample_count()));
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    if (img.data[i] > img.white_level)
      throw Error("sample " + std::to_string(img.data[i]) + " at index " +
                  std::to_string(i) + " exceeds white level " +
                  std::to_string(img.white_level));
  }
}

/// Zero-filled image with the given geometry and default 10-bit levels.
inline RawImage make_raw(int width, int height, const CfaPattern& pattern,
                         int bit_depth = 10, std::uint16_t black_level = 0,
                         std::uint16_t white_level = 1023) {
  if (width <= 0 || height <= 0) {
    throw Error("image dimensions must be positive, got " + std::to_string(width) +
                "x" + std::to_string(height));
  }
  RawImage img;
  img.width = width;
  img.height = height;
  img.bit_depth = bit_depth;
  img.black_level = black_level;
  img.white_level = white_level;
  img.pattern = pattern;
  img.data.assign(static_cast<std::size_t>(width) * height, 0);
  validate(img);
  return img;
}

/// Stack of sub-sampled planes produced by pixel_shuffle. Plane (i, j)
/// holds the samples at positions (y*k + i, x*k + j) of the source.
struct PlaneStack {
  struct Label {
    Channel channel;
    int offset_x = 0;
    int offset_y = 0;
  };

  int plane_width = 0;
  int plane_height = 0;
  int period_x = 0;
  int period_y = 0;
  int bit_depth = 10;
  std::uint16_t black_level = 0;
  std::uint16_t white_level = 1023;
  std::vector<Label> labels;                      // one per plane
  std::vector<std::vector<std::uint16_t>> planes;  // row-major per plane

  std::size_t plane_samples() const {
    return static_cast<std::size_t>(plane_width) * plane_height;
  }
};

/// Rearranges a k x k-period mosaic into k*k quarter-size planes, one per
/// pattern offset. Lossless; inverse of pixel_unshuffle.
inline PlaneStack pixel_shuffle(const RawImage& img) {
  const int kx = img.pattern.period_x;
  const int ky = img.pattern.period_y;
  if (kx <= 0 || ky <= 0) throw Error("image has no CFA pattern");
  if (img.width % kx != 0 || img.height % ky != 0)
    throw Error("image size " + std::to_string(img.width) + "x" +
                std::to_string(img.height) + " not divisible by pattern period " +
                std::to_string(kx) + "x" + std::to_string(ky));

  PlaneStack stack;
  stack.plane_width = img.width / kx;
  stack.plane_height = img.height / ky;
  stack.period_x = kx;
  stack.period_y = ky;
  stack.bit_depth = img.bit_depth;
  stack.black_level = img.black_level;
  stack.white_level = img.white_level;
  stack.labels.reserve(static_cast<std::size_t>(kx) * ky);
  stack.planes.reserve(static_cast<std::size_t>(kx) * ky);

  for (int i = 0; i < ky; ++i) {
    for (int j = 0; j < kx; ++j) {
      stack.labels.push_back({img.pattern.at(j, i), j, i});
      std::vector<std::uint16_t> plane(stack.plane_samples());
      for (int y = 0; y < stack.plane_height; ++y)
        for (int x = 0; x < stack.plane_width; ++x)
          plane[static_cast<std::size_t>(y) * stack.plane_width + x] =
              img.at(x * kx + j, y * ky + i);
      stack.planes.push_back(std::move(plane));
    }
  }
  return stack;
}

/// Exact inverse of pixel_shuffle; the output carries the given pattern.
inline RawImage pixel_unshuffle(const PlaneStack& stack, const CfaPattern& pattern) {
  const int kx = stack.period_x;
  const int ky = stack.period_y;
  const std::size_t expected = static_cast<std::size_t>(kx) * ky;
  if (pattern.period_x != kx || pattern.period_y != ky)
    throw Error("pattern period " + std::to_string(pattern.period_x) + "x" +
                std::to_string(pattern.period_y) + " does not match stack period " +
                std::to_string(kx) + "x" + std::to_string(ky));
  if (stack.planes.size() != expected)
    throw Error("plane count " + std::to_string(stack.planes.size()) +
                " does not match pattern period product " + std::to_string(expected));
  for (const auto& plane : stack.planes)
    if (plane.size() != stack.plane_samples())
      throw Error("plane size " + std::to_string(plane.size()) +
                  " does not match stack plane geometry " +
                  std::to_string(stack.plane_width) + "x" +
                  std::to_string(stack.plane_height));

  RawImage img;
  img.width = stack.plane_width * kx;
  img.height = stack.plane_height * ky;
  img.bit_depth = stack.bit_depth;
  img.black_level = stack.black_level;
  img.white_level = stack.white_level;
  img.pattern = pattern;
  img.data.resize(img.sample_count());
  for (int i = 0; i < ky; ++i) {
    for (int j = 0; j < kx; ++j) {
      const auto& plane = stack.planes[static_cast<std::size_t>(i) * kx + j];
      for (int y = 0; y < stack.plane_height; ++y)
        for (int x = 0; x < stack.plane_width; ++x)
          img.at(x * kx + j, y * ky + i) =
              plane[static_cast<std::size_t>(y) * stack.plane_width + x];
    }
  }
  return img;
}

}  // namespace rgbwkit
