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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "rgbwkit/image.hpp"
#include "rgbwkit/mraw.hpp"
#include "rgbwkit/raw.hpp"

namespace rgbwkit {

// Remosaic algorithms: RGBW mosaic in, GBRG Bayer of identical size out.
// Three builtin baselines of increasing quality are provided — nearest
// (sample reuse), bilinear (distance-weighted channel interpolation) and
// wguided (white-plane guided color-difference interpolation).

namespace detail {

inline void require_rgbw_input(const RawImage& img, const char* who) {
  validate(img);
  if (!img.pattern.has_white() || img.pattern.period_x != 4) {
    throw Error(std::string(who) + " requires a 4x4 RGBW mosaic, got " + img.pattern.name);
  }
}

}  // namespace detail

/// Light spatial denoise applied before remosaicing: the mosaic is unfolded
/// into its per-site planes, each plane is smoothed with a 3x3 binomial
/// kernel (mirrored borders), and the mosaic is reassembled. Smoothing only
/// ever mixes samples of the same CFA site, so edges between channels are
/// untouched.
inline RawImage denoise_prefilter(const RawImage& img) {
  validate(img);
  PlaneStack stack = pixel_shuffle(img);
  const int w = stack.plane_width;
  const int h = stack.plane_height;
  std::vector<std::uint16_t> tmp(static_cast<std::size_t>(w) * h);
  for (auto& plane : stack.planes) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0;
        static const int kW[3] = {1, 2, 1};
        for (int dy = -1; dy <= 1; ++dy) {
          const int sy = mirror_index(y + dy, h);
          for (int dx = -1; dx <= 1; ++dx) {
            const int sx = mirror_index(x + dx, w);
            acc += kW[dy + 1] * kW[dx + 1] *
                   static_cast<double>(plane[static_cast<std::size_t>(sy) * w + sx]);
          }
        }
        tmp[static_cast<std::size_t>(y) * w + x] =
            static_cast<std::uint16_t>(std::llround(acc / 16.0));
      }
    }
    plane = tmp;
  }
  return pixel_unshuffle(stack, img.pattern);
}

class RemosaicAlgo {
 public:
  virtual ~RemosaicAlgo() = default;
  virtual std::string name() const = 0;
  virtual RawImage run(const RawImage& input) const = 0;

  /// Runs the algorithm and reports the time spent on the conversion itself
  /// in `*seconds`. For in-process algorithms that is the wall-clock time of
  /// run(); external plugins override this to report the subprocess time,
  /// excluding the harness's own file shuffling.
  virtual RawImage run_timed(const RawImage& input, double* seconds) const {
    const auto start = std::chrono::steady_clock::now();
    RawImage out = run(input);
    *seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  }

  /// True for algorithms that run outside this process (plugins). External
  /// algorithms are handed the real input file path, so sibling files (the
  /// rest of the scene directory) are visible to them, and their runtime is
  /// subprocess wall-clock rather than in-process time.
  virtual bool is_external() const { return false; }

  /// File-to-file conversion: reads `in_path`, converts, writes `out_path`,
  /// reports the conversion time (excluding this harness's file I/O) and
  /// returns the result. Plugins override this to run directly on the given
  /// paths.
  virtual RawImage run_file(const std::filesystem::path& in_path,
                            const std::filesystem::path& out_path, double* seconds) const {
    const RawImage input = read_mraw(in_path);
    RawImage out = run_timed(input, seconds);
    write_mraw(out_path, out);
    return out;
  }
};

/// Converts one file and returns the conversion runtime in seconds.
inline double run_remosaic(const RemosaicAlgo& algo, const std::filesystem::path& in_path,
                           const std::filesystem::path& out_path) {
  double seconds = 0;
  algo.run_file(in_path, out_path, &seconds);
  return seconds;
}

/// Copies, for every output site, the nearest measured sample of the target
/// channel. Ties break deterministically by (distance^2, dy, dx) in scan
/// order. The search radius of 4 always suffices: any in-bounds 4x4 window
/// covers a full period of the mosaic.
class NearestRemosaic final : public RemosaicAlgo {
 public:
  std::string name() const override { return "nearest"; }

  RawImage run(const RawImage& input) const override {
    detail::require_rgbw_input(input, "nearest");
    const int w = input.width;
    const int h = input.height;
    RawImage out = make_raw(w, h, bayer_gbrg(), input.bit_depth, input.black_level,
                            input.white_level);

    // Offsets depend only on the pixel's position modulo 4 away from the
    // borders; precompute them per residue.
    Offset table[4][4];
    for (int ry = 0; ry < 4; ++ry) {
      for (int rx = 0; rx < 4; ++rx) {
        table[ry][rx] = find_nearest(input.pattern, rx, ry, 8 + rx, 8 + ry, w, h, true);
      }
    }

    for (int y = 0; y < h; ++y) {
      const bool y_interior = y >= 4 && y < h - 4;
      for (int x = 0; x < w; ++x) {
        Offset o;
        if (y_interior && x >= 4 && x < w - 4) {
          o = table[y % 4][x % 4];
        } else {
          o = find_nearest(input.pattern, x, y, x, y, w, h, false);
        }
        out.data[static_cast<std::size_t>(y) * w + x] = input.at(x + o.dx, y + o.dy);
      }
    }
    return out;
  }

 private:
  struct Offset {
    int dx, dy;
  };

  /// Finds the lexicographically first (d^2, dy, dx) in-bounds offset whose
  /// source measures the channel GBRG wants at (x, y). `probe_x/probe_y`
  /// give the coordinates used for pattern lookups (a deep-interior alias of
  /// the same residue when filling the interior table).
  static Offset find_nearest(const CfaPattern& pattern, int x, int y, int probe_x,
                             int probe_y, int w, int h, bool unbounded) {
    const Channel want = pattern_at(bayer_gbrg(), probe_x, probe_y);
    Offset best{0, 0};
    int best_d2 = -1;
    for (int dy = -4; dy <= 4; ++dy) {
      if (!unbounded && (y + dy < 0 || y + dy >= h)) continue;
      for (int dx = -4; dx <= 4; ++dx) {
        if (!unbounded && (x + dx < 0 || x + dx >= w)) continue;
        if (pattern_at(pattern, probe_x + dx, probe_y + dy) != want) continue;
        const int d2 = dx * dx + dy * dy;
        if (best_d2 < 0 || d2 < best_d2) {
          best_d2 = d2;
          best = {dx, dy};
        }
      }
    }
    if (best_d2 < 0) throw Error("nearest: no source sample within radius 4");
    return best;
  }
};

/// Interpolates each output channel from the measured sites of that channel
/// in a 5x5 window, weighted by inverse squared distance. Co-sited samples
/// pass through unchanged. Borders are mirrored.
class BilinearRemosaic final : public RemosaicAlgo {
 public:
  std::string name() const override { return "bilinear"; }

  RawImage run(const RawImage& input) const override {
    detail::require_rgbw_input(input, "bilinear");
    const int w = input.width;
    const int h = input.height;
    RawImage out = make_raw(w, h, bayer_gbrg(), input.bit_depth, input.black_level,
                            input.white_level);

    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const Channel want = pattern_at(bayer_gbrg(), x, y);
        const std::size_t idx = static_cast<std::size_t>(y) * w + x;
        if (pattern_at(input.pattern, x, y) == want) {
          out.data[idx] = input.data[idx];
          continue;
        }
        double num = 0, den = 0;
        for (int dy = -2; dy <= 2; ++dy) {
          for (int dx = -2; dx <= 2; ++dx) {
            if (pattern_at(input.pattern, x + dx, y + dy) != want) continue;
            const double wgt = 1.0 / (dx * dx + dy * dy);
            const int sx = mirror_index(x + dx, w);
            const int sy = mirror_index(y + dy, h);
            num += wgt * input.at(sx, sy);
            den += wgt;
          }
        }
        // Every 5x5 window of the mosaic holds at least one site of each
        // channel, so den is always positive.
        const long dn = std::lround(num / den);
        out.data[idx] = static_cast<std::uint16_t>(
            std::clamp<long>(dn, 0, input.white_level));
      }
    }
    return out;
  }
};

/// White-guided color-difference remosaic. The W sites form a checkerboard;
/// the full white plane is completed by axial averaging, color differences
/// C - W at measured color sites are spread by a separable normalized tent
/// convolution (9x9 support), and each Bayer site is reconstructed as
/// W + (C - W). Measured co-sited samples pass through unchanged.
class WguidedRemosaic final : public RemosaicAlgo {
 public:
  std::string name() const override { return "wguided"; }

  RawImage run(const RawImage& input) const override {
    detail::require_rgbw_input(input, "wguided");
    const int w = input.width;
    const int h = input.height;
    const double black = input.black_level;

    // 1. Complete the white plane (values kept as DN above black).
    FloatPlane white(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (pattern_at(input.pattern, x, y) == Channel::W) {
          white.at(x, y) = input.at(x, y) - black;
        }
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (pattern_at(input.pattern, x, y) == Channel::W) continue;
        const double sum = white.at(mirror_index(x - 1, w), y) +
                           white.at(mirror_index(x + 1, w), y) +
                           white.at(x, mirror_index(y - 1, h)) +
                           white.at(x, mirror_index(y + 1, h));
        white.at(x, y) = sum / 4.0;
      }
    }

    // 2. Interpolate the color-difference field of each channel.
    std::array<FloatPlane, 3> diff = {FloatPlane(w, h), FloatPlane(w, h), FloatPlane(w, h)};
    for (int c = 0; c < 3; ++c) {
      diff[c] = interpolate_difference(input, white, static_cast<Channel>(c));
    }

    // 3. Sample through the Bayer pattern.
    RawImage out = make_raw(w, h, bayer_gbrg(), input.bit_depth, input.black_level,
                            input.white_level);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const Channel want = pattern_at(bayer_gbrg(), x, y);
        const std::size_t idx = static_cast<std::size_t>(y) * w + x;
        if (pattern_at(input.pattern, x, y) == want) {
          out.data[idx] = input.data[idx];
          continue;
        }
        const double v = black + white.at(x, y) + diff[static_cast<int>(want)].at(x, y);
        out.data[idx] = static_cast<std::uint16_t>(
            std::clamp<long>(std::lround(v), 0, input.white_level));
      }
    }
    return out;
  }

 private:
  /// Normalized convolution of the sparse difference samples of channel `c`
  /// with a separable tent of half-width 5 (9x9 support). Windows are
  /// clipped at the borders; any in-bounds 5x5 window already contains a
  /// site of every channel, so the weight sum never vanishes.
  static FloatPlane interpolate_difference(const RawImage& input, const FloatPlane& white,
                                           Channel c) {
    const int w = input.width;
    const int h = input.height;
    FloatPlane num(w, h), den(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (pattern_at(input.pattern, x, y) != c) continue;
        num.at(x, y) = (input.at(x, y) - input.black_level) - white.at(x, y);
        den.at(x, y) = 1.0;
      }
    }
    horizontal_tent(num, w, h);
    horizontal_tent(den, w, h);
    vertical_tent(num, w, h);
    vertical_tent(den, w, h);

    FloatPlane result(w, h);
    for (std::size_t i = 0; i < result.data.size(); ++i) {
      result.data[i] = num.data[i] / den.data[i];
    }
    return result;
  }

  static void horizontal_tent(FloatPlane& p, int w, int h) {
    std::vector<double> row(w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0;
        const int lo = std::max(-4, -x);
        const int hi = std::min(4, w - 1 - x);
        for (int d = lo; d <= hi; ++d) acc += (5 - std::abs(d)) * p.at(x + d, y);
        row[x] = acc;
      }
      for (int x = 0; x < w; ++x) p.at(x, y) = row[x];
    }
  }

  static void vertical_tent(FloatPlane& p, int w, int h) {
    std::vector<double> col(h);
    for (int x = 0; x < w; ++x) {
      for (int y = 0; y < h; ++y) {
        double acc = 0;
        const int lo = std::max(-4, -y);
        const int hi = std::min(4, h - 1 - y);
        for (int d = lo; d <= hi; ++d) acc += (5 - std::abs(d)) * p.at(x, y + d);
        col[y] = acc;
      }
      for (int y = 0; y < h; ++y) p.at(x, y) = col[y];
    }
  }
};

/// Wraps an algorithm with the denoise prefilter.
class DenoisedRemosaic final : public RemosaicAlgo {
 public:
  explicit DenoisedRemosaic(std::unique_ptr<RemosaicAlgo> inner)
      : inner_(std::move(inner)) {}
  std::string name() const override { return inner_->name() + "+denoise"; }
  RawImage run(const RawImage& input) const override {
    return inner_->run(denoise_prefilter(input));
  }

 private:
  std::unique_ptr<RemosaicAlgo> inner_;
};

inline const std::vector<std::string>& builtin_remosaic_names() {
  static const std::vector<std::string> names = {"nearest", "bilinear", "wguided"};
  return names;
}

/// Factory for builtin algorithms; throws on unknown names.
inline std::unique_ptr<RemosaicAlgo> make_remosaic(const std::string& name,
                                                   bool denoise = false) {
  std::unique_ptr<RemosaicAlgo> algo;
  if (name == "nearest") {
    algo = std::make_unique<NearestRemosaic>();
  } else if (name == "bilinear") {
    algo = std::make_unique<BilinearRemosaic>();
  } else if (name == "wguided") {
    algo = std::make_unique<WguidedRemosaic>();
  } else {
    throw Error("unknown remosaic algorithm: " + name +
                " (builtins: nearest, bilinear, wguided)");
  }
  if (denoise) algo = std::make_unique<DenoisedRemosaic>(std::move(algo));
  return algo;
}

}  // namespace rgbwkit
