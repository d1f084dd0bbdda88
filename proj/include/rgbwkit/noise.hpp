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

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rgbwkit/raw.hpp"

namespace rgbwkit {

/// Per-gain noise model: per-pixel Gaussian variance in DN^2 is
/// (signal - black_level) * sigma_s_sq + sigma_c_sq.
struct NoiseParams {
  double sigma_s_sq = 0.0;  // shot-noise variance slope, DN of variance per DN of signal
  double sigma_c_sq = 0.0;  // signal-independent read-noise variance, DN^2
  double gain_db = 0.0;
};

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Deterministic per-(scene, gain) stream seed, so generation results do
/// not depend on scheduling order.
inline std::uint64_t derive_seed(std::uint64_t seed, const std::string& scene_id,
                                 double gain_db) {
  std::uint64_t state = seed;
  state ^= splitmix64(state) + fnv1a64(scene_id);
  state ^= splitmix64(state) + std::bit_cast<std::uint64_t>(gain_db);
  return splitmix64(state);
}

/// Gaussian stream over mt19937_64 via Box-Muller; both halves are fully
/// specified, so sequences are identical across platforms.
class NormalRng {
 public:
  explicit NormalRng(std::uint64_t seed) : gen_(seed) {}

  double uniform01() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace rng

/// Adds per-pixel independent Gaussian noise with the photon-transfer
/// variance model, rounds, and clamps to [0, white_level]. Bit-identical
/// for identical (image, params, seed). Zero params return the input as is.
inline RawImage synthesize_noise(const RawImage& img, const NoiseParams& params,
                                 std::uint64_t seed) {
  if (params.sigma_s_sq < 0.0 || params.sigma_c_sq < 0.0)
    throw Error("negative noise variance");
  if (params.sigma_s_sq == 0.0 && params.sigma_c_sq == 0.0) return img;

  RawImage out = img;
  rng::NormalRng rng(seed);
  const double black = img.black_level;
  const double white = img.white_level;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double signal = std::max(0.0, static_cast<double>(img.data[i]) - black);
    const double variance = signal * params.sigma_s_sq + params.sigma_c_sq;
    const double noisy = img.data[i] + rng.normal() * std::sqrt(variance);
    const long long rounded = std::llround(noisy);
    out.data[i] = static_cast<std::uint16_t>(
        std::clamp<long long>(rounded, 0, static_cast<long long>(white)));
  }
  return out;
}

/// Unbiased sample variance of a patch.
inline double sample_variance(const RawImage& patch) {
  const std::size_t n = patch.data.size();
  if (n < 2) throw Error("patch too small for a variance estimate");
  double mean = 0.0;
  for (std::uint16_t v : patch.data) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::uint16_t v : patch.data) {
    const double d = v - mean;
    ss += d * d;
  }
  return ss / static_cast<double>(n - 1);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

/// Ordinary least-squares line fit y = intercept + slope * x.
inline LineFit fit_line(const std::vector<std::pair<double, double>>& points) {
  const double n = static_cast<double>(points.size());
  if (points.size() < 2) throw Error("line fit needs at least 2 points");
  double sx = 0, sy = 0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0.0) throw Error("line fit degenerate: all x identical");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy > 0.0) {
    double ss_res = 0.0;
    for (const auto& [x, y] : points) {
      const double e = y - (fit.intercept + fit.slope * x);
      ss_res += e * e;
    }
    fit.r_squared = 1.0 - ss_res / syy;
  }
  return fit;
}

/// Photon-transfer points (mean - black_level, sample variance) for a set
/// of flat patches.
inline std::vector<std::pair<double, double>> photon_transfer_points(
    const std::vector<std::pair<double, RawImage>>& flat_patches) {
  std::vector<std::pair<double, double>> points;
  points.reserve(flat_patches.size());
  for (const auto& [mean, patch] : flat_patches) {
    if (patch.width < 64 || patch.height < 64)
      throw Error("calibration patch must be at least 64x64, got " +
                  std::to_string(patch.width) + "x" + std::to_string(patch.height));
    points.emplace_back(mean - patch.black_level, sample_variance(patch));
  }
  return points;
}

/// Photon-transfer calibration: least-squares line of per-patch sample
/// variance vs (mean - black_level). Slope and intercept are clamped at 0.
inline NoiseParams calibrate_noise(
    const std::vector<std::pair<double, RawImage>>& flat_patches) {
  const auto points = photon_transfer_points(flat_patches);
  int distinct = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool seen = false;
    for (std::size_t j = 0; j < i; ++j)
      if (points[j].first == points[i].first) seen = true;
    if (!seen) ++distinct;
  }
  if (distinct < 2)
    throw Error("calibration needs at least 2 distinct mean levels, got " +
                std::to_string(distinct) + " (slope unidentifiable)");
  const LineFit fit = fit_line(points);
  NoiseParams params;
  params.sigma_s_sq = std::max(0.0, fit.slope);
  params.sigma_c_sq = std::max(0.0, fit.intercept);
  return params;
}

/// Default per-gain noise table. 0 dB is noise-free; other gains follow
/// sigma_s_sq = k * g and sigma_c_sq = (g * sigma_r)^2 with g = 10^(dB/20).
/// The absolute constants are placeholders, overridable in config.
inline NoiseParams default_noise_params(double gain_db, double k = 0.25,
                                        double sigma_r = 1.5) {
  NoiseParams p;
  p.gain_db = gain_db;
  if (gain_db == 0.0) return p;
  const double g = std::pow(10.0, gain_db / 20.0);
  p.sigma_s_sq = k * g;
  p.sigma_c_sq = (g * sigma_r) * (g * sigma_r);
  return p;
}

inline std::map<double, NoiseParams> default_noise_table(
    const std::vector<double>& gains_db) {
  std::map<double, NoiseParams> table;
  for (double g : gains_db) table[g] = default_noise_params(g);
  return table;
}

}  // namespace rgbwkit
