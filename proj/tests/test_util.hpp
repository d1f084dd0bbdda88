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

// Helpers shared by the unit tests and the acceptance binary.

#ifndef RGBWKIT_TESTS_TEST_UTIL_HPP_
#define RGBWKIT_TESTS_TEST_UTIL_HPP_

#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "rgbwkit/demosaic.hpp"
#include "rgbwkit/image.hpp"
#include "rgbwkit/raw.hpp"

namespace testutil {

/// Self-deleting scratch directory for one test.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    const unsigned n = counter.fetch_add(1);
    path_ = std::filesystem::temp_directory_path() /
            ("rgbwkit_test_" + std::to_string(::getpid()) + "_" + std::to_string(n));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Uniform random samples over the full DN range, deterministic per seed.
inline rgbwkit::RawImage random_raw(const rgbwkit::CfaPattern& pattern, int width,
                                    int height, std::uint64_t seed, int bit_depth = 10,
                                    std::uint16_t black = 0, std::uint16_t white = 1023) {
  rgbwkit::RawImage img =
      rgbwkit::make_raw(width, height, pattern, bit_depth, black, white);
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> dist(0, white);
  for (auto& v : img.data) v = static_cast<std::uint16_t>(dist(gen));
  return img;
}

/// Flat field: every sample equals `value`.
inline rgbwkit::RawImage constant_raw(const rgbwkit::CfaPattern& pattern, int width,
                                      int height, std::uint16_t value, int bit_depth = 10,
                                      std::uint16_t black = 0,
                                      std::uint16_t white = 1023) {
  rgbwkit::RawImage img =
      rgbwkit::make_raw(width, height, pattern, bit_depth, black, white);
  for (auto& v : img.data) v = value;
  return img;
}

/// Writes an executable shell script (plugin test doubles).
inline std::filesystem::path write_script(const std::filesystem::path& path,
                                          const std::string& body) {
  {
    std::ofstream f(path, std::ios::trunc);
    f << "#!/bin/sh\n" << body;
  }
  std::filesystem::permissions(path, std::filesystem::perms::owner_all |
                                         std::filesystem::perms::group_read |
                                         std::filesystem::perms::others_read);
  return path;
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f),
                                   std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------
// An independent linear-demosaic oracle. It evaluates the classic 5x5
// interpolation kernels written out literally as matrices, selecting the
// variant from the Bayer geometry at each pixel, so it shares no tables with
// the library implementation.
// ---------------------------------------------------------------------------

using Mat5 = double[5][5];

// Green at a red or blue site.
inline constexpr Mat5 kOracleGreen = {{0, 0, -1, 0, 0},
                                      {0, 0, 2, 0, 0},
                                      {-1, 2, 4, 2, -1},
                                      {0, 0, 2, 0, 0},
                                      {0, 0, -1, 0, 0}};
// Red/blue at a green site whose same-row neighbors measure the target.
inline constexpr Mat5 kOracleRowMate = {{0, 0, 0.5, 0, 0},
                                        {0, -1, 0, -1, 0},
                                        {-1, 4, 5, 4, -1},
                                        {0, -1, 0, -1, 0},
                                        {0, 0, 0.5, 0, 0}};
// Red/blue at a green site whose same-column neighbors measure the target.
inline constexpr Mat5 kOracleColumnMate = {{0, 0, -1, 0, 0},
                                           {0, -1, 4, -1, 0},
                                           {0.5, 0, 5, 0, 0.5},
                                           {0, -1, 4, -1, 0},
                                           {0, 0, -1, 0, 0}};
// Red at a blue site or blue at a red site (diagonal neighbors measure it).
inline constexpr Mat5 kOracleOpposite = {{0, 0, -1.5, 0, 0},
                                         {0, 2, 0, 2, 0},
                                         {-1.5, 0, 6, 0, -1.5},
                                         {0, 2, 0, 2, 0},
                                         {0, 0, -1.5, 0, 0}};

/// Interior-only reference demosaic of one channel at one pixel, in the
/// normalized [0, 1] domain. Requires 2 <= x < w-2 and 2 <= y < h-2.
inline double oracle_demosaic_at(const rgbwkit::RawImage& bayer, int x, int y,
                                 rgbwkit::Channel target) {
  const rgbwkit::CfaPattern& p = bayer.pattern;
  const rgbwkit::Channel site = rgbwkit::pattern_at(p, x, y);
  const double span = double(bayer.white_level) - double(bayer.black_level);
  const auto norm = [&](int sx, int sy) {
    return (double(bayer.at(sx, sy)) - double(bayer.black_level)) / span;
  };
  if (site == target) return norm(x, y);

  const Mat5* m = nullptr;
  if (target == rgbwkit::Channel::G) {
    m = &kOracleGreen;
  } else if (site == rgbwkit::Channel::G) {
    m = rgbwkit::pattern_at(p, x + 1, y) == target ? &kOracleRowMate
                                                   : &kOracleColumnMate;
  } else {
    m = &kOracleOpposite;
  }
  double acc = 0;
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) {
      acc += (*m)[dy + 2][dx + 2] * norm(x + dx, y + dy);
    }
  }
  return acc / 8.0;
}

}  // namespace testutil

#endif  // RGBWKIT_TESTS_TEST_UTIL_HPP_
