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

#include <catch2/catch_amalgamated.hpp>

#include "rgbwkit/raw.hpp"
#include "test_util.hpp"

using rgbwkit::Channel;
using rgbwkit::CfaPattern;
using rgbwkit::Error;
using rgbwkit::RawImage;

namespace {

Channel ch(char c) {
  switch (c) {
    case 'R': return Channel::R;
    case 'G': return Channel::G;
    case 'B': return Channel::B;
    default: return Channel::W;
  }
}

void require_tile(const CfaPattern& p, const char (&rows)[4][5]) {
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      INFO("site (" << x << ", " << y << ")");
      REQUIRE(p.at(x, y) == ch(rows[y][x]));
    }
  }
}

}  // namespace

TEST_CASE("GBRG tile geometry", "[raw]") {
  const CfaPattern& p = rgbwkit::bayer_gbrg();
  REQUIRE(p.period_x == 2);
  REQUIRE(p.period_y == 2);
  REQUIRE(p.container_id == 0);
  REQUIRE_FALSE(p.has_white());
  REQUIRE(p.at(0, 0) == Channel::G);
  REQUIRE(p.at(1, 0) == Channel::B);
  REQUIRE(p.at(0, 1) == Channel::R);
  REQUIRE(p.at(1, 1) == Channel::G);
}

TEST_CASE("RGBW tile geometry, color on the main diagonal", "[raw]") {
  const CfaPattern& p = rgbwkit::rgbw_diag();
  REQUIRE(p.period_x == 4);
  REQUIRE(p.period_y == 4);
  REQUIRE(p.container_id == 1);
  REQUIRE(p.has_white());
  const char rows[4][5] = {"GWBW", "WGWB", "RWGW", "WRWG"};
  require_tile(p, rows);

  // Derived invariants: W fills the odd-parity checkerboard and every 2x2
  // block carries the Bayer color of its block coordinate on the diagonal.
  const CfaPattern& bayer = rgbwkit::bayer_gbrg();
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      if ((x + y) % 2 == 1) {
        REQUIRE(p.at(x, y) == Channel::W);
      } else {
        REQUIRE(p.at(x, y) == bayer.at((x / 2) % 2, (y / 2) % 2));
      }
    }
  }
}

TEST_CASE("RGBW tile geometry, color on the anti-diagonal", "[raw]") {
  const CfaPattern& p = rgbwkit::rgbw_diag_anti();
  REQUIRE(p.period_x == 4);
  REQUIRE(p.period_y == 4);
  REQUIRE(p.container_id == 2);
  const char rows[4][5] = {"WGWB", "GWBW", "WRWG", "RWGW"};
  require_tile(p, rows);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      REQUIRE((p.at(x, y) == Channel::W) == ((x + y) % 2 == 0));
    }
  }
}

TEST_CASE("pattern lookup is periodic and survives negative coordinates", "[raw]") {
  const CfaPattern& p = rgbwkit::rgbw_diag();
  for (int y = -9; y <= 9; ++y) {
    for (int x = -9; x <= 9; ++x) {
      REQUIRE(rgbwkit::pattern_at(p, x, y) ==
              rgbwkit::pattern_at(p, x + 8, y + 12));
    }
  }
  REQUIRE(rgbwkit::pattern_at(p, -1, 0) == rgbwkit::pattern_at(p, 3, 0));
  REQUIRE(rgbwkit::pattern_at(p, 0, -1) == rgbwkit::pattern_at(p, 0, 3));
}

TEST_CASE("container ids round-trip to patterns", "[raw]") {
  REQUIRE(rgbwkit::pattern_from_container_id(0) == rgbwkit::bayer_gbrg());
  REQUIRE(rgbwkit::pattern_from_container_id(1) == rgbwkit::rgbw_diag());
  REQUIRE(rgbwkit::pattern_from_container_id(2) == rgbwkit::rgbw_diag_anti());
  REQUIRE_THROWS_AS(rgbwkit::pattern_from_container_id(3), Error);
  REQUIRE_THROWS_AS(rgbwkit::pattern_from_container_id(255), Error);
}

TEST_CASE("make_raw validates geometry against the pattern period", "[raw]") {
  REQUIRE_NOTHROW(rgbwkit::make_raw(8, 4, rgbwkit::rgbw_diag()));
  REQUIRE_THROWS_AS(rgbwkit::make_raw(6, 4, rgbwkit::rgbw_diag()), Error);
  REQUIRE_THROWS_AS(rgbwkit::make_raw(4, 6, rgbwkit::rgbw_diag()), Error);
  REQUIRE_THROWS_AS(rgbwkit::make_raw(0, 4, rgbwkit::bayer_gbrg()), Error);
  REQUIRE_THROWS_AS(rgbwkit::make_raw(-4, 4, rgbwkit::bayer_gbrg()), Error);
  REQUIRE_NOTHROW(rgbwkit::make_raw(6, 2, rgbwkit::bayer_gbrg()));
}

TEST_CASE("validate rejects inconsistent metadata", "[raw]") {
  RawImage img = testutil::random_raw(rgbwkit::bayer_gbrg(), 8, 8, 1);
  REQUIRE_NOTHROW(rgbwkit::validate(img));

  SECTION("levels out of order") {
    img.black_level = 1000;
    img.white_level = 100;
    REQUIRE_THROWS_AS(rgbwkit::validate(img), Error);
  }
  SECTION("white level beyond bit depth") {
    img.white_level = 2000;  // 10-bit range tops out at 1023
    REQUIRE_THROWS_AS(rgbwkit::validate(img), Error);
  }
  SECTION("sample above white level") {
    img.data[3] = 1024;
    REQUIRE_THROWS_AS(rgbwkit::validate(img), Error);
  }
  SECTION("short buffer") {
    img.data.pop_back();
    REQUIRE_THROWS_AS(rgbwkit::validate(img), Error);
  }
}

TEST_CASE("channel_at matches the pattern at every site", "[raw]") {
  const RawImage img = testutil::random_raw(rgbwkit::rgbw_diag(), 12, 8, 2);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      REQUIRE(img.channel_at(x, y) == rgbwkit::pattern_at(img.pattern, x, y));
    }
  }
}

TEST_CASE("pixel shuffle and unshuffle are inverse bijections", "[raw]") {
  for (const CfaPattern* p : {&rgbwkit::bayer_gbrg(), &rgbwkit::rgbw_diag()}) {
    const RawImage img = testutil::random_raw(*p, 16, 12, 3);
    const rgbwkit::PlaneStack stack = rgbwkit::pixel_shuffle(img);
    REQUIRE(stack.planes.size() ==
            static_cast<std::size_t>(p->period_x) * p->period_y);
    REQUIRE(stack.plane_width == img.width / p->period_x);
    REQUIRE(stack.plane_height == img.height / p->period_y);

    // Every plane holds exactly the samples of one phase, in raster order.
    for (int j = 0; j < p->period_y; ++j) {
      for (int i = 0; i < p->period_x; ++i) {
        const auto& plane = stack.planes[static_cast<std::size_t>(j) * p->period_x + i];
        REQUIRE(stack.labels[static_cast<std::size_t>(j) * p->period_x + i].channel ==
                p->at(i, j));
        for (int y = 0; y < stack.plane_height; ++y) {
          for (int x = 0; x < stack.plane_width; ++x) {
            REQUIRE(plane[static_cast<std::size_t>(y) * stack.plane_width + x] ==
                    img.at(x * p->period_x + i, y * p->period_y + j));
          }
        }
      }
    }

    const RawImage back = rgbwkit::pixel_unshuffle(stack, *p);
    REQUIRE(back.data == img.data);
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
  }
}

TEST_CASE("mirror_index reflects without repeating the edge sample", "[raw]") {
  REQUIRE(rgbwkit::mirror_index(0, 5) == 0);
  REQUIRE(rgbwkit::mirror_index(-1, 5) == 1);
  REQUIRE(rgbwkit::mirror_index(-2, 5) == 2);
  REQUIRE(rgbwkit::mirror_index(4, 5) == 4);
  REQUIRE(rgbwkit::mirror_index(5, 5) == 3);
  REQUIRE(rgbwkit::mirror_index(6, 5) == 2);
  REQUIRE(rgbwkit::mirror_index(0, 1) == 0);
  REQUIRE(rgbwkit::mirror_index(3, 1) == 0);
}
