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

#include <string>

#include <catch2/catch_amalgamated.hpp>

#include "rgbwkit/plugin.hpp"
#include "test_util.hpp"

using Catch::Matchers::ContainsSubstring;
using rgbwkit::Error;
using rgbwkit::RawImage;

TEST_CASE("shell_quote survives spaces and embedded quotes", "[plugin]") {
  const auto result = rgbwkit::run_process(
      "printf '%s' " + rgbwkit::detail::shell_quote("a b'c\"d"), 10.0);
  REQUIRE(result.exit_code == 0);
  REQUIRE(result.output == "a b'c\"d");
}

TEST_CASE("run_process reports exit codes, output, and truncation", "[plugin]") {
  SECTION("success with captured stdout and stderr") {
    const auto r = rgbwkit::run_process("echo out; echo err 1>&2", 10.0);
    REQUIRE(r.exit_code == 0);
    REQUIRE_FALSE(r.timed_out);
    REQUIRE_THAT(r.output, ContainsSubstring("out"));
    REQUIRE_THAT(r.output, ContainsSubstring("err"));
  }
  SECTION("nonzero exit code") {
    const auto r = rgbwkit::run_process("exit 3", 10.0);
    REQUIRE(r.exit_code == 3);
  }
  SECTION("output capped at 2000 bytes") {
    const auto r = rgbwkit::run_process("head -c 5000 /dev/zero | tr '\\0' x", 10.0);
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output.size() == 2000);
  }
  SECTION("timeout kills the process group") {
    const auto r = rgbwkit::run_process("sleep 30", 0.3);
    REQUIRE(r.timed_out);
    REQUIRE(r.wall_seconds < 5.0);
  }
}

TEST_CASE("a plugin wrapping a builtin completes the file contract", "[plugin]") {
  testutil::TempDir dir;
  // The CLI binary itself is a convenient contract-conforming plugin.
  const auto script = testutil::write_script(
      dir.path() / "plugin.sh",
      std::string("exec \"") + RGBWKIT_CLI_PATH +
          "\" remosaic --in \"$1\" --out \"$2\" --algo bilinear\n");

  const RawImage input = testutil::random_raw(rgbwkit::rgbw_diag(), 16, 16, 40);
  rgbwkit::write_mraw(dir.path() / "in.rgbw", input);

  const rgbwkit::PluginRemosaic plugin(script.string(), "wrapped-bilinear", 60.0);
  REQUIRE(plugin.name() == "wrapped-bilinear");
  REQUIRE(plugin.is_external());

  double seconds = 0;
  const RawImage out =
      plugin.run_file(dir.path() / "in.rgbw", dir.path() / "out.bayer", &seconds);
  REQUIRE(seconds > 0.0);
  REQUIRE(out.data == rgbwkit::BilinearRemosaic().run(input).data);
  // And the in-memory entry point stages through a temp dir transparently.
  REQUIRE(plugin.run(input).data == out.data);
}

TEST_CASE("plugins may read sibling files of the real input path", "[plugin]") {
  testutil::TempDir dir;
  const RawImage input = testutil::random_raw(rgbwkit::rgbw_diag(), 16, 16, 41);
  const RawImage gt = testutil::random_raw(rgbwkit::bayer_gbrg(), 16, 16, 42);
  rgbwkit::write_mraw(dir.path() / "in.rgbw", input);
  rgbwkit::write_mraw(dir.path() / "gt.bayer", gt);

  const auto script = testutil::write_script(
      dir.path() / "identity.sh", "cp \"$(dirname \"$1\")/gt.bayer\" \"$2\"\n");
  const rgbwkit::PluginRemosaic plugin(script.string(), "identity", 60.0);
  double seconds = 0;
  const RawImage out =
      plugin.run_file(dir.path() / "in.rgbw", dir.path() / "out.bayer", &seconds);
  REQUIRE(out.data == gt.data);
}

TEST_CASE("plugin failure modes raise descriptive errors", "[plugin]") {
  testutil::TempDir dir;
  const RawImage input = testutil::random_raw(rgbwkit::rgbw_diag(), 16, 16, 43);
  rgbwkit::write_mraw(dir.path() / "in.rgbw", input);
  const auto in = dir.path() / "in.rgbw";
  const auto out = dir.path() / "out.bayer";
  double seconds = 0;

  SECTION("nonzero exit surfaces the captured output") {
    const auto script = testutil::write_script(dir.path() / "fail.sh",
                                               "echo boom 1>&2\nexit 9\n");
    const rgbwkit::PluginRemosaic plugin(script.string());
    REQUIRE_THROWS_WITH(plugin.run_file(in, out, &seconds), ContainsSubstring("boom"));
  }
  SECTION("missing output file") {
    const auto script = testutil::write_script(dir.path() / "noop.sh", "exit 0\n");
    const rgbwkit::PluginRemosaic plugin(script.string());
    REQUIRE_THROWS_AS(plugin.run_file(in, out, &seconds), Error);
  }
  SECTION("garbage output bytes") {
    const auto script =
        testutil::write_script(dir.path() / "junk.sh", "printf junk > \"$2\"\n");
    const rgbwkit::PluginRemosaic plugin(script.string());
    REQUIRE_THROWS_AS(plugin.run_file(in, out, &seconds), Error);
  }
  SECTION("output keeps the RGBW pattern instead of Bayer") {
    const auto script = testutil::write_script(dir.path() / "copy.sh",
                                               "cp \"$1\" \"$2\"\n");
    const rgbwkit::PluginRemosaic plugin(script.string());
    REQUIRE_THROWS_AS(plugin.run_file(in, out, &seconds), Error);
  }
  SECTION("output size disagrees with the input") {
    rgbwkit::write_mraw(dir.path() / "small.bayer",
                        testutil::random_raw(rgbwkit::bayer_gbrg(), 8, 8, 44));
    const auto script = testutil::write_script(
        dir.path() / "resize.sh",
        "cp \"$(dirname \"$1\")/small.bayer\" \"$2\"\n");
    const rgbwkit::PluginRemosaic plugin(script.string());
    REQUIRE_THROWS_WITH(plugin.run_file(in, out, &seconds), ContainsSubstring("16x16"));
  }
  SECTION("timeout") {
    const auto script = testutil::write_script(dir.path() / "sleepy.sh", "sleep 30\n");
    const rgbwkit::PluginRemosaic plugin(script.string(), "sleepy", 0.3);
    REQUIRE_THROWS_WITH(plugin.run_file(in, out, &seconds),
                        ContainsSubstring("timed out"));
  }
  SECTION("Bayer input is rejected before launching the plugin") {
    const rgbwkit::PluginRemosaic plugin("true");
    const RawImage bayer = testutil::random_raw(rgbwkit::bayer_gbrg(), 8, 8, 45);
    REQUIRE_THROWS_AS(plugin.run(bayer), Error);
  }
}
