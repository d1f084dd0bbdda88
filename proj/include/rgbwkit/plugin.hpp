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

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <utility>

#include "rgbwkit/mraw.hpp"
#include "rgbwkit/raw.hpp"
#include "rgbwkit/remosaic.hpp"

namespace rgbwkit {

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  double wall_seconds = 0.0;
  std::string output;  // combined stdout+stderr, truncated
};

namespace detail {

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += "'";
  return out;
}

/// Temporary working directory removed on scope exit.
class ScopedTempDir {
 public:
  ScopedTempDir() {
    static std::atomic<std::uint64_t> counter{0};
    const auto ticks = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("rgbwkit-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)) + "-" + std::to_string(ticks % 100000));
    std::filesystem::create_directories(path_);
  }
  ~ScopedTempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScopedTempDir(const ScopedTempDir&) = delete;
  ScopedTempDir& operator=(const ScopedTempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace detail

/// Runs `command` through /bin/sh with a wall-clock timeout. On timeout the
/// whole process group is killed. Combined stdout/stderr is captured (first
/// 2000 bytes) for diagnostics.
inline ProcessResult run_process(const std::string& command, double timeout_seconds) {
  detail::ScopedTempDir tmp;
  const std::filesystem::path log_path = tmp.path() / "output.log";

  const auto start = std::chrono::steady_clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) throw Error("fork failed while launching: " + command);
  if (pid == 0) {
    ::setpgid(0, 0);
    const int fd = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd >= 0) {
      ::dup2(fd, STDOUT_FILENO);
      ::dup2(fd, STDERR_FILENO);
      ::close(fd);
    }
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }

  ProcessResult result;
  int status = 0;
  for (;;) {
    const pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0) throw Error("waitpid failed while running: " + command);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    if (elapsed.count() > timeout_seconds) {
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      result.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -WTERMSIG(status);

  std::ifstream log(log_path, std::ios::binary);
  if (log) {
    char buf[2000];
    log.read(buf, sizeof buf);
    result.output.assign(buf, static_cast<std::size_t>(log.gcount()));
  }
  return result;
}

/// External remosaic plugin. The configured command is invoked as
///
///   <command> <input.rgbw> <output.bayer>
///
/// through the shell; it must write a Bayer image of the same size, levels
/// and bit depth (pattern id 0) to the output path and exit with status 0.
/// Any violation — nonzero exit, timeout, missing or malformed output —
/// raises Error with the captured process output, which callers record as a
/// per-scene failure.
class PluginRemosaic final : public RemosaicAlgo {
 public:
  explicit PluginRemosaic(std::string command, std::string label = "plugin",
                          double timeout_seconds = 600.0)
      : command_(std::move(command)),
        label_(std::move(label)),
        timeout_seconds_(timeout_seconds) {}

  std::string name() const override { return label_; }
  bool is_external() const override { return true; }

  RawImage run(const RawImage& input) const override {
    double ignored = 0;
    return run_timed(input, &ignored);
  }

  /// In-memory entry point: the input is staged into a private temporary
  /// directory first (the plugin sees no sibling files).
  RawImage run_timed(const RawImage& input, double* seconds) const override {
    detail::require_rgbw_input(input, "plugin");
    detail::ScopedTempDir tmp;
    const std::filesystem::path in_path = tmp.path() / "input.rgbw";
    write_mraw(in_path, input);
    return run_file(in_path, tmp.path() / "output.bayer", seconds);
  }

  /// Invokes the command directly on the given paths. The reported runtime
  /// is the wall-clock time of the external process; reading the output back
  /// for validation is excluded.
  RawImage run_file(const std::filesystem::path& in_path,
                    const std::filesystem::path& out_path, double* seconds) const override {
    const std::string cmd = command_ + " " + detail::shell_quote(in_path.string()) + " " +
                            detail::shell_quote(out_path.string());
    const ProcessResult proc = run_process(cmd, timeout_seconds_);
    *seconds = proc.wall_seconds;
    if (proc.timed_out) {
      throw Error("plugin timed out after " + std::to_string(timeout_seconds_) +
                  " s: " + command_);
    }
    if (proc.exit_code != 0) {
      throw Error("plugin exited with status " + std::to_string(proc.exit_code) + ": " +
                  command_ + (proc.output.empty() ? "" : "\n" + proc.output));
    }
    if (!std::filesystem::exists(out_path)) {
      throw Error("plugin produced no output file: " + command_);
    }

    const RawImage input = read_mraw(in_path);
    RawImage out = read_mraw(out_path);
    if (out.width != input.width || out.height != input.height) {
      throw Error("plugin output is " + std::to_string(out.width) + "x" +
                  std::to_string(out.height) + ", expected " + std::to_string(input.width) +
                  "x" + std::to_string(input.height));
    }
    if (out.pattern.has_white()) {
      throw Error("plugin output must be Bayer (pattern id 0), got " + out.pattern.name);
    }
    if (out.bit_depth != input.bit_depth || out.black_level != input.black_level ||
        out.white_level != input.white_level) {
      throw Error("plugin output levels disagree with input (bit depth " +
                  std::to_string(out.bit_depth) + " vs " + std::to_string(input.bit_depth) +
                  ", black " + std::to_string(out.black_level) + " vs " +
                  std::to_string(input.black_level) + ", white " +
                  std::to_string(out.white_level) + " vs " +
                  std::to_string(input.white_level) + ")");
    }
    return out;
  }

  double timeout_seconds() const { return timeout_seconds_; }

 private:
  std::string command_;
  std::string label_;
  double timeout_seconds_;
};

}  // namespace rgbwkit
