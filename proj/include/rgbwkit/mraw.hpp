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
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rgbwkit/raw.hpp"

namespace rgbwkit {

// MRAW1 container, used for both .rgbw and .bayer files:
//   bytes  0-7   ASCII magic "MIPIRAW1"
//   bytes  8-11  u32 LE width
//   bytes 12-15  u32 LE height
//   bytes 16-17  u16 LE bit_depth
//   bytes 18-19  u16 LE black_level
//   bytes 20-21  u16 LE white_level
//   byte  22     u8 pattern id (0 BAYER_GBRG, 1 RGBW_DIAG, 2 RGBW_DIAG anti)
//   byte  23     u8 reserved (0)
//   bytes 24...  width*height u16 LE samples, row-major

inline constexpr std::size_t kMrawHeaderSize = 24;
inline constexpr char kMrawMagic[8] = {'M', 'I', 'P', 'I', 'R', 'A', 'W', '1'};

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

inline std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

/// Serializes an image to MRAW1 bytes. The pattern must be one of the
/// builtin layouts (those are the only ones the id byte can name).
inline std::vector<std::uint8_t> encode_mraw(const RawImage& img) {
  validate(img);
  if (!(img.pattern == pattern_from_container_id(img.pattern.container_id)))
    throw Error("pattern '" + img.pattern.name + "' has no MRAW1 container id");

  std::vector<std::uint8_t> bytes;
  bytes.reserve(kMrawHeaderSize + img.sample_count() * 2);
  for (char c : kMrawMagic) bytes.push_back(static_cast<std::uint8_t>(c));
  detail::put_u32(bytes, static_cast<std::uint32_t>(img.width));
  detail::put_u32(bytes, static_cast<std::uint32_t>(img.height));
  detail::put_u16(bytes, static_cast<std::uint16_t>(img.bit_depth));
  detail::put_u16(bytes, img.black_level);
  detail::put_u16(bytes, img.white_level);
  bytes.push_back(img.pattern.container_id);
  bytes.push_back(0);
  for (std::uint16_t s : img.data) detail::put_u16(bytes, s);
  return bytes;
}

/// Parses MRAW1 bytes; `origin` names the source in diagnostics.
inline RawImage decode_mraw(const std::vector<std::uint8_t>& bytes,
                            const std::string& origin = "buffer") {
  if (bytes.size() < kMrawHeaderSize)
    throw Error(origin + ": truncated MRAW1 header, got " +
                std::to_string(bytes.size()) + " bytes, need " +
                std::to_string(kMrawHeaderSize));
  if (std::memcmp(bytes.data(), kMrawMagic, 8) != 0)
    throw Error(origin + ": bad MRAW1 magic");

  RawImage img;
  img.width = static_cast<int>(detail::get_u32(&bytes[8]));
  img.height = static_cast<int>(detail::get_u32(&bytes[12]));
  img.bit_depth = detail::get_u16(&bytes[16]);
  img.black_level = detail::get_u16(&bytes[18]);
  img.white_level = detail::get_u16(&bytes[20]);
  img.pattern = pattern_from_container_id(bytes[22]);

  if (img.width <= 0 || img.height <= 0 || img.width > (1 << 20) ||
      img.height > (1 << 20))
    throw Error(origin + ": implausible image size " + std::to_string(img.width) +
                "x" + std::to_string(img.height));
  const std::size_t expected = kMrawHeaderSize + static_cast<std::size_t>(img.width) *
                                                     img.height * 2;
  if (bytes.size() != expected)
    throw Error(origin + ": MRAW1 payload is " + std::to_string(bytes.size()) +
                " bytes, expected " + std::to_string(expected) + " for " +
                std::to_string(img.width) + "x" + std::to_string(img.height));

  img.data.resize(img.sample_count());
  const std::uint8_t* p = bytes.data() + kMrawHeaderSize;
  for (std::size_t i = 0; i < img.data.size(); ++i, p += 2)
    img.data[i] = detail::get_u16(p);
  validate(img);
  return img;
}

inline void write_mraw(const std::filesystem::path& path, const RawImage& img) {
  const std::vector<std::uint8_t> bytes = encode_mraw(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed on " + path.string());
}

inline RawImage read_mraw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error("cannot open " + path.string());
  const std::streamsize size = in.tellg();
  in.seekg(0);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw Error("read failed on " + path.string());
  return decode_mraw(bytes, path.string());
}

}  // namespace rgbwkit
