// Copyright 2026 The QCSE Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qcse {

// Raised for malformed or truncated binary files. The message names the
// file, the field being read, and the expected/actual byte counts.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Little-endian serializer. Byte order is produced by shifting, so output
// does not depend on host endianness.
void write_binary_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);

class ByteWriter {
 public:
  void put_bytes(std::string_view bytes);
  void put_u8(std::uint8_t v) { buf_.push_back(v); }
  void put_u32(std::uint32_t v);
  void put_u64(std::uint64_t v);
  void put_f32(float v);
  void put_f64(double v);

  const std::vector<std::uint8_t>& bytes() const { return buf_; }
  void write_file(const std::filesystem::path& path) const;

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(std::vector<std::uint8_t> data, std::string source);

  static ByteReader from_file(const std::filesystem::path& path);

  std::string get_bytes(std::size_t n, std::string_view field);
  std::uint8_t get_u8(std::string_view field);
  std::uint32_t get_u32(std::string_view field);
  std::uint64_t get_u64(std::string_view field);
  float get_f32(std::string_view field);
  double get_f64(std::string_view field);

  // Throws unless `n` more bytes are available; used to report the full
  // payload size up front instead of failing on the first short read.
  void require(std::size_t n, std::string_view field) const;
  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }
  const std::string& source() const { return source_; }

 private:
  std::vector<std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string source_;
};

}  // namespace qcse
