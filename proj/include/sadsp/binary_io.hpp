/*
 * Copyright 2026 The sadsp Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sadsp/errors.hpp"

namespace sadsp::io {

// Little-endian byte sink.
class ByteWriter {
 public:
  void bytes(std::string_view raw) { buffer_.insert(buffer_.end(), raw.begin(), raw.end()); }
  void u8(std::uint8_t v) { buffer_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { little(v); }
  void u32(std::uint32_t v) { little(v); }
  void f32(float v) { little(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { little(std::bit_cast<std::uint64_t>(v)); }
  const std::vector<char>& buffer() const { return buffer_; }

 private:
  template <typename U>
  void little(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) buffer_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::vector<char> buffer_;
};

// Little-endian cursor over an in-memory file; errors name the byte offset.
class ByteReader {
 public:
  ByteReader(const std::vector<char>& data, std::string source) : data_(data), source_(std::move(source)) {}

  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return data_.size() - offset_; }

  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string out(data_.data() + offset_, n);
    offset_ += n;
    return out;
  }
  std::uint8_t u8(const char* what) { return static_cast<std::uint8_t>(little<std::uint8_t>(what)); }
  std::uint16_t u16(const char* what) { return little<std::uint16_t>(what); }
  std::uint32_t u32(const char* what) { return little<std::uint32_t>(what); }
  float f32(const char* what) { return std::bit_cast<float>(little<std::uint32_t>(what)); }
  double f64(const char* what) { return std::bit_cast<double>(little<std::uint64_t>(what)); }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(source_ + ": byte offset " + std::to_string(offset_) + ": " + message);
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      fail(std::string("truncated while reading ") + what + " (need " + std::to_string(n) + " bytes, " +
           std::to_string(remaining()) + " left)");
    }
  }
  template <typename U>
  U little(const char* what) {
    need(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(data_[offset_ + i])) << (8 * i));
    }
    offset_ += sizeof(U);
    return v;
  }

  const std::vector<char>& data_;
  std::string source_;
  std::size_t offset_ = 0;
};

std::vector<char> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<char>& data);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace sadsp::io
