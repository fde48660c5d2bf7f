// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "splatpack/error.hpp"

namespace splatpack::detail {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

class ByteWriter {
 public:
  void u8(uint8_t v) { bytes_.push_back(v); }
  void u16(uint16_t v) { put(&v, sizeof v); }
  void u32(uint32_t v) { put(&v, sizeof v); }
  void i32(int32_t v) { put(&v, sizeof v); }
  void f32(float v) { put(&v, sizeof v); }
  void raw(std::span<const uint8_t> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }
  void tag(const char (&magic)[5]) { put(magic, 4); }

  size_t size() const { return bytes_.size(); }
  std::vector<uint8_t>& bytes() { return bytes_; }
  std::vector<uint8_t> take() { return std::move(bytes_); }

 private:
  void put(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }

  std::vector<uint8_t> bytes_;
};

// Bounds-checked little-endian reader. Failures raise `kind` with the byte
// offset of the failing read.
class ByteReader {
 public:
  ByteReader(std::span<const uint8_t> data, ErrorKind kind) : data_(data), kind_(kind) {}

  uint8_t u8() { uint8_t v; get(&v, sizeof v); return v; }
  uint16_t u16() { uint16_t v; get(&v, sizeof v); return v; }
  uint32_t u32() { uint32_t v; get(&v, sizeof v); return v; }
  int32_t i32() { int32_t v; get(&v, sizeof v); return v; }
  float f32() { float v; get(&v, sizeof v); return v; }

  std::span<const uint8_t> take(size_t n, const char* what) {
    if (n > remaining()) {
      fail(kind_, std::string(what) + " truncated at byte offset " + std::to_string(pos_) + " (need " +
                      std::to_string(n) + ", have " + std::to_string(remaining()) + ")");
    }
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  void expect_tag(const char (&magic)[5]) {
    auto b = take(4, "magic");
    if (std::memcmp(b.data(), magic, 4) != 0) fail(kind_, std::string("bad magic, expected ") + magic);
  }

  size_t position() const { return pos_; }
  size_t remaining() const { return data_.size() - pos_; }

 private:
  void get(void* out, size_t n) {
    auto b = take(n, "field");
    std::memcpy(out, b.data(), n);
  }

  std::span<const uint8_t> data_;
  ErrorKind kind_;
  size_t pos_ = 0;
};

}  // namespace splatpack::detail
