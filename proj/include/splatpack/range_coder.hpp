// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "splatpack/entropy.hpp"

namespace splatpack {

/// Binary range coder over a fixed 2^32 frequency total.
class RangeEncoder {
 public:
  void encode(uint64_t start, uint64_t size);
  std::vector<uint8_t> finish();

 private:
  void propagate_carry();

  uint64_t low_ = 0;
  uint64_t range_ = ~uint64_t{0};
  std::vector<uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const uint8_t> bytes);
  uint64_t target() const;
  void consume(uint64_t start, uint64_t size);

 private:
  uint8_t next();

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
  uint64_t diff_ = 0;
  uint64_t range_ = ~uint64_t{0};
};

/// Codes integer symbols one at a time, each under its own SymbolModel, and
/// accumulates the model digest.
class SymbolEncoder {
 public:
  SymbolEncoder();
  void encode(int32_t symbol, const SymbolModel& model);
  /// Section bytes: 12-byte header followed by the coded payload.
  std::vector<uint8_t> finish();
  uint32_t count() const { return count_; }
  uint32_t digest() const { return digest_; }

 private:
  RangeEncoder coder_;
  uint32_t count_ = 0;
  uint32_t digest_;
};

struct SectionHeader {
  static constexpr size_t kBytes = 12;
  uint32_t payload_bytes = 0;
  uint32_t symbol_count = 0;
  uint32_t model_digest = 0;
};

/// Reads a section header at the start of `bytes`; CorruptStream if the
/// declared payload runs past the end.
SectionHeader read_section_header(std::span<const uint8_t> bytes, size_t stream_offset = 0);

class SymbolDecoder {
 public:
  /// `section` starts at the section header. `stream_offset` is used only for
  /// error messages.
  explicit SymbolDecoder(std::span<const uint8_t> section, size_t stream_offset = 0);
  int32_t decode(const SymbolModel& model);
  /// Verifies symbol count and model digest against the header.
  void finish() const;
  const SectionHeader& header() const { return header_; }
  size_t section_bytes() const { return SectionHeader::kBytes + header_.payload_bytes; }

 private:
  SectionHeader header_;
  RangeDecoder coder_;
  size_t stream_offset_;
  uint32_t count_ = 0;
  uint32_t digest_;
};

std::vector<uint8_t> encode_symbols(std::span<const int32_t> symbols, std::span<const SymbolModel> models);
std::vector<int32_t> decode_symbols(std::span<const uint8_t> bytes, std::span<const SymbolModel> models, size_t count);

}  // namespace splatpack
