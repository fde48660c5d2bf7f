// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#include "splatpack/range_coder.hpp"

#include <string>

#include "byte_io.hpp"
#include "splatpack/error.hpp"

namespace splatpack {
namespace {

constexpr uint64_t kTotal = CodingDistribution::kTotal;
constexpr uint64_t kTop = uint64_t{1} << 56;

}  // namespace

// --- RangeEncoder ------------------------------------------------------------

void RangeEncoder::propagate_carry() {
  for (size_t i = out_.size(); i-- > 0;) {
    if (++out_[i] != 0) return;
  }
}

void RangeEncoder::encode(uint64_t start, uint64_t size) {
  const uint64_t r = range_ >> 32;
  const uint64_t next_low = low_ + r * start;
  if (next_low < low_) propagate_carry();
  low_ = next_low;
  range_ = (start + size < kTotal) ? r * size : range_ - r * start;
  while (range_ < kTop) {
    out_.push_back(static_cast<uint8_t>(low_ >> 56));
    low_ <<= 8;
    range_ <<= 8;
  }
}

std::vector<uint8_t> RangeEncoder::finish() {
  // Shortest byte string whose zero-padded value lies in [low, low + range).
  using u128 = unsigned __int128;
  const u128 lo = low_;
  const u128 hi = lo + range_;
  for (int n = 0; n <= 8; ++n) {
    const int shift = 64 - 8 * n;
    const u128 unit = u128{1} << shift;
    const u128 v = ((lo + unit - 1) >> shift) << shift;
    if (v < hi) {
      u128 w = v;
      if (w >> 64) {
        propagate_carry();
        w -= u128{1} << 64;
      }
      for (int b = 0; b < n; ++b) out_.push_back(static_cast<uint8_t>(w >> (56 - 8 * b)));
      break;
    }
  }
  while (!out_.empty() && out_.back() == 0) out_.pop_back();
  std::vector<uint8_t> result = std::move(out_);
  out_.clear();
  low_ = 0;
  range_ = ~uint64_t{0};
  return result;
}

// --- RangeDecoder ------------------------------------------------------------

RangeDecoder::RangeDecoder(std::span<const uint8_t> bytes) : bytes_(bytes) {
  for (int i = 0; i < 8; ++i) diff_ = (diff_ << 8) | next();
}

uint8_t RangeDecoder::next() { return pos_ < bytes_.size() ? bytes_[pos_++] : 0; }

uint64_t RangeDecoder::target() const {
  const uint64_t t = diff_ / (range_ >> 32);
  return t < kTotal ? t : kTotal - 1;
}

void RangeDecoder::consume(uint64_t start, uint64_t size) {
  const uint64_t r = range_ >> 32;
  diff_ -= r * start;
  range_ = (start + size < kTotal) ? r * size : range_ - r * start;
  while (range_ < kTop) {
    diff_ = (diff_ << 8) | next();
    range_ <<= 8;
  }
}

// --- Symbol coding -----------------------------------------------------------

SymbolEncoder::SymbolEncoder() : digest_(model_digest_init()) {}

void SymbolEncoder::encode(int32_t symbol, const SymbolModel& model) {
  require(symbol >= -model.bound && symbol <= model.bound, ErrorKind::kOverflow,
          "symbol " + std::to_string(symbol) + " outside the coded alphabet");
  const CodingDistribution dist(model);
  uint32_t entry;
  if (dist.in_window(symbol)) {
    entry = dist.entry_of(symbol);
  } else {
    entry = dist.escape_entry();
  }
  const uint64_t c0 = dist.cumulative(entry);
  coder_.encode(c0, dist.cumulative(entry + 1) - c0);
  if (!dist.in_window(symbol)) {
    const uint64_t k = dist.escape_index(symbol);
    const uint64_t u0 = CodingDistribution::uniform_cumulative(k, dist.rest());
    coder_.encode(u0, CodingDistribution::uniform_cumulative(k + 1, dist.rest()) - u0);
  }
  digest_ = model_digest_update(digest_, model);
  ++count_;
}

std::vector<uint8_t> SymbolEncoder::finish() {
  std::vector<uint8_t> payload = coder_.finish();
  detail::ByteWriter w;
  w.u32(static_cast<uint32_t>(payload.size()));
  w.u32(count_);
  w.u32(digest_);
  w.raw(payload);
  return w.take();
}

SectionHeader read_section_header(std::span<const uint8_t> bytes, size_t stream_offset) {
  if (bytes.size() < SectionHeader::kBytes) {
    fail(ErrorKind::kCorruptStream,
         "truncated section header at byte offset " + std::to_string(stream_offset));
  }
  detail::ByteReader r(bytes, ErrorKind::kCorruptStream);
  SectionHeader h;
  h.payload_bytes = r.u32();
  h.symbol_count = r.u32();
  h.model_digest = r.u32();
  if (h.payload_bytes > bytes.size() - SectionHeader::kBytes) {
    fail(ErrorKind::kCorruptStream, "section at byte offset " + std::to_string(stream_offset) + " declares " +
                                        std::to_string(h.payload_bytes) + " payload bytes but only " +
                                        std::to_string(bytes.size() - SectionHeader::kBytes) + " remain");
  }
  return h;
}

SymbolDecoder::SymbolDecoder(std::span<const uint8_t> section, size_t stream_offset)
    : header_(read_section_header(section, stream_offset)),
      coder_(section.subspan(SectionHeader::kBytes, header_.payload_bytes)),
      stream_offset_(stream_offset),
      digest_(model_digest_init()) {}

int32_t SymbolDecoder::decode(const SymbolModel& model) {
  if (count_ >= header_.symbol_count) {
    fail(ErrorKind::kCorruptStream, "section at byte offset " + std::to_string(stream_offset_) + " holds only " +
                                        std::to_string(header_.symbol_count) + " symbols");
  }
  const CodingDistribution dist(model);
  const uint32_t entry = dist.find_entry(coder_.target());
  const uint64_t c0 = dist.cumulative(entry);
  coder_.consume(c0, dist.cumulative(entry + 1) - c0);
  int64_t symbol;
  if (entry < dist.escape_entry()) {
    symbol = dist.window_lo() + entry;
  } else {
    const uint64_t k = CodingDistribution::uniform_find(coder_.target(), dist.rest());
    const uint64_t u0 = CodingDistribution::uniform_cumulative(k, dist.rest());
    coder_.consume(u0, CodingDistribution::uniform_cumulative(k + 1, dist.rest()) - u0);
    symbol = dist.escape_symbol(k);
  }
  digest_ = model_digest_update(digest_, model);
  ++count_;
  return static_cast<int32_t>(symbol);
}

void SymbolDecoder::finish() const {
  if (count_ != header_.symbol_count) {
    fail(ErrorKind::kCorruptStream, "section at byte offset " + std::to_string(stream_offset_) + " declares " +
                                        std::to_string(header_.symbol_count) + " symbols but " +
                                        std::to_string(count_) + " were decoded");
  }
  if (digest_ != header_.model_digest) {
    fail(ErrorKind::kModelMismatch,
         "model digest mismatch in section at byte offset " + std::to_string(stream_offset_));
  }
}

std::vector<uint8_t> encode_symbols(std::span<const int32_t> symbols, std::span<const SymbolModel> models) {
  require(symbols.size() == models.size(), ErrorKind::kDimensionMismatch, "symbol and model counts differ");
  SymbolEncoder enc;
  for (size_t i = 0; i < symbols.size(); ++i) enc.encode(symbols[i], models[i]);
  return enc.finish();
}

std::vector<int32_t> decode_symbols(std::span<const uint8_t> bytes, std::span<const SymbolModel> models, size_t count) {
  require(models.size() == count, ErrorKind::kDimensionMismatch, "model count differs from symbol count");
  SymbolDecoder dec(bytes);
  if (dec.header().symbol_count != count) {
    fail(ErrorKind::kCorruptStream, "section declares " + std::to_string(dec.header().symbol_count) +
                                        " symbols, expected " + std::to_string(count));
  }
  std::vector<int32_t> out(count);
  for (size_t i = 0; i < count; ++i) out[i] = dec.decode(models[i]);
  dec.finish();
  return out;
}

}  // namespace splatpack
