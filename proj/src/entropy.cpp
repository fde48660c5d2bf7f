// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#include "splatpack/entropy.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "splatpack/error.hpp"

namespace splatpack {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

}  // namespace

double QuantSpec::base_step(AttributeKind kind) const {
  switch (kind) {
    case AttributeKind::kFeature: return feature_step;
    case AttributeKind::kScaling: return scaling_step;
    case AttributeKind::kOffsets: return offsets_step;
  }
  return feature_step;
}

void QuantSpec::validate() const {
  for (double s : {feature_step, scaling_step, offsets_step}) {
    require(s > 0.0 && std::isfinite(s), ErrorKind::kInvalidParam, "quantisation steps must be positive");
  }
}

AttributeKind channel_kind(size_t channel, uint32_t channel_count) {
  if (channel < channel_count) return AttributeKind::kFeature;
  if (channel < size_t{channel_count} + 3) return AttributeKind::kScaling;
  return AttributeKind::kOffsets;
}

double effective_step(double base_step, double delta_adj) {
  require(base_step > 0.0, ErrorKind::kInvalidParam, "base step must be positive");
  const double factor = 1.0 + std::tanh(delta_adj);
  return base_step * std::max(factor, kMinStepFraction);
}

int32_t quantize(double x, double step, int32_t bound) {
  require(step > 0.0, ErrorKind::kInvalidParam, "quantisation step must be positive");
  require(std::isfinite(x), ErrorKind::kNonFinite, "cannot quantise a non-finite value");
  const double q = std::round(x / step);
  if (!(std::fabs(q) <= static_cast<double>(bound))) {
    fail(ErrorKind::kOverflow, "symbol " + std::to_string(q) + " exceeds the alphabet bound " +
                                   std::to_string(bound) + "; the quantisation step is too small");
  }
  return static_cast<int32_t>(q);
}

// --- CodingDistribution ------------------------------------------------------

namespace {

double lower_tail(Distribution d, double v) {
  if (d == Distribution::kGaussian) return 0.5 * std::erfc(-v * kInvSqrt2);
  return v < 0.0 ? 0.5 * std::exp(v) : 1.0 - 0.5 * std::exp(-v);
}

double upper_tail(Distribution d, double v) {
  if (d == Distribution::kGaussian) return 0.5 * std::erfc(v * kInvSqrt2);
  return v > 0.0 ? 0.5 * std::exp(-v) : 1.0 - 0.5 * std::exp(v);
}

double standardize(const SymbolModel& m, double edge) { return (edge * m.step - m.mean) / m.scale; }

// P(e0 * step < X <= e1 * step), evaluated on the tail that avoids
// cancellation.
double interval_mass(const SymbolModel& m, double e0, double e1) {
  const double z0 = standardize(m, e0);
  const double z1 = standardize(m, e1);
  double mass;
  if (z0 >= 0.0) {
    mass = upper_tail(m.distribution, z0) - upper_tail(m.distribution, z1);
  } else if (z1 <= 0.0) {
    mass = lower_tail(m.distribution, z1) - lower_tail(m.distribution, z0);
  } else {
    mass = 1.0 - lower_tail(m.distribution, z0) - upper_tail(m.distribution, z1);
  }
  return std::max(mass, 0.0);
}

}  // namespace

double CodingDistribution::z(double edge) const { return standardize(model_, edge); }
double CodingDistribution::lower(double v) const { return lower_tail(model_.distribution, v); }
double CodingDistribution::upper(double v) const { return upper_tail(model_.distribution, v); }
double CodingDistribution::interval(double e0, double e1) const { return interval_mass(model_, e0, e1); }

double bin_mass(const SymbolModel& model, int64_t q) {
  return interval_mass(model, static_cast<double>(q) - 0.5, static_cast<double>(q) + 0.5);
}

CodingDistribution::CodingDistribution(const SymbolModel& model) : model_(model) {
  require(std::isfinite(model.mean) && std::isfinite(model.scale) && model.scale > 0.0 && std::isfinite(model.step) &&
              model.step > 0.0 && model.bound >= 0,
          ErrorKind::kNonFinite, "invalid symbol model");
  const int64_t bound = model.bound;
  const double centre_real = std::round(model.mean / model.step);
  const int64_t centre = static_cast<int64_t>(std::clamp(centre_real, -static_cast<double>(bound), static_cast<double>(bound)));

  auto good = [&](int64_t q) { return mass(q) >= kProbabilityFloor; };
  if (!good(centre)) {
    lo_ = hi_ = centre;
    floored_single_ = true;
    single_mass_ = std::max(mass(centre), kProbabilityFloor);
  } else {
    // Largest q >= centre (resp. smallest q <= centre) still at or above the
    // floor: exponential probe, then bisection.
    auto extend = [&](int direction) {
      int64_t last_good = centre;
      int64_t first_bad = 0;
      bool found_bad = false;
      for (int64_t stride = 1;; stride *= 2) {
        int64_t cand = centre + direction * stride;
        if (direction > 0 && cand > bound) cand = bound;
        if (direction < 0 && cand < -bound) cand = -bound;
        if (cand == last_good) break;
        if (good(cand)) {
          last_good = cand;
        } else {
          first_bad = cand;
          found_bad = true;
          break;
        }
      }
      if (!found_bad) return last_good;
      while (std::llabs(first_bad - last_good) > 1) {
        const int64_t mid = last_good + (first_bad - last_good) / 2;
        if (good(mid)) last_good = mid; else first_bad = mid;
      }
      return last_good;
    };
    hi_ = extend(+1);
    lo_ = extend(-1);
  }
  require(hi_ - lo_ + 1 <= 65536, ErrorKind::kNonFinite, "coding window too wide");

  const uint64_t alphabet = 2 * static_cast<uint64_t>(bound) + 1;
  rest_ = alphabet - static_cast<uint64_t>(hi_ - lo_ + 1);
  const double lo_edge = static_cast<double>(lo_) - 0.5;
  const double hi_edge = static_cast<double>(hi_) + 0.5;
  window_mass_ = floored_single_ ? single_mass_ : interval(lo_edge, hi_edge);
  if (rest_ > 0) {
    const double tail = lower(z(lo_edge)) + upper(z(hi_edge));
    escape_mass_ = std::max(tail, kProbabilityFloor);
  }
  z_ = window_mass_ + escape_mass_;
  entries_ = static_cast<uint32_t>(hi_ - lo_ + 1) + (rest_ > 0 ? 1u : 0u);
  spread_ = kTotal - 2 * static_cast<uint64_t>(entries_);
}

double CodingDistribution::probability(int64_t q) const {
  if (q < -static_cast<int64_t>(model_.bound) || q > model_.bound) return 0.0;
  if (in_window(q)) return (floored_single_ ? single_mass_ : mass(q)) / z_;
  return escape_mass_ / z_ / static_cast<double>(rest_);
}

double CodingDistribution::bits(int64_t q) const { return -std::log2(probability(q)); }

uint64_t CodingDistribution::cumulative(uint32_t k) const {
  if (k >= entries_) return kTotal;
  if (k == 0) return 0;
  const uint32_t window = static_cast<uint32_t>(hi_ - lo_ + 1);
  double below;
  if (k >= window) {
    below = window_mass_;
  } else {
    below = interval(static_cast<double>(lo_) - 0.5, static_cast<double>(lo_ + k) - 0.5);
  }
  const double f = std::clamp(below / z_, 0.0, 1.0);
  // The doubled per-entry offset keeps every frequency >= 1 even if f is
  // non-monotone at the level of rounding error.
  return static_cast<uint64_t>(std::floor(f * static_cast<double>(spread_))) + 2 * static_cast<uint64_t>(k);
}

uint32_t CodingDistribution::find_entry(uint64_t target) const {
  uint32_t lo = 0, hi = entries_;
  while (hi - lo > 1) {
    const uint32_t mid = lo + (hi - lo) / 2;
    if (cumulative(mid) <= target) lo = mid; else hi = mid;
  }
  return lo;
}

uint32_t CodingDistribution::entry_of(int64_t q) const { return static_cast<uint32_t>(q - lo_); }

uint64_t CodingDistribution::escape_index(int64_t q) const {
  const int64_t bound = model_.bound;
  if (q < lo_) return static_cast<uint64_t>(q + bound);
  return static_cast<uint64_t>(lo_ + bound) + static_cast<uint64_t>(q - hi_ - 1);
}

int64_t CodingDistribution::escape_symbol(uint64_t index) const {
  const int64_t bound = model_.bound;
  const uint64_t below = static_cast<uint64_t>(lo_ + bound);
  if (index < below) return static_cast<int64_t>(index) - bound;
  return hi_ + 1 + static_cast<int64_t>(index - below);
}

uint64_t CodingDistribution::uniform_cumulative(uint64_t k, uint64_t count) {
  if (k >= count) return kTotal;
  return (k << 32) / count;
}

uint64_t CodingDistribution::uniform_find(uint64_t target, uint64_t count) {
  return ((target + 1) * count - 1) >> 32;
}

double symbol_probability(const SymbolModel& model, int32_t q) { return CodingDistribution(model).probability(q); }

double estimate_rate(std::span<const int32_t> symbols, std::span<const SymbolModel> models) {
  require(symbols.size() == models.size(), ErrorKind::kDimensionMismatch, "symbol and model counts differ");
  double bits = 0.0;
  for (size_t i = 0; i < symbols.size(); ++i) bits += CodingDistribution(models[i]).bits(symbols[i]);
  return bits;
}

uint32_t model_digest_init() { return static_cast<uint32_t>(crc32(0L, Z_NULL, 0)); }

uint32_t model_digest_update(uint32_t crc, const SymbolModel& m) {
  uint8_t buf[1 + 8 * 3 + 4];
  buf[0] = static_cast<uint8_t>(m.distribution);
  std::memcpy(buf + 1, &m.mean, 8);
  std::memcpy(buf + 9, &m.scale, 8);
  std::memcpy(buf + 17, &m.step, 8);
  std::memcpy(buf + 25, &m.bound, 4);
  return static_cast<uint32_t>(crc32(crc, buf, sizeof buf));
}

uint32_t model_digest(std::span<const SymbolModel> models) {
  uint32_t crc = model_digest_init();
  for (const auto& m : models) crc = model_digest_update(crc, m);
  return crc;
}

}  // namespace splatpack
