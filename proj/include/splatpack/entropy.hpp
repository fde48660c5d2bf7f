// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace splatpack {

/// Attribute symbols must satisfy |q| <= kSymbolBound.
inline constexpr int32_t kSymbolBound = 1 << 15;
/// Per-symbol probability floor applied before renormalisation.
inline constexpr double kProbabilityFloor = 1.0 / 65536.0;
/// effective_step never drops below this fraction of the base step.
inline constexpr double kMinStepFraction = 1e-6;

enum class AttributeKind : uint8_t { kFeature = 0, kScaling = 1, kOffsets = 2 };

struct QuantSpec {
  double feature_step = 0.05;
  double scaling_step = 0.001;
  double offsets_step = 0.001;
  bool adaptive = false;

  double base_step(AttributeKind kind) const;
  void validate() const;
};

/// Kind of coded channel c for a cloud with `channel_count` features.
AttributeKind channel_kind(size_t channel, uint32_t channel_count);

/// base_step * (1 + tanh(delta_adj)), floored at kMinStepFraction * base_step.
double effective_step(double base_step, double delta_adj);

/// Round half away from zero. Throws Overflow when |q| > bound.
int32_t quantize(double x, double step, int32_t bound = kSymbolBound);
inline double dequantize(int32_t q, double step) { return static_cast<double>(q) * step; }

enum class Distribution : uint8_t { kGaussian = 0, kLaplace = 1 };

/// Distribution of one integer symbol q: the mass of the continuous law
/// (mean, scale) over the bin [(q - 1/2) step, (q + 1/2) step].
struct SymbolModel {
  Distribution distribution = Distribution::kGaussian;
  double mean = 0.0;
  double scale = 1.0;  // sigma for Gaussian, b for Laplace
  double step = 1.0;
  int32_t bound = kSymbolBound;

  static SymbolModel gaussian(double mu, double sigma, double step) {
    return {Distribution::kGaussian, mu, sigma, step, kSymbolBound};
  }
  static SymbolModel laplace(double mean, double scale, double step, int32_t bound) {
    return {Distribution::kLaplace, mean, scale, step, bound};
  }

  friend bool operator==(const SymbolModel&, const SymbolModel&) = default;
};

/// Unfloored bin mass of symbol q.
double bin_mass(const SymbolModel& model, int64_t q);

/// Coding view of a SymbolModel over the alphabet [-bound, bound].
///
/// The contiguous window of symbols whose bin mass reaches the floor is coded
/// directly; every other symbol shares one escape entry (mass = tail mass,
/// floored) followed by a uniform index over the remaining alphabet. The
/// resulting probabilities sum to one over the alphabet.
class CodingDistribution {
 public:
  static constexpr uint64_t kTotal = uint64_t{1} << 32;

  explicit CodingDistribution(const SymbolModel& model);

  double probability(int64_t q) const;
  double bits(int64_t q) const;

  int64_t window_lo() const { return lo_; }
  int64_t window_hi() const { return hi_; }
  uint64_t rest() const { return rest_; }
  double normalizer() const { return z_; }

  // Integer cumulative table over `entries()` entries (window symbols in
  // ascending order, then the escape entry when rest() > 0), total kTotal.
  uint32_t entries() const { return entries_; }
  uint64_t cumulative(uint32_t k) const;
  uint32_t find_entry(uint64_t target) const;

  bool in_window(int64_t q) const { return q >= lo_ && q <= hi_; }
  uint32_t entry_of(int64_t q) const;     // q must be inside the window
  uint32_t escape_entry() const { return static_cast<uint32_t>(hi_ - lo_ + 1); }
  uint64_t escape_index(int64_t q) const;  // q outside the window
  int64_t escape_symbol(uint64_t index) const;

  static uint64_t uniform_cumulative(uint64_t k, uint64_t count);
  static uint64_t uniform_find(uint64_t target, uint64_t count);

 private:
  double z(double edge) const;
  double lower(double z) const;
  double upper(double z) const;
  double interval(double e0, double e1) const;
  double mass(int64_t q) const { return interval(static_cast<double>(q) - 0.5, static_cast<double>(q) + 0.5); }

  SymbolModel model_;
  int64_t lo_ = 0, hi_ = 0;
  bool floored_single_ = false;
  double single_mass_ = 0.0;
  double window_mass_ = 0.0;
  double escape_mass_ = 0.0;
  double z_ = 1.0;
  uint64_t rest_ = 0;
  uint32_t entries_ = 0;
  uint64_t spread_ = 0;
};

/// Probability of q under the floored, renormalised discretised model.
double symbol_probability(const SymbolModel& model, int32_t q);

/// Sum of -log2 P(symbol_i | model_i).
double estimate_rate(std::span<const int32_t> symbols, std::span<const SymbolModel> models);

/// 32-bit digest of a model sequence (CRC-32 over the canonical byte form).
uint32_t model_digest(std::span<const SymbolModel> models);
uint32_t model_digest_update(uint32_t crc, const SymbolModel& model);
uint32_t model_digest_init();

}  // namespace splatpack
