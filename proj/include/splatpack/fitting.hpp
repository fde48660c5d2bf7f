// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "splatpack/codec.hpp"
#include "splatpack/context_model.hpp"
#include "splatpack/profile.hpp"
#include "splatpack/types.hpp"

namespace splatpack {

/// Seeded starting point for fitting. Level-1 prior and the head's output
/// biases are moment-matched to the dequantised attributes; hidden layers use
/// fan-in scaled uniform weights; head output weights and parent gains start
/// at zero, so the initial level-2 model is the context-free per-channel
/// Gaussian.
ContextModelParams initial_params(const AnchorCloud& cloud, const CodecProfile& profile, uint64_t seed);

/// Attribute rate objective on a fixed cloud. Quantisation steps (and hence
/// symbols) are taken from `reference` and stay fixed; the step-adjustment
/// parameters are excluded from training.
class RateObjective {
 public:
  RateObjective(const AnchorCloud& cloud, const CodecProfile& profile, const ContextModelParams& reference);
  ~RateObjective();
  RateObjective(RateObjective&&) noexcept;

  const ModelShape& shape() const;
  /// True for parameters updated by fitting.
  const std::vector<bool>& trainable() const;

  /// Smooth surrogate of the attribute bits at parameters `theta` (flatten()
  /// order): sum of -log2 max(bin mass, floor) over all level-1 and level-2
  /// symbols. Fills `gradient` when given.
  double surrogate(std::span<const double> theta, std::vector<double>* gradient) const;

  /// Exact estimated attribute bits (level-1 + level-2 sections) under params.
  double rate(const ContextModelParams& params) const;

  /// Estimated bits of the level-2 feature symbols only.
  double level2_feature_rate(const ContextModelParams& params) const;

  const CodingPlan& plan() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct FitOptions {
  uint32_t iterations = 150;
  double learning_rate = 0.003;
};

struct FitResult {
  ContextModelParams params;
  /// trace[0] is the rate of `init`; trace[t] the rate after step t.
  std::vector<double> trace;
  size_t best_iteration = 0;
  uint32_t learning_rate_halvings = 0;
};

/// Adam on the surrogate; returns the iterate with the lowest exact rate in
/// the trace (ties to the earliest), so the result never exceeds `init`.
FitResult fit_context_model(const AnchorCloud& cloud, const CodecProfile& profile, const ContextModelParams& init,
                            const FitOptions& options);

}  // namespace splatpack
