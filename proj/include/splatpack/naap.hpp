// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "splatpack/spatial_graph.hpp"
#include "splatpack/types.hpp"

namespace splatpack {

// Neighborhood-aware anchor pruning: each anchor's opacity is smoothed over
// its k-NN neighborhood with inverse-distance weights, blended with its own
// opacity into an importance score, and anchors scoring below tau are merged
// into their nearest surviving anchor.

struct PruneConfig {
  double lambda_blend = 0.5;
  double tau = 0.0;
  double gamma = 0.5;
  double epsilon = 1e-8;
  uint32_t k = 8;
  std::optional<double> radius;  // nullopt = unbounded

  void validate() const;
};

inline constexpr uint32_t kRemoved = UINT32_MAX;

struct PruneReport {
  std::vector<double> importance;
  std::vector<double> smoothed_opacity;
  std::vector<bool> prune_mask;
  std::vector<uint32_t> merge_target;  // per anchor; kRemoved for survivors
  std::vector<uint32_t> survivor_map;  // old index -> new index, or kRemoved

  size_t pruned_count() const;
  /// Tab-separated: index, mean_opacity, smoothed, importance, pruned, target, new_index.
  std::string to_tsv(const AnchorCloud& original) const;
};

/// Inverse-distance weight (d + eps)^-1 between two anchors.
double distance_weight(const Vec3& a, const Vec3& b, double epsilon);

std::vector<double> smoothed_opacity(const AnchorCloud& cloud, const NeighborGraph& graph, double epsilon);

std::vector<double> importance_scores(std::span<const double> mean_opacity, std::span<const double> smoothed,
                                      double lambda_blend);

std::pair<AnchorCloud, PruneReport> prune_and_merge(const AnchorCloud& cloud, const PruneConfig& config);

}  // namespace splatpack
