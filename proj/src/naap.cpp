// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#include "splatpack/naap.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "splatpack/error.hpp"

namespace splatpack {

void PruneConfig::validate() const {
  require(lambda_blend >= 0.0 && lambda_blend <= 1.0, ErrorKind::kInvalidParam, "lambda_blend must lie in [0, 1]");
  require(gamma >= 0.0 && gamma <= 1.0, ErrorKind::kInvalidParam, "gamma must lie in [0, 1]");
  require(epsilon > 0.0, ErrorKind::kInvalidParam, "epsilon must be positive");
  require(std::isfinite(tau), ErrorKind::kInvalidParam, "tau must be finite");
  require(k >= 1, ErrorKind::kInvalidParam, "k must be at least 1");
}

size_t PruneReport::pruned_count() const {
  size_t n = 0;
  for (bool p : prune_mask) n += p;
  return n;
}

std::string PruneReport::to_tsv(const AnchorCloud& original) const {
  std::ostringstream out;
  out.precision(17);
  out << "index\tmean_opacity\tsmoothed_opacity\timportance\tpruned\tmerge_target\tnew_index\n";
  for (size_t i = 0; i < prune_mask.size(); ++i) {
    out << i << '\t' << original.anchors[i].mean_opacity << '\t' << smoothed_opacity[i] << '\t' << importance[i]
        << '\t' << (prune_mask[i] ? 1 : 0) << '\t';
    if (merge_target[i] == kRemoved) out << '-'; else out << merge_target[i];
    out << '\t';
    if (survivor_map[i] == kRemoved) out << '-'; else out << survivor_map[i];
    out << '\n';
  }
  return out.str();
}

double distance_weight(const Vec3& a, const Vec3& b, double epsilon) {
  return 1.0 / (std::sqrt(squared_distance(a, b)) + epsilon);
}

std::vector<double> smoothed_opacity(const AnchorCloud& cloud, const NeighborGraph& graph, double epsilon) {
  require(graph.size() == cloud.size(), ErrorKind::kDimensionMismatch,
          "graph has " + std::to_string(graph.size()) + " nodes, cloud has " + std::to_string(cloud.size()));
  require(epsilon > 0.0, ErrorKind::kInvalidParam, "epsilon must be positive");
  std::vector<double> phi(cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) {
    const Anchor& a = cloud.anchors[i];
    double numerator = a.mean_opacity;
    double denominator = 1.0;
    for (uint32_t j : graph.neighbors(i)) {
      const double w = distance_weight(a.position, cloud.anchors[j].position, epsilon);
      numerator += w * cloud.anchors[j].mean_opacity;
      denominator += w;
    }
    phi[i] = numerator / denominator;
  }
  return phi;
}

std::vector<double> importance_scores(std::span<const double> mean_opacity, std::span<const double> smoothed,
                                      double lambda_blend) {
  require(mean_opacity.size() == smoothed.size(), ErrorKind::kDimensionMismatch,
          "opacity and smoothed-opacity lengths differ");
  require(lambda_blend >= 0.0 && lambda_blend <= 1.0, ErrorKind::kInvalidParam, "lambda_blend must lie in [0, 1]");
  std::vector<double> xi(mean_opacity.size());
  for (size_t i = 0; i < xi.size(); ++i) xi[i] = (1.0 - lambda_blend) * mean_opacity[i] + lambda_blend * smoothed[i];
  return xi;
}

std::pair<AnchorCloud, PruneReport> prune_and_merge(const AnchorCloud& cloud, const PruneConfig& config) {
  config.validate();
  cloud.validate();
  const size_t n = cloud.size();
  const auto positions = cloud.positions();
  const NeighborGraph graph = build_graph(positions, config.k, config.radius);

  PruneReport report;
  report.smoothed_opacity = smoothed_opacity(cloud, graph, config.epsilon);
  std::vector<double> alpha(n);
  for (size_t i = 0; i < n; ++i) alpha[i] = cloud.anchors[i].mean_opacity;
  report.importance = importance_scores(alpha, report.smoothed_opacity, config.lambda_blend);

  report.prune_mask.assign(n, false);
  report.merge_target.assign(n, kRemoved);
  report.survivor_map.assign(n, kRemoved);
  std::vector<uint32_t> survivors;
  for (size_t i = 0; i < n; ++i) {
    report.prune_mask[i] = report.importance[i] < config.tau;
    if (!report.prune_mask[i]) {
      report.survivor_map[i] = static_cast<uint32_t>(survivors.size());
      survivors.push_back(static_cast<uint32_t>(i));
    }
  }
  if (n > 0 && survivors.empty()) {
    fail(ErrorKind::kDegenerateScene, "every anchor scores below tau = " + std::to_string(config.tau));
  }

  AnchorCloud out;
  out.base_voxel_size = cloud.base_voxel_size;
  out.channel_count = cloud.channel_count;
  out.offsets_count = cloud.offsets_count;
  out.anchors.reserve(survivors.size());
  for (uint32_t s : survivors) out.anchors.push_back(cloud.anchors[s]);

  if (survivors.size() == n) return {std::move(out), std::move(report)};

  // Survivor order equals original order, so the tree's index tie-break
  // coincides with the original-index tie-break.
  std::vector<Vec3> survivor_positions;
  survivor_positions.reserve(survivors.size());
  for (uint32_t s : survivors) survivor_positions.push_back(positions[s]);
  const KdTree tree(survivor_positions);

  const double g = config.gamma;
  for (size_t r = 0; r < n; ++r) {
    if (!report.prune_mask[r]) continue;
    const auto hit = tree.nearest(positions[r], 1, std::numeric_limits<double>::infinity());
    const uint32_t local = hit.front().index;
    report.merge_target[r] = survivors[local];
    Anchor& target = out.anchors[local];
    const Anchor& pruned = cloud.anchors[r];
    for (size_t c = 0; c < target.offsets.size(); ++c) target.offsets[c] = (1.0 - g) * target.offsets[c] + g * pruned.offsets[c];
    for (size_t c = 0; c < 3; ++c) target.scaling[c] = (1.0 - g) * target.scaling[c] + g * pruned.scaling[c];
    target.mean_opacity = (1.0 - g) * target.mean_opacity + g * pruned.mean_opacity;
  }
  return {std::move(out), std::move(report)};
}

}  // namespace splatpack
