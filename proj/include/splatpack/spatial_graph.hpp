// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "splatpack/types.hpp"

namespace splatpack {

/// k-nearest-within-radius adjacency. Lists are sorted by ascending distance,
/// ties broken by ascending anchor index; no self loops.
class NeighborGraph {
 public:
  NeighborGraph() = default;
  NeighborGraph(std::vector<std::vector<uint32_t>> lists, uint32_t k, std::optional<double> radius)
      : lists_(std::move(lists)), k_(k), radius_(radius) {}

  size_t size() const { return lists_.size(); }
  uint32_t k() const { return k_; }
  std::optional<double> radius() const { return radius_; }
  const std::vector<std::vector<uint32_t>>& lists() const { return lists_; }

  /// Same as query_neighbors(); throws IndexOutOfRange.
  std::span<const uint32_t> neighbors(size_t i) const;

  size_t edge_count() const;

  /// "i: j1 j2 ..." per line.
  std::string dump() const;
  std::vector<uint8_t> serialize() const;

  friend bool operator==(const NeighborGraph&, const NeighborGraph&) = default;

 private:
  std::vector<std::vector<uint32_t>> lists_;
  uint32_t k_ = 0;
  std::optional<double> radius_;
};

/// Static k-d tree over a point set. Distance ties resolve to the lower point
/// index, so results equal an exhaustive scan with the same ordering.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points);

  struct Hit {
    double d2;
    uint32_t index;
    friend bool operator<(const Hit& a, const Hit& b) {
      return a.d2 < b.d2 || (a.d2 == b.d2 && a.index < b.index);
    }
  };

  /// Up to k hits with squared distance <= max_d2, skipping `exclude`,
  /// sorted ascending.
  std::vector<Hit> nearest(const Vec3& query, uint32_t k, double max_d2,
                           std::optional<uint32_t> exclude = std::nullopt) const;

  size_t size() const { return points_.size(); }

 private:
  struct Node {
    uint32_t begin, end;  // range in order_
    uint32_t split;       // position in order_ of the splitting point
    uint8_t axis;
    int32_t left = -1, right = -1;
  };

  int32_t build(uint32_t begin, uint32_t end, int depth);
  void search(int32_t node, const Vec3& q, uint32_t k, double max_d2, std::optional<uint32_t> exclude,
              std::vector<Hit>& heap) const;

  std::vector<Vec3> points_;
  std::vector<uint32_t> order_;
  std::vector<Node> nodes_;
  int32_t root_ = -1;
};

/// Builds the graph; radius = nullopt means unbounded. Throws InvalidParam for
/// k == 0 or radius <= 0.
NeighborGraph build_graph(std::span<const Vec3> positions, uint32_t k, std::optional<double> radius);

std::span<const uint32_t> query_neighbors(const NeighborGraph& graph, size_t i);

}  // namespace splatpack
