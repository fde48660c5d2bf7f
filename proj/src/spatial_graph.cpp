// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#include "splatpack/spatial_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "byte_io.hpp"
#include "splatpack/error.hpp"
#include "splatpack/parallel.hpp"

namespace splatpack {
namespace {

constexpr uint32_t kLeafSize = 8;

}  // namespace

std::span<const uint32_t> NeighborGraph::neighbors(size_t i) const {
  require(i < lists_.size(), ErrorKind::kIndexOutOfRange,
          "anchor " + std::to_string(i) + " out of range (" + std::to_string(lists_.size()) + " anchors)");
  return lists_[i];
}

size_t NeighborGraph::edge_count() const {
  size_t n = 0;
  for (const auto& l : lists_) n += l.size();
  return n;
}

std::string NeighborGraph::dump() const {
  std::ostringstream out;
  for (size_t i = 0; i < lists_.size(); ++i) {
    out << i << ":";
    for (uint32_t j : lists_[i]) out << ' ' << j;
    out << '\n';
  }
  return out.str();
}

std::vector<uint8_t> NeighborGraph::serialize() const {
  detail::ByteWriter w;
  w.u32(static_cast<uint32_t>(lists_.size()));
  w.u32(k_);
  w.f32(radius_ ? static_cast<float>(*radius_) : 0.0f);
  for (const auto& l : lists_) {
    w.u32(static_cast<uint32_t>(l.size()));
    for (uint32_t j : l) w.u32(j);
  }
  return w.take();
}

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  for (uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<uint32_t>(points_.size()), 0);
  }
}

int32_t KdTree::build(uint32_t begin, uint32_t end, int depth) {
  Node node{begin, end, 0, 0};
  const int32_t id = static_cast<int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  // Split on the axis of largest extent.
  Vec3 lo, hi;
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (uint32_t i = begin; i < end; ++i) {
    const Vec3& p = points_[order_[i]];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  uint8_t axis = 0;
  for (uint8_t a = 1; a < 3; ++a) {
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
  }
  (void)depth;
  const uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](uint32_t x, uint32_t y) {
                     const double px = points_[x][axis], py = points_[y][axis];
                     return px < py || (px == py && x < y);
                   });
  nodes_[id].axis = axis;
  nodes_[id].split = mid;
  const int32_t left = build(begin, mid, depth + 1);
  const int32_t right = build(mid + 1, end, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(int32_t id, const Vec3& q, uint32_t k, double max_d2, std::optional<uint32_t> exclude,
                    std::vector<Hit>& heap) const {
  const Node& node = nodes_[id];
  auto consider = [&](uint32_t index) {
    if (exclude && index == *exclude) return;
    const double d2 = squared_distance(q, points_[index]);
    if (!(d2 <= max_d2)) return;
    const Hit hit{d2, index};
    if (heap.size() < k) {
      heap.push_back(hit);
      std::push_heap(heap.begin(), heap.end());
    } else if (hit < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = hit;
      std::push_heap(heap.begin(), heap.end());
    }
  };
  auto bound = [&] { return heap.size() < k ? max_d2 : heap.front().d2; };

  if (node.left < 0) {
    for (uint32_t i = node.begin; i < node.end; ++i) consider(order_[i]);
    return;
  }
  const uint32_t split_index = order_[node.split];
  // Rounding is monotone, so the computed squared distance to any point on
  // the far side is never below diff * diff; equality must still be visited
  // because an equal distance may carry a lower index.
  const double diff = q[node.axis] - points_[split_index][node.axis];
  const int32_t near = diff < 0 ? node.left : node.right;
  const int32_t far = diff < 0 ? node.right : node.left;
  search(near, q, k, max_d2, exclude, heap);
  consider(split_index);
  if (diff * diff <= bound()) search(far, q, k, max_d2, exclude, heap);
}

std::vector<KdTree::Hit> KdTree::nearest(const Vec3& query, uint32_t k, double max_d2,
                                         std::optional<uint32_t> exclude) const {
  std::vector<Hit> heap;
  if (root_ < 0 || k == 0) return heap;
  heap.reserve(k + 1);
  search(root_, query, k, max_d2, exclude, heap);
  std::sort(heap.begin(), heap.end());
  return heap;
}

NeighborGraph build_graph(std::span<const Vec3> positions, uint32_t k, std::optional<double> radius) {
  require(k >= 1, ErrorKind::kInvalidParam, "k must be at least 1");
  if (radius) {
    require(*radius > 0.0 && !std::isnan(*radius), ErrorKind::kInvalidParam, "radius must be positive");
    if (std::isinf(*radius)) radius.reset();
  }
  for (const Vec3& p : positions) {
    require(std::isfinite(p[0]) && std::isfinite(p[1]) && std::isfinite(p[2]), ErrorKind::kInvalidParam,
            "positions must be finite");
  }
  const double max_d2 = radius ? (*radius) * (*radius) : std::numeric_limits<double>::infinity();
  KdTree tree(positions);
  std::vector<std::vector<uint32_t>> lists(positions.size());
  parallel_for_chunks(positions.size(), 256, [&](size_t, size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      auto hits = tree.nearest(positions[i], k, max_d2, static_cast<uint32_t>(i));
      auto& list = lists[i];
      list.reserve(hits.size());
      for (const auto& h : hits) list.push_back(h.index);
    }
  });
  return NeighborGraph(std::move(lists), k, radius);
}

std::span<const uint32_t> query_neighbors(const NeighborGraph& graph, size_t i) { return graph.neighbors(i); }

}  // namespace splatpack
