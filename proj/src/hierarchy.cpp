// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#include "splatpack/hierarchy.hpp"

#include <cmath>
#include <unordered_map>

#include "byte_io.hpp"
#include "splatpack/error.hpp"

namespace splatpack {
namespace {

struct VoxelHash {
  size_t operator()(const VoxelKey& k) const noexcept {
    uint64_t h = 1469598103934665603ull;
    for (int64_t v : k) {
      h ^= static_cast<uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return static_cast<size_t>(h);
  }
};

}  // namespace

VoxelKey voxel_of(const Vec3& p, double voxel) {
  VoxelKey key;
  for (int a = 0; a < 3; ++a) {
    const double v = std::floor(p[a] / voxel);
    require(std::fabs(v) < 4.0e18, ErrorKind::kOverflow, "voxel coordinate out of range");
    key[a] = static_cast<int64_t>(v);
  }
  return key;
}

std::vector<uint8_t> Hierarchy::serialize() const {
  detail::ByteWriter w;
  w.u32(static_cast<uint32_t>(level1.size()));
  for (uint32_t v : level1) w.u32(v);
  w.u32(static_cast<uint32_t>(level2.size()));
  for (size_t j = 0; j < level2.size(); ++j) {
    w.u32(level2[j]);
    w.u32(parent_of[j]);
    w.u32(parent_slot[j]);
  }
  return w.take();
}

Hierarchy partition(std::span<const Vec3> positions, double base_voxel_size, double voxel_scale) {
  require(voxel_scale > 1.0 && std::isfinite(voxel_scale), ErrorKind::kInvalidParam, "voxel_scale must exceed 1");
  require(base_voxel_size > 0.0, ErrorKind::kInvalidParam, "base voxel size must be positive");
  require(!positions.empty(), ErrorKind::kEmptyCloud, "cannot partition an empty cloud");
  Hierarchy h;
  h.voxel_scale = voxel_scale;
  h.coarse_voxel_size = voxel_scale * base_voxel_size;

  // Indices are visited in ascending order, so the first anchor seen in a
  // voxel is its minimum-index anchor.
  std::unordered_map<VoxelKey, uint32_t, VoxelHash> first_in_voxel;
  first_in_voxel.reserve(positions.size());
  for (uint32_t i = 0; i < positions.size(); ++i) {
    const VoxelKey key = voxel_of(positions[i], h.coarse_voxel_size);
    auto [it, inserted] = first_in_voxel.try_emplace(key, static_cast<uint32_t>(h.level1.size()));
    if (inserted) {
      h.level1.push_back(i);
    } else {
      h.level2.push_back(i);
      h.parent_slot.push_back(it->second);
      h.parent_of.push_back(h.level1[it->second]);
    }
  }
  return h;
}

Hierarchy partition(const AnchorCloud& cloud, double voxel_scale) {
  const auto positions = cloud.positions();
  return partition(positions, cloud.base_voxel_size, voxel_scale);
}

PreliminaryContext preliminary_context(const Hierarchy& hierarchy, std::span<const AnchorAttributes> level1_attrs,
                                       std::span<const Vec3> level2_positions) {
  require(level2_positions.size() == hierarchy.level2.size(), ErrorKind::kDimensionMismatch,
          "level-2 position count does not match the hierarchy");
  require(level1_attrs.size() == hierarchy.level1.size(), ErrorKind::kDimensionMismatch,
          "level-1 attribute count does not match the hierarchy");
  PreliminaryContext ctx;
  ctx.positions.assign(level2_positions.begin(), level2_positions.end());
  ctx.parent_slot = hierarchy.parent_slot;
  ctx.inherited.reserve(level2_positions.size());
  for (size_t j = 0; j < hierarchy.level2.size(); ++j) {
    const uint32_t slot = hierarchy.parent_slot[j];
    require(slot < level1_attrs.size() && hierarchy.level1[slot] == hierarchy.parent_of[j], ErrorKind::kMissingParent,
            "level-2 anchor " + std::to_string(hierarchy.level2[j]) + " has no decoded parent");
    ctx.inherited.push_back(level1_attrs[slot]);
  }
  return ctx;
}

}  // namespace splatpack
