// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "splatpack/types.hpp"

namespace splatpack {

using VoxelKey = std::array<int64_t, 3>;

/// floor(p / voxel) per axis (floor toward -inf).
VoxelKey voxel_of(const Vec3& p, double voxel);

/// Two-level split: in every coarse voxel the minimum-index anchor is level 1
/// and the rest are level 2, each pointing at that level-1 parent.
struct Hierarchy {
  std::vector<uint32_t> level1;       // ascending anchor indices
  std::vector<uint32_t> level2;       // ascending anchor indices
  std::vector<uint32_t> parent_of;    // per level-2 entry: parent anchor index
  std::vector<uint32_t> parent_slot;  // per level-2 entry: position of the parent in level1
  double coarse_voxel_size = 0.0;
  double voxel_scale = 0.0;

  std::vector<uint8_t> serialize() const;
  friend bool operator==(const Hierarchy&, const Hierarchy&) = default;
};

Hierarchy partition(std::span<const Vec3> positions, double base_voxel_size, double voxel_scale);
Hierarchy partition(const AnchorCloud& cloud, double voxel_scale);

/// Per level-2 query: its own position plus the decoded attributes of its
/// level-1 parent.
struct PreliminaryContext {
  std::vector<Vec3> positions;
  std::vector<uint32_t> parent_slot;
  std::vector<AnchorAttributes> inherited;

  size_t size() const { return positions.size(); }
};

/// level1_attrs is aligned with hierarchy.level1, level2_positions with
/// hierarchy.level2.
PreliminaryContext preliminary_context(const Hierarchy& hierarchy, std::span<const AnchorAttributes> level1_attrs,
                                       std::span<const Vec3> level2_positions);

}  // namespace splatpack
