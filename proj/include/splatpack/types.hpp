// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace splatpack {

using Vec3 = std::array<double, 3>;

inline constexpr uint32_t kDefaultChannelCount = 50;
inline constexpr uint32_t kDefaultOffsetsCount = 10;

/// One scene anchor. Values are held in double precision in memory; the
/// native file format stores them as f32.
struct Anchor {
  Vec3 position{};
  std::vector<double> feature;
  Vec3 scaling{1.0, 1.0, 1.0};
  std::vector<double> offsets;  // offsets_count rows of (x, y, z)
  double mean_opacity = 0.0;

  friend bool operator==(const Anchor&, const Anchor&) = default;
};

/// Attribute tuple that is entropy coded per anchor (everything but position
/// and opacity).
struct AnchorAttributes {
  std::vector<double> feature;
  Vec3 scaling{};
  std::vector<double> offsets;

  friend bool operator==(const AnchorAttributes&, const AnchorAttributes&) = default;
};

/// Ordered anchor collection. Index into `anchors` is anchor identity.
struct AnchorCloud {
  std::vector<Anchor> anchors;
  double base_voxel_size = 0.01;
  uint32_t channel_count = kDefaultChannelCount;
  uint32_t offsets_count = kDefaultOffsetsCount;

  size_t size() const { return anchors.size(); }
  bool empty() const { return anchors.empty(); }

  /// Number of coded attribute channels per anchor: C + 3 + 3 * K_off.
  size_t coded_channels() const { return channel_count + 3 + 3 * size_t{offsets_count}; }

  std::vector<Vec3> positions() const;

  /// Throws Error(kValidation) naming the first offending anchor and field.
  void validate() const;

  friend bool operator==(const AnchorCloud&, const AnchorCloud&) = default;
};

inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

/// Copies the coded attributes of an anchor in channel order
/// [feature | scaling | offsets].
void gather_channels(const Anchor& anchor, std::span<double> out);
void scatter_channels(std::span<const double> in, Anchor& anchor);

}  // namespace splatpack
