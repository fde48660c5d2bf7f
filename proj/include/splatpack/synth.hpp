// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "splatpack/types.hpp"

namespace splatpack {

enum class FeatureModel { kIidGaussian, kSmoothField, kClustered };

const char* feature_model_name(FeatureModel model);
FeatureModel parse_feature_model(const std::string& name);

struct SynthSpec {
  uint32_t count = 1000;
  Vec3 bbox_min{0.0, 0.0, 0.0};
  Vec3 bbox_max{1.0, 1.0, 1.0};
  FeatureModel model = FeatureModel::kSmoothField;
  double length_scale = 0.3;  // smooth-field correlation length
  double noise = 0.1;         // smooth-field additive noise std
  uint32_t cluster_count = 8;
  double cluster_spread = 0.05;  // clustered: position std around centres
  uint32_t channel_count = kDefaultChannelCount;
  uint32_t offsets_count = kDefaultOffsetsCount;
  /// nullopt: chosen so a coarse voxel (voxel_scale * base) holds about six
  /// anchors on average.
  std::optional<double> base_voxel_size;
  double voxel_scale = 4.0;
  uint64_t seed = 0;

  void validate() const;
};

/// Deterministic per seed; values are rounded to f32.
///
/// iid-gaussian: uniform positions, N(0, 1) features.
/// smooth-field: uniform positions, features from a random-Fourier-feature
///   Gaussian field (unit variance, squared-exponential correlation with the
///   given length scale) plus noise.
/// clustered: positions in Gaussian blobs, features equal to the blob's
///   feature vector plus N(0, 0.1^2).
/// Scaling is log-normal around twice the base voxel, offsets are
/// N(0, (2 base voxel)^2), opacity is uniform in [0, 1].
AnchorCloud generate(const SynthSpec& spec);

/// Mean over feature channels of the Pearson correlation between f_i and f_j
/// across all directed k-NN edges (i, j).
double neighbor_feature_correlation(const AnchorCloud& cloud, uint32_t k = 8);

}  // namespace splatpack
