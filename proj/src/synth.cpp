// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#include "splatpack/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "splatpack/cloud_io.hpp"
#include "splatpack/error.hpp"
#include "splatpack/spatial_graph.hpp"

namespace splatpack {
namespace {

constexpr int kFourierFeatures = 64;
constexpr double kClusterFeatureNoise = 0.1;

}  // namespace

const char* feature_model_name(FeatureModel model) {
  switch (model) {
    case FeatureModel::kIidGaussian: return "iid-gaussian";
    case FeatureModel::kSmoothField: return "smooth-field";
    case FeatureModel::kClustered: return "clustered";
  }
  return "unknown";
}

FeatureModel parse_feature_model(const std::string& name) {
  if (name == "iid-gaussian") return FeatureModel::kIidGaussian;
  if (name == "smooth-field") return FeatureModel::kSmoothField;
  if (name == "clustered") return FeatureModel::kClustered;
  fail(ErrorKind::kInvalidParam, "unknown feature model '" + name + "' (iid-gaussian, smooth-field, clustered)");
}

void SynthSpec::validate() const {
  for (int a = 0; a < 3; ++a) {
    require(std::isfinite(bbox_min[a]) && std::isfinite(bbox_max[a]) && bbox_max[a] > bbox_min[a],
            ErrorKind::kInvalidParam, "bounding box must have positive extent on every axis");
  }
  require(length_scale > 0.0, ErrorKind::kInvalidParam, "length scale must be positive");
  require(noise >= 0.0, ErrorKind::kInvalidParam, "noise must be non-negative");
  require(cluster_count >= 1, ErrorKind::kInvalidParam, "cluster count must be >= 1");
  require(cluster_spread > 0.0, ErrorKind::kInvalidParam, "cluster spread must be positive");
  require(!base_voxel_size || *base_voxel_size > 0.0, ErrorKind::kInvalidParam, "base voxel size must be positive");
  require(voxel_scale > 1.0, ErrorKind::kInvalidParam, "voxel scale must exceed 1");
}

AnchorCloud generate(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const Vec3 extent{spec.bbox_max[0] - spec.bbox_min[0], spec.bbox_max[1] - spec.bbox_min[1],
                    spec.bbox_max[2] - spec.bbox_min[2]};
  const double volume = extent[0] * extent[1] * extent[2];
  AnchorCloud cloud;
  cloud.channel_count = spec.channel_count;
  cloud.offsets_count = spec.offsets_count;
  if (spec.base_voxel_size) {
    cloud.base_voxel_size = *spec.base_voxel_size;
  } else {
    const double per_anchor = volume / std::max<double>(spec.count, 1.0);
    cloud.base_voxel_size = std::cbrt(6.0 * per_anchor) / spec.voxel_scale;
  }
  const double voxel = cloud.base_voxel_size;

  // Field and cluster parameters are drawn before any anchor so that the
  // feature model does not depend on the anchor count.
  std::vector<Vec3> omega(kFourierFeatures);
  std::vector<double> phase(kFourierFeatures);
  std::vector<double> amplitude(static_cast<size_t>(spec.channel_count) * kFourierFeatures);
  std::vector<Vec3> centres(spec.cluster_count);
  std::vector<double> cluster_features(static_cast<size_t>(spec.cluster_count) * spec.channel_count);
  if (spec.model == FeatureModel::kSmoothField) {
    for (int m = 0; m < kFourierFeatures; ++m) {
      for (int a = 0; a < 3; ++a) omega[m][a] = normal(rng) / spec.length_scale;
      phase[m] = 2.0 * std::numbers::pi * unit(rng);
    }
    for (double& v : amplitude) v = normal(rng);
  } else if (spec.model == FeatureModel::kClustered) {
    for (auto& c : centres) {
      for (int a = 0; a < 3; ++a) c[a] = spec.bbox_min[a] + extent[a] * unit(rng);
    }
    for (double& v : cluster_features) v = normal(rng);
  }

  const double field_norm = std::sqrt(2.0 / kFourierFeatures);
  std::vector<double> basis(kFourierFeatures);
  cloud.anchors.resize(spec.count);
  for (uint32_t i = 0; i < spec.count; ++i) {
    Anchor& a = cloud.anchors[i];
    uint32_t cluster = 0;
    if (spec.model == FeatureModel::kClustered) {
      cluster = static_cast<uint32_t>(rng() % spec.cluster_count);
      for (int d = 0; d < 3; ++d) {
        a.position[d] = std::clamp(centres[cluster][d] + spec.cluster_spread * normal(rng), spec.bbox_min[d],
                                   spec.bbox_max[d]);
      }
    } else {
      for (int d = 0; d < 3; ++d) a.position[d] = spec.bbox_min[d] + extent[d] * unit(rng);
    }

    a.feature.resize(spec.channel_count);
    switch (spec.model) {
      case FeatureModel::kIidGaussian:
        for (double& f : a.feature) f = normal(rng);
        break;
      case FeatureModel::kSmoothField:
        for (int m = 0; m < kFourierFeatures; ++m) {
          const double arg = omega[m][0] * a.position[0] + omega[m][1] * a.position[1] +
                             omega[m][2] * a.position[2] + phase[m];
          basis[m] = field_norm * std::cos(arg);
        }
        for (uint32_t c = 0; c < spec.channel_count; ++c) {
          double v = 0.0;
          for (int m = 0; m < kFourierFeatures; ++m) v += amplitude[static_cast<size_t>(c) * kFourierFeatures + m] * basis[m];
          a.feature[c] = v + spec.noise * normal(rng);
        }
        break;
      case FeatureModel::kClustered:
        for (uint32_t c = 0; c < spec.channel_count; ++c) {
          a.feature[c] = cluster_features[static_cast<size_t>(cluster) * spec.channel_count + c] +
                         kClusterFeatureNoise * normal(rng);
        }
        break;
    }
    for (double& s : a.scaling) s = 2.0 * voxel * std::exp(0.2 * normal(rng));
    a.offsets.resize(3 * size_t{spec.offsets_count});
    for (double& o : a.offsets) o = 2.0 * voxel * normal(rng);
    a.mean_opacity = unit(rng);
  }
  return round_to_storage_precision(std::move(cloud));
}

double neighbor_feature_correlation(const AnchorCloud& cloud, uint32_t k) {
  if (cloud.size() < 2 || cloud.channel_count == 0) return 0.0;
  const NeighborGraph graph = build_graph(cloud.positions(), k, std::nullopt);
  double total = 0.0;
  for (uint32_t c = 0; c < cloud.channel_count; ++c) {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0, n = 0;
    for (size_t i = 0; i < cloud.size(); ++i) {
      for (uint32_t j : graph.neighbors(i)) {
        const double x = cloud.anchors[i].feature[c];
        const double y = cloud.anchors[j].feature[c];
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        n += 1;
      }
    }
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double vx = sxx / n - (sx / n) * (sx / n);
    const double vy = syy / n - (sy / n) * (sy / n);
    total += (vx > 0 && vy > 0) ? cov / std::sqrt(vx * vy) : 0.0;
  }
  return total / cloud.channel_count;
}

}  // namespace splatpack
