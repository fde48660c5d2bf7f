// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "splatpack/hierarchy.hpp"
#include "splatpack/spatial_graph.hpp"
#include "splatpack/types.hpp"

namespace splatpack {

/// D x D x D x C_e grid of kernel weights, stored ((x * D + y) * D + z) * C_e + c.
struct KernelTable {
  uint32_t resolution = 5;
  uint32_t channels = 12;
  std::vector<float> values;

  static KernelTable filled(uint32_t resolution, uint32_t channels, float value);
  float at(uint32_t x, uint32_t y, uint32_t z, uint32_t c) const {
    return values[((static_cast<size_t>(x) * resolution + y) * resolution + z) * channels + c];
  }
  void validate() const;
};

/// Fully connected layer, weight stored outputs x inputs row-major.
struct DenseLayer {
  uint32_t inputs = 0;
  uint32_t outputs = 0;
  std::vector<float> weight;
  std::vector<float> bias;
};

/// Feed-forward network: max(0, x) between layers, identity after the last.
struct MlpParams {
  std::vector<DenseLayer> layers;

  /// widths = {input, hidden..., output}; all parameters zero.
  static MlpParams zeros(std::span<const uint32_t> widths);
  size_t input_width() const { return layers.empty() ? 0 : layers.front().inputs; }
  size_t output_width() const { return layers.empty() ? 0 : layers.back().outputs; }
  size_t parameter_count() const;
  void validate() const;
};

/// Forward pass. When `activations` is given it receives the output of every
/// layer (after ReLU for hidden layers); its last entry equals the result.
std::vector<double> mlp_forward(const MlpParams& mlp, std::span<const double> input,
                                std::vector<std::vector<double>>* activations = nullptr);

/// Corner indices (into the D^3 node grid) and blend weights of a lookup.
struct TrilinearStencil {
  std::array<uint32_t, 8> node{};
  std::array<double, 8> weight{};
};

TrilinearStencil trilinear_stencil(uint32_t resolution, const Vec3& u);
std::vector<double> trilinear_lookup(const KernelTable& table, const Vec3& offset_normalized);

/// delta_p / (2 * neighborhood_scale) + 0.5, clamped to [0, 1].
Vec3 normalize_offset(const Vec3& delta_p, double neighborhood_scale);

std::vector<double> feature_branch(std::span<const double> delta_f, const Vec3& delta_p, const MlpParams& phi);

/// Affine map of scene positions into roughly [-1, 1]^3, fixed per cloud from
/// decoder-visible positions.
struct PositionFrame {
  Vec3 center{0.0, 0.0, 0.0};
  double half_extent = 1.0;

  static PositionFrame bounding(std::span<const Vec3> positions);
  Vec3 apply(const Vec3& p) const;
};

struct ContextVector {
  std::vector<double> geometry_feature;  // C_e
  std::vector<double> assembled;         // [geometry_feature | p | s_parent | o_parent]
};

/// Sums kernel-weighted feature-branch embeddings over the query's neighbors
/// in ascending neighbor-index order.
ContextVector aggregate_context(size_t query, const PreliminaryContext& prelim, const NeighborGraph& graph,
                                const KernelTable& table, const MlpParams& phi, double neighborhood_scale,
                                const PositionFrame& frame = {});

struct EntropyParams {
  std::vector<double> mu;
  std::vector<double> sigma;
  std::vector<double> delta_adj;
};

inline constexpr double kDefaultSigmaMin = 1e-4;

double softplus(double x);
/// softplus(raw) + sigma_min, kept strictly above sigma_min when softplus underflows.
double positive_scale(double raw, double sigma_min);
double softplus_inverse(double y);

/// Head output [mu | sigma_raw | delta_adj]; sigma = positive_scale(raw, sigma_min).
EntropyParams entropy_head(const ContextVector& context, const MlpParams& head, double sigma_min = kDefaultSigmaMin);

}  // namespace splatpack
