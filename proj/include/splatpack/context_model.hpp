// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "splatpack/entropy.hpp"
#include "splatpack/ggconv.hpp"
#include "splatpack/hierarchy.hpp"
#include "splatpack/profile.hpp"
#include "splatpack/spatial_graph.hpp"

namespace splatpack {

/// Dimensions of a ContextModelParams. A hidden width of 0 means the network
/// is a single linear layer.
struct ModelShape {
  uint32_t channel_count = kDefaultChannelCount;
  uint32_t offsets_count = kDefaultOffsetsCount;
  uint32_t embed_width = 12;
  uint32_t phi_hidden = 64;
  uint32_t head_hidden = 64;
  uint32_t table_resolution = 5;
  bool has_context = true;  // false when the cloud has no level-2 anchors

  static ModelShape from_profile(const CodecProfile& profile, uint32_t channel_count, uint32_t offsets_count,
                                 bool has_context);

  size_t coded_channels() const { return channel_count + 3 + 3 * size_t{offsets_count}; }
  uint32_t phi_input() const { return channel_count + 3; }
  uint32_t head_input() const { return embed_width + 3 + 3 + 3 * offsets_count; }
  uint32_t head_output() const { return static_cast<uint32_t>(3 * coded_channels()); }

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// Context-free per-channel (mu, sigma_raw, delta_adj) for level-1 anchors.
struct LevelOnePrior {
  std::vector<float> mu;
  std::vector<float> sigma_raw;
  std::vector<float> delta_adj;
};

/// All learnable parameters. The level-2 mean of channel c is
/// parent_gain[c] * (parent's value of c) + mu from the head.
struct ContextModelParams {
  ModelShape shape;
  LevelOnePrior prior;
  KernelTable table;
  MlpParams phi;
  MlpParams head;
  std::vector<float> parent_gain;

  static ContextModelParams zeros(const ModelShape& shape);

  size_t parameter_count() const;
  /// Order: prior mu, sigma_raw, delta_adj; then (with context) table, phi
  /// layers (weight, bias), head layers (weight, bias), parent_gain.
  std::vector<float> flatten() const;
  void assign(std::span<const float> values);
  void validate() const;

  /// Raw little-endian f32 values in flatten() order.
  std::vector<uint8_t> serialize() const;
  static ContextModelParams parse(const ModelShape& shape, std::span<const uint8_t> bytes);

  friend bool operator==(const ContextModelParams& a, const ContextModelParams& b) {
    return a.shape == b.shape && a.flatten() == b.flatten();
  }
};

/// Offsets of each parameter block inside flatten().
struct ParamLayout {
  explicit ParamLayout(const ModelShape& shape);

  size_t prior_mu, prior_sigma, prior_adj;
  size_t table;
  std::vector<size_t> phi_weight, phi_bias;
  std::vector<size_t> head_weight, head_bias;
  size_t parent_gain;
  size_t total;
};

/// Standalone parameter file (".lgmp"): magic, shape, then serialize().
void save_params(const ContextModelParams& params, const std::string& path);
ContextModelParams load_params(const std::string& path);

/// Model of every level-1 coded channel (identical for all level-1 anchors).
std::vector<SymbolModel> level1_models(const ContextModelParams& params, const QuantSpec& quant, double sigma_min);

/// Decoder-visible inputs for level-2 model derivation.
struct LevelTwoInputs {
  const PreliminaryContext* prelim = nullptr;
  const NeighborGraph* graph = nullptr;
  double neighborhood_scale = 1.0;
  PositionFrame frame;
};

/// Parent values in coded-channel order [feature | scaling | offsets].
std::vector<double> parent_channels(const AnchorAttributes& parent);

/// Models for every level-2 symbol, slot-major then channel.
std::vector<SymbolModel> level2_models(const ContextModelParams& params, const QuantSpec& quant, double sigma_min,
                                       const LevelTwoInputs& inputs);

}  // namespace splatpack
