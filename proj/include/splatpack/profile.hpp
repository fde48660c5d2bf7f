// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "splatpack/entropy.hpp"
#include "splatpack/naap.hpp"

namespace splatpack {

/// Every tunable of pruning, coding and fitting. Loaded from a JSON object
/// whose keys match the field names below; absent keys keep their defaults.
struct CodecProfile {
  // Pruning and graphs. k and radius are shared by the pruning graph and the
  // level-2 context graph.
  double tau = 0.0;
  double lambda_blend = 0.5;
  double gamma = 0.5;
  double epsilon = 1e-8;
  uint32_t k = 8;
  std::optional<double> radius;  // JSON null or absent = unbounded

  // Hierarchy and quantisation.
  double voxel_scale = 4.0;
  QuantSpec quant;

  // Context model shape.
  uint32_t embed_width = 12;
  uint32_t phi_hidden = 64;
  uint32_t head_hidden = 64;
  uint32_t table_resolution = 5;
  double sigma_min = 1e-4;
  /// nullopt ("auto"): graph radius when bounded, else the 95th percentile
  /// level-2 edge length.
  std::optional<double> neighborhood_scale;

  // Fitting.
  uint32_t fit_iterations = 150;
  double learning_rate = 0.003;

  PruneConfig prune_config() const;
  void validate() const;

  static CodecProfile parse(const std::string& json_text);
  static CodecProfile load(const std::string& path);
  std::string to_json() const;
};

}  // namespace splatpack
