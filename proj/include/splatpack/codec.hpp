// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "splatpack/context_model.hpp"
#include "splatpack/entropy.hpp"
#include "splatpack/hierarchy.hpp"
#include "splatpack/profile.hpp"
#include "splatpack/spatial_graph.hpp"
#include "splatpack/types.hpp"

namespace splatpack {

/// Quantised positions must satisfy |q| <= kGridBound on every axis.
inline constexpr int32_t kGridBound = 1 << 29;
/// Geometry deltas are coded over [-kDeltaBound, kDeltaBound].
inline constexpr int32_t kDeltaBound = 1 << 30;

using GridPoint = std::array<int32_t, 3>;

/// Coding parameters carried in the stream header, already rounded to the
/// f32 precision in which they are stored.
struct StreamSettings {
  double voxel_scale = 4.0;
  QuantSpec quant;
  uint32_t k = 8;
  std::optional<double> radius;
  double sigma_min = kDefaultSigmaMin;

  static StreamSettings from_profile(const CodecProfile& profile);
};

/// Decoder-reproducible geometry: canonical quantised positions, the
/// hierarchy and the level-2 graph.
struct CodingScene {
  double base_voxel_size = 0.0;
  std::vector<GridPoint> grid;
  std::vector<Vec3> positions;
  Hierarchy hierarchy;
  std::vector<Vec3> level2_positions;
  NeighborGraph graph;
  double neighborhood_scale = 1.0;
  PositionFrame frame;
};

/// Stable Morton (Z-order) permutation of grid points; ties keep input order.
std::vector<uint32_t> morton_order(std::span<const GridPoint> grid);

/// Builds the scene from canonical grid points. Without an explicit
/// neighborhood_scale, uses the graph radius when bounded and otherwise the
/// 95th-percentile level-2 edge length (rounded to f32).
CodingScene build_scene(std::vector<GridPoint> grid, double base_voxel_size, const StreamSettings& settings,
                        std::optional<double> neighborhood_scale);

/// Per-axis adaptive Laplace model for Morton-ordered position deltas.
class GeometryModel {
 public:
  SymbolModel next(int axis) const;
  void update(int axis, int64_t delta);

 private:
  std::array<double, 3> mean_abs_{4.0, 4.0, 4.0};
};

struct SectionSymbols {
  std::vector<int32_t> symbols;
  std::vector<SymbolModel> models;

  double estimated_bits() const { return estimate_rate(symbols, models); }
};

/// Everything the encoder derives before writing bytes.
struct CodingPlan {
  StreamSettings settings;
  CodingScene scene;
  ContextModelParams params;      // as stored in the model section
  std::vector<uint32_t> order;    // canonical index -> input anchor index
  SectionSymbols geometry;        // 3 deltas per anchor
  SectionSymbols level1;          // level-1 anchors x coded channels
  SectionSymbols level2;          // level-2 anchors x coded channels
  std::vector<AnchorAttributes> level1_decoded;
  PreliminaryContext prelim;
  AnchorCloud reconstruction;     // canonical order, mean_opacity = 1
};

CodingPlan plan_coding(const AnchorCloud& cloud, const ContextModelParams& params, const CodecProfile& profile);

struct SectionRate {
  std::string name;
  size_t bytes = 0;          // including the 12-byte section header
  size_t payload_bytes = 0;
  uint32_t symbols = 0;
  double estimated_bits = 0.0;

  double actual_bits() const { return 8.0 * static_cast<double>(payload_bytes); }
};

struct RateReport {
  size_t total_bytes = 0;
  size_t header_bytes = 0;
  std::array<SectionRate, 4> sections;  // geometry, level1, level2, model
  size_t anchors = 0;
  size_t level1_anchors = 0;
  size_t level2_anchors = 0;

  double bits_per_anchor() const;
  /// One key=value pair per line.
  std::string to_text() const;
  std::string to_json() const;
};

struct EncodeResult {
  std::vector<uint8_t> bytes;
  RateReport report;
  AnchorCloud reconstruction;
  std::vector<uint32_t> order;
};

struct EncodeOptions {
  /// Re-decode the produced stream and require identical models and output.
  bool verify = true;
};

EncodeResult encode(const AnchorCloud& cloud, const ContextModelParams& params, const CodecProfile& profile,
                    const EncodeOptions& options = {});

struct DecodedStream {
  AnchorCloud cloud;
  StreamSettings settings;
  ContextModelParams params;
  SectionSymbols geometry, level1, level2;
  RateReport report;
};

DecodedStream decode_stream(std::span<const uint8_t> bytes);
AnchorCloud decode(std::span<const uint8_t> bytes);
RateReport rate_report(std::span<const uint8_t> bytes);

}  // namespace splatpack
