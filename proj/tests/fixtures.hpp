// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <vector>

#include "oracles.hpp"
#include "splatpack/cloud_io.hpp"
#include "splatpack/ggconv.hpp"
#include "splatpack/profile.hpp"
#include "splatpack/types.hpp"

namespace fixtures {

// Uniform random cloud with f32-representable values.
inline splatpack::AnchorCloud random_cloud(size_t n, uint32_t C, uint32_t K, uint64_t seed, double lo = 0.0,
                                           double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(lo, hi), feat(-1.0, 1.0), scl(0.01, 0.1), off(-0.05, 0.05),
      op(0.0, 1.0);
  splatpack::AnchorCloud cloud;
  cloud.channel_count = C;
  cloud.offsets_count = K;
  cloud.base_voxel_size = 0.01;
  for (size_t i = 0; i < n; ++i) {
    splatpack::Anchor a;
    a.position = {pos(rng), pos(rng), pos(rng)};
    a.feature.resize(C);
    for (auto& f : a.feature) f = feat(rng);
    a.scaling = {scl(rng), scl(rng), scl(rng)};
    a.offsets.resize(3 * size_t{K});
    for (auto& o : a.offsets) o = off(rng);
    a.mean_opacity = op(rng);
    cloud.anchors.push_back(std::move(a));
  }
  return splatpack::round_to_storage_precision(std::move(cloud));
}

// Small network widths so codec and fitting tests stay fast.
inline splatpack::CodecProfile small_profile() {
  splatpack::CodecProfile p;
  p.embed_width = 4;
  p.phi_hidden = 8;
  p.head_hidden = 8;
  p.table_resolution = 3;
  return p;
}

inline std::vector<oracle::Layer> to_layers(const splatpack::MlpParams& mlp) {
  std::vector<oracle::Layer> out;
  for (const auto& l : mlp.layers) {
    oracle::Layer o;
    o.in = l.inputs;
    o.out = l.outputs;
    o.w.assign(l.weight.begin(), l.weight.end());
    o.b.assign(l.bias.begin(), l.bias.end());
    out.push_back(std::move(o));
  }
  return out;
}

inline splatpack::MlpParams random_mlp(std::mt19937_64& rng, std::vector<uint32_t> widths, double scale = 0.5) {
  auto mlp = splatpack::MlpParams::zeros(widths);
  for (auto& l : mlp.layers) {
    l.weight = oracle::random_floats(rng, l.weight.size(), -scale, scale);
    l.bias = oracle::random_floats(rng, l.bias.size(), -scale, scale);
  }
  return mlp;
}

}  // namespace fixtures
