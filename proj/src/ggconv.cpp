// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#include "splatpack/ggconv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "splatpack/error.hpp"

namespace splatpack {
namespace {

bool all_finite(std::span<const float> v) {
  return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
}

}  // namespace

KernelTable KernelTable::filled(uint32_t resolution, uint32_t channels, float value) {
  KernelTable t;
  t.resolution = resolution;
  t.channels = channels;
  t.values.assign(static_cast<size_t>(resolution) * resolution * resolution * channels, value);
  return t;
}

void KernelTable::validate() const {
  require(resolution >= 2, ErrorKind::kInvalidParam, "kernel table resolution must be >= 2");
  require(values.size() == static_cast<size_t>(resolution) * resolution * resolution * channels,
          ErrorKind::kDimensionMismatch, "kernel table size does not match D^3 * C_e");
  require(all_finite(values), ErrorKind::kNonFinite, "kernel table holds non-finite values");
}

MlpParams MlpParams::zeros(std::span<const uint32_t> widths) {
  require(widths.size() >= 2, ErrorKind::kInvalidParam, "a network needs an input and an output width");
  MlpParams m;
  for (size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer;
    layer.inputs = widths[l];
    layer.outputs = widths[l + 1];
    layer.weight.assign(static_cast<size_t>(layer.inputs) * layer.outputs, 0.0f);
    layer.bias.assign(layer.outputs, 0.0f);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

size_t MlpParams::parameter_count() const {
  size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

void MlpParams::validate() const {
  require(!layers.empty(), ErrorKind::kInvalidParam, "network has no layers");
  for (size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    require(layer.weight.size() == static_cast<size_t>(layer.inputs) * layer.outputs &&
                layer.bias.size() == layer.outputs,
            ErrorKind::kDimensionMismatch, "layer " + std::to_string(l) + " has inconsistent parameter sizes");
    if (l > 0) {
      require(layers[l - 1].outputs == layer.inputs, ErrorKind::kDimensionMismatch,
              "layer " + std::to_string(l) + " input width does not chain");
    }
    require(all_finite(layer.weight) && all_finite(layer.bias), ErrorKind::kNonFinite,
            "layer " + std::to_string(l) + " holds non-finite values");
  }
}

std::vector<double> mlp_forward(const MlpParams& mlp, std::span<const double> input,
                                std::vector<std::vector<double>>* activations) {
  require(!mlp.layers.empty() && input.size() == mlp.input_width(), ErrorKind::kDimensionMismatch,
          "network input width " + std::to_string(mlp.input_width()) + ", got " + std::to_string(input.size()));
  if (activations) activations->resize(mlp.layers.size());
  std::vector<double> current(input.begin(), input.end());
  std::vector<double> next;
  for (size_t l = 0; l < mlp.layers.size(); ++l) {
    const auto& layer = mlp.layers[l];
    const bool hidden = l + 1 < mlp.layers.size();
    next.assign(layer.outputs, 0.0);
    for (uint32_t o = 0; o < layer.outputs; ++o) {
      const float* w = layer.weight.data() + static_cast<size_t>(o) * layer.inputs;
      double acc = layer.bias[o];
      for (uint32_t i = 0; i < layer.inputs; ++i) acc += static_cast<double>(w[i]) * current[i];
      next[o] = hidden ? std::max(acc, 0.0) : acc;
    }
    current.swap(next);
    if (activations) (*activations)[l] = current;
  }
  return current;
}

TrilinearStencil trilinear_stencil(uint32_t resolution, const Vec3& u) {
  require(resolution >= 2, ErrorKind::kInvalidParam, "kernel table resolution must be >= 2");
  std::array<uint32_t, 3> base{};
  std::array<double, 3> frac{};
  const double cells = static_cast<double>(resolution - 1);
  for (int a = 0; a < 3; ++a) {
    require(std::isfinite(u[a]), ErrorKind::kNonFinite, "non-finite lookup coordinate");
    double x = std::clamp(u[a], 0.0, 1.0) * cells;
    const double nearest = std::round(x);
    if (std::fabs(x - nearest) <= 1e-9) x = nearest;
    const double cell = std::min(std::floor(x), cells - 1.0);
    base[a] = static_cast<uint32_t>(cell);
    frac[a] = x - cell;
  }
  TrilinearStencil s;
  int corner = 0;
  for (int dx = 0; dx < 2; ++dx) {
    for (int dy = 0; dy < 2; ++dy) {
      for (int dz = 0; dz < 2; ++dz) {
        const double wx = dx ? frac[0] : 1.0 - frac[0];
        const double wy = dy ? frac[1] : 1.0 - frac[1];
        const double wz = dz ? frac[2] : 1.0 - frac[2];
        s.node[corner] = ((base[0] + dx) * resolution + (base[1] + dy)) * resolution + (base[2] + dz);
        s.weight[corner] = wx * wy * wz;
        ++corner;
      }
    }
  }
  return s;
}

std::vector<double> trilinear_lookup(const KernelTable& table, const Vec3& offset_normalized) {
  const TrilinearStencil s = trilinear_stencil(table.resolution, offset_normalized);
  std::vector<double> out(table.channels, 0.0);
  for (int corner = 0; corner < 8; ++corner) {
    const float* row = table.values.data() + static_cast<size_t>(s.node[corner]) * table.channels;
    for (uint32_t c = 0; c < table.channels; ++c) out[c] += s.weight[corner] * static_cast<double>(row[c]);
  }
  return out;
}

Vec3 normalize_offset(const Vec3& delta_p, double neighborhood_scale) {
  require(neighborhood_scale > 0.0 && std::isfinite(neighborhood_scale), ErrorKind::kInvalidParam,
          "neighborhood scale must be positive");
  Vec3 u;
  for (int a = 0; a < 3; ++a) u[a] = std::clamp(delta_p[a] / (2.0 * neighborhood_scale) + 0.5, 0.0, 1.0);
  return u;
}

std::vector<double> feature_branch(std::span<const double> delta_f, const Vec3& delta_p, const MlpParams& phi) {
  require(phi.input_width() == delta_f.size() + 3, ErrorKind::kDimensionMismatch,
          "feature branch expects " + std::to_string(phi.input_width()) + " inputs, got " +
              std::to_string(delta_f.size() + 3));
  std::vector<double> input(delta_f.begin(), delta_f.end());
  input.insert(input.end(), delta_p.begin(), delta_p.end());
  return mlp_forward(phi, input);
}

PositionFrame PositionFrame::bounding(std::span<const Vec3> positions) {
  PositionFrame f;
  if (positions.empty()) return f;
  Vec3 lo = positions[0], hi = positions[0];
  for (const auto& p : positions) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  double extent = 0.0;
  for (int a = 0; a < 3; ++a) {
    f.center[a] = 0.5 * (lo[a] + hi[a]);
    extent = std::max(extent, 0.5 * (hi[a] - lo[a]));
  }
  f.half_extent = extent > 0.0 ? extent : 1.0;
  return f;
}

Vec3 PositionFrame::apply(const Vec3& p) const {
  return {(p[0] - center[0]) / half_extent, (p[1] - center[1]) / half_extent, (p[2] - center[2]) / half_extent};
}

ContextVector aggregate_context(size_t query, const PreliminaryContext& prelim, const NeighborGraph& graph,
                                const KernelTable& table, const MlpParams& phi, double neighborhood_scale,
                                const PositionFrame& frame) {
  require(graph.size() == prelim.size(), ErrorKind::kDimensionMismatch,
          "graph and preliminary context cover different anchor sets");
  require(query < prelim.size(), ErrorKind::kIndexOutOfRange, "query index out of range");
  require(phi.output_width() == table.channels, ErrorKind::kDimensionMismatch,
          "feature branch width differs from kernel table channels");
  const auto& self = prelim.inherited[query];
  const Vec3& pi = prelim.positions[query];
  const size_t feature_width = self.feature.size();

  ContextVector ctx;
  ctx.geometry_feature.assign(table.channels, 0.0);

  std::vector<uint32_t> order(graph.neighbors(query).begin(), graph.neighbors(query).end());
  std::sort(order.begin(), order.end());
  std::vector<double> delta_f(feature_width);
  for (uint32_t j : order) {
    const auto& other = prelim.inherited[j];
    require(other.feature.size() == feature_width, ErrorKind::kDimensionMismatch, "inherited feature widths differ");
    for (size_t c = 0; c < feature_width; ++c) delta_f[c] = other.feature[c] - self.feature[c];
    const Vec3& pj = prelim.positions[j];
    const Vec3 dp{pj[0] - pi[0], pj[1] - pi[1], pj[2] - pi[2]};
    const std::vector<double> w = trilinear_lookup(table, normalize_offset(dp, neighborhood_scale));
    const std::vector<double> e = feature_branch(delta_f, dp, phi);
    for (uint32_t c = 0; c < table.channels; ++c) ctx.geometry_feature[c] += w[c] * e[c];
  }

  ctx.assembled = ctx.geometry_feature;
  const Vec3 p = frame.apply(pi);
  ctx.assembled.insert(ctx.assembled.end(), p.begin(), p.end());
  ctx.assembled.insert(ctx.assembled.end(), self.scaling.begin(), self.scaling.end());
  ctx.assembled.insert(ctx.assembled.end(), self.offsets.begin(), self.offsets.end());
  return ctx;
}

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double positive_scale(double raw, double sigma_min) {
  return std::max(softplus(raw) + sigma_min, std::nextafter(sigma_min, std::numeric_limits<double>::infinity()));
}

double softplus_inverse(double y) {
  require(y > 0.0, ErrorKind::kInvalidParam, "softplus inverse needs a positive argument");
  return y > 30.0 ? y : std::log(std::expm1(y));
}

EntropyParams entropy_head(const ContextVector& context, const MlpParams& head, double sigma_min) {
  require(head.input_width() == context.assembled.size(), ErrorKind::kDimensionMismatch,
          "head expects " + std::to_string(head.input_width()) + " inputs, got " +
              std::to_string(context.assembled.size()));
  require(head.output_width() % 3 == 0, ErrorKind::kDimensionMismatch, "head output width must be 3 * channels");
  const std::vector<double> out = mlp_forward(head, context.assembled);
  const size_t n = out.size() / 3;
  EntropyParams p;
  p.mu.assign(out.begin(), out.begin() + n);
  p.sigma.resize(n);
  for (size_t c = 0; c < n; ++c) p.sigma[c] = positive_scale(out[n + c], sigma_min);
  p.delta_adj.assign(out.begin() + 2 * n, out.end());
  return p;
}

}  // namespace splatpack
