// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#include "splatpack/context_model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "byte_io.hpp"
#include "splatpack/error.hpp"
#include "splatpack/parallel.hpp"

namespace splatpack {
namespace {

constexpr char kParamsMagic[5] = "LGMP";
constexpr uint8_t kParamsVersion = 1;

std::vector<uint32_t> network_widths(uint32_t in, uint32_t hidden, uint32_t out) {
  if (hidden == 0) return {in, out};
  return {in, hidden, out};
}

}  // namespace

ModelShape ModelShape::from_profile(const CodecProfile& profile, uint32_t channel_count, uint32_t offsets_count,
                                    bool has_context) {
  ModelShape s;
  s.channel_count = channel_count;
  s.offsets_count = offsets_count;
  s.embed_width = profile.embed_width;
  s.phi_hidden = profile.phi_hidden;
  s.head_hidden = profile.head_hidden;
  s.table_resolution = profile.table_resolution;
  s.has_context = has_context;
  return s;
}

ContextModelParams ContextModelParams::zeros(const ModelShape& shape) {
  ContextModelParams p;
  p.shape = shape;
  const size_t n = shape.coded_channels();
  p.prior.mu.assign(n, 0.0f);
  p.prior.sigma_raw.assign(n, 0.0f);
  p.prior.delta_adj.assign(n, 0.0f);
  if (shape.has_context) {
    p.table = KernelTable::filled(shape.table_resolution, shape.embed_width, 0.0f);
    const auto phi_w = network_widths(shape.phi_input(), shape.phi_hidden, shape.embed_width);
    const auto head_w = network_widths(shape.head_input(), shape.head_hidden, shape.head_output());
    p.phi = MlpParams::zeros(phi_w);
    p.head = MlpParams::zeros(head_w);
    p.parent_gain.assign(n, 0.0f);
  } else {
    p.table = KernelTable{shape.table_resolution, shape.embed_width, {}};
  }
  return p;
}

ParamLayout::ParamLayout(const ModelShape& shape) {
  const size_t n = shape.coded_channels();
  size_t at = 0;
  prior_mu = at;
  at += n;
  prior_sigma = at;
  at += n;
  prior_adj = at;
  at += n;
  table = at;
  if (shape.has_context) {
    at += static_cast<size_t>(shape.table_resolution) * shape.table_resolution * shape.table_resolution *
          shape.embed_width;
    auto add_network = [&](const std::vector<uint32_t>& widths, std::vector<size_t>& w, std::vector<size_t>& b) {
      for (size_t l = 0; l + 1 < widths.size(); ++l) {
        w.push_back(at);
        at += static_cast<size_t>(widths[l]) * widths[l + 1];
        b.push_back(at);
        at += widths[l + 1];
      }
    };
    add_network(network_widths(shape.phi_input(), shape.phi_hidden, shape.embed_width), phi_weight, phi_bias);
    add_network(network_widths(shape.head_input(), shape.head_hidden, shape.head_output()), head_weight, head_bias);
    parent_gain = at;
    at += n;
  } else {
    parent_gain = at;
  }
  total = at;
}

size_t ContextModelParams::parameter_count() const { return ParamLayout(shape).total; }

std::vector<float> ContextModelParams::flatten() const {
  std::vector<float> out;
  out.reserve(parameter_count());
  auto append = [&](const std::vector<float>& v) { out.insert(out.end(), v.begin(), v.end()); };
  append(prior.mu);
  append(prior.sigma_raw);
  append(prior.delta_adj);
  if (shape.has_context) {
    append(table.values);
    for (const auto& l : phi.layers) {
      append(l.weight);
      append(l.bias);
    }
    for (const auto& l : head.layers) {
      append(l.weight);
      append(l.bias);
    }
    append(parent_gain);
  }
  return out;
}

void ContextModelParams::assign(std::span<const float> values) {
  *this = zeros(shape);
  require(values.size() == parameter_count(), ErrorKind::kDimensionMismatch,
          "parameter vector has " + std::to_string(values.size()) + " entries, expected " +
              std::to_string(parameter_count()));
  size_t at = 0;
  auto fill = [&](std::vector<float>& v) {
    std::copy(values.begin() + at, values.begin() + at + v.size(), v.begin());
    at += v.size();
  };
  fill(prior.mu);
  fill(prior.sigma_raw);
  fill(prior.delta_adj);
  if (shape.has_context) {
    fill(table.values);
    for (auto& l : phi.layers) {
      fill(l.weight);
      fill(l.bias);
    }
    for (auto& l : head.layers) {
      fill(l.weight);
      fill(l.bias);
    }
    fill(parent_gain);
  }
}

void ContextModelParams::validate() const {
  const size_t n = shape.coded_channels();
  require(prior.mu.size() == n && prior.sigma_raw.size() == n && prior.delta_adj.size() == n,
          ErrorKind::kDimensionMismatch, "level-1 prior does not match the coded channel count");
  for (const auto* v : {&prior.mu, &prior.sigma_raw, &prior.delta_adj}) {
    for (float x : *v) require(std::isfinite(x), ErrorKind::kNonFinite, "level-1 prior holds non-finite values");
  }
  if (!shape.has_context) return;
  table.validate();
  phi.validate();
  head.validate();
  require(table.resolution == shape.table_resolution && table.channels == shape.embed_width,
          ErrorKind::kDimensionMismatch, "kernel table does not match the model shape");
  require(phi.input_width() == shape.phi_input() && phi.output_width() == shape.embed_width,
          ErrorKind::kDimensionMismatch, "feature branch does not match the model shape");
  require(head.input_width() == shape.head_input() && head.output_width() == shape.head_output(),
          ErrorKind::kDimensionMismatch, "head does not match the model shape");
  require(parent_gain.size() == n, ErrorKind::kDimensionMismatch, "parent gain does not match the channel count");
  for (float x : parent_gain) require(std::isfinite(x), ErrorKind::kNonFinite, "parent gain holds non-finite values");
}

std::vector<uint8_t> ContextModelParams::serialize() const {
  const std::vector<float> v = flatten();
  std::vector<uint8_t> out(v.size() * sizeof(float));
  if (!v.empty()) std::memcpy(out.data(), v.data(), out.size());
  return out;
}

ContextModelParams ContextModelParams::parse(const ModelShape& shape, std::span<const uint8_t> bytes) {
  ContextModelParams p = zeros(shape);
  const size_t count = p.parameter_count();
  if (bytes.size() != count * sizeof(float)) {
    fail(ErrorKind::kCorruptStream, "model parameters occupy " + std::to_string(bytes.size()) + " bytes, expected " +
                                        std::to_string(count * sizeof(float)));
  }
  std::vector<float> v(count);
  if (count) std::memcpy(v.data(), bytes.data(), bytes.size());
  for (size_t i = 0; i < count; ++i) {
    if (!std::isfinite(v[i])) {
      fail(ErrorKind::kCorruptStream, "model parameter " + std::to_string(i) + " is not finite");
    }
  }
  p.assign(v);
  return p;
}

void save_params(const ContextModelParams& params, const std::string& path) {
  detail::ByteWriter w;
  w.tag(kParamsMagic);
  w.u8(kParamsVersion);
  const ModelShape& s = params.shape;
  w.u8(s.has_context ? 1 : 0);
  for (uint32_t v : {s.channel_count, s.offsets_count, s.embed_width, s.phi_hidden, s.head_hidden, s.table_resolution}) {
    w.u32(v);
  }
  w.raw(params.serialize());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.size()));
  if (!out) fail(ErrorKind::kIo, "write to '" + path + "' failed");
}

ContextModelParams load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path + "'");
  const std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  detail::ByteReader r(bytes, ErrorKind::kParse);
  r.expect_tag(kParamsMagic);
  if (r.u8() != kParamsVersion) fail(ErrorKind::kParse, "unsupported parameter file version");
  ModelShape s;
  s.has_context = r.u8() != 0;
  s.channel_count = r.u32();
  s.offsets_count = r.u32();
  s.embed_width = r.u32();
  s.phi_hidden = r.u32();
  s.head_hidden = r.u32();
  s.table_resolution = r.u32();
  require(s.table_resolution >= 2 && s.table_resolution <= 64 && s.channel_count <= (1u << 16) &&
              s.offsets_count <= (1u << 16) && s.embed_width <= (1u << 16) && s.phi_hidden <= (1u << 16) &&
              s.head_hidden <= (1u << 16),
          ErrorKind::kParse, "implausible model shape in '" + path + "'");
  auto rest = r.take(r.remaining(), "parameters");
  try {
    return ContextModelParams::parse(s, rest);
  } catch (const Error& e) {
    fail(ErrorKind::kParse, "'" + path + "': " + e.message());
  }
}

std::vector<SymbolModel> level1_models(const ContextModelParams& params, const QuantSpec& quant, double sigma_min) {
  const size_t n = params.shape.coded_channels();
  std::vector<SymbolModel> models(n);
  for (size_t c = 0; c < n; ++c) {
    const double base = quant.base_step(channel_kind(c, params.shape.channel_count));
    const double step = quant.adaptive ? effective_step(base, params.prior.delta_adj[c]) : base;
    models[c] = SymbolModel::gaussian(params.prior.mu[c], positive_scale(params.prior.sigma_raw[c], sigma_min), step);
  }
  return models;
}

std::vector<double> parent_channels(const AnchorAttributes& parent) {
  std::vector<double> v(parent.feature.begin(), parent.feature.end());
  v.insert(v.end(), parent.scaling.begin(), parent.scaling.end());
  v.insert(v.end(), parent.offsets.begin(), parent.offsets.end());
  return v;
}

std::vector<SymbolModel> level2_models(const ContextModelParams& params, const QuantSpec& quant, double sigma_min,
                                       const LevelTwoInputs& inputs) {
  const PreliminaryContext& prelim = *inputs.prelim;
  const size_t n = params.shape.coded_channels();
  std::vector<SymbolModel> models(prelim.size() * n);
  if (prelim.size() == 0) return models;
  require(params.shape.has_context, ErrorKind::kDimensionMismatch, "level-2 anchors need context parameters");
  parallel_for_chunks(prelim.size(), 64, [&](size_t, size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const ContextVector ctx = aggregate_context(i, prelim, *inputs.graph, params.table, params.phi,
                                                  inputs.neighborhood_scale, inputs.frame);
      const EntropyParams ep = entropy_head(ctx, params.head, sigma_min);
      const std::vector<double> parent = parent_channels(prelim.inherited[i]);
      for (size_t c = 0; c < n; ++c) {
        const double base = quant.base_step(channel_kind(c, params.shape.channel_count));
        const double step = quant.adaptive ? effective_step(base, ep.delta_adj[c]) : base;
        const double mean = static_cast<double>(params.parent_gain[c]) * parent[c] + ep.mu[c];
        models[i * n + c] = SymbolModel::gaussian(mean, ep.sigma[c], step);
      }
    }
  });
  return models;
}

}  // namespace splatpack
