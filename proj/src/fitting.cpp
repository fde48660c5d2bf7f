// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#include "splatpack/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "splatpack/error.hpp"
#include "splatpack/parallel.hpp"

namespace splatpack {
namespace {

constexpr size_t kChunk = 64;
constexpr double kLn2 = std::numbers::ln2;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr uint32_t kMaxHalvings = 8;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double density(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double lower_tail(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
double upper_tail(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

// -log2 max(g, floor) for the Gaussian bin mass g of symbol q, with partial
// derivatives in mu and sigma (zero where the floor is active).
double symbol_bits(int32_t q, double mu, double sigma, double step, double& dmu, double& dsigma) {
  const double z0 = ((q - 0.5) * step - mu) / sigma;
  const double z1 = ((q + 0.5) * step - mu) / sigma;
  double g;
  if (z0 >= 0.0) {
    g = upper_tail(z0) - upper_tail(z1);
  } else if (z1 <= 0.0) {
    g = lower_tail(z1) - lower_tail(z0);
  } else {
    g = 1.0 - lower_tail(z0) - upper_tail(z1);
  }
  if (!(g >= kProbabilityFloor)) {
    dmu = dsigma = 0.0;
    return -std::log2(kProbabilityFloor);
  }
  const double d0 = density(z0), d1 = density(z1);
  const double dg_dmu = (d0 - d1) / sigma;
  const double dg_dsigma = (d0 * z0 - d1 * z1) / sigma;
  const double scale = -1.0 / (g * kLn2);
  dmu = scale * dg_dmu;
  dsigma = scale * dg_dsigma;
  return -std::log2(g);
}

struct LayerView {
  uint32_t in, out;
  size_t weight, bias;
};

std::vector<LayerView> network_view(const MlpParams& shape_source, const std::vector<size_t>& w,
                                    const std::vector<size_t>& b) {
  std::vector<LayerView> v;
  for (size_t l = 0; l < shape_source.layers.size(); ++l) {
    v.push_back({shape_source.layers[l].inputs, shape_source.layers[l].outputs, w[l], b[l]});
  }
  return v;
}

// acts[0] = input; acts[l + 1] = output of layer l (ReLU on hidden layers).
void forward(const std::vector<LayerView>& net, const double* theta, std::vector<std::vector<double>>& acts) {
  for (size_t l = 0; l < net.size(); ++l) {
    const LayerView& L = net[l];
    const bool hidden = l + 1 < net.size();
    const std::vector<double>& x = acts[l];
    std::vector<double>& y = acts[l + 1];
    y.resize(L.out);
    for (uint32_t o = 0; o < L.out; ++o) {
      const double* w = theta + L.weight + static_cast<size_t>(o) * L.in;
      double acc = theta[L.bias + o];
      for (uint32_t i = 0; i < L.in; ++i) acc += w[i] * x[i];
      y[o] = hidden ? std::max(acc, 0.0) : acc;
    }
  }
}

// Accumulates parameter gradients given dL/d(output); optionally returns
// dL/d(input).
void backward(const std::vector<LayerView>& net, const double* theta, const std::vector<std::vector<double>>& acts,
              std::vector<double> delta, double* grad, std::vector<double>* dinput) {
  std::vector<double> prev;
  for (size_t l = net.size(); l-- > 0;) {
    const LayerView& L = net[l];
    const std::vector<double>& x = acts[l];
    const bool need_prev = l > 0 || dinput != nullptr;
    if (need_prev) prev.assign(L.in, 0.0);
    for (uint32_t o = 0; o < L.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      grad[L.bias + o] += d;
      double* gw = grad + L.weight + static_cast<size_t>(o) * L.in;
      const double* w = theta + L.weight + static_cast<size_t>(o) * L.in;
      for (uint32_t i = 0; i < L.in; ++i) gw[i] += d * x[i];
      if (need_prev) {
        for (uint32_t i = 0; i < L.in; ++i) prev[i] += d * w[i];
      }
    }
    if (l > 0) {
      for (uint32_t i = 0; i < L.in; ++i) {
        if (!(x[i] > 0.0)) prev[i] = 0.0;
      }
      delta.swap(prev);
    } else if (dinput) {
      *dinput = prev;
    }
  }
}

struct EdgeData {
  TrilinearStencil stencil;
  std::vector<double> input;  // [delta_f | delta_p]
};

struct SlotData {
  std::vector<EdgeData> edges;
  std::vector<double> tail;    // [p | s_parent | o_parent]
  std::vector<double> parent;  // parent value per coded channel
};

std::pair<double, double> moments(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 1.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  return {mean, std::sqrt(var)};
}

float sigma_raw_for(double sigma, double sigma_min) {
  return static_cast<float>(softplus_inverse(std::max(sigma - sigma_min, 1e-9)));
}

void fill_uniform(std::vector<float>& v, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  for (float& x : v) x = static_cast<float>(u(rng));
}

// Per coded channel, moments of the dequantised symbols of one section.
std::vector<std::pair<double, double>> channel_moments(const SectionSymbols& section, size_t n) {
  std::vector<std::vector<double>> values(n);
  for (size_t i = 0; i < section.symbols.size(); ++i) {
    values[i % n].push_back(dequantize(section.symbols[i], section.models[i].step));
  }
  std::vector<std::pair<double, double>> out;
  for (const auto& v : values) out.push_back(moments(v));
  return out;
}

}  // namespace

ContextModelParams initial_params(const AnchorCloud& cloud, const CodecProfile& profile, uint64_t seed) {
  ModelShape shape = ModelShape::from_profile(profile, cloud.channel_count, cloud.offsets_count, true);
  const CodingPlan plan = plan_coding(cloud, ContextModelParams::zeros(shape), profile);
  shape.has_context = !plan.scene.hierarchy.level2.empty();
  ContextModelParams p = ContextModelParams::zeros(shape);
  const size_t n = shape.coded_channels();
  const double sigma_min = plan.settings.sigma_min;

  const auto m1 = channel_moments(plan.level1, n);
  for (size_t c = 0; c < n; ++c) {
    p.prior.mu[c] = static_cast<float>(m1[c].first);
    p.prior.sigma_raw[c] = sigma_raw_for(m1[c].second, sigma_min);
  }
  if (!shape.has_context) return p;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  for (float& v : p.table.values) v = static_cast<float>(1.0 + jitter(rng));
  for (auto& layer : p.phi.layers) fill_uniform(layer.weight, std::sqrt(6.0 / layer.inputs), rng);
  for (size_t l = 0; l + 1 < p.head.layers.size(); ++l) {
    fill_uniform(p.head.layers[l].weight, std::sqrt(6.0 / p.head.layers[l].inputs), rng);
  }
  const auto m2 = channel_moments(plan.level2, n);
  DenseLayer& out = p.head.layers.back();
  for (size_t c = 0; c < n; ++c) {
    out.bias[c] = static_cast<float>(m2[c].first);
    out.bias[n + c] = sigma_raw_for(m2[c].second, sigma_min);
  }
  return p;
}

struct RateObjective::Impl {
  CodingPlan plan;
  ModelShape shape;
  ParamLayout layout;
  double sigma_min;
  size_t n;
  std::vector<bool> trainable;
  std::vector<LayerView> phi, head;
  std::vector<SlotData> slots;

  Impl(const AnchorCloud& cloud, const CodecProfile& profile, const ContextModelParams& reference)
      : plan(plan_coding(cloud, reference, profile)),
        shape(plan.params.shape),
        layout(shape),
        sigma_min(plan.settings.sigma_min),
        n(shape.coded_channels()) {
    trainable.assign(layout.total, true);
    for (size_t c = 0; c < n; ++c) trainable[layout.prior_adj + c] = false;
    if (!shape.has_context) return;
    phi = network_view(plan.params.phi, layout.phi_weight, layout.phi_bias);
    head = network_view(plan.params.head, layout.head_weight, layout.head_bias);
    const LayerView& last = head.back();
    for (size_t o = 2 * n; o < 3 * n; ++o) {
      trainable[last.bias + o] = false;
      for (uint32_t i = 0; i < last.in; ++i) trainable[last.weight + o * last.in + i] = false;
    }

    const PreliminaryContext& prelim = plan.prelim;
    const CodingScene& scene = plan.scene;
    slots.resize(prelim.size());
    for (size_t i = 0; i < prelim.size(); ++i) {
      SlotData& s = slots[i];
      const auto& self = prelim.inherited[i];
      const Vec3& pi = prelim.positions[i];
      std::vector<uint32_t> order(scene.graph.neighbors(i).begin(), scene.graph.neighbors(i).end());
      std::sort(order.begin(), order.end());
      for (uint32_t j : order) {
        EdgeData e;
        const Vec3& pj = prelim.positions[j];
        const Vec3 dp{pj[0] - pi[0], pj[1] - pi[1], pj[2] - pi[2]};
        for (size_t c = 0; c < self.feature.size(); ++c) e.input.push_back(prelim.inherited[j].feature[c] - self.feature[c]);
        e.input.insert(e.input.end(), dp.begin(), dp.end());
        e.stencil = trilinear_stencil(shape.table_resolution, normalize_offset(dp, scene.neighborhood_scale));
        s.edges.push_back(std::move(e));
      }
      const Vec3 p = scene.frame.apply(pi);
      s.tail.assign(p.begin(), p.end());
      s.tail.insert(s.tail.end(), self.scaling.begin(), self.scaling.end());
      s.tail.insert(s.tail.end(), self.offsets.begin(), self.offsets.end());
      s.parent = parent_channels(self);
    }
  }

  double level2_slot(size_t i, const double* theta, double* grad, std::vector<std::vector<double>>& acts_head,
                     std::vector<std::vector<std::vector<double>>>& acts_phi) const {
    const SlotData& s = slots[i];
    const uint32_t ce = shape.embed_width;
    const double* table = theta + layout.table;

    // Forward: kernel-weighted embeddings summed in ascending neighbor order.
    std::vector<double> fctx(ce, 0.0);
    std::vector<std::vector<double>> kernel(s.edges.size(), std::vector<double>(ce, 0.0));
    acts_phi.resize(std::max(acts_phi.size(), s.edges.size()));
    for (size_t e = 0; e < s.edges.size(); ++e) {
      const EdgeData& ed = s.edges[e];
      auto& acts = acts_phi[e];
      acts.resize(phi.size() + 1);
      acts[0] = ed.input;
      forward(phi, theta, acts);
      for (int k = 0; k < 8; ++k) {
        const double* row = table + static_cast<size_t>(ed.stencil.node[k]) * ce;
        for (uint32_t c = 0; c < ce; ++c) kernel[e][c] += ed.stencil.weight[k] * row[c];
      }
      const std::vector<double>& emb = acts.back();
      for (uint32_t c = 0; c < ce; ++c) fctx[c] += kernel[e][c] * emb[c];
    }
    acts_head.resize(head.size() + 1);
    acts_head[0] = fctx;
    acts_head[0].insert(acts_head[0].end(), s.tail.begin(), s.tail.end());
    forward(head, theta, acts_head);
    const std::vector<double>& out = acts_head.back();

    double bits = 0.0;
    std::vector<double> dout(3 * n, 0.0);
    const size_t base = i * n;
    for (size_t c = 0; c < n; ++c) {
      const double gain = theta[layout.parent_gain + c];
      const double mu = gain * s.parent[c] + out[c];
      const double raw = out[n + c];
      const double sigma = positive_scale(raw, sigma_min);
      double dmu, dsigma;
      bits += symbol_bits(plan.level2.symbols[base + c], mu, sigma, plan.level2.models[base + c].step, dmu, dsigma);
      if (grad) {
        dout[c] = dmu;
        dout[n + c] = dsigma * sigmoid(raw);
        grad[layout.parent_gain + c] += dmu * s.parent[c];
      }
    }
    if (!grad) return bits;

    std::vector<double> dassembled;
    backward(head, theta, acts_head, dout, grad, &dassembled);
    for (size_t e = 0; e < s.edges.size(); ++e) {
      const EdgeData& ed = s.edges[e];
      const std::vector<double>& emb = acts_phi[e].back();
      std::vector<double> demb(ce);
      for (uint32_t c = 0; c < ce; ++c) {
        demb[c] = kernel[e][c] * dassembled[c];
        const double dk = emb[c] * dassembled[c];
        for (int k = 0; k < 8; ++k) {
          grad[layout.table + static_cast<size_t>(ed.stencil.node[k]) * ce + c] += ed.stencil.weight[k] * dk;
        }
      }
      backward(phi, theta, acts_phi[e], demb, grad, nullptr);
    }
    return bits;
  }

  double surrogate(std::span<const double> theta, std::vector<double>* gradient) const {
    require(theta.size() == layout.total, ErrorKind::kDimensionMismatch, "parameter vector has the wrong length");
    double* grad = nullptr;
    if (gradient) {
      gradient->assign(layout.total, 0.0);
      grad = gradient->data();
    }
    double bits = 0.0;
    for (size_t i = 0; i < plan.level1.symbols.size(); ++i) {
      const size_t c = i % n;
      const double raw = theta[layout.prior_sigma + c];
      const double sigma = positive_scale(raw, sigma_min);
      double dmu, dsigma;
      bits += symbol_bits(plan.level1.symbols[i], theta[layout.prior_mu + c], sigma, plan.level1.models[i].step, dmu,
                          dsigma);
      if (grad) {
        grad[layout.prior_mu + c] += dmu;
        grad[layout.prior_sigma + c] += dsigma * sigmoid(raw);
      }
    }
    if (slots.empty()) return bits;

    const size_t chunks = (slots.size() + kChunk - 1) / kChunk;
    std::vector<double> chunk_bits(chunks, 0.0);
    std::vector<std::vector<double>> chunk_grad(grad ? chunks : 0);
    parallel_for_chunks(slots.size(), kChunk, [&](size_t chunk, size_t begin, size_t end) {
      double* g = nullptr;
      if (grad) {
        chunk_grad[chunk].assign(layout.total, 0.0);
        g = chunk_grad[chunk].data();
      }
      std::vector<std::vector<double>> acts_head;
      std::vector<std::vector<std::vector<double>>> acts_phi;
      double b = 0.0;
      for (size_t i = begin; i < end; ++i) b += level2_slot(i, theta.data(), g, acts_head, acts_phi);
      chunk_bits[chunk] = b;
    });
    for (size_t k = 0; k < chunks; ++k) {
      bits += chunk_bits[k];
      if (grad) {
        for (size_t p = 0; p < layout.total; ++p) grad[p] += chunk_grad[k][p];
      }
    }
    return bits;
  }

  std::vector<SymbolModel> models_with_fixed_steps(const ContextModelParams& params, bool level_two) const {
    const SectionSymbols& ref = level_two ? plan.level2 : plan.level1;
    std::vector<SymbolModel> models;
    if (level_two) {
      const LevelTwoInputs inputs{&plan.prelim, &plan.scene.graph, plan.scene.neighborhood_scale, plan.scene.frame};
      models = level2_models(params, plan.settings.quant, sigma_min, inputs);
    } else {
      const std::vector<SymbolModel> per_channel = level1_models(params, plan.settings.quant, sigma_min);
      for (size_t i = 0; i < ref.symbols.size(); ++i) models.push_back(per_channel[i % n]);
    }
    for (size_t i = 0; i < models.size(); ++i) models[i].step = ref.models[i].step;
    return models;
  }
};

RateObjective::RateObjective(const AnchorCloud& cloud, const CodecProfile& profile, const ContextModelParams& reference)
    : impl_(std::make_unique<Impl>(cloud, profile, reference)) {}
RateObjective::~RateObjective() = default;
RateObjective::RateObjective(RateObjective&&) noexcept = default;

const ModelShape& RateObjective::shape() const { return impl_->shape; }
const std::vector<bool>& RateObjective::trainable() const { return impl_->trainable; }
const CodingPlan& RateObjective::plan() const { return impl_->plan; }

double RateObjective::surrogate(std::span<const double> theta, std::vector<double>* gradient) const {
  return impl_->surrogate(theta, gradient);
}

double RateObjective::rate(const ContextModelParams& params) const {
  const auto m1 = impl_->models_with_fixed_steps(params, false);
  const auto m2 = impl_->models_with_fixed_steps(params, true);
  return estimate_rate(impl_->plan.level1.symbols, m1) + estimate_rate(impl_->plan.level2.symbols, m2);
}

double RateObjective::level2_feature_rate(const ContextModelParams& params) const {
  const auto m2 = impl_->models_with_fixed_steps(params, true);
  const size_t n = impl_->n;
  double bits = 0.0;
  for (size_t i = 0; i < m2.size(); ++i) {
    if (i % n < impl_->shape.channel_count) {
      bits += CodingDistribution(m2[i]).bits(impl_->plan.level2.symbols[i]);
    }
  }
  return bits;
}

FitResult fit_context_model(const AnchorCloud& cloud, const CodecProfile& profile, const ContextModelParams& init,
                            const FitOptions& options) {
  require(options.learning_rate > 0.0, ErrorKind::kInvalidParam, "learning rate must be positive");
  const RateObjective objective(cloud, profile, init);
  const ContextModelParams start = objective.plan().params;
  const std::vector<bool>& trainable = objective.trainable();

  FitResult result;
  result.params = start;
  result.trace.push_back(objective.rate(start));
  double best = result.trace[0];

  const std::vector<float> flat = start.flatten();
  std::vector<double> theta(flat.begin(), flat.end());
  std::vector<double> m(theta.size(), 0.0), v(theta.size(), 0.0);
  std::vector<double> grad;
  double lr = options.learning_rate;
  ContextModelParams candidate = start;
  std::vector<float> candidate_flat(theta.size());

  for (uint32_t it = 1; it <= options.iterations; ++it) {
    std::vector<double> theta_eval(theta.size());
    for (size_t p = 0; p < theta.size(); ++p) theta_eval[p] = static_cast<float>(theta[p]);
    objective.surrogate(theta_eval, &grad);
    for (size_t p = 0; p < grad.size(); ++p) {
      if (!std::isfinite(grad[p])) fail(ErrorKind::kNonFinite, "surrogate gradient is not finite");
    }
    const double bias1 = 1.0 - std::pow(kAdamBeta1, it);
    const double bias2 = 1.0 - std::pow(kAdamBeta2, it);
    std::vector<double> m_next(m.size()), v_next(v.size()), theta_next(theta.size());
    double rate = 0.0;
    for (;;) {
      bool finite = true;
      for (size_t p = 0; p < theta.size(); ++p) {
        if (!trainable[p]) {
          m_next[p] = v_next[p] = 0.0;
          theta_next[p] = theta[p];
          continue;
        }
        m_next[p] = kAdamBeta1 * m[p] + (1.0 - kAdamBeta1) * grad[p];
        v_next[p] = kAdamBeta2 * v[p] + (1.0 - kAdamBeta2) * grad[p] * grad[p];
        theta_next[p] = theta[p] - lr * (m_next[p] / bias1) / (std::sqrt(v_next[p] / bias2) + kAdamEps);
        candidate_flat[p] = static_cast<float>(theta_next[p]);
        if (!std::isfinite(candidate_flat[p])) finite = false;
      }
      for (size_t p = 0; p < theta.size(); ++p) {
        if (!trainable[p]) candidate_flat[p] = static_cast<float>(theta[p]);
      }
      if (finite) {
        try {
          candidate.assign(candidate_flat);
          rate = objective.rate(candidate);
          finite = std::isfinite(rate);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kNonFinite) throw;
          finite = false;
        }
      }
      if (finite) break;
      if (++result.learning_rate_halvings > kMaxHalvings) {
        fail(ErrorKind::kNonFinite, "fitting diverged after " + std::to_string(kMaxHalvings) +
                                        " learning-rate halvings");
      }
      lr *= 0.5;
    }
    theta.swap(theta_next);
    m.swap(m_next);
    v.swap(v_next);
    result.trace.push_back(rate);
    if (rate < best) {
      best = rate;
      result.best_iteration = it;
      result.params = candidate;
    }
  }
  return result;
}

}  // namespace splatpack
