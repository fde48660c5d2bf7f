// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "fixtures.hpp"
#include "splatpack/codec.hpp"
#include "splatpack/error.hpp"
#include "splatpack/fitting.hpp"
#include "splatpack/parallel.hpp"
#include "splatpack/synth.hpp"

using namespace splatpack;

namespace {

AnchorCloud ten_anchor_fixture() {
  auto c = fixtures::random_cloud(10, 3, 1, 42, 0.0, 0.05);
  return c;
}

}  // namespace

TEST_SUITE("fitting") {
  TEST_CASE("zero iterations returns the initialization") {
    const auto c = ten_anchor_fixture();
    const auto profile = fixtures::small_profile();
    const auto init = initial_params(c, profile, 1);
    const auto r = fit_context_model(c, profile, init, {0, 0.003});
    CHECK(r.params == init);
    CHECK(r.trace.size() == 1);
    CHECK(r.best_iteration == 0);
  }

  TEST_CASE("initial model equals the context-free moment fit") {
    SynthSpec s;
    s.count = 300;
    s.channel_count = 4;
    s.offsets_count = 1;
    s.seed = 2;
    const auto c = generate(s);
    const auto profile = fixtures::small_profile();
    const auto init = initial_params(c, profile, 7);
    const RateObjective obj(c, profile, init);
    const auto& plan = obj.plan();
    const size_t n = init.shape.coded_channels();
    REQUIRE(!plan.level2.symbols.empty());
    for (size_t i = 0; i < plan.level2.models.size(); ++i) {
      const auto& m = plan.level2.models[i];
      const auto& first = plan.level2.models[i % n];
      CHECK(m.mean == first.mean);
      CHECK(m.scale == first.scale);
    }
  }

  TEST_CASE("analytic gradient matches central differences") {
    const auto c = ten_anchor_fixture();
    const auto profile = fixtures::small_profile();
    auto init = initial_params(c, profile, 3);
    REQUIRE(init.shape.has_context);
    // Move off the zero-initialised head rows so every path carries gradient.
    std::mt19937_64 rng(4);
    auto flat = init.flatten();
    const ParamLayout layout(init.shape);
    for (size_t p = layout.table; p < layout.total; ++p) flat[p] += static_cast<float>(0.05 * std::uniform_real_distribution<double>(-1, 1)(rng));
    init.assign(flat);
    const RateObjective obj(c, profile, init);
    std::vector<double> theta(flat.begin(), flat.end());
    std::vector<double> grad;
    obj.surrogate(theta, &grad);
    const auto& trainable = obj.trainable();
    size_t checked = 0, agree = 0;
    for (size_t p = 0; p < theta.size(); ++p) {
      if (!trainable[p]) continue;
      const double h = 1e-6 * std::max(1.0, std::abs(theta[p]));
      auto plus = theta, minus = theta;
      plus[p] += h;
      minus[p] -= h;
      const double fd = (obj.surrogate(plus, nullptr) - obj.surrogate(minus, nullptr)) / (2 * h);
      ++checked;
      if (std::abs(fd - grad[p]) <= 1e-3 * std::max(std::abs(fd), std::abs(grad[p])) + 1e-6) ++agree;
      else MESSAGE("parameter " << p << ": analytic " << grad[p] << " vs finite difference " << fd);
    }
    CHECK(checked > 100);
    CHECK(agree == checked);
  }

  TEST_CASE("constant attributes reach the floored delta entropy") {
    // Each anchor in its own coarse voxel keeps every anchor on level one.
    AnchorCloud c;
    c.channel_count = 4;
    c.offsets_count = 1;
    c.base_voxel_size = 0.01;
    for (int i = 0; i < 64; ++i) {
      Anchor a;
      a.position = {0.5 * (i % 4), 0.5 * ((i / 4) % 4), 0.5 * (i / 16)};
      a.feature = {0.3, 0.3, 0.3, 0.3};
      a.scaling = {0.02, 0.02, 0.02};
      a.offsets = {0.01, -0.01, 0.0};
      c.anchors.push_back(a);
    }
    c = round_to_storage_precision(c);
    const auto profile = fixtures::small_profile();
    const auto init = initial_params(c, profile, 0);
    const auto r = fit_context_model(c, profile, init, {20, 0.003});
    const RateObjective obj(c, profile, init);
    REQUIRE(obj.plan().level2.symbols.empty());
    const double symbols = static_cast<double>(obj.plan().level1.symbols.size());
    const double oracle_bits = symbols * std::log2(1.0 + kProbabilityFloor);
    const double fitted = obj.rate(r.params);
    CHECK(fitted <= 1.05 * oracle_bits);
    CHECK(fitted >= 0.95 * oracle_bits);
  }

  TEST_CASE("returned parameters never exceed the initial rate") {
    for (uint64_t seed : {1u, 2u}) {
      SynthSpec s;
      s.count = 250;
      s.channel_count = 6;
      s.offsets_count = 1;
      s.seed = seed;
      const auto c = generate(s);
      const auto profile = fixtures::small_profile();
      const auto init = initial_params(c, profile, seed);
      const auto r = fit_context_model(c, profile, init, {12, 0.01});
      REQUIRE(r.trace.size() == 13);
      const RateObjective obj(c, profile, init);
      const double final_rate = obj.rate(r.params);
      CHECK(final_rate <= r.trace[0]);
      const auto best = std::min_element(r.trace.begin(), r.trace.end());
      CHECK(static_cast<size_t>(best - r.trace.begin()) == r.best_iteration);
      CHECK(final_rate == r.trace[r.best_iteration]);
    }
  }

  TEST_CASE("invalid learning rate") {
    const auto c = ten_anchor_fixture();
    const auto profile = fixtures::small_profile();
    const auto init = initial_params(c, profile, 1);
    CHECK_THROWS_AS(fit_context_model(c, profile, init, {5, 0.0}), Error);
  }

  TEST_CASE("fitting is deterministic across thread counts") {
    SynthSpec s;
    s.count = 200;
    s.channel_count = 4;
    s.offsets_count = 1;
    s.seed = 9;
    const auto c = generate(s);
    const auto profile = fixtures::small_profile();
    const auto init = initial_params(c, profile, 9);
    const unsigned saved = thread_count();
    set_thread_count(1);
    const auto a = fit_context_model(c, profile, init, {4, 0.003});
    set_thread_count(4);
    const auto b = fit_context_model(c, profile, init, {4, 0.003});
    set_thread_count(saved);
    CHECK(a.trace == b.trace);
    CHECK(a.params == b.params);
  }
}
