// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "splatpack/error.hpp"
#include "splatpack/naap.hpp"
#include "splatpack/spatial_graph.hpp"

using namespace splatpack;

namespace {

bool rel_close(double a, double b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

AnchorCloud line_cloud(std::vector<double> opacity, double spacing = 1.0) {
  AnchorCloud c;
  c.channel_count = 1;
  c.offsets_count = 1;
  for (size_t i = 0; i < opacity.size(); ++i) {
    Anchor a;
    a.position = {spacing * static_cast<double>(i), 0.0, 0.0};
    a.feature = {static_cast<double>(i)};
    a.scaling = {1.0 + i, 1.0 + i, 1.0 + i};
    a.offsets = {0.1 * i, -0.1 * i, 0.0};
    a.mean_opacity = opacity[i];
    c.anchors.push_back(a);
  }
  return c;
}

std::vector<double> opacities(const AnchorCloud& c) {
  std::vector<double> v;
  for (const auto& a : c.anchors) v.push_back(a.mean_opacity);
  return v;
}

}  // namespace

TEST_SUITE("naap") {
  TEST_CASE("empty neighbourhood leaves opacity unchanged") {
    const auto c = line_cloud({0.3, 0.7});
    c.validate();
    const NeighborGraph g({{}, {}}, 8, std::nullopt);
    const auto phi = smoothed_opacity(c, g, 1e-8);
    CHECK(phi[0] == 0.3);
    CHECK(phi[1] == 0.7);
  }

  TEST_CASE("uniform opacity is a fixed point") {
    const auto c = fixtures::random_cloud(30, 2, 1, 4);
    auto u = c;
    for (auto& a : u.anchors) a.mean_opacity = 0.5;
    const auto phi = smoothed_opacity(u, build_graph(u.positions(), 8, std::nullopt), 1e-8);
    for (double p : phi) CHECK(rel_close(p, 0.5, 1e-15));
  }

  TEST_CASE("three-anchor line by hand") {
    const double e = 1e-8;
    const auto c = line_cloud({0.1, 0.9, 0.1});
    const auto phi = smoothed_opacity(c, build_graph(c.positions(), 2, std::nullopt), e);
    const double w1 = 1.0 / (1.0 + e), w2 = 1.0 / (2.0 + e);
    CHECK(rel_close(phi[0], (0.1 + w1 * 0.9 + w2 * 0.1) / (1.0 + w1 + w2)));
    CHECK(rel_close(phi[1], (0.9 + w1 * 0.1 + w1 * 0.1) / (1.0 + 2.0 * w1)));
    CHECK(rel_close(phi[2], (0.1 + w1 * 0.9 + w2 * 0.1) / (1.0 + w1 + w2)));
  }

  TEST_CASE("importance blend endpoints and midpoint") {
    const std::vector<double> a{0.2, 0.4, 0.9}, phi{0.6, 0.1, 0.3};
    CHECK(importance_scores(a, phi, 0.0) == a);
    CHECK(importance_scores(a, phi, 1.0) == phi);
    CHECK(rel_close(importance_scores(a, phi, 0.5)[0], 0.4));
  }

  TEST_CASE("tau zero prunes nothing") {
    const auto c = fixtures::random_cloud(40, 3, 2, 8);
    PruneConfig cfg;
    cfg.tau = 0.0;
    const auto [out, report] = prune_and_merge(c, cfg);
    CHECK(out == c);
    CHECK(report.pruned_count() == 0);
  }

  TEST_CASE("gamma zero leaves survivors untouched") {
    const auto c = fixtures::random_cloud(60, 3, 2, 9);
    PruneConfig cfg;
    cfg.tau = 0.5;
    cfg.gamma = 0.0;
    const auto [out, report] = prune_and_merge(c, cfg);
    REQUIRE(report.pruned_count() > 0);
    size_t s = 0;
    for (size_t i = 0; i < c.size(); ++i) {
      if (report.prune_mask[i]) continue;
      CHECK(out.anchors[s++] == c.anchors[i]);
    }
    CHECK(s == out.size());
  }

  TEST_CASE("two-anchor merge blends scaling") {
    auto c = line_cloud({0.9, 0.1});
    c.anchors[0].scaling = {1, 1, 1};
    c.anchors[1].scaling = {3, 3, 3};
    PruneConfig cfg;
    cfg.lambda_blend = 0.0;
    cfg.tau = 0.5;
    cfg.gamma = 0.3;
    const auto [out, report] = prune_and_merge(c, cfg);
    REQUIRE(out.size() == 1);
    for (double s : out.anchors[0].scaling) CHECK(rel_close(s, 0.7 * 1.0 + 0.3 * 3.0));
    CHECK(report.merge_target[1] == 0);
    CHECK(report.merge_target[0] == kRemoved);
    CHECK(report.survivor_map == std::vector<uint32_t>{0, kRemoved});
    CHECK(out.anchors[0].feature == c.anchors[0].feature);
    CHECK(out.anchors[0].position == c.anchors[0].position);
  }

  TEST_CASE("several pruned anchors merge sequentially in index order") {
    auto c = line_cloud({0.1, 0.9, 0.1});
    c.anchors[1].scaling = {2, 2, 2};
    c.anchors[0].scaling = {4, 4, 4};
    c.anchors[2].scaling = {8, 8, 8};
    PruneConfig cfg;
    cfg.lambda_blend = 0.0;
    cfg.tau = 0.5;
    cfg.gamma = 0.5;
    const auto [out, report] = prune_and_merge(c, cfg);
    REQUIRE(out.size() == 1);
    // First 0 into 1: 0.5*2 + 0.5*4 = 3; then 2 into 1: 0.5*3 + 0.5*8 = 5.5.
    CHECK(rel_close(out.anchors[0].scaling[0], 5.5));
    CHECK(rel_close(out.anchors[0].mean_opacity, 0.5 * (0.5 * 0.9 + 0.5 * 0.1) + 0.5 * 0.1));
  }

  TEST_CASE("pruning everything is a degenerate scene") {
    const auto c = line_cloud({0.1, 0.2});
    PruneConfig cfg;
    cfg.tau = 0.9;
    try {
      prune_and_merge(c, cfg);
      FAIL("expected DegenerateScene");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kDegenerateScene);
    }
  }

  TEST_CASE("invalid configuration") {
    const auto c = line_cloud({0.5, 0.5});
    PruneConfig cfg;
    cfg.gamma = 1.5;
    CHECK_THROWS_AS(prune_and_merge(c, cfg), Error);
    cfg = {};
    cfg.epsilon = 0.0;
    CHECK_THROWS_AS(prune_and_merge(c, cfg), Error);
  }

  TEST_CASE("random fixtures agree with the scalar reference") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
      const auto c = fixtures::random_cloud(10, 2, 2, 100 + seed);
      PruneConfig cfg;
      cfg.lambda_blend = 0.1 * static_cast<double>(seed);
      cfg.tau = 0.35;
      cfg.gamma = 0.25;
      cfg.k = 1 + seed % 5;
      if (seed % 2) cfg.radius = 0.5;
      const auto ref = oracle::prune_reference(c, cfg.lambda_blend, cfg.tau, cfg.gamma, cfg.epsilon, cfg.k,
                                               cfg.radius);
      const auto [out, report] = prune_and_merge(c, cfg);
      for (size_t i = 0; i < c.size(); ++i) {
        CHECK(rel_close(report.smoothed_opacity[i], ref.phi[i]));
        CHECK(rel_close(report.importance[i], ref.xi[i]));
        CHECK(report.prune_mask[i] == ref.mask[i]);
        CHECK(report.merge_target[i] == ref.target[i]);
      }
      REQUIRE(out.size() == ref.cloud.size());
      for (size_t i = 0; i < out.size(); ++i) {
        CHECK(rel_close(out.anchors[i].mean_opacity, ref.cloud.anchors[i].mean_opacity));
        for (int a = 0; a < 3; ++a) CHECK(rel_close(out.anchors[i].scaling[a], ref.cloud.anchors[i].scaling[a]));
      }
    }
  }

  TEST_CASE("raising a neighbour's opacity never lowers importance") {
    const auto c = fixtures::random_cloud(25, 1, 1, 31);
    const auto g = build_graph(c.positions(), 6, std::nullopt);
    const auto base = importance_scores(opacities(c), smoothed_opacity(c, g, 1e-8), 0.7);
    for (size_t j = 0; j < c.size(); j += 3) {
      auto up = c;
      up.anchors[j].mean_opacity = std::min(1.0, up.anchors[j].mean_opacity + 0.3);
      const auto raised = importance_scores(opacities(up), smoothed_opacity(up, g, 1e-8), 0.7);
      for (size_t i = 0; i < c.size(); ++i) CHECK(raised[i] >= base[i]);
    }
  }

  TEST_CASE("dense dim cluster survives only with neighbourhood weighting") {
    // Four dim anchors packed together, each beside a bright anchor.
    const double tau = 0.3, delta = 0.05;
    AnchorCloud c;
    c.channel_count = 1;
    c.offsets_count = 1;
    auto add = [&](Vec3 p, double alpha) {
      Anchor a;
      a.position = p;
      a.feature = {0.0};
      a.scaling = {1, 1, 1};
      a.offsets = {0, 0, 0};
      a.mean_opacity = alpha;
      c.anchors.push_back(a);
    };
    for (int i = 0; i < 4; ++i) add({0.01 * i, 0.0, 0.0}, tau - delta);
    for (int i = 0; i < 4; ++i) add({0.01 * i, 0.01, 0.0}, 0.95);
    PruneConfig cfg;
    cfg.tau = tau;
    cfg.k = 4;

    cfg.lambda_blend = 1.0;
    const auto [kept, kept_report] = prune_and_merge(c, cfg);
    for (int i = 0; i < 4; ++i) {
      CHECK(kept_report.importance[i] >= tau);
      CHECK_FALSE(kept_report.prune_mask[i]);
    }
    CHECK(kept.size() == c.size());

    cfg.lambda_blend = 0.0;
    const auto [pruned, pruned_report] = prune_and_merge(c, cfg);
    for (int i = 0; i < 4; ++i) CHECK(pruned_report.prune_mask[i]);
    CHECK(pruned.size() == 4);
  }

  TEST_CASE("report tsv lists every anchor") {
    const auto c = line_cloud({0.9, 0.1, 0.8});
    PruneConfig cfg;
    cfg.tau = 0.5;
    cfg.lambda_blend = 0.0;
    const auto [out, report] = prune_and_merge(c, cfg);
    const auto tsv = report.to_tsv(c);
    CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 4);
  }
}
