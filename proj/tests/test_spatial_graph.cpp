// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "splatpack/error.hpp"
#include "splatpack/parallel.hpp"
#include "splatpack/spatial_graph.hpp"

using namespace splatpack;

TEST_SUITE("spatial_graph") {
  TEST_CASE("single point has no neighbours") {
    const std::vector<Vec3> p{{0.3, 0.2, 0.1}};
    const auto g = build_graph(p, 8, std::nullopt);
    REQUIRE(g.size() == 1);
    CHECK(g.neighbors(0).empty());
  }

  TEST_CASE("collinear points with equal-distance tie go to the lower index") {
    const std::vector<Vec3> p{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    const auto g = build_graph(p, 1, std::nullopt);
    CHECK(g.lists() == std::vector<std::vector<uint32_t>>{{1}, {0}, {1}});
  }

  TEST_CASE("500 uniform points match brute force") {
    std::mt19937_64 rng(500);
    const auto p = oracle::random_points(rng, 500, 0.0, 1.0);
    const auto g = build_graph(p, 8, 0.2);
    const auto ref = oracle::brute_knn(p, 8, 0.2);
    CHECK(g.lists() == ref);
    for (size_t i = 0; i < p.size(); i += 37) {
      const auto q = query_neighbors(g, i);
      CHECK(std::vector<uint32_t>(q.begin(), q.end()) == ref[i]);
    }
  }

  TEST_CASE("lattice points exercise distance ties") {
    std::vector<Vec3> p;
    for (int x = 0; x < 6; ++x)
      for (int y = 0; y < 6; ++y)
        for (int z = 0; z < 4; ++z) p.push_back({x * 0.5, y * 0.5, z * 0.5});
    for (uint32_t k : {1u, 4u, 8u, 26u}) {
      CHECK(build_graph(p, k, std::nullopt).lists() == oracle::brute_knn(p, k, std::nullopt));
      CHECK(build_graph(p, k, 0.5).lists() == oracle::brute_knn(p, k, 0.5));
    }
  }

  TEST_CASE("isolated point under a bounded radius has an empty list") {
    const std::vector<Vec3> p{{0, 0, 0}, {0.1, 0, 0}, {5, 5, 5}};
    const auto g = build_graph(p, 4, 1.0);
    CHECK(query_neighbors(g, 2).empty());
    CHECK(g.neighbors(0).size() == 1);
  }

  TEST_CASE("invalid arguments") {
    const std::vector<Vec3> p{{0, 0, 0}, {1, 0, 0}};
    const auto g = build_graph(p, 1, std::nullopt);
    CHECK_THROWS_AS(query_neighbors(g, 2), Error);
    try {
      query_neighbors(g, 2);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kIndexOutOfRange);
    }
    try {
      build_graph(p, 0, std::nullopt);
      FAIL("k = 0 accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kInvalidParam);
    }
    try {
      build_graph(p, 2, 0.0);
      FAIL("radius 0 accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kInvalidParam);
    }
  }

  TEST_CASE("builds are byte-identical across runs and thread counts") {
    std::mt19937_64 rng(7);
    const auto p = oracle::random_points(rng, 1500, -2.0, 2.0);
    const unsigned saved = thread_count();
    set_thread_count(1);
    const auto a = build_graph(p, 8, std::nullopt).serialize();
    set_thread_count(4);
    const auto b = build_graph(p, 8, std::nullopt).serialize();
    set_thread_count(saved);
    CHECK(a == b);
    CHECK(build_graph(p, 8, std::nullopt).serialize() == a);
  }

  TEST_CASE("permuting the input relabels the graph") {
    std::mt19937_64 rng(11);
    const auto p = oracle::random_points(rng, 300, 0.0, 1.0);
    std::vector<uint32_t> perm(p.size());
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Vec3> q(p.size());
    for (size_t i = 0; i < p.size(); ++i) q[i] = p[perm[i]];  // q[i] is original point perm[i]
    const auto gp = build_graph(p, 6, std::nullopt);
    const auto gq = build_graph(q, 6, std::nullopt);
    for (size_t i = 0; i < q.size(); ++i) {
      std::vector<uint32_t> mapped;
      for (uint32_t j : gq.neighbors(i)) mapped.push_back(perm[j]);
      std::vector<uint32_t> expected(gp.neighbors(perm[i]).begin(), gp.neighbors(perm[i]).end());
      // Continuous random positions have no distance ties, so order is preserved.
      CHECK(mapped == expected);
    }
  }

  TEST_CASE("debug dump format") {
    const std::vector<Vec3> p{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    CHECK(build_graph(p, 2, std::nullopt).dump() == "0: 1 2\n1: 0 2\n2: 1 0\n");
  }

  TEST_CASE("kd tree nearest matches brute force with exclusion") {
    std::mt19937_64 rng(3);
    const auto p = oracle::random_points(rng, 200, 0.0, 1.0);
    const KdTree tree(p);
    const auto ref = oracle::brute_knn(p, 5, std::nullopt);
    for (uint32_t i = 0; i < 200; i += 13) {
      const auto hits = tree.nearest(p[i], 5, std::numeric_limits<double>::infinity(), i);
      std::vector<uint32_t> got;
      for (const auto& h : hits) got.push_back(h.index);
      CHECK(got == ref[i]);
    }
  }
}
