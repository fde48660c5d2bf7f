// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "splatpack/error.hpp"
#include "splatpack/hierarchy.hpp"

using namespace splatpack;

namespace {

void check_against_oracle(std::span<const Vec3> pts, double base, double scale) {
  const auto h = partition(pts, base, scale);
  const auto ref = oracle::brute_partition(pts, base, scale);
  CHECK(h.level1 == ref.level1);
  CHECK(h.level2 == ref.level2);
  CHECK(h.parent_of == ref.parent);
  CHECK(h.level1.size() + h.level2.size() == pts.size());
  for (size_t m = 0; m < h.level2.size(); ++m) CHECK(h.level1[h.parent_slot[m]] == h.parent_of[m]);
}

}  // namespace

TEST_SUITE("hierarchy") {
  TEST_CASE("one coarse voxel keeps index 0") {
    const std::vector<Vec3> p{{0.01, 0.01, 0.01}, {0.02, 0.0, 0.03}, {0.0, 0.005, 0.0}};
    const auto h = partition(p, 0.01, 4.0);
    CHECK(h.level1 == std::vector<uint32_t>{0});
    CHECK(h.level2 == std::vector<uint32_t>{1, 2});
    CHECK(h.parent_of == std::vector<uint32_t>{0, 0});
    CHECK(h.coarse_voxel_size == doctest::Approx(0.04));
  }

  TEST_CASE("separate voxels give an empty level two") {
    const std::vector<Vec3> p{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    const auto h = partition(p, 0.01, 4.0);
    CHECK(h.level1.size() == 4);
    CHECK(h.level2.empty());
  }

  TEST_CASE("200 random anchors match brute-force bucketing") {
    std::mt19937_64 rng(200);
    const auto p = oracle::random_points(rng, 200, 0.0, 0.2);
    check_against_oracle(p, 0.01, 4.0);
  }

  TEST_CASE("coordinates straddling the origin floor toward minus infinity") {
    std::mt19937_64 rng(13);
    const auto p = oracle::random_points(rng, 400, -0.1, 0.1);
    check_against_oracle(p, 0.01, 4.0);
    // -0.01 and 0.01 share |p| but lie in different voxels.
    const std::vector<Vec3> q{{-0.01, 0, 0}, {0.01, 0, 0}};
    CHECK(partition(q, 0.01, 4.0).level2.empty());
  }

  TEST_CASE("serialization is identical for identical input") {
    std::mt19937_64 rng(1);
    const auto p = oracle::random_points(rng, 300, -1.0, 1.0);
    CHECK(partition(p, 0.05, 3.0).serialize() == partition(p, 0.05, 3.0).serialize());
  }

  TEST_CASE("invalid arguments") {
    const std::vector<Vec3> p{{0, 0, 0}};
    const std::vector<Vec3> none;
    try {
      partition(p, 0.01, 1.0);
      FAIL("voxel_scale 1 accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kInvalidParam);
    }
    try {
      partition(none, 0.01, 4.0);
      FAIL("empty cloud accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kEmptyCloud);
    }
  }

  TEST_CASE("preliminary context carries parent attributes") {
    const auto cloud = fixtures::random_cloud(150, 3, 2, 77, 0.0, 0.1);
    const auto h = partition(cloud, 4.0);
    REQUIRE(!h.level2.empty());
    std::vector<AnchorAttributes> l1;
    for (uint32_t i : h.level1) l1.push_back({cloud.anchors[i].feature, cloud.anchors[i].scaling, cloud.anchors[i].offsets});
    std::vector<Vec3> l2;
    for (uint32_t i : h.level2) l2.push_back(cloud.anchors[i].position);
    const auto ctx = preliminary_context(h, l1, l2);
    REQUIRE(ctx.size() == h.level2.size());
    const auto ref = oracle::brute_partition(cloud.positions(), cloud.base_voxel_size, 4.0);
    for (size_t m = 0; m < ctx.size(); ++m) {
      const Anchor& parent = cloud.anchors[ref.parent[m]];
      CHECK(ctx.positions[m] == cloud.anchors[ref.level2[m]].position);
      CHECK(ctx.inherited[m].feature == parent.feature);
      CHECK(ctx.inherited[m].scaling == parent.scaling);
      CHECK(ctx.inherited[m].offsets == parent.offsets);
    }
  }

  TEST_CASE("preliminary context of an empty level two is empty") {
    const std::vector<Vec3> p{{0, 0, 0}, {1, 1, 1}};
    const auto h = partition(p, 0.01, 4.0);
    std::vector<AnchorAttributes> l1(2, AnchorAttributes{{0.0}, {1, 1, 1}, {}});
    CHECK(preliminary_context(h, l1, {}).size() == 0);
  }
}
