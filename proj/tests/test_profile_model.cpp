// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>

#include "doctest.h"
#include "fixtures.hpp"
#include "splatpack/context_model.hpp"
#include "splatpack/error.hpp"
#include "splatpack/fitting.hpp"
#include "splatpack/profile.hpp"

using namespace splatpack;

TEST_SUITE("codec") {
  TEST_CASE("profile defaults") {
    const CodecProfile p = CodecProfile::parse("{}");
    CHECK(p.k == 8);
    CHECK_FALSE(p.radius.has_value());
    CHECK(p.voxel_scale == 4.0);
    CHECK(p.embed_width == 12);
    CHECK(p.table_resolution == 5);
    CHECK(p.quant.feature_step == 0.05);
    CHECK_FALSE(p.neighborhood_scale.has_value());
  }

  TEST_CASE("profile parsing and json round trip") {
    const auto p = CodecProfile::parse(
        R"({"tau": 0.2, "lambda_blend": 0.8, "k": 4, "radius": 0.5, "feature_step": 0.1, "adaptive": true,
            "neighborhood_scale": 0.25, "phi_hidden": 0})");
    CHECK(p.tau == 0.2);
    CHECK(p.k == 4);
    CHECK(*p.radius == 0.5);
    CHECK(p.quant.adaptive);
    CHECK(*p.neighborhood_scale == 0.25);
    CHECK(p.phi_hidden == 0);
    const auto q = CodecProfile::parse(p.to_json());
    CHECK(q.to_json() == p.to_json());
    CHECK(q.prune_config().lambda_blend == 0.8);
  }

  TEST_CASE("profile errors are validation errors") {
    for (const char* bad : {R"({"unknown": 1})", R"({"k": 0})", R"({"voxel_scale": 1.0})", R"({"gamma": 2})",
                            R"({"feature_step": -1})", "{not json", R"({"neighborhood_scale": "sometimes"})"}) {
      try {
        CodecProfile::parse(bad);
        FAIL("accepted " << bad);
      } catch (const Error& e) {
        CHECK((e.kind() == ErrorKind::kValidation || e.kind() == ErrorKind::kParse));
      }
    }
  }

  TEST_CASE("model shape widths") {
    ModelShape s;
    s.channel_count = 50;
    s.offsets_count = 10;
    CHECK(s.coded_channels() == 83);
    CHECK(s.phi_input() == 53);
    CHECK(s.head_input() == 12 + 6 + 30);
    CHECK(s.head_output() == 249);
  }

  TEST_CASE("parameter flatten, assign and serialize round trip") {
    const auto c = fixtures::random_cloud(200, 3, 2, 5, 0.0, 0.1);
    const auto profile = fixtures::small_profile();
    const auto p = initial_params(c, profile, 11);
    REQUIRE(p.shape.has_context);
    const ParamLayout layout(p.shape);
    CHECK(layout.total == p.parameter_count());
    CHECK(p.flatten().size() == layout.total);
    auto q = ContextModelParams::zeros(p.shape);
    q.assign(p.flatten());
    CHECK(q == p);
    CHECK(ContextModelParams::parse(p.shape, p.serialize()) == p);
    const auto path = std::filesystem::temp_directory_path() / "splatpack_params.lgmp";
    save_params(p, path.string());
    CHECK(load_params(path.string()) == p);
    std::filesystem::remove(path);
  }

  TEST_CASE("truncated parameters are a corrupt stream") {
    const auto c = fixtures::random_cloud(50, 2, 1, 5, 0.0, 0.1);
    const auto p = initial_params(c, fixtures::small_profile(), 1);
    auto bytes = p.serialize();
    bytes.pop_back();
    try {
      ContextModelParams::parse(p.shape, bytes);
      FAIL("accepted truncated parameters");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kCorruptStream);
    }
  }

  TEST_CASE("level-one models use the prior") {
    const auto c = fixtures::random_cloud(50, 2, 1, 5);
    auto p = initial_params(c, fixtures::small_profile(), 1);
    p.prior.mu[0] = 0.25f;
    p.prior.sigma_raw[0] = 0.0f;
    QuantSpec q;
    const auto m = level1_models(p, q, 1e-4);
    REQUIRE(m.size() == p.shape.coded_channels());
    CHECK(m[0].mean == 0.25);
    CHECK(m[0].scale == doctest::Approx(std::log(2.0) + 1e-4));
    CHECK(m[0].step == q.feature_step);
    CHECK(m[2].step == q.scaling_step);
    CHECK(m[5].step == q.offsets_step);
  }
}
