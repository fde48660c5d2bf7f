// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>

#include "doctest.h"
#include "fixtures.hpp"
#include "splatpack/cloud_io.hpp"
#include "splatpack/error.hpp"

using namespace splatpack;

namespace {

ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIo;
}

}  // namespace

TEST_SUITE("core_types") {
  TEST_CASE("csv with only a header yields an empty cloud") {
    const auto cloud = parse_cloud_csv("px,py,pz,f0,f1,sx,sy,sz,o0x,o0y,o0z,opacity\n");
    CHECK(cloud.empty());
    CHECK(cloud.channel_count == 2);
    CHECK(cloud.offsets_count == 1);
  }

  TEST_CASE("single csv row reads back field by field") {
    const auto cloud = parse_cloud_csv(
        "px,py,pz,f0,f1,sx,sy,sz,o0x,o0y,o0z,opacity\n"
        "1,2,3,0.5,-0.25,0.1,0.2,0.3,0.01,0.02,0.03,0.75\n");
    REQUIRE(cloud.size() == 1);
    const Anchor& a = cloud.anchors[0];
    CHECK(a.position == Vec3{1, 2, 3});
    CHECK(a.feature == std::vector<double>{0.5, -0.25});
    CHECK(a.scaling[0] == doctest::Approx(0.1));
    CHECK(a.scaling[2] == doctest::Approx(0.3));
    CHECK(a.offsets[1] == doctest::Approx(0.02));
    CHECK(a.mean_opacity == doctest::Approx(0.75));
  }

  TEST_CASE("negative scaling is a validation error naming the field") {
    try {
      parse_cloud_csv(
          "px,py,pz,f0,sx,sy,sz,opacity\n"
          "0,0,0,1,0.1,-0.2,0.3,0.5\n");
      FAIL("accepted negative scaling");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kValidation);
      CHECK(std::string(e.what()).find("scaling") != std::string::npos);
      CHECK(std::string(e.what()).find("anchor 0") != std::string::npos);
    }
  }

  TEST_CASE("malformed csv row is a parse error") {
    CHECK(kind_of([] { parse_cloud_csv("px,py,pz,f0,sx,sy,sz,opacity\n0,0,abc,1,0.1,0.2,0.3,0.5\n"); }) ==
          ErrorKind::kParse);
    CHECK(kind_of([] { parse_cloud_csv("px,py,pz,f0,sx,sy,sz,opacity\n0,0,0\n"); }) == ErrorKind::kParse);
  }

  TEST_CASE("native round trip is exact and order preserving") {
    for (size_t n : {size_t{0}, size_t{1}, size_t{100}}) {
      const auto cloud = fixtures::random_cloud(n, 6, 3, 17 + n);
      const auto back = parse_cloud(serialize_cloud(cloud));
      CHECK(back == cloud);
    }
  }

  TEST_CASE("native round trip through a file") {
    const auto cloud = fixtures::random_cloud(100, 4, 2, 5);
    const auto path = std::filesystem::temp_directory_path() / "splatpack_core_types.lgac";
    save_cloud(cloud, path);
    CHECK(load_cloud(path, CloudFormat::kNative) == cloud);
    std::filesystem::remove(path);
  }

  TEST_CASE("csv round trip of f32 values") {
    const auto cloud = fixtures::random_cloud(20, 3, 2, 9);
    const auto path = std::filesystem::temp_directory_path() / "splatpack_core_types.csv";
    save_cloud_csv(cloud, path);
    auto back = load_cloud(path, CloudFormat::kCsv);
    back.base_voxel_size = cloud.base_voxel_size;
    CHECK(back == cloud);
    std::filesystem::remove(path);
  }

  TEST_CASE("truncated native stream is a parse error") {
    auto bytes = serialize_cloud(fixtures::random_cloud(5, 2, 1, 3));
    bytes.resize(bytes.size() - 3);
    CHECK(kind_of([&] { parse_cloud(bytes); }) == ErrorKind::kParse);
    bytes[0] = 'X';
    CHECK(kind_of([&] { parse_cloud(bytes); }) == ErrorKind::kParse);
  }

  TEST_CASE("missing file is an io error") {
    CHECK(kind_of([] { load_cloud("/nonexistent/splatpack.lgac", CloudFormat::kNative); }) == ErrorKind::kIo);
  }

  TEST_CASE("channel gather and scatter are inverse") {
    const auto cloud = fixtures::random_cloud(1, 3, 2, 4);
    std::vector<double> ch(cloud.coded_channels());
    gather_channels(cloud.anchors[0], ch);
    CHECK(ch[0] == cloud.anchors[0].feature[0]);
    CHECK(ch[3] == cloud.anchors[0].scaling[0]);
    CHECK(ch[6] == cloud.anchors[0].offsets[0]);
    Anchor b = cloud.anchors[0];
    std::fill(b.feature.begin(), b.feature.end(), 0.0);
    scatter_channels(ch, b);
    CHECK(b == cloud.anchors[0]);
  }
}
