// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#include "splatpack/types.hpp"

#include <cmath>
#include <string>

#include "splatpack/error.hpp"

namespace splatpack {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "ParseError";
    case ErrorKind::kValidation: return "ValidationError";
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kInvalidParam: return "InvalidParam";
    case ErrorKind::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kDegenerateScene: return "DegenerateScene";
    case ErrorKind::kEmptyCloud: return "EmptyCloud";
    case ErrorKind::kMissingParent: return "MissingParent";
    case ErrorKind::kNonFinite: return "NonFinite";
    case ErrorKind::kOverflow: return "Overflow";
    case ErrorKind::kModelMismatch: return "ModelMismatch";
    case ErrorKind::kCorruptStream: return "CorruptStream";
  }
  return "Error";
}

std::vector<Vec3> AnchorCloud::positions() const {
  std::vector<Vec3> out;
  out.reserve(anchors.size());
  for (const auto& a : anchors) out.push_back(a.position);
  return out;
}

namespace {

std::string where(size_t index, const char* field) {
  return "anchor " + std::to_string(index) + " field '" + field + "'";
}

bool all_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

void AnchorCloud::validate() const {
  require(base_voxel_size > 0.0 && std::isfinite(base_voxel_size), ErrorKind::kValidation,
          "base_voxel_size must be positive");
  for (size_t i = 0; i < anchors.size(); ++i) {
    const Anchor& a = anchors[i];
    require(all_finite(a.position), ErrorKind::kValidation, where(i, "position") + " is not finite");
    require(a.feature.size() == channel_count, ErrorKind::kValidation,
            where(i, "feature") + " has " + std::to_string(a.feature.size()) + " channels, expected " +
                std::to_string(channel_count));
    require(all_finite(a.feature), ErrorKind::kValidation, where(i, "feature") + " is not finite");
    for (double s : a.scaling) {
      require(std::isfinite(s) && s > 0.0, ErrorKind::kValidation,
              where(i, "scaling") + " must be strictly positive");
    }
    require(a.offsets.size() == 3 * size_t{offsets_count}, ErrorKind::kValidation,
            where(i, "offsets") + " has wrong length");
    require(all_finite(a.offsets), ErrorKind::kValidation, where(i, "offsets") + " is not finite");
    require(a.mean_opacity >= 0.0 && a.mean_opacity <= 1.0, ErrorKind::kValidation,
            where(i, "mean_opacity") + " must lie in [0, 1]");
  }
}

void gather_channels(const Anchor& anchor, std::span<double> out) {
  size_t c = 0;
  for (double v : anchor.feature) out[c++] = v;
  for (double v : anchor.scaling) out[c++] = v;
  for (double v : anchor.offsets) out[c++] = v;
}

void scatter_channels(std::span<const double> in, Anchor& anchor) {
  size_t c = 0;
  for (double& v : anchor.feature) v = in[c++];
  for (double& v : anchor.scaling) v = in[c++];
  for (double& v : anchor.offsets) v = in[c++];
}

}  // namespace splatpack
