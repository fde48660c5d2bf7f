// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#include "splatpack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "splatpack/error.hpp"

namespace splatpack {
namespace {

struct Accumulator {
  double sum_sq = 0.0;
  double max_abs = 0.0;
  size_t count = 0;

  void add(double a, double b) {
    const double d = a - b;
    sum_sq += d * d;
    max_abs = std::max(max_abs, std::fabs(d));
    ++count;
  }
  KindDistortion result() const { return {count ? sum_sq / static_cast<double>(count) : 0.0, max_abs}; }
};

}  // namespace

Distortion attribute_distortion(const AnchorCloud& original, const AnchorCloud& decoded) {
  require(original.size() == decoded.size(), ErrorKind::kDimensionMismatch, "anchor counts differ");
  require(original.channel_count == decoded.channel_count && original.offsets_count == decoded.offsets_count,
          ErrorKind::kDimensionMismatch, "attribute dimensions differ");
  Accumulator pos, feat, scal, offs;
  for (size_t i = 0; i < original.size(); ++i) {
    const Anchor& a = original.anchors[i];
    const Anchor& b = decoded.anchors[i];
    require(a.feature.size() == b.feature.size() && a.offsets.size() == b.offsets.size(),
            ErrorKind::kDimensionMismatch, "anchor " + std::to_string(i) + " attribute sizes differ");
    for (int d = 0; d < 3; ++d) pos.add(a.position[d], b.position[d]);
    for (size_t c = 0; c < a.feature.size(); ++c) feat.add(a.feature[c], b.feature[c]);
    for (int d = 0; d < 3; ++d) scal.add(a.scaling[d], b.scaling[d]);
    for (size_t c = 0; c < a.offsets.size(); ++c) offs.add(a.offsets[c], b.offsets[c]);
  }
  return {pos.result(), feat.result(), scal.result(), offs.result()};
}

std::string Distortion::to_text() const {
  std::ostringstream os;
  os.precision(10);
  const std::pair<const char*, const KindDistortion*> kinds[] = {
      {"position", &position}, {"feature", &feature}, {"scaling", &scaling}, {"offsets", &offsets}};
  for (const auto& [name, d] : kinds) {
    os << name << "_mse=" << d->mse << "\n" << name << "_max_abs=" << d->max_abs << "\n";
  }
  return os.str();
}

}  // namespace splatpack
