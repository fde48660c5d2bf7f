// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>

#include "splatpack/types.hpp"

namespace splatpack {

struct KindDistortion {
  double mse = 0.0;
  double max_abs = 0.0;
};

/// Per attribute kind, over all anchors and components of that kind.
struct Distortion {
  KindDistortion position;
  KindDistortion feature;
  KindDistortion scaling;
  KindDistortion offsets;

  std::string to_text() const;
};

/// Anchor i of `original` is compared with anchor i of `decoded`.
Distortion attribute_distortion(const AnchorCloud& original, const AnchorCloud& decoded);

}  // namespace splatpack
