// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace splatpack {

struct SelftestResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Embedded oracle checks: k-NN against brute force, voxel partition against
/// direct bucketing, trilinear lookup against the closed-form blend, range
/// coder round trip and rate fidelity, and a small codec round trip.
std::vector<SelftestResult> run_selftest(uint64_t seed);

}  // namespace splatpack
