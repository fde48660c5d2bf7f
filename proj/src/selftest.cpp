// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#include "splatpack/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "splatpack/codec.hpp"
#include "splatpack/error.hpp"
#include "splatpack/fitting.hpp"
#include "splatpack/ggconv.hpp"
#include "splatpack/hierarchy.hpp"
#include "splatpack/range_coder.hpp"
#include "splatpack/spatial_graph.hpp"
#include "splatpack/synth.hpp"

namespace splatpack {
namespace {

std::vector<Vec3> random_points(size_t n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Vec3> p(n);
  for (auto& x : p) x = {u(rng), u(rng), u(rng)};
  return p;
}

SelftestResult knn_check(std::mt19937_64& rng) {
  SelftestResult r{"knn_brute_force", true, ""};
  for (int trial = 0; trial < 6; ++trial) {
    const auto pts = random_points(300, 0.0, 1.0, rng);
    const uint32_t k = std::array<uint32_t, 3>{1, 4, 8}[trial % 3];
    const std::optional<double> radius = trial % 2 ? std::optional<double>(0.15) : std::nullopt;
    const NeighborGraph g = build_graph(pts, k, radius);
    for (size_t i = 0; i < pts.size() && r.passed; ++i) {
      std::vector<std::pair<double, uint32_t>> all;
      for (size_t j = 0; j < pts.size(); ++j) {
        if (j == i) continue;
        const double d2 = squared_distance(pts[i], pts[j]);
        if (radius && d2 > *radius * *radius) continue;
        all.emplace_back(d2, static_cast<uint32_t>(j));
      }
      std::sort(all.begin(), all.end());
      all.resize(std::min<size_t>(all.size(), k));
      const auto got = g.neighbors(i);
      bool same = got.size() == all.size();
      for (size_t t = 0; same && t < got.size(); ++t) same = got[t] == all[t].second;
      if (!same) {
        r.passed = false;
        r.detail = "trial " + std::to_string(trial) + " anchor " + std::to_string(i) + " differs";
      }
    }
  }
  return r;
}

SelftestResult partition_check(std::mt19937_64& rng) {
  SelftestResult r{"voxel_partition", true, ""};
  const auto pts = random_points(400, -1.0, 1.0, rng);
  const double base = 0.05, scale = 4.0;
  const Hierarchy h = partition(pts, base, scale);
  std::map<VoxelKey, uint32_t> first;
  for (uint32_t i = 0; i < pts.size(); ++i) {
    VoxelKey key;
    for (int a = 0; a < 3; ++a) key[a] = static_cast<int64_t>(std::floor(pts[i][a] / (base * scale)));
    first.emplace(key, i);
  }
  std::vector<uint32_t> level1;
  for (const auto& kv : first) level1.push_back(kv.second);
  std::sort(level1.begin(), level1.end());
  if (level1 != h.level1 || h.level1.size() + h.level2.size() != pts.size()) {
    r.passed = false;
    r.detail = "level-1 set differs from direct bucketing";
  }
  return r;
}

SelftestResult trilinear_check(std::mt19937_64& rng) {
  SelftestResult r{"trilinear_closed_form", true, ""};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  KernelTable t = KernelTable::filled(5, 4, 0.0f);
  for (float& v : t.values) v = static_cast<float>(u(rng) * 2.0 - 1.0);
  double worst = 0.0;
  for (int q = 0; q < 2000; ++q) {
    const Vec3 p{u(rng), u(rng), u(rng)};
    const auto got = trilinear_lookup(t, p);
    std::array<int, 3> i0{};
    std::array<double, 3> f{};
    for (int a = 0; a < 3; ++a) {
      const double x = p[a] * 4.0;
      i0[a] = std::min(static_cast<int>(x), 3);
      f[a] = x - i0[a];
    }
    for (uint32_t c = 0; c < t.channels; ++c) {
      double want = 0.0;
      for (int dx = 0; dx < 2; ++dx)
        for (int dy = 0; dy < 2; ++dy)
          for (int dz = 0; dz < 2; ++dz) {
            const double w = (dx ? f[0] : 1 - f[0]) * (dy ? f[1] : 1 - f[1]) * (dz ? f[2] : 1 - f[2]);
            want += w * t.at(i0[0] + dx, i0[1] + dy, i0[2] + dz, c);
          }
      worst = std::max(worst, std::fabs(want - got[c]));
    }
  }
  if (worst > 1e-6) {
    r.passed = false;
    r.detail = "max deviation " + std::to_string(worst);
  }
  return r;
}

SelftestResult coder_check(std::mt19937_64& rng) {
  SelftestResult r{"range_coder_round_trip", true, ""};
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int32_t> symbols;
  std::vector<SymbolModel> models;
  for (int i = 0; i < 20000; ++i) {
    const double sigma = std::exp(4.0 * u(rng) - 2.0);
    const double mu = 3.0 * normal(rng);
    const SymbolModel m = SymbolModel::gaussian(mu, sigma, 0.1 + u(rng));
    const double x = mu + sigma * normal(rng) * (i % 97 == 0 ? 40.0 : 1.0);
    symbols.push_back(std::clamp(static_cast<int32_t>(std::lround(x / m.step)), -kSymbolBound, kSymbolBound));
    models.push_back(m);
  }
  const auto bytes = encode_symbols(symbols, models);
  const auto back = decode_symbols(bytes, models, symbols.size());
  const double estimate = estimate_rate(symbols, models);
  const double actual = 8.0 * static_cast<double>(bytes.size() - SectionHeader::kBytes);
  std::ostringstream os;
  os << "estimated " << estimate << " bits, coded " << actual << " bits";
  r.detail = os.str();
  if (back != symbols) {
    r.passed = false;
    r.detail = "decoded symbols differ; " + r.detail;
  } else if (std::fabs(actual - estimate) > 32.0 + 0.001 * estimate) {
    r.passed = false;
  }
  return r;
}

SelftestResult codec_check(uint64_t seed) {
  SelftestResult r{"codec_round_trip", true, ""};
  SynthSpec spec;
  spec.count = 150;
  spec.seed = seed;
  spec.channel_count = 8;
  spec.offsets_count = 2;
  const AnchorCloud cloud = generate(spec);
  CodecProfile profile;
  profile.phi_hidden = 8;
  profile.head_hidden = 8;
  const ContextModelParams params = initial_params(cloud, profile, seed);
  const EncodeResult enc = encode(cloud, params, profile);
  const AnchorCloud dec = decode(enc.bytes);
  if (!(dec == enc.reconstruction)) {
    r.passed = false;
    r.detail = "decoded cloud differs from the encoder reconstruction";
  } else {
    r.detail = std::to_string(enc.bytes.size()) + " bytes";
  }
  return r;
}

template <typename Fn>
SelftestResult guarded(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {name, false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

std::vector<SelftestResult> run_selftest(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SelftestResult> out;
  out.push_back(guarded("knn_brute_force", [&] { return knn_check(rng); }));
  out.push_back(guarded("voxel_partition", [&] { return partition_check(rng); }));
  out.push_back(guarded("trilinear_closed_form", [&] { return trilinear_check(rng); }));
  out.push_back(guarded("range_coder_round_trip", [&] { return coder_check(rng); }));
  out.push_back(guarded("codec_round_trip", [&] { return codec_check(seed); }));
  return out;
}

}  // namespace splatpack
