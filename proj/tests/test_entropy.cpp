// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "oracles.hpp"
#include "splatpack/entropy.hpp"
#include "splatpack/error.hpp"
#include "splatpack/range_coder.hpp"

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

double numeric_bin(const SymbolModel& m, int64_t q) {
  return oracle::normal_mass_numeric(m.mean, m.scale, (q - 0.5) * m.step, (q + 0.5) * m.step, 2000);
}

// Floor-and-renormalise reference built from numerically integrated bins:
// the window is the run of bins around the mode whose mass reaches the floor,
// everything else shares one escape mass floored at the same value.
struct FlooredReference {
  int64_t lo = 0, hi = 0;
  std::vector<double> window;
  double escape = 0.0, z = 0.0;
  double p(int64_t q) const { return window[q - lo] / z; }
};

FlooredReference floored_reference(const SymbolModel& m) {
  FlooredReference r;
  const int64_t centre = static_cast<int64_t>(std::llround(m.mean / m.step));
  r.lo = r.hi = centre;
  while (numeric_bin(m, r.hi + 1) >= kProbabilityFloor) ++r.hi;
  while (numeric_bin(m, r.lo - 1) >= kProbabilityFloor) --r.lo;
  double total = 0.0;
  for (int64_t q = r.lo; q <= r.hi; ++q) {
    r.window.push_back(numeric_bin(m, q));
    total += r.window.back();
  }
  r.escape = std::max(1.0 - total, kProbabilityFloor);
  r.z = total + r.escape;
  return r;
}

std::vector<SymbolModel> random_models(std::mt19937_64& rng, size_t n) {
  std::uniform_real_distribution<double> mu(-20.0, 20.0), logsig(std::log(0.05), std::log(200.0));
  std::vector<SymbolModel> out;
  for (size_t i = 0; i < n; ++i) out.push_back(SymbolModel::gaussian(mu(rng), std::exp(logsig(rng)), 1.0));
  return out;
}

std::vector<int32_t> sample(std::mt19937_64& rng, const std::vector<SymbolModel>& models) {
  std::vector<int32_t> out;
  for (const auto& m : models) {
    std::normal_distribution<double> d(m.mean, m.scale);
    out.push_back(static_cast<int32_t>(std::clamp(std::round(d(rng) / m.step), -32768.0, 32768.0)));
  }
  return out;
}

}  // namespace

TEST_SUITE("entropy") {
  TEST_CASE("effective step") {
    CHECK(effective_step(0.05, 0.0) == 0.05);
    CHECK(effective_step(0.05, 40.0) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(effective_step(0.05, -40.0) == doctest::Approx(0.05 * kMinStepFraction));
    CHECK(effective_step(0.05, 0.3) == doctest::Approx(0.05 * (1.0 + std::tanh(0.3))));
    CHECK(kind_of([] { effective_step(0.0, 0.0); }) == ErrorKind::kInvalidParam);
  }

  TEST_CASE("quantize rounds half away from zero") {
    CHECK(quantize(0.0, 0.1) == 0);
    CHECK(dequantize(0, 0.1) == 0.0);
    CHECK(quantize(0.5, 1.0) == 1);
    CHECK(quantize(-0.5, 1.0) == -1);
    CHECK(quantize(1.49, 1.0) == 1);
    CHECK(quantize(32768.0, 1.0) == 32768);
    CHECK(kind_of([] { quantize(32768.6, 1.0); }) == ErrorKind::kOverflow);
    CHECK(kind_of([] { quantize(std::nan(""), 1.0); }) == ErrorKind::kNonFinite);
  }

  TEST_CASE("quantization error never exceeds half a step") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> x(-100.0, 100.0), s(0.004, 3.0);
    for (int i = 0; i < 100000; ++i) {
      const double v = x(rng), step = s(rng);
      CHECK_LE(std::abs(v - dequantize(quantize(v, step), step)), step / 2.0 * (1.0 + 1e-12));
    }
  }

  TEST_CASE("unfloored bin mass matches numeric integration") {
    std::mt19937_64 rng(9);
    const auto models = random_models(rng, 40);
    for (const auto& m : models) {
      const int64_t c = std::llround(m.mean);
      for (int64_t q = c - 3; q <= c + 3; ++q) CHECK(std::abs(bin_mass(m, q) - numeric_bin(m, q)) < 1e-9);
    }
  }

  TEST_CASE("standard normal centre bin") {
    const auto m = SymbolModel::gaussian(0.0, 1.0, 1.0);
    const double raw = 0.5 * std::erfc(-0.5 / std::sqrt(2.0)) - 0.5 * std::erfc(0.5 / std::sqrt(2.0));
    CHECK(std::abs(bin_mass(m, 0) - raw) < 1e-15);
    const auto ref = floored_reference(m);
    CHECK(std::abs(symbol_probability(m, 0) - ref.p(0)) < 1e-9);
    CHECK(std::abs(ref.window[-ref.lo] - raw) < 1e-9);
  }

  TEST_CASE("floored probabilities match the numeric reference") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> mu(-3.0, 3.0), sig(0.2, 6.0);
    for (int t = 0; t < 30; ++t) {
      const auto m = SymbolModel::gaussian(mu(rng), sig(rng), 1.0);
      const auto ref = floored_reference(m);
      const CodingDistribution dist(m);
      CHECK(dist.window_lo() == ref.lo);
      CHECK(dist.window_hi() == ref.hi);
      for (int64_t q = ref.lo; q <= ref.hi; ++q) CHECK(std::abs(symbol_probability(m, q) - ref.p(q)) < 1e-9);
      const double tail_each = ref.escape / ref.z / (2.0 * kSymbolBound + 1 - (ref.hi - ref.lo + 1));
      CHECK(std::abs(symbol_probability(m, ref.hi + 3) - tail_each) < 1e-12);
      CHECK(symbol_probability(m, ref.hi + 3) >= 0.0);
    }
  }

  TEST_CASE("zero-mean models are symmetric") {
    for (double sigma : {0.3, 1.0, 7.5, 400.0}) {
      const auto m = SymbolModel::gaussian(0.0, sigma, 1.0);
      for (int32_t q = 0; q < 50; ++q) CHECK(symbol_probability(m, q) == doctest::Approx(symbol_probability(m, -q)).epsilon(1e-12));
    }
  }

  TEST_CASE("probabilities sum to one over the alphabet") {
    for (auto m : {SymbolModel::gaussian(0.0, 1.0, 1.0), SymbolModel::gaussian(3.2, 0.01, 1.0),
                   SymbolModel::gaussian(-100.0, 2000.0, 1.0), SymbolModel::gaussian(40000.0, 1.0, 1.0),
                   SymbolModel::laplace(0.0, 3.0, 1.0, 1 << 20)}) {
      const CodingDistribution d(m);
      double sum = 0.0;
      for (int64_t q = d.window_lo(); q <= d.window_hi(); ++q) sum += d.probability(q);
      if (d.rest() > 0) sum += d.probability(d.escape_symbol(0)) * static_cast<double>(d.rest());
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }

  TEST_CASE("estimate_rate of modal symbols") {
    const auto m = SymbolModel::gaussian(0.0, 0.8, 1.0);
    const double p = symbol_probability(m, 0);
    const std::vector<int32_t> s(17, 0);
    const std::vector<SymbolModel> ms(17, m);
    CHECK(estimate_rate(s, ms) == doctest::Approx(17 * -std::log2(p)).epsilon(1e-12));
  }

  TEST_CASE("wider sigma costs more for the central symbol") {
    double prev = 0.0;
    for (double sigma : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      const std::vector<int32_t> s{0};
      const std::vector<SymbolModel> m{SymbolModel::gaussian(0.0, sigma, 1.0)};
      const double bits = estimate_rate(s, m);
      CHECK(bits > prev);
      prev = bits;
    }
  }

  TEST_CASE("empty sequence") {
    const auto bytes = encode_symbols({}, {});
    CHECK(bytes.size() == SectionHeader::kBytes);
    CHECK(decode_symbols(bytes, {}, 0).empty());
  }

  TEST_CASE("single even-odds symbol costs about one bit") {
    const std::vector<SymbolModel> m{SymbolModel::gaussian(0.5, 0.05, 1.0)};
    CHECK(symbol_probability(m[0], 1) == doctest::Approx(0.5).epsilon(1e-4));
    for (int32_t s : {0, 1}) {
      const std::vector<int32_t> sym{s};
      const auto bytes = encode_symbols(sym, m);
      CHECK((bytes.size() - SectionHeader::kBytes) * 8 <= 1 + 32);
      CHECK(decode_symbols(bytes, m, 1) == sym);
    }
  }

  TEST_CASE("ten thousand random symbols round trip within the rate slack") {
    std::mt19937_64 rng(10000);
    const auto models = random_models(rng, 10000);
    auto symbols = sample(rng, models);
    symbols[17] = 30000;  // far tail, coded through the escape entry
    symbols[18] = -32768;
    const auto bytes = encode_symbols(symbols, models);
    CHECK(decode_symbols(bytes, models, symbols.size()) == symbols);
    const double estimate = estimate_rate(symbols, models);
    const double actual = 8.0 * static_cast<double>(bytes.size() - SectionHeader::kBytes);
    CHECK(std::abs(actual - estimate) <= 32.0 + 0.001 * estimate);
  }

  TEST_CASE("laplace models round trip over a wide bound") {
    std::mt19937_64 rng(3);
    std::vector<SymbolModel> models;
    std::vector<int32_t> symbols;
    std::uniform_int_distribution<int32_t> wide(-(1 << 30), 1 << 30);
    for (int i = 0; i < 3000; ++i) {
      models.push_back(SymbolModel::laplace(0.0, 1.0 + i % 50, 1.0, 1 << 30));
      symbols.push_back(i % 100 == 0 ? wide(rng) : (i % 7) - 3);
    }
    const auto bytes = encode_symbols(symbols, models);
    CHECK(decode_symbols(bytes, models, symbols.size()) == symbols);
  }

  TEST_CASE("decoding under different models is a model mismatch") {
    std::mt19937_64 rng(8);
    auto models = random_models(rng, 200);
    const auto symbols = sample(rng, models);
    const auto bytes = encode_symbols(symbols, models);
    models[100].mean += 0.25;
    CHECK(kind_of([&] { decode_symbols(bytes, models, symbols.size()); }) == ErrorKind::kModelMismatch);
  }

  TEST_CASE("wrong symbol count and truncated payload are corrupt streams") {
    std::mt19937_64 rng(6);
    const auto models = random_models(rng, 50);
    const auto symbols = sample(rng, models);
    auto bytes = encode_symbols(symbols, models);
    std::vector<SymbolModel> fewer(models.begin(), models.end() - 1);
    CHECK(kind_of([&] { decode_symbols(bytes, fewer, fewer.size()); }) == ErrorKind::kCorruptStream);
    bytes.resize(bytes.size() - 2);
    CHECK(kind_of([&] { decode_symbols(bytes, models, models.size()); }) == ErrorKind::kCorruptStream);
  }

  TEST_CASE("raw range coder with uniform frequencies") {
    RangeEncoder enc;
    std::vector<uint64_t> values;
    std::mt19937_64 rng(2);
    for (int i = 0; i < 5000; ++i) {
      const uint64_t count = 1 + rng() % 1000;
      const uint64_t v = rng() % count;
      values.push_back(v);
      enc.encode(CodingDistribution::uniform_cumulative(v, count),
                 CodingDistribution::uniform_cumulative(v + 1, count) - CodingDistribution::uniform_cumulative(v, count));
    }
    const auto bytes = enc.finish();
    std::mt19937_64 replay(2);
    RangeDecoder dec(bytes);
    for (int i = 0; i < 5000; ++i) {
      const uint64_t count = 1 + replay() % 1000;
      replay();
      const uint64_t v = CodingDistribution::uniform_find(dec.target(), count);
      CHECK(v == values[i]);
      dec.consume(CodingDistribution::uniform_cumulative(v, count),
                  CodingDistribution::uniform_cumulative(v + 1, count) - CodingDistribution::uniform_cumulative(v, count));
    }
  }

  TEST_CASE("model digest depends on every field") {
    const auto m = SymbolModel::gaussian(1.0, 2.0, 0.5);
    const std::vector<SymbolModel> a{m};
    for (int f = 0; f < 4; ++f) {
      auto n = m;
      if (f == 0) n.mean += 1e-9;
      if (f == 1) n.scale += 1e-9;
      if (f == 2) n.step += 1e-9;
      if (f == 3) n.distribution = Distribution::kLaplace;
      const std::vector<SymbolModel> b{n};
      CHECK(model_digest(a) != model_digest(b));
    }
  }
}
