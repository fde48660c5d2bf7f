// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#include "splatpack/profile.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "splatpack/error.hpp"

namespace splatpack {
namespace {

using nlohmann::json;

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::kValidation, std::string("profile field '") + key + "': " + e.what());
  }
}

void read_optional(const json& j, const char* key, std::optional<double>& out, bool allow_auto) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (v.is_null() || (allow_auto && v.is_string() && v.get<std::string>() == "auto")) {
    out.reset();
  } else if (v.is_number()) {
    out = v.get<double>();
  } else {
    fail(ErrorKind::kValidation, std::string("profile field '") + key + "' must be a number" +
                                     (allow_auto ? ", null or \"auto\"" : " or null"));
  }
}

}  // namespace

PruneConfig CodecProfile::prune_config() const {
  PruneConfig c;
  c.lambda_blend = lambda_blend;
  c.tau = tau;
  c.gamma = gamma;
  c.epsilon = epsilon;
  c.k = k;
  c.radius = radius;
  return c;
}

void CodecProfile::validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::kValidation, "profile: " + what);
  };
  check(std::isfinite(tau), "tau must be finite");
  check(lambda_blend >= 0.0 && lambda_blend <= 1.0, "lambda_blend must lie in [0, 1]");
  check(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  check(epsilon > 0.0, "epsilon must be positive");
  check(k >= 1, "k must be >= 1");
  check(!radius || *radius > 0.0, "radius must be positive");
  check(voxel_scale > 1.0 && std::isfinite(voxel_scale), "voxel_scale must exceed 1");
  for (double s : {quant.feature_step, quant.scaling_step, quant.offsets_step}) {
    check(s > 0.0 && std::isfinite(s), "quantisation steps must be positive");
  }
  check(embed_width >= 1, "embed_width must be >= 1");
  check(table_resolution >= 2, "table_resolution must be >= 2");
  check(sigma_min > 0.0, "sigma_min must be positive");
  check(!neighborhood_scale || *neighborhood_scale > 0.0, "neighborhood_scale must be positive");
  check(learning_rate > 0.0, "learning_rate must be positive");
}

CodecProfile CodecProfile::parse(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kParse, std::string("profile: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::kParse, "profile: top level must be a JSON object");
  static const std::set<std::string> known = {
      "tau", "lambda_blend", "gamma", "epsilon", "k", "radius", "voxel_scale", "feature_step", "scaling_step",
      "offsets_step", "adaptive", "embed_width", "phi_hidden", "head_hidden", "table_resolution", "sigma_min",
      "neighborhood_scale", "fit_iterations", "learning_rate"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) fail(ErrorKind::kValidation, "profile: unknown field '" + item.key() + "'");
  }
  CodecProfile p;
  read_field(j, "tau", p.tau);
  read_field(j, "lambda_blend", p.lambda_blend);
  read_field(j, "gamma", p.gamma);
  read_field(j, "epsilon", p.epsilon);
  read_field(j, "k", p.k);
  read_optional(j, "radius", p.radius, false);
  read_field(j, "voxel_scale", p.voxel_scale);
  read_field(j, "feature_step", p.quant.feature_step);
  read_field(j, "scaling_step", p.quant.scaling_step);
  read_field(j, "offsets_step", p.quant.offsets_step);
  read_field(j, "adaptive", p.quant.adaptive);
  read_field(j, "embed_width", p.embed_width);
  read_field(j, "phi_hidden", p.phi_hidden);
  read_field(j, "head_hidden", p.head_hidden);
  read_field(j, "table_resolution", p.table_resolution);
  read_field(j, "sigma_min", p.sigma_min);
  read_optional(j, "neighborhood_scale", p.neighborhood_scale, true);
  read_field(j, "fit_iterations", p.fit_iterations);
  read_field(j, "learning_rate", p.learning_rate);
  p.validate();
  return p;
}

CodecProfile CodecProfile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open profile '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string CodecProfile::to_json() const {
  json j;
  j["tau"] = tau;
  j["lambda_blend"] = lambda_blend;
  j["gamma"] = gamma;
  j["epsilon"] = epsilon;
  j["k"] = k;
  j["radius"] = radius ? json(*radius) : json(nullptr);
  j["voxel_scale"] = voxel_scale;
  j["feature_step"] = quant.feature_step;
  j["scaling_step"] = quant.scaling_step;
  j["offsets_step"] = quant.offsets_step;
  j["adaptive"] = quant.adaptive;
  j["embed_width"] = embed_width;
  j["phi_hidden"] = phi_hidden;
  j["head_hidden"] = head_hidden;
  j["table_resolution"] = table_resolution;
  j["sigma_min"] = sigma_min;
  j["neighborhood_scale"] = neighborhood_scale ? json(*neighborhood_scale) : json("auto");
  j["fit_iterations"] = fit_iterations;
  j["learning_rate"] = learning_rate;
  return j.dump(2) + "\n";
}

}  // namespace splatpack
