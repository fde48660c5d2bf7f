// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
//
// splatpack command-line tool.
//
//   splatpack generate --output cloud.lgac [--seed N] [--count N] [--model smooth-field]
//   splatpack prune    --input cloud.lgac --output pruned.lgac [--profile p.json] [--report prune.tsv]
//   splatpack fit      --input cloud.lgac --output model.lgmp [--profile p.json] [--report trace.json]
//   splatpack encode   --input cloud.lgac --output scene.lghc [--params model.lgmp] [--report rate.json]
//   splatpack decode   --input scene.lghc --output decoded.lgac
//   splatpack stats    --input scene.lghc [--report rate.json]
//   splatpack selftest [--seed N]
//
// Exit codes: 0 success, 2 validation or usage error, 3 corrupt stream,
// 4 selftest failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "splatpack/cloud_io.hpp"
#include "splatpack/codec.hpp"
#include "splatpack/error.hpp"
#include "splatpack/fitting.hpp"
#include "splatpack/metrics.hpp"
#include "splatpack/naap.hpp"
#include "splatpack/parallel.hpp"
#include "splatpack/profile.hpp"
#include "splatpack/selftest.hpp"
#include "splatpack/synth.hpp"

namespace {

using namespace splatpack;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitCorrupt = 3;
constexpr int kExitSelftest = 4;

struct Common {
  std::string input;
  std::string output;
  std::string profile;
  std::string report;
  uint64_t seed = 0;
  unsigned threads = 1;
};

void add_common(CLI::App* cmd, Common& c, bool input, bool output) {
  if (input) cmd->add_option("--input", c.input, "input file")->required();
  if (output) cmd->add_option("--output", c.output, "output file")->required();
  cmd->add_option("--profile", c.profile, "JSON codec profile");
  cmd->add_option("--seed", c.seed, "seed for all randomness");
  cmd->add_option("--threads", c.threads, "worker threads (0 = hardware); never changes outputs");
  cmd->add_option("--report", c.report, "report file (.json for JSON, otherwise key=value text)");
}

CodecProfile profile_of(const Common& c) { return c.profile.empty() ? CodecProfile{} : CodecProfile::load(c.profile); }

AnchorCloud read_cloud(const std::string& path) { return load_cloud(path, format_from_extension(path)); }

void write_cloud(const AnchorCloud& cloud, const std::string& path) {
  if (format_from_extension(path) == CloudFormat::kCsv) {
    save_cloud_csv(cloud, path);
  } else {
    save_cloud(cloud, path);
  }
}

std::vector<uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write '" + path + "'");
  out << text;
}

void write_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

bool is_json(const std::string& path) { return path.size() >= 5 && path.substr(path.size() - 5) == ".json"; }

void emit_report(const std::string& path, const RateReport& report) {
  if (path.empty()) return;
  write_text(path, is_json(path) ? report.to_json() : report.to_text());
}

ContextModelParams params_for(const AnchorCloud& cloud, const CodecProfile& profile, const std::string& params_path,
                              bool fit, uint64_t seed) {
  if (!params_path.empty()) return load_params(params_path);
  ContextModelParams init = initial_params(cloud, profile, seed);
  if (!fit) return init;
  FitOptions opts{profile.fit_iterations, profile.learning_rate};
  return fit_context_model(cloud, profile, init, opts).params;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kCorruptStream:
    case ErrorKind::kModelMismatch:
      return kExitCorrupt;
    default:
      return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"splatpack: anchor-based Gaussian splat scene codec"};
  app.require_subcommand(1);

  Common gen_opts, prune_opts, fit_opts, enc_opts, dec_opts, stats_opts, self_opts;

  SynthSpec spec;
  std::string model_name = "smooth-field";
  std::optional<double> voxel;
  auto* gen = app.add_subcommand("generate", "write a synthetic anchor cloud");
  add_common(gen, gen_opts, false, true);
  gen->add_option("--count", spec.count, "anchor count");
  gen->add_option("--model", model_name, "iid-gaussian | smooth-field | clustered");
  gen->add_option("--length-scale", spec.length_scale, "smooth-field length scale");
  gen->add_option("--noise", spec.noise, "smooth-field noise std");
  gen->add_option("--clusters", spec.cluster_count, "clustered: cluster count");
  gen->add_option("--spread", spec.cluster_spread, "clustered: position spread");
  gen->add_option("--channels", spec.channel_count, "feature channels C");
  gen->add_option("--offsets", spec.offsets_count, "offsets per anchor K_off");
  gen->add_option("--voxel", voxel, "base voxel size (default: about six anchors per coarse voxel)");

  auto* prune = app.add_subcommand("prune", "neighborhood-aware pruning and merging");
  add_common(prune, prune_opts, true, true);

  std::string fit_params;
  auto* fit = app.add_subcommand("fit", "fit context model parameters to a cloud");
  add_common(fit, fit_opts, true, true);

  std::string enc_params;
  bool enc_fit = false;
  auto* enc = app.add_subcommand("encode", "encode a cloud into a .lghc stream");
  add_common(enc, enc_opts, true, true);
  enc->add_option("--params", enc_params, "model parameters (.lgmp); default: seeded initial parameters");
  enc->add_flag("--fit", enc_fit, "fit the context model before encoding (ignored with --params)");

  auto* dec = app.add_subcommand("decode", "decode a .lghc stream into a cloud");
  add_common(dec, dec_opts, true, true);

  auto* stats = app.add_subcommand("stats", "print the per-section rate report of a stream");
  add_common(stats, stats_opts, true, false);

  auto* self = app.add_subcommand("selftest", "run the embedded oracle checks");
  add_common(self, self_opts, false, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (gen->parsed()) {
      set_thread_count(gen_opts.threads);
      spec.model = parse_feature_model(model_name);
      spec.seed = gen_opts.seed;
      spec.base_voxel_size = voxel;
      write_cloud(generate(spec), gen_opts.output);
    } else if (prune->parsed()) {
      set_thread_count(prune_opts.threads);
      const AnchorCloud cloud = read_cloud(prune_opts.input);
      const auto [pruned, report] = prune_and_merge(cloud, profile_of(prune_opts).prune_config());
      write_cloud(pruned, prune_opts.output);
      if (!prune_opts.report.empty()) write_text(prune_opts.report, report.to_tsv(cloud));
      std::cout << "pruned " << report.pruned_count() << " of " << cloud.size() << " anchors\n";
    } else if (fit->parsed()) {
      set_thread_count(fit_opts.threads);
      const CodecProfile profile = profile_of(fit_opts);
      const AnchorCloud cloud = read_cloud(fit_opts.input);
      const ContextModelParams init = initial_params(cloud, profile, fit_opts.seed);
      const FitResult result =
          fit_context_model(cloud, profile, init, FitOptions{profile.fit_iterations, profile.learning_rate});
      save_params(result.params, fit_opts.output);
      if (!fit_opts.report.empty()) {
        nlohmann::json j;
        j["trace_bits"] = result.trace;
        j["best_iteration"] = result.best_iteration;
        j["learning_rate_halvings"] = result.learning_rate_halvings;
        write_text(fit_opts.report, j.dump(2) + "\n");
      }
      std::cout << "initial_bits=" << result.trace.front() << "\nfitted_bits=" << result.trace[result.best_iteration]
                << "\nbest_iteration=" << result.best_iteration << "\n";
    } else if (enc->parsed()) {
      set_thread_count(enc_opts.threads);
      const CodecProfile profile = profile_of(enc_opts);
      const AnchorCloud cloud = read_cloud(enc_opts.input);
      const ContextModelParams params = params_for(cloud, profile, enc_params, enc_fit, enc_opts.seed);
      const EncodeResult result = encode(cloud, params, profile);
      write_bytes(enc_opts.output, result.bytes);
      emit_report(enc_opts.report, result.report);
      std::cout << result.report.to_text();
    } else if (dec->parsed()) {
      set_thread_count(dec_opts.threads);
      const AnchorCloud cloud = decode(read_bytes(dec_opts.input));
      write_cloud(cloud, dec_opts.output);
    } else if (stats->parsed()) {
      set_thread_count(stats_opts.threads);
      const RateReport report = rate_report(read_bytes(stats_opts.input));
      emit_report(stats_opts.report, report);
      std::cout << report.to_text();
    } else if (self->parsed()) {
      set_thread_count(self_opts.threads);
      bool ok = true;
      for (const auto& r : run_selftest(self_opts.seed)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << (r.detail.empty() ? "" : ": " + r.detail) << "\n";
        ok = ok && r.passed;
      }
      return ok ? kExitOk : kExitSelftest;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
