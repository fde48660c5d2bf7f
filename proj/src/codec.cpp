// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#include "splatpack/codec.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "byte_io.hpp"
#include "json.hpp"
#include "splatpack/error.hpp"
#include "splatpack/range_coder.hpp"

namespace splatpack {
namespace {

constexpr char kMagic[5] = "LGHC";
constexpr uint8_t kVersion = 1;
constexpr uint8_t kFlagAdaptive = 1;
constexpr uint8_t kFlagBoundedRadius = 2;
constexpr size_t kCrcOffset = 8;
constexpr uint32_t kMaxAnchors = 1u << 26;
constexpr uint32_t kMaxWidth = 1u << 16;
constexpr const char* kSectionNames[4] = {"geometry", "level1", "level2", "model"};

double as_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

// Re-raises module errors with the pipeline stage prefixed.
template <typename Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(stage) + ": " + e.message());
  }
}

uint32_t file_crc(std::span<const uint8_t> bytes) {
  static const uint8_t zeros[4] = {0, 0, 0, 0};
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), kCrcOffset);
  crc = crc32(crc, zeros, 4);
  crc = crc32(crc, bytes.data() + kCrcOffset + 4, static_cast<uInt>(bytes.size() - kCrcOffset - 4));
  return static_cast<uint32_t>(crc);
}

uint32_t payload_crc(std::span<const uint8_t> bytes) {
  return static_cast<uint32_t>(crc32(crc32(0L, Z_NULL, 0), bytes.data(), static_cast<uInt>(bytes.size())));
}

// True when the highest set bit of a is below that of b.
bool less_msb(uint32_t a, uint32_t b) { return a < b && a < (a ^ b); }

bool morton_less(const GridPoint& a, const GridPoint& b) {
  int dim = 0;
  uint32_t best = 0;
  for (int d = 0; d < 3; ++d) {
    const uint32_t x = static_cast<uint32_t>(a[d]) ^ static_cast<uint32_t>(b[d]);
    if (less_msb(best, x)) {
      best = x;
      dim = d;
    }
  }
  const uint32_t ua = static_cast<uint32_t>(static_cast<int64_t>(a[dim]) + kGridBound);
  const uint32_t ub = static_cast<uint32_t>(static_cast<int64_t>(b[dim]) + kGridBound);
  return ua < ub;
}

AnchorAttributes attributes_from_channels(std::span<const double> values, uint32_t channel_count,
                                          uint32_t offsets_count) {
  Anchor a;
  a.feature.resize(channel_count);
  a.offsets.resize(3 * size_t{offsets_count});
  scatter_channels(values, a);
  return {std::move(a.feature), a.scaling, std::move(a.offsets)};
}

struct Header {
  uint8_t flags = 0;
  uint32_t total = 0, level1 = 0, level2 = 0;
  ModelShape shape;
  double base_voxel = 0.0;
  StreamSettings settings;
  double neighborhood_scale = 0.0;

  static constexpr size_t kBytes = 84;
};

void write_header(detail::ByteWriter& w, const Header& h) {
  w.tag(kMagic);
  w.u8(kVersion);
  w.u8(h.flags);
  w.u16(0);
  w.u32(0);  // file CRC, patched last
  w.u32(h.total);
  w.u32(h.level1);
  w.u32(h.level2);
  w.u32(h.shape.channel_count);
  w.u32(h.shape.offsets_count);
  w.u32(h.shape.embed_width);
  w.u32(h.shape.phi_hidden);
  w.u32(h.shape.head_hidden);
  w.u32(h.shape.table_resolution);
  w.f32(static_cast<float>(h.base_voxel));
  w.f32(static_cast<float>(h.settings.voxel_scale));
  w.f32(static_cast<float>(h.settings.quant.feature_step));
  w.f32(static_cast<float>(h.settings.quant.scaling_step));
  w.f32(static_cast<float>(h.settings.quant.offsets_step));
  w.u32(h.settings.k);
  w.f32(h.settings.radius ? static_cast<float>(*h.settings.radius) : 0.0f);
  w.f32(static_cast<float>(h.neighborhood_scale));
  w.f32(static_cast<float>(h.settings.sigma_min));
}

Header read_header(detail::ByteReader& r) {
  auto corrupt = [&](const std::string& what) {
    fail(ErrorKind::kCorruptStream, "header: " + what + " (byte offset " + std::to_string(r.position()) + ")");
  };
  Header h;
  r.expect_tag(kMagic);
  if (r.u8() != kVersion) corrupt("unsupported version");
  h.flags = r.u8();
  if (h.flags & ~(kFlagAdaptive | kFlagBoundedRadius)) corrupt("unknown flag bits");
  if (r.u16() != 0) corrupt("reserved field is not zero");
  r.u32();
  h.total = r.u32();
  h.level1 = r.u32();
  h.level2 = r.u32();
  if (h.total > kMaxAnchors || h.level1 > h.total || h.level2 != h.total - h.level1 ||
      (h.total > 0) != (h.level1 > 0)) {
    corrupt("inconsistent anchor counts");
  }
  h.shape.channel_count = r.u32();
  h.shape.offsets_count = r.u32();
  h.shape.embed_width = r.u32();
  h.shape.phi_hidden = r.u32();
  h.shape.head_hidden = r.u32();
  h.shape.table_resolution = r.u32();
  h.shape.has_context = h.level2 > 0;
  for (uint32_t v : {h.shape.channel_count, h.shape.offsets_count, h.shape.embed_width, h.shape.phi_hidden,
                     h.shape.head_hidden}) {
    if (v > kMaxWidth) corrupt("implausible model dimension");
  }
  if (h.shape.embed_width == 0 || h.shape.table_resolution < 2 || h.shape.table_resolution > 64) {
    corrupt("invalid context model dimensions");
  }
  auto positive = [&](float v, const char* what) {
    if (!(std::isfinite(v) && v > 0.0f)) corrupt(std::string(what) + " must be positive");
    return static_cast<double>(v);
  };
  h.base_voxel = positive(r.f32(), "base voxel size");
  h.settings.voxel_scale = positive(r.f32(), "voxel scale");
  if (!(h.settings.voxel_scale > 1.0)) corrupt("voxel scale must exceed 1");
  h.settings.quant.feature_step = positive(r.f32(), "feature step");
  h.settings.quant.scaling_step = positive(r.f32(), "scaling step");
  h.settings.quant.offsets_step = positive(r.f32(), "offsets step");
  h.settings.quant.adaptive = (h.flags & kFlagAdaptive) != 0;
  h.settings.k = r.u32();
  if (h.settings.k == 0) corrupt("k must be >= 1");
  const float radius = r.f32();
  if (h.flags & kFlagBoundedRadius) {
    h.settings.radius = positive(radius, "radius");
  } else if (radius != 0.0f) {
    corrupt("radius given without the bounded-radius flag");
  }
  const float scale = r.f32();
  if (h.total > 0) h.neighborhood_scale = positive(scale, "neighborhood scale");
  h.settings.sigma_min = positive(r.f32(), "sigma_min");
  return h;
}

double percentile_edge_length(const NeighborGraph& graph, std::span<const Vec3> positions) {
  std::vector<double> lengths;
  for (size_t i = 0; i < graph.size(); ++i) {
    for (uint32_t j : graph.neighbors(i)) lengths.push_back(std::sqrt(squared_distance(positions[i], positions[j])));
  }
  if (lengths.empty()) return 0.0;
  std::sort(lengths.begin(), lengths.end());
  const size_t rank = static_cast<size_t>(std::ceil(0.95 * static_cast<double>(lengths.size())));
  return lengths[std::max<size_t>(rank, 1) - 1];
}

RateReport make_report(size_t header_bytes, const std::array<size_t, 4>& payloads,
                       const std::array<uint32_t, 4>& counts, const std::array<double, 4>& estimates, size_t anchors,
                       size_t level1, size_t level2) {
  RateReport rep;
  rep.header_bytes = header_bytes;
  rep.total_bytes = header_bytes;
  for (int s = 0; s < 4; ++s) {
    rep.sections[s].name = kSectionNames[s];
    rep.sections[s].payload_bytes = payloads[s];
    rep.sections[s].bytes = SectionHeader::kBytes + payloads[s];
    rep.sections[s].symbols = counts[s];
    rep.sections[s].estimated_bits = estimates[s];
    rep.total_bytes += rep.sections[s].bytes;
  }
  rep.anchors = anchors;
  rep.level1_anchors = level1;
  rep.level2_anchors = level2;
  return rep;
}

ContextModelParams fit_params_to_scene(const ContextModelParams& params, const AnchorCloud& cloud, bool has_context) {
  const ModelShape& s = params.shape;
  require(s.channel_count == cloud.channel_count && s.offsets_count == cloud.offsets_count,
          ErrorKind::kDimensionMismatch,
          "model parameters are shaped for C=" + std::to_string(s.channel_count) + ", K_off=" +
              std::to_string(s.offsets_count) + " but the cloud has C=" + std::to_string(cloud.channel_count) +
              ", K_off=" + std::to_string(cloud.offsets_count));
  if (has_context) {
    require(s.has_context, ErrorKind::kInvalidParam, "cloud has level-2 anchors but the parameters lack a context model");
    return params;
  }
  ModelShape stripped = s;
  stripped.has_context = false;
  ContextModelParams out = ContextModelParams::zeros(stripped);
  out.prior = params.prior;
  return out;
}

}  // namespace

StreamSettings StreamSettings::from_profile(const CodecProfile& profile) {
  StreamSettings s;
  s.voxel_scale = as_f32(profile.voxel_scale);
  s.quant.feature_step = as_f32(profile.quant.feature_step);
  s.quant.scaling_step = as_f32(profile.quant.scaling_step);
  s.quant.offsets_step = as_f32(profile.quant.offsets_step);
  s.quant.adaptive = profile.quant.adaptive;
  s.k = profile.k;
  if (profile.radius) s.radius = as_f32(*profile.radius);
  s.sigma_min = as_f32(profile.sigma_min);
  return s;
}

std::vector<uint32_t> morton_order(std::span<const GridPoint> grid) {
  std::vector<uint32_t> order(grid.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<uint32_t>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](uint32_t a, uint32_t b) { return morton_less(grid[a], grid[b]); });
  return order;
}

CodingScene build_scene(std::vector<GridPoint> grid, double base_voxel_size, const StreamSettings& settings,
                        std::optional<double> neighborhood_scale) {
  CodingScene scene;
  scene.base_voxel_size = base_voxel_size;
  scene.grid = std::move(grid);
  scene.positions.resize(scene.grid.size());
  for (size_t i = 0; i < scene.grid.size(); ++i) {
    for (int a = 0; a < 3; ++a) scene.positions[i][a] = static_cast<double>(scene.grid[i][a]) * base_voxel_size;
  }
  if (scene.grid.empty()) return scene;
  scene.hierarchy = partition(scene.positions, base_voxel_size, settings.voxel_scale);
  for (uint32_t idx : scene.hierarchy.level2) scene.level2_positions.push_back(scene.positions[idx]);
  scene.graph = build_graph(scene.level2_positions, settings.k, settings.radius);
  if (neighborhood_scale) {
    scene.neighborhood_scale = *neighborhood_scale;
  } else if (settings.radius) {
    scene.neighborhood_scale = *settings.radius;
  } else {
    const double p95 = percentile_edge_length(scene.graph, scene.level2_positions);
    scene.neighborhood_scale = p95 > 0.0 ? p95 : base_voxel_size * settings.voxel_scale;
  }
  scene.neighborhood_scale = as_f32(scene.neighborhood_scale);
  scene.frame = PositionFrame::bounding(scene.positions);
  return scene;
}

SymbolModel GeometryModel::next(int axis) const {
  return SymbolModel::laplace(0.0, std::max(mean_abs_[axis], 0.25), 1.0, kDeltaBound);
}

void GeometryModel::update(int axis, int64_t delta) {
  mean_abs_[axis] += (std::fabs(static_cast<double>(delta)) - mean_abs_[axis]) / 16.0;
}

CodingPlan plan_coding(const AnchorCloud& cloud, const ContextModelParams& params, const CodecProfile& profile) {
  profile.validate();
  cloud.validate();
  CodingPlan plan;
  plan.settings = StreamSettings::from_profile(profile);
  const double voxel = as_f32(cloud.base_voxel_size);
  require(voxel > 0.0 && std::isfinite(voxel), ErrorKind::kValidation, "base voxel size does not fit in f32");

  std::vector<GridPoint> grid(cloud.size());
  staged("position quantisation", [&] {
    for (size_t i = 0; i < cloud.size(); ++i) {
      for (int a = 0; a < 3; ++a) {
        const double q = std::round(cloud.anchors[i].position[a] / voxel);
        if (!(std::fabs(q) <= kGridBound)) {
          fail(ErrorKind::kOverflow, "anchor " + std::to_string(i) + " lies outside the coded position range");
        }
        grid[i][a] = static_cast<int32_t>(q);
      }
    }
  });
  plan.order = morton_order(grid);
  std::vector<GridPoint> canonical(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) canonical[i] = grid[plan.order[i]];
  plan.scene = staged("hierarchy", [&] {
    return build_scene(std::move(canonical), voxel, plan.settings, profile.neighborhood_scale);
  });
  const CodingScene& scene = plan.scene;
  const Hierarchy& h = scene.hierarchy;
  plan.params = fit_params_to_scene(params, cloud, !h.level2.empty());
  plan.params.validate();

  GeometryModel gm;
  GridPoint prev{0, 0, 0};
  for (const GridPoint& g : scene.grid) {
    for (int a = 0; a < 3; ++a) {
      const int64_t d = static_cast<int64_t>(g[a]) - prev[a];
      plan.geometry.models.push_back(gm.next(a));
      plan.geometry.symbols.push_back(static_cast<int32_t>(d));
      gm.update(a, d);
    }
    prev = g;
  }

  const size_t n = cloud.coded_channels();
  std::vector<double> values(n), decoded(n);
  std::vector<std::vector<double>> decoded_all(cloud.size());
  auto code_anchor = [&](uint32_t idx, std::span<const SymbolModel> models, SectionSymbols& out) {
    const Anchor& a = cloud.anchors[plan.order[idx]];
    gather_channels(a, values);
    for (size_t c = 0; c < n; ++c) {
      const int32_t q = quantize(values[c], models[c].step);
      out.symbols.push_back(q);
      out.models.push_back(models[c]);
      decoded[c] = dequantize(q, models[c].step);
    }
    for (int s = 0; s < 3; ++s) {
      if (!(decoded[cloud.channel_count + s] > 0.0)) {
        fail(ErrorKind::kValidation, "anchor " + std::to_string(plan.order[idx]) +
                                         " field 'scaling' quantises to a non-positive value; reduce scaling_step");
      }
    }
    decoded_all[idx] = decoded;
  };

  staged("level-1 attributes", [&] {
    const std::vector<SymbolModel> models = level1_models(plan.params, plan.settings.quant, plan.settings.sigma_min);
    for (uint32_t idx : h.level1) {
      code_anchor(idx, models, plan.level1);
      plan.level1_decoded.push_back(attributes_from_channels(decoded_all[idx], cloud.channel_count, cloud.offsets_count));
    }
  });

  staged("level-2 attributes", [&] {
    plan.prelim = preliminary_context(h, plan.level1_decoded, scene.level2_positions);
    const LevelTwoInputs inputs{&plan.prelim, &scene.graph, scene.neighborhood_scale, scene.frame};
    const std::vector<SymbolModel> models =
        level2_models(plan.params, plan.settings.quant, plan.settings.sigma_min, inputs);
    for (size_t slot = 0; slot < h.level2.size(); ++slot) {
      code_anchor(h.level2[slot], std::span(models).subspan(slot * n, n), plan.level2);
    }
  });

  plan.reconstruction.base_voxel_size = voxel;
  plan.reconstruction.channel_count = cloud.channel_count;
  plan.reconstruction.offsets_count = cloud.offsets_count;
  plan.reconstruction.anchors.resize(cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) {
    Anchor& a = plan.reconstruction.anchors[i];
    a.position = scene.positions[i];
    a.feature.resize(cloud.channel_count);
    a.offsets.resize(3 * size_t{cloud.offsets_count});
    scatter_channels(decoded_all[i], a);
    a.mean_opacity = 1.0;
  }
  return plan;
}

EncodeResult encode(const AnchorCloud& cloud, const ContextModelParams& params, const CodecProfile& profile,
                    const EncodeOptions& options) {
  CodingPlan plan = plan_coding(cloud, params, profile);
  const Hierarchy& h = plan.scene.hierarchy;

  Header header;
  header.flags = (plan.settings.quant.adaptive ? kFlagAdaptive : 0) | (plan.settings.radius ? kFlagBoundedRadius : 0);
  header.total = static_cast<uint32_t>(cloud.size());
  header.level1 = static_cast<uint32_t>(h.level1.size());
  header.level2 = static_cast<uint32_t>(h.level2.size());
  header.shape = plan.params.shape;
  header.base_voxel = plan.scene.base_voxel_size;
  header.settings = plan.settings;
  header.neighborhood_scale = cloud.empty() ? 0.0 : plan.scene.neighborhood_scale;

  detail::ByteWriter w;
  write_header(w, header);
  std::array<size_t, 4> payloads{};
  std::array<uint32_t, 4> counts{};
  std::array<double, 4> estimates{};
  const SectionSymbols* coded[3] = {&plan.geometry, &plan.level1, &plan.level2};
  for (int s = 0; s < 3; ++s) {
    SymbolEncoder enc;
    for (size_t i = 0; i < coded[s]->symbols.size(); ++i) enc.encode(coded[s]->symbols[i], coded[s]->models[i]);
    const std::vector<uint8_t> section = enc.finish();
    payloads[s] = section.size() - SectionHeader::kBytes;
    counts[s] = enc.count();
    estimates[s] = coded[s]->estimated_bits();
    w.raw(section);
  }
  const std::vector<uint8_t> model_bytes = plan.params.serialize();
  w.u32(static_cast<uint32_t>(model_bytes.size()));
  w.u32(static_cast<uint32_t>(model_bytes.size() / sizeof(float)));
  w.u32(payload_crc(model_bytes));
  w.raw(model_bytes);
  payloads[3] = model_bytes.size();
  counts[3] = static_cast<uint32_t>(model_bytes.size() / sizeof(float));
  estimates[3] = 8.0 * static_cast<double>(model_bytes.size());

  EncodeResult result;
  result.bytes = w.take();
  const uint32_t crc = file_crc(result.bytes);
  std::memcpy(result.bytes.data() + kCrcOffset, &crc, 4);
  result.report = make_report(Header::kBytes, payloads, counts, estimates, cloud.size(), h.level1.size(),
                              h.level2.size());

  if (options.verify) {
    const DecodedStream check = decode_stream(result.bytes);
    const bool same = check.cloud == plan.reconstruction && check.geometry.models == plan.geometry.models &&
                      check.level1.models == plan.level1.models && check.level2.models == plan.level2.models;
    if (!same) fail(ErrorKind::kModelMismatch, "encoder self-check: simulated decoder state diverged");
  }
  result.reconstruction = std::move(plan.reconstruction);
  result.order = std::move(plan.order);
  return result;
}

DecodedStream decode_stream(std::span<const uint8_t> bytes) {
  if (bytes.size() < Header::kBytes) {
    fail(ErrorKind::kCorruptStream, "stream of " + std::to_string(bytes.size()) + " bytes is shorter than the header");
  }
  detail::ByteReader r(bytes, ErrorKind::kCorruptStream);
  {
    detail::ByteReader probe(bytes, ErrorKind::kCorruptStream);
    probe.expect_tag(kMagic);
    probe.take(4, "version and flags");
    const uint32_t stored = probe.u32();
    const uint32_t computed = file_crc(bytes);
    if (stored != computed) {
      fail(ErrorKind::kCorruptStream, "checksum mismatch over the whole stream (byte offset 8)");
    }
  }
  const Header header = read_header(r);

  std::array<size_t, 4> offsets{};
  std::array<SectionHeader, 4> sections{};
  size_t at = r.position();
  for (int s = 0; s < 4; ++s) {
    offsets[s] = at;
    sections[s] = read_section_header(bytes.subspan(at), at);
    at += SectionHeader::kBytes + sections[s].payload_bytes;
  }
  if (at != bytes.size()) {
    fail(ErrorKind::kCorruptStream, std::to_string(bytes.size() - at) + " trailing bytes after the model section");
  }

  DecodedStream out;
  out.settings = header.settings;
  const ParamLayout layout(header.shape);
  if (sections[3].symbol_count != layout.total || sections[3].payload_bytes != layout.total * sizeof(float)) {
    fail(ErrorKind::kCorruptStream, "model section size does not match the model shape (byte offset " +
                                        std::to_string(offsets[3]) + ")");
  }
  const auto model_payload = bytes.subspan(offsets[3] + SectionHeader::kBytes, sections[3].payload_bytes);
  if (payload_crc(model_payload) != sections[3].model_digest) {
    fail(ErrorKind::kCorruptStream, "model section checksum mismatch (byte offset " + std::to_string(offsets[3]) + ")");
  }
  out.params = ContextModelParams::parse(header.shape, model_payload);

  const uint32_t total = header.total;
  if (sections[0].symbol_count != 3 * total) {
    fail(ErrorKind::kCorruptStream, "geometry section symbol count disagrees with the anchor count");
  }
  const size_t n = header.shape.coded_channels();
  if (sections[1].symbol_count != header.level1 * n || sections[2].symbol_count != header.level2 * n) {
    fail(ErrorKind::kCorruptStream, "attribute section symbol counts disagree with the anchor counts");
  }

  std::vector<GridPoint> grid(total);
  {
    SymbolDecoder dec(bytes.subspan(offsets[0]), offsets[0]);
    GeometryModel gm;
    GridPoint prev{0, 0, 0};
    for (uint32_t i = 0; i < total; ++i) {
      for (int a = 0; a < 3; ++a) {
        const SymbolModel m = gm.next(a);
        const int32_t d = dec.decode(m);
        const int64_t g = static_cast<int64_t>(prev[a]) + d;
        if (g < -kGridBound || g > kGridBound) {
          fail(ErrorKind::kCorruptStream, "decoded position outside the coded range (section at byte offset " +
                                              std::to_string(offsets[0]) + ")");
        }
        grid[i][a] = static_cast<int32_t>(g);
        out.geometry.symbols.push_back(d);
        out.geometry.models.push_back(m);
        gm.update(a, d);
      }
      prev = grid[i];
    }
    dec.finish();
  }

  const CodingScene scene = staged("hierarchy", [&] {
    return build_scene(std::move(grid), header.base_voxel, header.settings,
                       total > 0 ? std::optional<double>(header.neighborhood_scale) : std::nullopt);
  });
  const Hierarchy& h = scene.hierarchy;
  if (h.level1.size() != header.level1 || h.level2.size() != header.level2) {
    fail(ErrorKind::kCorruptStream, "decoded hierarchy does not match the header anchor counts");
  }

  const uint32_t C = header.shape.channel_count;
  const uint32_t K = header.shape.offsets_count;
  std::vector<std::vector<double>> decoded_all(total);
  auto decode_anchor = [&](SymbolDecoder& dec, uint32_t idx, std::span<const SymbolModel> models,
                           SectionSymbols& sink) {
    std::vector<double> values(n);
    for (size_t c = 0; c < n; ++c) {
      const int32_t q = dec.decode(models[c]);
      sink.symbols.push_back(q);
      sink.models.push_back(models[c]);
      values[c] = dequantize(q, models[c].step);
    }
    decoded_all[idx] = std::move(values);
  };

  std::vector<AnchorAttributes> level1_decoded;
  {
    SymbolDecoder dec(bytes.subspan(offsets[1]), offsets[1]);
    const std::vector<SymbolModel> models = level1_models(out.params, header.settings.quant, header.settings.sigma_min);
    for (uint32_t idx : h.level1) {
      decode_anchor(dec, idx, models, out.level1);
      level1_decoded.push_back(attributes_from_channels(decoded_all[idx], C, K));
    }
    dec.finish();
  }
  {
    SymbolDecoder dec(bytes.subspan(offsets[2]), offsets[2]);
    const PreliminaryContext prelim = preliminary_context(h, level1_decoded, scene.level2_positions);
    const LevelTwoInputs inputs{&prelim, &scene.graph, scene.neighborhood_scale, scene.frame};
    const std::vector<SymbolModel> models =
        level2_models(out.params, header.settings.quant, header.settings.sigma_min, inputs);
    for (size_t slot = 0; slot < h.level2.size(); ++slot) {
      decode_anchor(dec, h.level2[slot], std::span(models).subspan(slot * n, n), out.level2);
    }
    dec.finish();
  }

  out.cloud.base_voxel_size = header.base_voxel;
  out.cloud.channel_count = C;
  out.cloud.offsets_count = K;
  out.cloud.anchors.resize(total);
  for (uint32_t i = 0; i < total; ++i) {
    Anchor& a = out.cloud.anchors[i];
    a.position = scene.positions[i];
    a.feature.resize(C);
    a.offsets.resize(3 * size_t{K});
    scatter_channels(decoded_all[i], a);
    a.mean_opacity = 1.0;
  }

  std::array<size_t, 4> payloads{};
  std::array<uint32_t, 4> counts{};
  for (int s = 0; s < 4; ++s) {
    payloads[s] = sections[s].payload_bytes;
    counts[s] = sections[s].symbol_count;
  }
  const std::array<double, 4> estimates{out.geometry.estimated_bits(), out.level1.estimated_bits(),
                                        out.level2.estimated_bits(), 8.0 * static_cast<double>(payloads[3])};
  out.report = make_report(Header::kBytes, payloads, counts, estimates, total, h.level1.size(), h.level2.size());
  return out;
}

AnchorCloud decode(std::span<const uint8_t> bytes) { return decode_stream(bytes).cloud; }

RateReport rate_report(std::span<const uint8_t> bytes) { return decode_stream(bytes).report; }

double RateReport::bits_per_anchor() const {
  return anchors == 0 ? 0.0 : 8.0 * static_cast<double>(total_bytes) / static_cast<double>(anchors);
}

std::string RateReport::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "total_bytes=" << total_bytes << "\n";
  os << "header_bytes=" << header_bytes << "\n";
  os << "anchors=" << anchors << "\n";
  os << "level1_anchors=" << level1_anchors << "\n";
  os << "level2_anchors=" << level2_anchors << "\n";
  os << "bits_per_anchor=" << bits_per_anchor() << "\n";
  for (const auto& s : sections) {
    os << s.name << "_bytes=" << s.bytes << "\n";
    os << s.name << "_symbols=" << s.symbols << "\n";
    os << s.name << "_actual_bits=" << s.actual_bits() << "\n";
    os << s.name << "_estimated_bits=" << s.estimated_bits << "\n";
  }
  return os.str();
}

std::string RateReport::to_json() const {
  nlohmann::json j;
  j["total_bytes"] = total_bytes;
  j["header_bytes"] = header_bytes;
  j["anchors"] = anchors;
  j["level1_anchors"] = level1_anchors;
  j["level2_anchors"] = level2_anchors;
  j["bits_per_anchor"] = bits_per_anchor();
  for (const auto& s : sections) {
    j["sections"][s.name] = {{"bytes", s.bytes},
                             {"payload_bytes", s.payload_bytes},
                             {"symbols", s.symbols},
                             {"actual_bits", s.actual_bits()},
                             {"estimated_bits", s.estimated_bits}};
  }
  return j.dump(2) + "\n";
}

}  // namespace splatpack
