// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#include "splatpack/cloud_io.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "byte_io.hpp"
#include "splatpack/error.hpp"

namespace splatpack {
namespace {

double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

std::vector<uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  size_t start = 0;
  for (;;) {
    const size_t comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) cell.remove_suffix(1);
    cells.push_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_real(std::string_view cell, size_t line, size_t column) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    fail(ErrorKind::kParse, "line " + std::to_string(line) + " column " + std::to_string(column) +
                                ": cannot parse '" + std::string(cell) + "' as a number");
  }
  return v;
}

}  // namespace

std::vector<uint8_t> serialize_cloud(const AnchorCloud& cloud) {
  detail::ByteWriter w;
  w.tag("LGAC");
  w.u8(kCloudFormatVersion);
  w.u32(static_cast<uint32_t>(cloud.size()));
  w.u32(cloud.channel_count);
  w.u32(cloud.offsets_count);
  w.f32(static_cast<float>(cloud.base_voxel_size));
  for (const Anchor& a : cloud.anchors) {
    for (double v : a.position) w.f32(static_cast<float>(v));
    for (double v : a.feature) w.f32(static_cast<float>(v));
    for (double v : a.scaling) w.f32(static_cast<float>(v));
    for (double v : a.offsets) w.f32(static_cast<float>(v));
    w.f32(static_cast<float>(a.mean_opacity));
  }
  return w.take();
}

AnchorCloud parse_cloud(std::span<const uint8_t> bytes) {
  detail::ByteReader r(bytes, ErrorKind::kParse);
  r.expect_tag("LGAC");
  const uint8_t version = r.u8();
  require(version == kCloudFormatVersion, ErrorKind::kParse, "unsupported cloud version " + std::to_string(version));
  const uint32_t count = r.u32();
  AnchorCloud cloud;
  cloud.channel_count = r.u32();
  cloud.offsets_count = r.u32();
  cloud.base_voxel_size = r.f32();
  const size_t record = (3 + size_t{cloud.channel_count} + 3 + 3 * size_t{cloud.offsets_count} + 1) * 4;
  require(r.remaining() == record * count, ErrorKind::kParse,
          "payload size " + std::to_string(r.remaining()) + " does not match " + std::to_string(count) +
              " records of " + std::to_string(record) + " bytes");
  cloud.anchors.resize(count);
  for (Anchor& a : cloud.anchors) {
    a.feature.resize(cloud.channel_count);
    a.offsets.resize(3 * size_t{cloud.offsets_count});
    for (double& v : a.position) v = r.f32();
    for (double& v : a.feature) v = r.f32();
    for (double& v : a.scaling) v = r.f32();
    for (double& v : a.offsets) v = r.f32();
    a.mean_opacity = r.f32();
  }
  cloud.validate();
  return cloud;
}

AnchorCloud parse_cloud_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  AnchorCloud cloud;
  bool have_header = false;
  size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty()) continue;
    if (view.front() == '#') {
      constexpr std::string_view kKey = "base_voxel_size=";
      const size_t at = view.find(kKey);
      if (at != std::string_view::npos) {
        cloud.base_voxel_size = parse_real(view.substr(at + kKey.size()), line_no, 1);
      }
      continue;
    }
    auto cells = split_commas(view);
    if (!have_header) {
      // Header layout: px,py,pz, f*, sx,sy,sz, o*, opacity.
      size_t features = 0;
      size_t offset_cols = 0;
      for (auto cell : cells) {
        if (cell.size() > 1 && cell.front() == 'f') ++features;
        if (cell.size() > 1 && cell.front() == 'o' && cell != "opacity") ++offset_cols;
      }
      require(cells.size() == 3 + features + 3 + offset_cols + 1, ErrorKind::kParse,
              "line " + std::to_string(line_no) + ": unrecognised header");
      require(cells[0] == "px" && cells[1] == "py" && cells[2] == "pz" && cells.back() == "opacity",
              ErrorKind::kParse, "line " + std::to_string(line_no) + ": header must start with px,py,pz and end with opacity");
      require(offset_cols % 3 == 0, ErrorKind::kParse,
              "line " + std::to_string(line_no) + ": offset columns must come in x,y,z triples");
      cloud.channel_count = static_cast<uint32_t>(features);
      cloud.offsets_count = static_cast<uint32_t>(offset_cols / 3);
      columns = cells.size();
      have_header = true;
      continue;
    }
    require(cells.size() == columns, ErrorKind::kParse,
            "line " + std::to_string(line_no) + ": expected " + std::to_string(columns) + " columns, found " +
                std::to_string(cells.size()));
    Anchor a;
    a.feature.resize(cloud.channel_count);
    a.offsets.resize(3 * size_t{cloud.offsets_count});
    size_t c = 0;
    auto next = [&] { const double v = parse_real(cells[c], line_no, c + 1); ++c; return v; };
    for (double& v : a.position) v = next();
    for (double& v : a.feature) v = next();
    for (double& v : a.scaling) v = next();
    for (double& v : a.offsets) v = next();
    a.mean_opacity = next();
    cloud.anchors.push_back(std::move(a));
  }
  require(have_header, ErrorKind::kParse, "missing CSV header");
  cloud = round_to_storage_precision(std::move(cloud));
  cloud.validate();
  return cloud;
}

AnchorCloud load_cloud(const std::filesystem::path& path, CloudFormat format) {
  const auto bytes = read_file(path);
  if (format == CloudFormat::kCsv) return parse_cloud_csv(std::string(bytes.begin(), bytes.end()));
  return parse_cloud(bytes);
}

void save_cloud(const AnchorCloud& cloud, const std::filesystem::path& path) {
  write_file(path, serialize_cloud(cloud));
}

void save_cloud_csv(const AnchorCloud& cloud, const std::filesystem::path& path) {
  std::ostringstream out;
  out.precision(9);
  out << "# base_voxel_size=" << static_cast<float>(cloud.base_voxel_size) << "\n";
  out << "px,py,pz";
  for (uint32_t c = 0; c < cloud.channel_count; ++c) out << ",f" << c;
  out << ",sx,sy,sz";
  for (uint32_t k = 0; k < cloud.offsets_count; ++k) out << ",o" << k << "x,o" << k << "y,o" << k << "z";
  out << ",opacity\n";
  for (const Anchor& a : cloud.anchors) {
    bool first = true;
    auto put = [&](double v) { out << (first ? "" : ",") << static_cast<float>(v); first = false; };
    for (double v : a.position) put(v);
    for (double v : a.feature) put(v);
    for (double v : a.scaling) put(v);
    for (double v : a.offsets) put(v);
    put(a.mean_opacity);
    out << "\n";
  }
  const std::string text = out.str();
  write_file(path, std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

AnchorCloud round_to_storage_precision(AnchorCloud cloud) {
  cloud.base_voxel_size = to_f32(cloud.base_voxel_size);
  for (Anchor& a : cloud.anchors) {
    for (double& v : a.position) v = to_f32(v);
    for (double& v : a.feature) v = to_f32(v);
    for (double& v : a.scaling) v = to_f32(v);
    for (double& v : a.offsets) v = to_f32(v);
    a.mean_opacity = to_f32(a.mean_opacity);
  }
  return cloud;
}

CloudFormat format_from_extension(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? CloudFormat::kCsv : CloudFormat::kNative;
}

}  // namespace splatpack
