// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "splatpack/types.hpp"

namespace splatpack {

enum class CloudFormat { kNative, kCsv };

// Native ".lgac" layout (little-endian):
//   "LGAC" | u8 version=1 | u32 count | u32 C | u32 K_off | f32 base_voxel_size
//   then per anchor (3 + C + 3 + 3*K_off + 1) f32 values in field order
//   position, feature, scaling, offsets, mean_opacity.
inline constexpr uint8_t kCloudFormatVersion = 1;

AnchorCloud load_cloud(const std::filesystem::path& path, CloudFormat format);
void save_cloud(const AnchorCloud& cloud, const std::filesystem::path& path);
void save_cloud_csv(const AnchorCloud& cloud, const std::filesystem::path& path);

std::vector<uint8_t> serialize_cloud(const AnchorCloud& cloud);
AnchorCloud parse_cloud(std::span<const uint8_t> bytes);

// CSV: optional leading "# base_voxel_size=<v>" line, then a header naming
// px,py,pz,f0..f{C-1},sx,sy,sz,o0x,o0y,o0z,...,opacity and one row per anchor.
// Values are rounded to f32, the storage precision of the native format.
AnchorCloud parse_cloud_csv(const std::string& text);

/// Rounds every real in the cloud to the nearest f32, i.e. the values the
/// native format can represent.
AnchorCloud round_to_storage_precision(AnchorCloud cloud);

CloudFormat format_from_extension(const std::filesystem::path& path);

}  // namespace splatpack
