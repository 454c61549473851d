// Copyright 2026 The Afford Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "afford/maskops.hpp"
#include "afford/projection.hpp"

namespace afford::io {

std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename, so readers never observe a
/// partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct PngInfo {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int channels = 0;
};

/// Header only; nullopt if the file is not a readable PNG.
std::optional<PngInfo> png_info(const std::filesystem::path& path);

/// Single-channel 16-bit PNG to raw values, row-major.
std::vector<std::uint16_t> read_png_gray16(const std::filesystem::path& path, int& width,
                                           int& height);
void write_png_gray16(const std::filesystem::path& path, int width, int height,
                      const std::vector<std::uint16_t>& values);
/// 8-bit single-channel PNG, 0 / 255.
void write_mask_png(const std::filesystem::path& path, const mask::BinaryMask& m);

/// Millimeter depth PNG to meters; 0 marks an invalid pixel.
geom::DepthImage<double> load_depth_png(const std::filesystem::path& path);

}  // namespace afford::io
