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

// Test-only fixtures and brute-force oracles. Nothing here calls into the
// code paths it is used to check.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "afford/annotate.hpp"
#include "afford/core.hpp"
#include "afford/graspgen.hpp"
#include "afford/maskops.hpp"

namespace afford::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Row-major 0/1 pixels with a given density.
std::vector<std::uint8_t> random_pixels(std::mt19937_64& rng, int width, int height,
                                        double density);
mask::BinaryMask random_mask(std::mt19937_64& rng, int width, int height, double density);

/// Pixel counts by direct enumeration over raw row-major buffers.
struct BruteIou {
  std::uint64_t intersection = 0;
  std::uint64_t union_area = 0;
};
BruteIou brute_iou(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b);

/// Column-major run lengths computed straight from a row-major buffer.
std::vector<std::uint32_t> brute_rle_counts(const std::vector<std::uint8_t>& pixels, int width,
                                            int height);

/// gIoU and cIoU by definition from brute-force counts.
struct BruteMetrics {
  double giou = 0;
  double ciou = 0;
};
BruteMetrics brute_metrics(const std::vector<BruteIou>& samples);

/// A valid val-split record with a template instruction and the given mask.
core::AffordanceRecord make_record(const std::string& id, const std::string& category,
                                   const mask::RleMask& mask);

/// Points on a cylinder of `radius` and `length` whose axis is world +x
/// through `center`. `visible_half` keeps only the upper (+z) half surface.
geom::AffordanceCloud<double> cylinder_cloud(std::uint64_t seed, double radius, double length,
                                             std::size_t n, bool visible_half = false,
                                             const Eigen::Vector3d& center = {0, 0, 0});

/// Random rotation (uniform quaternion) and translation in [-1, 1]^3.
Eigen::Matrix4d random_rigid(std::mt19937_64& rng);

/// Camera looking straight down at the origin from `height` meters.
geom::CameraExtrinsics<double> top_down_camera(double height);

/// Scripted annotation backends for the cascade. Grounding throws unless
/// T3 succeeds, part grounding unless T4 succeeds, and segmenting the
/// ground-truth box (kScriptedGtBox) throws unless T2 succeeds. Every other
/// box is rasterized. The part vocabulary maps "mug" to "handle". `calls`
/// logs "ground", "ground_part" and "segment".
inline constexpr mask::BBox kScriptedGtBox{0, 0, 10, 10};
annotate::BackendSet scripted_backends(const std::map<annotate::ToolId, bool>& succeed,
                                       int width, int height,
                                       std::shared_ptr<std::vector<std::string>> calls = {});

/// 32x32 task for the scripted backends: category "mug" (in the part
/// vocabulary the scripted set uses), gt box kScriptedGtBox, a language
/// instruction, and an original mask that is valid only when `original_ok`.
/// `image` must name an existing file.
annotate::AnnotationTask scripted_task(const std::filesystem::path& image, bool original_ok);

/// Writes a 640x480 mm depth PNG of a horizontal cylinder seen from a
/// top-down camera, plus a manifest record pointing at it. Returns the
/// manifest path. The cylinder axis is world x, centered at the origin.
std::filesystem::path write_cylinder_rig(const std::filesystem::path& dir, double radius,
                                         double length, double camera_height);

}  // namespace afford::testing
