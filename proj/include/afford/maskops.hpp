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
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace afford::mask {

/// Pixel-exact binary mask, row-major, one byte (0 or 1) per pixel.
class BinaryMask {
 public:
  BinaryMask() = default;
  /// All-zero mask. Throws SizeMismatch if width or height is < 1.
  BinaryMask(int width, int height);
  /// Throws SizeMismatch unless bits.size() == width * height.
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool at(int row, int col) const noexcept {
    return bits_[static_cast<std::size_t>(row) * width_ + col] != 0;
  }
  void set(int row, int col, bool value = true) noexcept {
    bits_[static_cast<std::size_t>(row) * width_ + col] = value ? 1 : 0;
  }

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::uint64_t area() const noexcept;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Column-major run-length encoding. counts[0] is the leading run of zeros
/// and may be 0; afterwards runs alternate one/zero and are all non-zero.
struct RleMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  std::uint64_t area() const noexcept;
  friend bool operator==(const RleMask&, const RleMask&) = default;
};

/// Returns the first violated RleMask invariant, if any.
std::optional<std::string> check_rle(const RleMask& r);

RleMask rle_encode(const BinaryMask& m);
/// Throws BadRle when `r` violates its invariants.
BinaryMask rle_decode(const RleMask& r);

/// An empty (all-zero) RLE of the given size.
RleMask rle_empty(int height, int width);

/// Half-open box [x0,x1) x [y0,y1) in pixel coordinates.
struct BBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Vertex {
  double x = 0.0;
  double y = 0.0;
};

using Polygon = std::vector<Vertex>;

/// Throws OutOfBounds unless 0 <= x0 < x1 <= width and 0 <= y0 < y1 <= height.
BinaryMask rasterize_box(const BBox& box, int width, int height);

/// Even-odd fill sampled at pixel centers (col + 0.5, row + 0.5). Pixels
/// outside the image are clipped. Throws DegeneratePolygon for fewer than
/// three vertices, non-finite coordinates, or all-collinear vertices.
BinaryMask rasterize_polygon(const Polygon& polygon, int width, int height);

struct IouResult {
  std::uint64_t intersection = 0;
  std::uint64_t union_area = 0;
  double iou = 0.0;
  friend bool operator==(const IouResult&, const IouResult&) = default;
};

/// Both-empty masks score iou = 1 with counts (0, 0).
IouResult iou(const BinaryMask& a, const BinaryMask& b);

/// Same result as the raster overload, computed directly on the runs.
/// Both RLEs must be valid; throws SizeMismatch on differing sizes.
IouResult iou(const RleMask& a, const RleMask& b);

}  // namespace afford::mask
