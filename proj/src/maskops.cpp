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
#include "afford/maskops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "afford/errors.hpp"

namespace afford::mask {

namespace {

IouResult make_iou(std::uint64_t inter, std::uint64_t uni) {
  IouResult r{inter, uni, 1.0};
  if (uni > 0) r.iou = static_cast<double>(inter) / static_cast<double>(uni);
  return r;
}

}  // namespace

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height) {
  if (width < 1 || height < 1)
    throw SizeMismatch("mask dimensions must be >= 1, got " +
                       std::to_string(width) + "x" + std::to_string(height));
  bits_.assign(static_cast<std::size_t>(width) * height, 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : BinaryMask(width, height) {
  if (bits.size() != bits_.size())
    throw SizeMismatch("mask bit count " + std::to_string(bits.size()) +
                       " != " + std::to_string(bits_.size()));
  for (auto& b : bits) b = b ? 1 : 0;
  bits_ = std::move(bits);
}

std::uint64_t BinaryMask::area() const noexcept {
  return static_cast<std::uint64_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::uint64_t RleMask::area() const noexcept {
  std::uint64_t a = 0;
  for (std::size_t i = 1; i < counts.size(); i += 2) a += counts[i];
  return a;
}

std::optional<std::string> check_rle(const RleMask& r) {
  if (r.height < 1 || r.width < 1) return "size must be >= 1 in both dimensions";
  if (r.counts.empty()) return "counts is empty";
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < r.counts.size(); ++i) {
    if (i > 0 && r.counts[i] == 0)
      return "zero-length run at index " + std::to_string(i);
    sum += r.counts[i];
  }
  const auto expected = static_cast<std::uint64_t>(r.height) * r.width;
  if (sum != expected)
    return "counts sum " + std::to_string(sum) + " != " + std::to_string(expected);
  return std::nullopt;
}

RleMask rle_encode(const BinaryMask& m) {
  RleMask r{m.height(), m.width(), {}};
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (int col = 0; col < m.width(); ++col) {
    for (int row = 0; row < m.height(); ++row) {
      const std::uint8_t v = m.at(row, col) ? 1 : 0;
      if (v != current) {
        r.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  r.counts.push_back(run);
  return r;
}

BinaryMask rle_decode(const RleMask& r) {
  if (auto why = check_rle(r)) throw BadRle(*why);
  BinaryMask m(r.width, r.height);
  std::uint64_t pos = 0;
  const auto h = static_cast<std::uint64_t>(r.height);
  for (std::size_t i = 0; i < r.counts.size(); ++i) {
    if (i % 2 == 1) {
      for (std::uint64_t k = pos; k < pos + r.counts[i]; ++k)
        m.set(static_cast<int>(k % h), static_cast<int>(k / h));
    }
    pos += r.counts[i];
  }
  return m;
}

RleMask rle_empty(int height, int width) {
  return RleMask{height, width,
                 {static_cast<std::uint32_t>(static_cast<std::uint64_t>(height) * width)}};
}

BinaryMask rasterize_box(const BBox& b, int width, int height) {
  if (!(0 <= b.x0 && b.x0 < b.x1 && b.x1 <= width && 0 <= b.y0 &&
        b.y0 < b.y1 && b.y1 <= height)) {
    throw OutOfBounds("box [" + std::to_string(b.x0) + "," + std::to_string(b.y0) +
                      "," + std::to_string(b.x1) + "," + std::to_string(b.y1) +
                      ") outside " + std::to_string(width) + "x" +
                      std::to_string(height) + " image");
  }
  BinaryMask m(width, height);
  for (int row = b.y0; row < b.y1; ++row)
    for (int col = b.x0; col < b.x1; ++col) m.set(row, col);
  return m;
}

BinaryMask rasterize_polygon(const Polygon& p, int width, int height) {
  if (p.size() < 3)
    throw DegeneratePolygon("polygon needs >= 3 vertices, got " +
                            std::to_string(p.size()));
  for (const auto& v : p)
    if (!std::isfinite(v.x) || !std::isfinite(v.y))
      throw DegeneratePolygon("non-finite vertex coordinate");

  // Collinear iff every vertex lies on the line through p[0] and the first
  // vertex distinct from it.
  bool collinear = true;
  std::size_t anchor = 1;
  while (anchor < p.size() && p[anchor].x == p[0].x && p[anchor].y == p[0].y)
    ++anchor;
  if (anchor < p.size()) {
    const double ex = p[anchor].x - p[0].x, ey = p[anchor].y - p[0].y;
    for (std::size_t i = anchor + 1; i < p.size() && collinear; ++i) {
      const double cross = ex * (p[i].y - p[0].y) - ey * (p[i].x - p[0].x);
      if (cross != 0.0) collinear = false;
    }
  }
  if (collinear) throw DegeneratePolygon("all polygon vertices are collinear");

  BinaryMask m(width, height);
  std::vector<double> xs;
  const std::size_t n = p.size();
  for (int row = 0; row < height; ++row) {
    const double y = row + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Vertex& a = p[i];
      const Vertex& b = p[(i + 1) % n];
      // Half-open in y so a vertex shared by two edges is counted once.
      if ((a.y <= y && y < b.y) || (b.y <= y && y < a.y))
        xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Pixel centers strictly inside [xs[k], xs[k+1]) on this scanline.
      const double lo = std::ceil(xs[k] - 0.5);
      const double hi = std::ceil(xs[k + 1] - 0.5);
      const int c0 = static_cast<int>(std::max(lo, 0.0));
      const int c1 = static_cast<int>(std::min(hi, static_cast<double>(width)));
      for (int col = c0; col < c1; ++col) m.set(row, col);
    }
  }
  return m;
}

IouResult iou(const BinaryMask& a, const BinaryMask& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw SizeMismatch("iou operands differ in size");
  std::uint64_t inter = 0, uni = 0;
  const auto ab = a.bits(), bb = b.bits();
  for (std::size_t i = 0; i < ab.size(); ++i) {
    inter += ab[i] & bb[i];
    uni += ab[i] | bb[i];
  }
  return make_iou(inter, uni);
}

IouResult iou(const RleMask& a, const RleMask& b) {
  if (a.height != b.height || a.width != b.width)
    throw SizeMismatch("iou operands differ in size");
  if (auto why = check_rle(a)) throw BadRle(*why);
  if (auto why = check_rle(b)) throw BadRle(*why);

  // Walk both run lists in lockstep; each step consumes the shorter
  // remaining run and attributes it to the current (va, vb) state.
  std::uint64_t inter = 0;
  std::size_t ia = 0, ib = 0;
  std::uint64_t ra = a.counts[0], rb = b.counts[0];
  while (ia < a.counts.size() && ib < b.counts.size()) {
    if (ra == 0) {
      if (++ia < a.counts.size()) ra = a.counts[ia];
      continue;
    }
    if (rb == 0) {
      if (++ib < b.counts.size()) rb = b.counts[ib];
      continue;
    }
    const std::uint64_t step = std::min(ra, rb);
    if ((ia % 2 == 1) && (ib % 2 == 1)) inter += step;
    ra -= step;
    rb -= step;
  }
  return make_iou(inter, a.area() + b.area() - inter);
}

}  // namespace afford::mask
