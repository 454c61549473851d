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

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "afford/errors.hpp"
#include "afford/maskops.hpp"

namespace afford::geom {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;

/// Pinhole intrinsics in pixels.
template <typename Scalar = double>
struct CameraIntrinsics {
  Scalar fx = 1, fy = 1, cx = 0, cy = 0;

  bool valid() const {
    return std::isfinite(fx) && std::isfinite(fy) && std::isfinite(cx) &&
           std::isfinite(cy) && fx > 0 && fy > 0;
  }

  /// Homogeneous 4x4 form acting on [u*d, v*d, d, 1].
  Matrix4<Scalar> matrix() const {
    Matrix4<Scalar> k = Matrix4<Scalar>::Identity();
    k(0, 0) = fx;
    k(1, 1) = fy;
    k(0, 2) = cx;
    k(1, 2) = cy;
    return k;
  }

  Matrix4<Scalar> inverse() const {
    Matrix4<Scalar> k = Matrix4<Scalar>::Identity();
    k(0, 0) = Scalar(1) / fx;
    k(1, 1) = Scalar(1) / fy;
    k(0, 2) = -cx / fx;
    k(1, 2) = -cy / fy;
    return k;
  }
};

/// True when the upper-left 3x3 is a rotation (orthonormal, det +1) and the
/// bottom row is (0, 0, 0, 1), both within `tol`.
template <typename Derived>
bool is_rigid(const Eigen::MatrixBase<Derived>& t, double tol = 1e-9) {
  using Scalar = typename Derived::Scalar;
  if (t.rows() != 4 || t.cols() != 4 || !t.allFinite()) return false;
  const Matrix3<Scalar> r = t.template topLeftCorner<3, 3>();
  if (((r.transpose() * r) - Matrix3<Scalar>::Identity()).cwiseAbs().maxCoeff() > tol)
    return false;
  if (std::abs(r.determinant() - Scalar(1)) > tol) return false;
  const Eigen::Matrix<Scalar, 1, 4> bottom = t.template bottomRows<1>();
  return (bottom - Eigen::Matrix<Scalar, 1, 4>(0, 0, 0, 1)).cwiseAbs().maxCoeff() <= tol;
}

/// Camera-to-world rigid transform.
template <typename Scalar = double>
struct CameraExtrinsics {
  Matrix4<Scalar> camera_to_world = Matrix4<Scalar>::Identity();

  Matrix3<Scalar> rotation() const { return camera_to_world.template topLeftCorner<3, 3>(); }
  /// Camera center in world coordinates.
  Vector3<Scalar> center() const { return camera_to_world.template topRightCorner<3, 1>(); }
  bool valid(double tol = 1e-9) const { return is_rigid(camera_to_world, tol); }

  /// Inverse of a rigid transform without a general 4x4 inverse.
  Matrix4<Scalar> world_to_camera() const {
    Matrix4<Scalar> inv = Matrix4<Scalar>::Identity();
    inv.template topLeftCorner<3, 3>() = rotation().transpose();
    inv.template topRightCorner<3, 1>() = -rotation().transpose() * center();
    return inv;
  }
};

/// Integer pixel index; u is the column, v the row.
struct PixelCoord {
  int u = 0;
  int v = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// Metric depth along the optical axis with a per-pixel validity flag.
template <typename Scalar = double>
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<Scalar> depth;
  std::vector<std::uint8_t> validity;

  /// Validity derived from the values: finite and strictly positive.
  static DepthImage from_values(int width, int height, std::vector<Scalar> values) {
    if (width < 1 || height < 1 ||
        values.size() != static_cast<std::size_t>(width) * height)
      throw SizeMismatch("depth buffer does not match its dimensions");
    DepthImage img{width, height, std::move(values), {}};
    img.validity.resize(img.depth.size());
    for (std::size_t i = 0; i < img.depth.size(); ++i)
      img.validity[i] = std::isfinite(img.depth[i]) && img.depth[i] > 0;
    return img;
  }

  Scalar at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
  bool valid(int u, int v) const {
    const auto i = static_cast<std::size_t>(v) * width + u;
    return validity[i] && std::isfinite(depth[i]) && depth[i] > 0;
  }
};

/// World-space points lifted from the affordance region, with the pixel each
/// one came from.
template <typename Scalar = double>
struct AffordanceCloud {
  Eigen::Matrix<Scalar, 3, Eigen::Dynamic> points;
  std::vector<PixelCoord> pixels;

  Eigen::Index size() const { return points.cols(); }
  bool empty() const { return points.cols() == 0; }
};

/// [x y z 1]^T = T * K^-1 * [u*d, v*d, d, 1]^T. Throws InvalidDepth unless
/// d is finite and positive.
template <typename Scalar>
Vector3<Scalar> backproject_pixel(Scalar u, Scalar v, Scalar d,
                                  const CameraIntrinsics<Scalar>& k,
                                  const CameraExtrinsics<Scalar>& t) {
  if (!std::isfinite(d) || !(d > 0)) throw InvalidDepth("depth must be finite and > 0");
  const Eigen::Matrix<Scalar, 4, 1> image(u * d, v * d, d, Scalar(1));
  const Eigen::Matrix<Scalar, 4, 1> world = t.camera_to_world * (k.inverse() * image);
  return world.template head<3>();
}

/// Inverse of backproject_pixel: returns (u, v, d) with sub-pixel u, v.
/// Throws BehindCamera when the camera-frame depth is not positive.
template <typename Scalar>
Vector3<Scalar> project_point(const Vector3<Scalar>& world,
                              const CameraIntrinsics<Scalar>& k,
                              const CameraExtrinsics<Scalar>& t) {
  const Vector3<Scalar> cam = t.rotation().transpose() * (world - t.center());
  if (!(cam.z() > 0)) throw BehindCamera("point is not in front of the camera");
  return {k.fx * cam.x() / cam.z() + k.cx, k.fy * cam.y() / cam.z() + k.cy, cam.z()};
}

/// Lifts every pixel of `points` that is set in `mask` and has valid depth.
/// Output order follows `points`. Throws SizeMismatch when the mask and depth
/// sizes differ, OutOfBounds for a pixel outside the image.
template <typename Scalar>
AffordanceCloud<Scalar> backproject_masked(std::span<const PixelCoord> points,
                                           const mask::BinaryMask& mask,
                                           const DepthImage<Scalar>& depth,
                                           const CameraIntrinsics<Scalar>& k,
                                           const CameraExtrinsics<Scalar>& t) {
  if (mask.width() != depth.width || mask.height() != depth.height)
    throw SizeMismatch("mask and depth image differ in size");

  std::vector<std::size_t> kept;
  kept.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (p.u < 0 || p.v < 0 || p.u >= mask.width() || p.v >= mask.height())
      throw OutOfBounds("pixel outside image");
    if (mask.at(p.v, p.u) && depth.valid(p.u, p.v)) kept.push_back(i);
  }

  AffordanceCloud<Scalar> cloud;
  cloud.points.resize(3, static_cast<Eigen::Index>(kept.size()));
  cloud.pixels.reserve(kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const auto& p = points[kept[j]];
    cloud.points.col(static_cast<Eigen::Index>(j)) = backproject_pixel<Scalar>(
        Scalar(p.u), Scalar(p.v), depth.at(p.u, p.v), k, t);
    cloud.pixels.push_back(p);
  }
  return cloud;
}

/// Row-major grid of every pixel in a width x height image.
inline std::vector<PixelCoord> full_grid(int width, int height) {
  std::vector<PixelCoord> grid;
  grid.reserve(static_cast<std::size_t>(width) * height);
  for (int v = 0; v < height; ++v)
    for (int u = 0; u < width; ++u) grid.push_back({u, v});
  return grid;
}

/// Full-grid variant: P is every pixel in row-major order.
template <typename Scalar>
AffordanceCloud<Scalar> backproject_masked(const mask::BinaryMask& mask,
                                           const DepthImage<Scalar>& depth,
                                           const CameraIntrinsics<Scalar>& k,
                                           const CameraExtrinsics<Scalar>& t) {
  const auto grid = full_grid(mask.width(), mask.height());
  return backproject_masked<Scalar>(grid, mask, depth, k, t);
}

}  // namespace afford::geom
