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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

#include "afford/errors.hpp"
#include "afford/projection.hpp"

namespace afford::grasp {

using geom::AffordanceCloud;
using geom::CameraExtrinsics;
using geom::CameraIntrinsics;
using geom::Matrix3;
using geom::Matrix4;
using geom::Vector3;

/// Parallel-jaw gripper limits, in meters.
template <typename Scalar = double>
struct GripperSpec {
  Scalar max_width = Scalar(0.085);
  Scalar finger_margin = Scalar(0.005);
  std::size_t min_points = 50;
};

/// Gripper frame. Rotation columns are the approach, closing and orthogonal
/// axes, in that order; orthogonal = approach x closing.
template <typename Scalar = double>
struct GraspPose {
  Vector3<Scalar> position = Vector3<Scalar>::Zero();
  Matrix3<Scalar> rotation = Matrix3<Scalar>::Identity();
  Scalar width = 0;
  Scalar score = 0;

  Vector3<Scalar> approach() const { return rotation.col(0); }
  Vector3<Scalar> closing() const { return rotation.col(1); }
  Vector3<Scalar> orthogonal() const { return rotation.col(2); }
};

template <typename Scalar = double>
struct PrincipalAxes {
  Vector3<Scalar> centroid;
  /// Columns are unit axes sorted by descending variance.
  Matrix3<Scalar> axes;
  Vector3<Scalar> variances;
  /// max - min of the point projections on each axis.
  Vector3<Scalar> extents;
};

namespace detail {

constexpr double kTieGap = 1e-9;

template <typename Scalar>
bool nearly_equal(Scalar a, Scalar b, Scalar scale) {
  return std::abs(a - b) <= Scalar(kTieGap) * std::max(scale, Scalar(1e-300));
}

/// Flips `axis` so its first non-negligible world component is positive
/// (+x, then +y, then +z).
template <typename Scalar>
Vector3<Scalar> sign_fix(Vector3<Scalar> axis) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(axis(i)) > Scalar(1e-12)) return axis(i) < 0 ? Vector3<Scalar>(-axis) : axis;
  }
  return axis;
}

/// Replaces each cluster of tied eigenvalues with a basis built from the
/// world axes projected into the tied eigenspace (lowest index first).
template <typename Scalar>
void resolve_ties(Vector3<Scalar>& values, Matrix3<Scalar>& vectors) {
  const Scalar scale = values.cwiseAbs().maxCoeff();
  int start = 0;
  while (start < 3) {
    int end = start + 1;
    while (end < 3 && nearly_equal(values(start), values(end), scale)) ++end;
    const int dim = end - start;
    if (dim > 1) {
      const Eigen::Matrix<Scalar, 3, Eigen::Dynamic> span = vectors.middleCols(start, dim);
      const Matrix3<Scalar> projector = span * span.transpose();
      int filled = 0;
      for (int w = 0; w < 3 && filled < dim; ++w) {
        Vector3<Scalar> c = projector.col(w);
        for (int j = 0; j < filled; ++j) {
          const Vector3<Scalar> prev = vectors.col(start + j);
          c -= prev.dot(c) * prev;
        }
        if (c.norm() > Scalar(1e-6)) vectors.col(start + filled++) = c.normalized();
      }
    }
    start = end;
  }
}

template <typename Scalar>
Vector3<Scalar> cloud_bounds_extent(const Eigen::Matrix<Scalar, 3, Eigen::Dynamic>& pts,
                                    const Vector3<Scalar>& centroid,
                                    const Vector3<Scalar>& axis) {
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> proj =
      axis.transpose() * (pts.colwise() - centroid);
  return {proj.minCoeff(), proj.maxCoeff(), proj.maxCoeff() - proj.minCoeff()};
}

}  // namespace detail

/// Centroid and covariance eigenframe of the cloud. Axes are sorted by
/// descending variance and sign-fixed against world +x (then +y, +z). Tied
/// eigenvalues (relative gap < 1e-9) are resolved toward the world axes.
/// Throws TooFewPoints below `min_points`.
template <typename Scalar>
PrincipalAxes<Scalar> principal_axes(const AffordanceCloud<Scalar>& cloud,
                                     std::size_t min_points = 50) {
  const auto n = static_cast<std::size_t>(cloud.size());
  if (n < min_points || n == 0) throw TooFewPoints(n, min_points);

  PrincipalAxes<Scalar> out;
  out.centroid = cloud.points.rowwise().mean();
  const Eigen::Matrix<Scalar, 3, Eigen::Dynamic> centered =
      cloud.points.colwise() - out.centroid;
  const Matrix3<Scalar> cov = (centered * centered.transpose()) / Scalar(n);

  Eigen::SelfAdjointEigenSolver<Matrix3<Scalar>> solver(cov);
  // Eigen returns ascending eigenvalues.
  Vector3<Scalar> values = solver.eigenvalues().reverse();
  Matrix3<Scalar> vectors = solver.eigenvectors().rowwise().reverse();
  detail::resolve_ties(values, vectors);

  for (int i = 0; i < 3; ++i) {
    out.axes.col(i) = detail::sign_fix<Scalar>(vectors.col(i).normalized());
    out.extents(i) = detail::cloud_bounds_extent<Scalar>(cloud.points, out.centroid,
                                                         out.axes.col(i))(2);
  }
  out.variances = values.cwiseMax(Scalar(0));
  return out;
}

/// Geometric grasp proposal. The approach axis points from the camera center
/// to the cloud centroid. The closing axis is the principal axis with the
/// smallest extent once projected off the approach direction; an axis
/// within 30 degrees of the approach is not a candidate. Width is that
/// extent plus both finger margins, clamped to the gripper's opening.
/// Score is the fraction of points inside the closing slab.
template <typename Scalar>
GraspPose<Scalar> propose_grasp(const AffordanceCloud<Scalar>& cloud,
                                const CameraIntrinsics<Scalar>& /*intrinsics*/,
                                const CameraExtrinsics<Scalar>& extrinsics,
                                const GripperSpec<Scalar>& gripper = {}) {
  const PrincipalAxes<Scalar> pa = principal_axes(cloud, gripper.min_points);
  const Matrix3<Scalar> cam = extrinsics.rotation();

  Vector3<Scalar> approach = pa.centroid - extrinsics.center();
  if (approach.norm() <= Scalar(1e-12)) {
    approach = cam.col(2);
  }
  approach.normalize();

  // Candidates: each principal axis with its approach component removed.
  constexpr Scalar kMinResidual = Scalar(0.5);  // sin(30 deg)
  int best = -1;
  Vector3<Scalar> best_axis = Vector3<Scalar>::Zero();
  Scalar best_extent = 0, best_residual = 0;
  for (int i = 0; i < 3; ++i) {
    const Vector3<Scalar> axis = pa.axes.col(i);
    Vector3<Scalar> c = axis - axis.dot(approach) * approach;
    const Scalar residual = c.norm();
    if (residual < kMinResidual) continue;
    c /= residual;
    const Scalar extent =
        detail::cloud_bounds_extent<Scalar>(cloud.points, pa.centroid, c)(2);
    bool take = best < 0;
    if (!take) {
      const Scalar scale = std::max(extent, best_extent);
      if (detail::nearly_equal(extent, best_extent, scale)) {
        // Tie: most orthogonal to the approach, then lowest world axis.
        if (!detail::nearly_equal(residual, best_residual, Scalar(1))) {
          take = residual > best_residual;
        } else {
          Eigen::Index wi, wb;
          c.cwiseAbs().maxCoeff(&wi);
          best_axis.cwiseAbs().maxCoeff(&wb);
          take = wi < wb;
        }
      } else {
        take = extent < best_extent;
      }
    }
    if (take) {
      best = i;
      best_axis = c;
      best_extent = extent;
      best_residual = residual;
    }
  }

  // Orient the closing axis against the camera frame so the result moves
  // with the rig under rigid motion.
  for (int j = 0; j < 3; ++j) {
    const Scalar s = best_axis.dot(cam.col(j));
    if (std::abs(s) > Scalar(1e-12)) {
      if (s < 0) best_axis = -best_axis;
      break;
    }
  }

  GraspPose<Scalar> pose;
  pose.position = pa.centroid;
  pose.rotation.col(0) = approach;
  pose.rotation.col(1) = best_axis;
  pose.rotation.col(2) = approach.cross(best_axis).normalized();
  pose.width = std::min(best_extent + Scalar(2) * gripper.finger_margin, gripper.max_width);

  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> offsets =
      best_axis.transpose() * (cloud.points.colwise() - pose.position);
  const Scalar half = pose.width / Scalar(2);
  const auto inside = (offsets.array().abs() <= half).count();
  pose.score = Scalar(inside) / Scalar(cloud.size());
  return pose;
}

/// Applies a rigid world transform to the pose. Width and score are kept.
/// Throws NonRigidTransform unless `r` is rigid within 1e-9.
template <typename Scalar>
GraspPose<Scalar> transform_grasp(const GraspPose<Scalar>& pose, const Matrix4<Scalar>& r) {
  if (!geom::is_rigid(r)) throw NonRigidTransform("transform is not rigid");
  GraspPose<Scalar> out = pose;
  const Matrix3<Scalar> rot = r.template topLeftCorner<3, 3>();
  out.position = rot * pose.position + r.template topRightCorner<3, 1>();
  out.rotation = rot * pose.rotation;
  return out;
}

/// Checks the GraspPose invariants: orthonormal right-handed rotation within
/// `tol`, 0 < width <= max_width, score in [0, 1].
template <typename Scalar>
bool pose_valid(const GraspPose<Scalar>& pose, Scalar max_width, double tol = 1e-9) {
  const Matrix3<Scalar>& r = pose.rotation;
  if (!r.allFinite() || !pose.position.allFinite()) return false;
  if (((r.transpose() * r) - Matrix3<Scalar>::Identity()).cwiseAbs().maxCoeff() > tol)
    return false;
  if (std::abs(r.determinant() - Scalar(1)) > tol) return false;
  return pose.width > 0 && pose.width <= max_width && pose.score >= 0 && pose.score <= 1;
}

}  // namespace afford::grasp
