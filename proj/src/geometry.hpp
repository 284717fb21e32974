// Copyright 2026 The patchpose Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PATCHPOSE_GEOMETRY_HPP_
#define PATCHPOSE_GEOMETRY_HPP_

#include <array>
#include <optional>

#include <Eigen/Core>

namespace patchpose::geometry {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Minimum admissible depth of a projected point, in world units.
inline constexpr double kDepthEpsilon = 1e-6;
/// Projected patches smaller than this (in square pixels) are not rendered.
inline constexpr double kMinQuadArea = 4.0;

/// Proper rotation matrix (orthonormal, det = +1).
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  /// Throws std::invalid_argument unless `m` is orthonormal with det +1
  /// to within 1e-9.
  static Rotation from_matrix(const Mat3& m);

  const Mat3& matrix() const { return m_; }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

 private:
  explicit Rotation(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

/// Rigid motion taking patch-local coordinates into the camera frame.
struct Pose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  double fov_deg = 90.0;
};

/// One pose of the square patch plane relative to the camera.
struct PatchPlacement {
  double yaw_deg = 0.0;
  double roll_deg = 0.0;
  double depth = 7.0;
  Vec2 offset = Vec2::Zero();
  double side = 2.0;
};

/// Projective map of the plane, stored normalized so that h(2,2) = 1
/// whenever that entry is non-zero (unit Frobenius norm otherwise).
class Homography {
 public:
  Homography() : h_(Mat3::Identity()) {}
  /// Throws DegenerateError when |det| <= 1e-12 after normalization.
  explicit Homography(const Mat3& h);

  const Mat3& matrix() const { return h_; }
  Vec2 apply(const Vec2& p) const;
  Homography inverse() const;

 private:
  Mat3 h_;
};

/// Image of the patch boundary: four pixel positions in texture-corner order
/// (top-left, top-right, bottom-right, bottom-left of the texture).
using Quad = std::array<Vec2, 4>;

CameraIntrinsics intrinsics_from_fov(double fov_deg, int width, int height);

/// R = R_y(yaw) * R_z(roll): the texture is rolled in its own plane first,
/// then the plane is tilted about the camera's vertical axis.
Rotation rotation_from_angles(double yaw_deg, double roll_deg);

Vec3 transform_point(const Pose& pose, const Vec3& p0);

/// Pinhole projection into pixel coordinates. Throws BehindCameraError when
/// p.z() <= kDepthEpsilon.
Vec2 project(const CameraIntrinsics& k, const Vec3& p);

Pose placement_pose(const PatchPlacement& placement);

/// Outward normal of the patch's visible face, in the camera frame.
Vec3 patch_normal(const PatchPlacement& placement);

/// Corners (+-s/2, +-s/2, 0) moved into the camera frame, in the order
/// top-left, top-right, bottom-right, bottom-left of the texture.
std::array<Vec3, 4> patch_corners_world(const PatchPlacement& placement);

/// Maps a texture-normalized point (u, v) in [0,1]^2 onto the patch plane in
/// the camera frame.
Vec3 patch_point_world(const PatchPlacement& placement, double u, double v);

/// Returns std::nullopt for placements that cannot be rendered: a corner at
/// or behind the camera, back-facing, non-convex or smaller than
/// kMinQuadArea.
std::optional<Quad> project_patch(const PatchPlacement& placement,
                                  const CameraIntrinsics& k);

/// Signed shoelace area; positive for a front-facing patch (image y axis
/// points down).
double signed_area(const Quad& q);

bool is_strictly_convex(const Quad& q);

/// Four-point direct linear transform with Hartley normalization. Throws
/// DegenerateError when three points of either set are collinear or the
/// 8x9 system is rank deficient.
Homography homography_from_correspondences(const std::array<Vec2, 4>& src,
                                           const Quad& dst);

}  // namespace patchpose::geometry

#endif  // PATCHPOSE_GEOMETRY_HPP_
