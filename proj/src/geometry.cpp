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

#include "geometry.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "errors.hpp"

namespace patchpose::geometry {
namespace {

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Similarity that moves the centroid to the origin and sets the mean distance
// to sqrt(2).
Mat3 normalizing_transform(const std::array<Vec2, 4>& pts) {
  Vec2 centroid = Vec2::Zero();
  for (const Vec2& p : pts) centroid += p;
  centroid /= 4.0;
  double mean_dist = 0.0;
  for (const Vec2& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= 4.0;
  if (!(mean_dist > 0.0)) throw DegenerateError("coincident correspondence points");
  const double s = std::numbers::sqrt2 / mean_dist;
  Mat3 t;
  t << s, 0, -s * centroid.x(),
       0, s, -s * centroid.y(),
       0, 0, 1;
  return t;
}

bool has_collinear_triple(const std::array<Vec2, 4>& pts) {
  // Scale-free test on the normalized coordinates.
  constexpr double kTol = 1e-10;
  for (int skip = 0; skip < 4; ++skip) {
    std::array<Vec2, 3> tri;
    int n = 0;
    for (int i = 0; i < 4; ++i) {
      if (i != skip) tri[n++] = pts[i];
    }
    if (std::abs(cross2(tri[1] - tri[0], tri[2] - tri[0])) <= kTol) return true;
  }
  return false;
}

std::array<Vec2, 4> apply_affine(const Mat3& t, const std::array<Vec2, 4>& pts) {
  std::array<Vec2, 4> out;
  for (int i = 0; i < 4; ++i) {
    out[i] = (t * pts[i].homogeneous()).hnormalized();
  }
  return out;
}

}  // namespace

Rotation Rotation::from_matrix(const Mat3& m) {
  if (!m.allFinite()) throw std::invalid_argument("rotation has non-finite entries");
  if (((m.transpose() * m) - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("rotation matrix is not orthonormal");
  }
  if (std::abs(m.determinant() - 1.0) > 1e-9) {
    throw std::invalid_argument("rotation matrix does not have determinant +1");
  }
  return Rotation(m);
}

Homography::Homography(const Mat3& h) {
  if (!h.allFinite()) throw DegenerateError("homography has non-finite entries");
  if (h(2, 2) != 0.0) {
    h_ = h / h(2, 2);
  } else {
    const double n = h.norm();
    if (n == 0.0) throw DegenerateError("zero homography");
    h_ = h / n;
  }
  if (!(std::abs(h_.determinant()) > 1e-12)) {
    throw DegenerateError("homography is not invertible");
  }
}

Vec2 Homography::apply(const Vec2& p) const {
  return (h_ * p.homogeneous()).hnormalized();
}

Homography Homography::inverse() const { return Homography(h_.inverse()); }

CameraIntrinsics intrinsics_from_fov(double fov_deg, int width, int height) {
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) {
    throw std::invalid_argument("field of view must lie in (0, 180) degrees");
  }
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("image dimensions must be positive");
  }
  CameraIntrinsics k;
  k.width = width;
  k.height = height;
  k.fov_deg = fov_deg;
  k.cx = width / 2.0;
  k.cy = height / 2.0;
  k.fx = k.cx / std::tan(radians(fov_deg) / 2.0);
  k.fy = k.fx;
  return k;
}

Rotation rotation_from_angles(double yaw_deg, double roll_deg) {
  const double cy = std::cos(radians(yaw_deg));
  const double sy = std::sin(radians(yaw_deg));
  const double cr = std::cos(radians(roll_deg));
  const double sr = std::sin(radians(roll_deg));
  Mat3 ry;
  ry << cy, 0, sy,
        0, 1, 0,
        -sy, 0, cy;
  Mat3 rz;
  rz << cr, -sr, 0,
        sr, cr, 0,
        0, 0, 1;
  return Rotation::from_matrix(ry * rz);
}

Vec3 transform_point(const Pose& pose, const Vec3& p0) {
  return pose.rotation * p0 + pose.translation;
}

Vec2 project(const CameraIntrinsics& k, const Vec3& p) {
  if (!(p.z() > kDepthEpsilon)) throw BehindCameraError("point is not in front of the camera");
  return {k.cx + k.fx * p.x() / p.z(), k.cy + k.fy * p.y() / p.z()};
}

Pose placement_pose(const PatchPlacement& placement) {
  return Pose{rotation_from_angles(placement.yaw_deg, placement.roll_deg),
              Vec3(placement.offset.x(), placement.offset.y(), placement.depth)};
}

Vec3 patch_normal(const PatchPlacement& placement) {
  return rotation_from_angles(placement.yaw_deg, placement.roll_deg) * Vec3(0, 0, -1);
}

Vec3 patch_point_world(const PatchPlacement& placement, double u, double v) {
  const Vec3 local((u - 0.5) * placement.side, (v - 0.5) * placement.side, 0.0);
  return transform_point(placement_pose(placement), local);
}

std::array<Vec3, 4> patch_corners_world(const PatchPlacement& placement) {
  const Pose pose = placement_pose(placement);
  const double h = placement.side / 2.0;
  return {transform_point(pose, Vec3(-h, -h, 0)), transform_point(pose, Vec3(h, -h, 0)),
          transform_point(pose, Vec3(h, h, 0)), transform_point(pose, Vec3(-h, h, 0))};
}

double signed_area(const Quad& q) {
  double a = 0.0;
  for (int i = 0; i < 4; ++i) a += cross2(q[i], q[(i + 1) % 4]);
  return a / 2.0;
}

bool is_strictly_convex(const Quad& q) {
  for (int i = 0; i < 4; ++i) {
    const Vec2 e0 = q[(i + 1) % 4] - q[i];
    const Vec2 e1 = q[(i + 2) % 4] - q[(i + 1) % 4];
    if (!(cross2(e0, e1) > 0.0)) return false;
  }
  return true;
}

std::optional<Quad> project_patch(const PatchPlacement& placement, const CameraIntrinsics& k) {
  if (!(placement.depth > 0.0) || !(placement.side > 0.0)) return std::nullopt;
  const auto corners = patch_corners_world(placement);
  for (const Vec3& c : corners) {
    if (!(c.z() > kDepthEpsilon)) return std::nullopt;
  }
  const Vec3 center(placement.offset.x(), placement.offset.y(), placement.depth);
  if (patch_normal(placement).dot(center) >= 0.0) return std::nullopt;
  Quad q;
  for (int i = 0; i < 4; ++i) q[i] = project(k, corners[i]);
  if (!(signed_area(q) >= kMinQuadArea)) return std::nullopt;
  if (!is_strictly_convex(q)) return std::nullopt;
  return q;
}

Homography homography_from_correspondences(const std::array<Vec2, 4>& src, const Quad& dst) {
  const Mat3 ts = normalizing_transform(src);
  const Mat3 td = normalizing_transform(dst);
  const auto ns = apply_affine(ts, src);
  const auto nd = apply_affine(td, dst);
  if (has_collinear_triple(ns) || has_collinear_triple(nd)) {
    throw DegenerateError("three correspondence points are collinear");
  }

  Eigen::Matrix<double, 8, 9> a;
  for (int i = 0; i < 4; ++i) {
    const double x = ns[i].x(), y = ns[i].y();
    const double xp = nd[i].x(), yp = nd[i].y();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, xp * x, xp * y, xp;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, yp * x, yp * y, yp;
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 8, 9>> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(7) > 1e-10 * sv(0))) {
    throw DegenerateError("rank-deficient correspondence system");
  }
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Mat3 hn;
  hn << h(0), h(1), h(2),
        h(3), h(4), h(5),
        h(6), h(7), h(8);
  return Homography(td.inverse() * hn * ts);
}

}  // namespace patchpose::geometry
