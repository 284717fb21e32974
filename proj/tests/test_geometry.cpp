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


#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/LU>
#include <doctest.h>

#include "errors.hpp"
#include "geometry.hpp"
#include "render.hpp"

using namespace patchpose;
using namespace patchpose::geometry;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent rotation oracle: explicit matrices written out by hand.
Mat3 ry(double deg) {
  const double a = deg * kPi / 180.0;
  Mat3 m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}
Mat3 rz(double deg) {
  const double a = deg * kPi / 180.0;
  Mat3 m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

PatchPlacement random_valid(std::mt19937_64& rng, const CameraIntrinsics& k) {
  std::uniform_real_distribution<double> yaw(-75, 75), roll(-180, 180), z(3, 12), off(-1.5, 1.5),
      side(0.5, 3.0);
  while (true) {
    PatchPlacement p;
    p.yaw_deg = yaw(rng);
    p.roll_deg = roll(rng);
    p.depth = z(rng);
    p.offset = Vec2(off(rng), off(rng));
    p.side = side(rng);
    if (project_patch(p, k)) return p;
  }
}

}  // namespace

TEST_CASE("intrinsics from field of view") {
  const auto k = intrinsics_from_fov(60.0, 224, 224);
  CHECK(k.fx == doctest::Approx(112.0 * std::sqrt(3.0)).epsilon(1e-12));
  CHECK(k.fx == doctest::Approx(193.9897).epsilon(1e-6));
  CHECK(k.fy == k.fx);
  CHECK(k.cx == 112.0);
  CHECK(k.cy == 112.0);
  CHECK(intrinsics_from_fov(90.0, 2, 2).fx == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(intrinsics_from_fov(60.0, 64, 64).fx == doctest::Approx(32.0 * std::sqrt(3.0)).epsilon(1e-12));
  CHECK_THROWS_AS(intrinsics_from_fov(0.0, 64, 64), std::invalid_argument);
  CHECK_THROWS_AS(intrinsics_from_fov(180.0, 64, 64), std::invalid_argument);
  CHECK_THROWS_AS(intrinsics_from_fov(60.0, 0, 64), std::invalid_argument);
}

TEST_CASE("rotation examples and properties") {
  CHECK(rotation_from_angles(0, 0).matrix().isApprox(Mat3::Identity(), 1e-15));
  const Vec3 a = rotation_from_angles(90, 0) * Vec3(0, 0, -1);
  CHECK((a - Vec3(-1, 0, 0)).norm() < 1e-12);
  const Vec3 b = rotation_from_angles(0, 90) * Vec3(1, 0, 0);
  CHECK((b - Vec3(0, 1, 0)).norm() < 1e-12);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ang(-720, 720);
  for (int i = 0; i < 500; ++i) {
    const double y = ang(rng), r = ang(rng);
    const Mat3 m = rotation_from_angles(y, r).matrix();
    CHECK((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(m.determinant() - 1.0) < 1e-9);
    CHECK((m - ry(y) * rz(r)).cwiseAbs().maxCoeff() < 1e-12);
  }
  Mat3 bad = Mat3::Identity();
  bad(0, 0) = -1.0;  // reflection
  CHECK_THROWS_AS(Rotation::from_matrix(bad), std::invalid_argument);
  CHECK_THROWS_AS(Rotation::from_matrix(2.0 * Mat3::Identity()), std::invalid_argument);
}

TEST_CASE("rigid motion and projection") {
  Pose id;
  CHECK(transform_point(id, Vec3(1, 2, 3)) == Vec3(1, 2, 3));
  Pose t;
  t.translation = Vec3(0, 0, 7);
  CHECK(transform_point(t, Vec3::Zero()) == Vec3(0, 0, 7));
  Pose y90;
  y90.rotation = rotation_from_angles(90, 0);
  CHECK((transform_point(y90, Vec3(0, 0, -1)) - Vec3(-1, 0, 0)).norm() < 1e-12);

  CameraIntrinsics k1;
  k1.fx = k1.fy = 1;
  k1.cx = k1.cy = 0;
  CHECK(project(k1, Vec3(0, 0, 7)).norm() == 0.0);
  CameraIntrinsics k2 = k1;
  k2.fx = k2.fy = 2;
  CHECK((project(k2, Vec3(1, 2, 4)) - Vec2(0.5, 1.0)).norm() < 1e-15);
  CHECK_THROWS_AS(project(k2, Vec3(1, 1, 0)), BehindCameraError);
  CHECK_THROWS_AS(project(k2, Vec3(1, 1, -3)), BehindCameraError);
  CHECK_THROWS_AS(project(k2, Vec3(1, 1, 1e-7)), BehindCameraError);
}

TEST_CASE("patch corners") {
  PatchPlacement p;
  auto c = patch_corners_world(p);
  for (const Vec3& v : c) {
    CHECK(std::abs(std::abs(v.x()) - 1.0) < 1e-15);
    CHECK(std::abs(std::abs(v.y()) - 1.0) < 1e-15);
    CHECK(v.z() == 7.0);
  }
  p.roll_deg = 90;
  const auto r = patch_corners_world(p);
  // Same set, order rotated by one corner.
  for (int i = 0; i < 4; ++i) CHECK((r[i] - c[(i + 1) % 4]).norm() < 1e-12);
  p.roll_deg = 0;
  p.yaw_deg = 90;
  for (const Vec3& v : patch_corners_world(p)) {
    CHECK(std::abs(v.x()) < 1e-12);
    CHECK((std::abs(v.z() - 6.0) < 1e-12 || std::abs(v.z() - 8.0) < 1e-12));
  }
}

TEST_CASE("projected patch validity") {
  const auto k = intrinsics_from_fov(60, 64, 64);
  PatchPlacement p;
  const auto q = project_patch(p, k);
  REQUIRE(q);
  const double w = k.fx * p.side / p.depth;
  const Vec2 expect[4] = {{32 - w / 2, 32 - w / 2}, {32 + w / 2, 32 - w / 2},
                          {32 + w / 2, 32 + w / 2}, {32 - w / 2, 32 + w / 2}};
  for (int i = 0; i < 4; ++i) CHECK(((*q)[i] - expect[i]).norm() < 1e-9);
  CHECK(signed_area(*q) > 0.0);

  p.yaw_deg = 90;
  CHECK_FALSE(project_patch(p, k));
  p.yaw_deg = 120;
  CHECK_FALSE(project_patch(p, k));
  p.yaw_deg = -120;
  CHECK_FALSE(project_patch(p, k));
  p.yaw_deg = 0;
  p.depth = 0.5;  // corners at +-1 straddle nothing but the patch is huge; still valid
  CHECK(project_patch(p, k));
  p.yaw_deg = 60;
  p.depth = 0.5;  // one edge swings behind the camera
  CHECK_FALSE(project_patch(p, k));
  p = PatchPlacement{};
  p.side = 0.05;  // ~0.16 px^2
  CHECK_FALSE(project_patch(p, k));
}

TEST_CASE("homography examples") {
  const std::array<Vec2, 4> unit{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  const Homography id = homography_from_correspondences(unit, unit);
  CHECK((id.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  const Quad twice{Vec2(0, 0), Vec2(2, 0), Vec2(2, 2), Vec2(0, 2)};
  const Homography s = homography_from_correspondences(unit, twice);
  Mat3 d = Mat3::Zero();
  d.diagonal() << 2, 2, 1;
  CHECK((s.matrix() - d).cwiseAbs().maxCoeff() < 1e-12);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> jit(-0.2, 0.2);
  for (int t = 0; t < 200; ++t) {
    std::array<Vec2, 4> src;
    Quad dst;
    for (int i = 0; i < 4; ++i) {
      src[i] = unit[i] * 10 + Vec2(jit(rng), jit(rng));
      dst[i] = unit[i] * 30 + Vec2(5, 7) + Vec2(jit(rng), jit(rng)) * 20;
    }
    const Homography h = homography_from_correspondences(src, dst);
    for (int i = 0; i < 4; ++i) CHECK((h.apply(src[i]) - dst[i]).norm() < 1e-8);
    const Homography hi = h.inverse();
    for (int i = 0; i < 4; ++i) CHECK((hi.apply(h.apply(src[i])) - src[i]).norm() < 1e-8);
    const Mat3 prod = h.matrix() * hi.matrix();
    CHECK((prod / prod(2, 2) - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-8);
  }

  const Quad collinear{Vec2(0, 0), Vec2(1, 1), Vec2(2, 2), Vec2(0, 5)};
  CHECK_THROWS_AS(homography_from_correspondences(unit, collinear), DegenerateError);
  CHECK_THROWS_AS(Homography(Mat3::Zero()), DegenerateError);
}

TEST_CASE("homography agrees with direct projection over 1000 placements") {
  const auto k = intrinsics_from_fov(60, 64, 64);
  std::mt19937_64 rng(2021);
  const int tex = 32;
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const PatchPlacement p = random_valid(rng, k);
    const auto q = project_patch(p, k);
    REQUIRE(q);
    const Homography h = homography_from_correspondences(render::texture_corners(tex, tex), *q);
    for (int i = 0; i <= 8; ++i) {
      for (int j = 0; j <= 8; ++j) {
        const double u = j / 8.0, v = i / 8.0;
        const Vec2 via_h = h.apply(Vec2(u * tex, v * tex));
        const Vec3 w = patch_point_world(p, u, v);
        const Vec2 direct(k.cx + k.fx * w.x() / w.z(), k.cy + k.fy * w.y() / w.z());
        worst = std::max(worst, (via_h - direct).norm());
      }
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("yaw mirror symmetry") {
  const auto k = intrinsics_from_fov(60, 64, 64);
  for (double yaw : {5.0, 20.0, 45.0, 70.0, 85.0}) {
    for (double roll : {0.0, 30.0, -75.0}) {
      PatchPlacement a, b;
      a.yaw_deg = yaw;
      a.roll_deg = roll;
      b.yaw_deg = -yaw;
      b.roll_deg = -roll;
      const auto qa = project_patch(a, k);
      const auto qb = project_patch(b, k);
      REQUIRE(qa);
      REQUIRE(qb);
      // Mirror x -> W - x swaps left and right texture corners.
      const int mirror[4] = {1, 0, 3, 2};
      for (int i = 0; i < 4; ++i) {
        const Vec2 m(k.width - (*qb)[mirror[i]].x(), (*qb)[mirror[i]].y());
        CHECK(((*qa)[i] - m).norm() < 1e-9);
      }
    }
  }
}

TEST_CASE("convexity and area helpers") {
  const Quad sq{Vec2(0, 0), Vec2(2, 0), Vec2(2, 2), Vec2(0, 2)};
  CHECK(signed_area(sq) == doctest::Approx(4.0));
  CHECK(is_strictly_convex(sq));
  const Quad bow{Vec2(0, 0), Vec2(2, 2), Vec2(2, 0), Vec2(0, 2)};
  CHECK_FALSE(is_strictly_convex(bow));
  const Quad dart{Vec2(0, 0), Vec2(2, 0), Vec2(0.5, 0.5), Vec2(0, 2)};
  CHECK_FALSE(is_strictly_convex(dart));
}

TEST_CASE("yaw foreshortens the horizontal extent") {
  const auto k = intrinsics_from_fov(60, 64, 64);
  PatchPlacement p;
  const auto front = project_patch(p, k);
  p.yaw_deg = 60;
  const auto tilted = project_patch(p, k);
  REQUIRE(front);
  REQUIRE(tilted);
  auto width = [](const Quad& q) {
    double lo = q[0].x(), hi = q[0].x();
    for (const auto& v : q) {
      lo = std::min(lo, v.x());
      hi = std::max(hi, v.x());
    }
    return hi - lo;
  };
  // Perspective: corners at x = +-cos(60), z = 7 -+ sin(60).
  const double s60 = std::sqrt(3.0) / 2.0;
  const double expect = k.fx * (0.5 / (7 - s60) + 0.5 / (7 + s60));
  CHECK(width(*tilted) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(width(*tilted) / width(*front) == doctest::Approx(0.5).epsilon(0.02));
}
