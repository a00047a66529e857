/*
 * Copyright 2026 The box3d Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <array>
#include <cmath>

#include "core/error.hpp"
#include "core/geometry.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace box3d;
using box3d::testing::Rng;

namespace {

constexpr int kCases = 10000;

double dist(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

CameraModel random_camera(Rng& rng) {
  CameraModel cam;
  cam.fx = rng.uniform(100, 2000);
  cam.fy = rng.uniform(100, 2000);
  cam.cx = rng.uniform(0, 1500);
  cam.cy = rng.uniform(0, 800);
  cam.width = 1500;
  cam.height = 800;
  cam.extrinsics = rng.transform(2.0);
  return cam;
}

}  // namespace

TEST_CASE("rigid transforms preserve pairwise distances") {
  Rng rng(11);
  for (int i = 0; i < kCases; ++i) {
    const RigidTransform t = rng.transform(100.0);
    const Vec3 p = rng.vec(-100, 100);
    const Vec3 q = rng.vec(-100, 100);
    REQUIRE(std::abs(dist(t.apply(p), t.apply(q)) - dist(p, q)) <= 1e-9);
  }
}

TEST_CASE("inverse and composition round-trip points") {
  Rng rng(12);
  for (int i = 0; i < kCases; ++i) {
    const RigidTransform a = rng.transform(50.0);
    const RigidTransform b = rng.transform(50.0);
    const Vec3 p = rng.vec(-100, 100);
    REQUIRE(dist(a.inverse().apply(a.apply(p)), p) <= 1e-9);
    REQUIRE(dist((a * b).apply(p), a.apply(b.apply(p))) <= 1e-9);
  }
}

TEST_CASE("projection is invariant to depth scaling along the camera ray") {
  Rng rng(13);
  int projected = 0;
  for (int i = 0; i < kCases; ++i) {
    const CameraModel cam = random_camera(rng);
    // Build the point in the camera frame so it is always in front.
    const Vec3 c{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0.5, 60)};
    const double s = rng.uniform(0.1, 10.0);
    const RigidTransform to_lidar = cam.extrinsics.inverse();
    const auto a = project_point(to_lidar.apply(c), cam);
    const auto b = project_point(to_lidar.apply(c * s), cam);
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    const double scale = std::max({1.0, std::abs(a->u), std::abs(a->v)});
    REQUIRE(std::abs(a->u - b->u) <= 1e-9 * scale);
    REQUIRE(std::abs(a->v - b->v) <= 1e-9 * scale);
    ++projected;
  }
  CHECK(projected == kCases);
}

TEST_CASE("points at or behind the image plane do not project") {
  CameraModel cam;
  cam.width = 10;
  cam.height = 10;
  CHECK_FALSE(project_point({0, 0, 0}, cam).has_value());
  CHECK_FALSE(project_point({1, 1, -1}, cam).has_value());
  CHECK_FALSE(project_point({0, 0, kMinProjectionDepth}, cam).has_value());
  const auto px = project_point({1, 2, 2}, cam);
  REQUIRE(px.has_value());
  CHECK(px->u == doctest::Approx(0.5));
  CHECK(px->v == doctest::Approx(1.0));
  // No clipping: far outside the image still projects.
  CHECK(project_point({1000, 0, 1}, cam).has_value());
}

TEST_CASE("fit_aabb contains its points and is idempotent") {
  Rng rng(14);
  for (int i = 0; i < kCases; ++i) {
    std::vector<Vec3> pts(static_cast<std::size_t>(rng.integer(1, 40)));
    for (auto& p : pts) p = rng.vec(-50, 50);
    const Aabb3 box = fit_aabb(pts, Frame::World);
    for (const auto& p : pts) REQUIRE(box.contains(p));
    const std::array<Vec3, 2> corners{box.min, box.max};
    REQUIRE(fit_aabb(corners, Frame::World) == box);
    std::vector<Vec3> more = pts;
    more.push_back(box.min);
    more.push_back(box.max);
    REQUIRE(fit_aabb(more, Frame::World) == box);
  }
}

TEST_CASE("fit_aabb rejects an empty cluster") {
  std::vector<Vec3> none;
  CHECK_THROWS_WITH_AS(fit_aabb(none, Frame::Lidar), "empty cluster", Error);
}

TEST_CASE("overlap_ratio is symmetric and iou never exceeds min_ratio") {
  Rng rng(15);
  for (int i = 0; i < kCases; ++i) {
    const Aabb3 a = rng.box(-3, 3, 0.0, 4.0);
    const Aabb3 b = rng.box(-3, 3, 0.0, 4.0);
    const double iou_ab = overlap_ratio(a, b, OverlapMetric::Iou);
    const double iou_ba = overlap_ratio(b, a, OverlapMetric::Iou);
    const double mr_ab = overlap_ratio(a, b, OverlapMetric::MinRatio);
    const double mr_ba = overlap_ratio(b, a, OverlapMetric::MinRatio);
    REQUIRE(iou_ab == doctest::Approx(iou_ba).epsilon(1e-12));
    REQUIRE(mr_ab == doctest::Approx(mr_ba).epsilon(1e-12));
    REQUIRE(iou_ab <= mr_ab + 1e-12);
    REQUIRE(iou_ab >= 0.0);
    REQUIRE(mr_ab <= 1.0);
    REQUIRE(iou_ab == doctest::Approx(oracle::box_iou(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("overlap_ratio closed forms") {
  const Aabb3 unit{{0, 0, 0}, {1, 1, 1}, Frame::World};
  const Aabb3 shifted{{0.5, 0, 0}, {1.5, 1, 1}, Frame::World};
  CHECK(overlap_ratio(unit, shifted, OverlapMetric::Iou) == doctest::Approx(1.0 / 3.0));
  CHECK(overlap_ratio(unit, shifted, OverlapMetric::MinRatio) == doctest::Approx(0.5));
  const Aabb3 inner{{0.25, 0.25, 0.25}, {0.75, 0.75, 0.75}, Frame::World};
  CHECK(overlap_ratio(unit, inner, OverlapMetric::MinRatio) == doctest::Approx(1.0));
  CHECK(overlap_ratio(unit, inner, OverlapMetric::Iou) == doctest::Approx(0.125));
  const Aabb3 flat{{0, 0, 0.5}, {1, 1, 0.5}, Frame::World};
  CHECK(overlap_ratio(unit, flat, OverlapMetric::MinRatio) == 0.0);
  CHECK(overlap_ratio(unit, unit, OverlapMetric::Iou) == 1.0);
  const Aabb3 lidar{{0, 0, 0}, {1, 1, 1}, Frame::Lidar};
  CHECK_THROWS_AS(overlap_ratio(unit, lidar, OverlapMetric::Iou), Error);
}

TEST_CASE("orthonormalize recovers a perturbed rotation and rejects reflections") {
  Rng rng(16);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 r = rng.rotation();
    Mat3 noisy = r;
    for (double& v : noisy.m) v += rng.uniform(-1e-5, 1e-5);
    const Mat3 fixed = orthonormalize(noisy, 1e-3);
    REQUIRE(fixed.orthonormality_error() <= 1e-12);
    REQUIRE(fixed.determinant() == doctest::Approx(1.0));
    for (std::size_t k = 0; k < 9; ++k) REQUIRE(std::abs(fixed.m[k] - r.m[k]) <= 1e-4);
  }
  Mat3 reflect;
  reflect.m = {1, 0, 0, 0, 1, 0, 0, 0, -1};
  CHECK_THROWS_WITH_AS(orthonormalize(reflect, 1e-3), doctest::Contains("improper rotation"), Error);
  Mat3 skewed;
  skewed.m = {1, 0.1, 0, 0, 1, 0, 0, 0, 1};
  CHECK_THROWS_WITH_AS(orthonormalize(skewed, 1e-3), doctest::Contains("not orthonormal"), Error);
}

TEST_CASE("RigidTransform enforces a proper rotation") {
  Mat3 reflect;
  reflect.m = {-1, 0, 0, 0, 1, 0, 0, 0, 1};
  CHECK_THROWS_AS(RigidTransform(reflect, {}), Error);
  Mat3 scaled;
  scaled.m = {1.01, 0, 0, 0, 1, 0, 0, 0, 1};
  CHECK_THROWS_AS(RigidTransform(scaled, {}), Error);
  const std::array<double, 12> rows{0, -1, 0, 1, 1, 0, 0, 2, 0, 0, 1, 3};
  const RigidTransform t = RigidTransform::from_row_major_3x4(rows);
  CHECK(t.row_major_3x4() == rows);
  const Vec3 p = t.apply({1, 0, 0});
  CHECK(p == Vec3{1, 3, 3});
}

TEST_CASE("transform_cloud keeps index alignment and sets the target frame") {
  Rng rng(17);
  PointCloud c;
  for (int i = 0; i < 50; ++i) c.points.push_back(rng.vec(-5, 5));
  const RigidTransform t = rng.transform();
  const PointCloud w = transform_cloud(c, t, Frame::World);
  REQUIRE(w.size() == c.size());
  CHECK(w.frame == Frame::World);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(dist(w.points[i], t.apply(c.points[i])) == 0.0);
}
