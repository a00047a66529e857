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

#include "core/geometry.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "core/error.hpp"

namespace box3d {

Mat3 Mat3::rotation_z(double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Mat3 r;
  r.m = {c, -s, 0, s, c, 0, 0, 0, 1};
  return r;
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out(r, c) = (*this)(r, 0) * o(0, c) + (*this)(r, 1) * o(1, c) + (*this)(r, 2) * o(2, c);
    }
  }
  return out;
}

Vec3 Mat3::operator*(const Vec3& v) const {
  return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
          m[6] * v.x + m[7] * v.y + m[8] * v.z};
}

Mat3 Mat3::transposed() const {
  Mat3 t;
  t.m = {m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]};
  return t;
}

double Mat3::determinant() const {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

double Mat3::orthonormality_error() const {
  const Mat3 g = transposed() * (*this);
  double err = 0.0;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      err = std::max(err, std::abs(g(r, c) - (r == c ? 1.0 : 0.0)));
    }
  }
  return err;
}

namespace {

Mat3 inverse_transpose(const Mat3& a) {
  // Cofactor matrix divided by the determinant.
  const double det = a.determinant();
  Mat3 c;
  c(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
  c(0, 1) = -(a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0));
  c(0, 2) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
  c(1, 0) = -(a(0, 1) * a(2, 2) - a(0, 2) * a(2, 1));
  c(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
  c(1, 2) = -(a(0, 0) * a(2, 1) - a(0, 1) * a(2, 0));
  c(2, 0) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
  c(2, 1) = -(a(0, 0) * a(1, 2) - a(0, 2) * a(1, 0));
  c(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  for (double& v : c.m) v /= det;
  return c;
}

}  // namespace

Mat3 orthonormalize(const Mat3& rotation, double tolerance) {
  for (double v : rotation.m) {
    if (!std::isfinite(v)) throw_input("rotation has non-finite entries");
  }
  const double det = rotation.determinant();
  if (det < 0.0) throw_input("improper rotation (determinant " + std::to_string(det) + ")");
  const double err = rotation.orthonormality_error();
  if (err > tolerance) {
    std::ostringstream os;
    os << "rotation not orthonormal (|R^T R - I| = " << err << ", tolerance " << tolerance << ")";
    throw_input(os.str());
  }
  // Newton iteration for the polar factor; converges quadratically this close.
  Mat3 x = rotation;
  for (int i = 0; i < 8 && x.orthonormality_error() > 1e-15; ++i) {
    const Mat3 it = inverse_transpose(x);
    for (std::size_t k = 0; k < 9; ++k) x.m[k] = 0.5 * (x.m[k] + it.m[k]);
  }
  return x;
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (rotation.determinant() < 0.0) throw_geometry("improper rotation");
  if (rotation.orthonormality_error() > 1e-6) throw_geometry("rotation not orthonormal within 1e-6");
  if (!translation.finite()) throw_geometry("translation not finite");
}

RigidTransform RigidTransform::from_row_major_3x4(std::span<const double, 12> rows, double tolerance) {
  Mat3 r;
  r.m = {rows[0], rows[1], rows[2], rows[4], rows[5], rows[6], rows[8], rows[9], rows[10]};
  const Vec3 t{rows[3], rows[7], rows[11]};
  if (!t.finite()) throw_input("translation has non-finite entries");
  return RigidTransform(orthonormalize(r, tolerance), t);
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  RigidTransform out;
  out.rotation_ = rotation_ * rhs.rotation_;
  out.translation_ = rotation_ * rhs.translation_ + translation_;
  return out;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation_ = rotation_.transposed();
  out.translation_ = (out.rotation_ * translation_) * -1.0;
  return out;
}

std::array<double, 12> RigidTransform::row_major_3x4() const {
  const auto& r = rotation_;
  const auto& t = translation_;
  return {r(0, 0), r(0, 1), r(0, 2), t.x, r(1, 0), r(1, 1), r(1, 2), t.y, r(2, 0), r(2, 1), r(2, 2), t.z};
}

const char* frame_name(Frame f) { return f == Frame::Lidar ? "L" : "W"; }

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw_input("camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw_input("camera image size must be positive");
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw_input("camera principal point not finite");
}

double Aabb3::volume() const {
  const Vec3 e = extent();
  return std::max(0.0, e.x) * std::max(0.0, e.y) * std::max(0.0, e.z);
}

void Aabb3::expand(const Vec3& p) {
  min.x = std::min(min.x, p.x);
  min.y = std::min(min.y, p.y);
  min.z = std::min(min.z, p.z);
  max.x = std::max(max.x, p.x);
  max.y = std::max(max.y, p.y);
  max.z = std::max(max.z, p.z);
}

void Aabb3::expand(const Aabb3& b) {
  expand(b.min);
  expand(b.max);
}

std::optional<Pixel> project_point(const Vec3& p, const CameraModel& cam) {
  const Vec3 c = cam.extrinsics.apply(p);
  if (!(c.z > kMinProjectionDepth)) return std::nullopt;
  return Pixel{cam.fx * c.x / c.z + cam.cx, cam.fy * c.y / c.z + cam.cy};
}

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t, Frame target) {
  PointCloud out;
  out.frame = target;
  out.points.reserve(cloud.points.size());
  for (const Vec3& p : cloud.points) out.points.push_back(t.apply(p));
  return out;
}

Aabb3 fit_aabb(std::span<const Vec3> points, Frame frame) {
  if (points.empty()) throw_geometry("empty cluster");
  Aabb3 box{points.front(), points.front(), frame};
  for (const Vec3& p : points.subspan(1)) box.expand(p);
  return box;
}

const char* overlap_metric_name(OverlapMetric m) { return m == OverlapMetric::Iou ? "iou" : "min_ratio"; }

double intersection_volume(const Aabb3& a, const Aabb3& b) {
  const double dx = std::min(a.max.x, b.max.x) - std::max(a.min.x, b.min.x);
  const double dy = std::min(a.max.y, b.max.y) - std::max(a.min.y, b.min.y);
  const double dz = std::min(a.max.z, b.max.z) - std::max(a.min.z, b.min.z);
  if (dx <= 0.0 || dy <= 0.0 || dz <= 0.0) return 0.0;
  return dx * dy * dz;
}

double overlap_ratio(const Aabb3& a, const Aabb3& b, OverlapMetric metric) {
  if (a.frame != b.frame) {
    throw_geometry(std::string("overlap_ratio frame mismatch: ") + frame_name(a.frame) + " vs " +
                   frame_name(b.frame));
  }
  const double inter = intersection_volume(a, b);
  if (inter <= 0.0) return 0.0;
  const double va = a.volume();
  const double vb = b.volume();
  const double denom = metric == OverlapMetric::Iou ? va + vb - inter : std::min(va, vb);
  if (denom <= 0.0) return 0.0;
  return std::clamp(inter / denom, 0.0, 1.0);
}

}  // namespace box3d
