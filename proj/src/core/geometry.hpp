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

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace box3d {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr bool operator==(const Vec3&) const = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
  double max_abs() const { return std::max({std::abs(x), std::abs(y), std::abs(z)}); }
  Vec3 cwise_max(const Vec3& o) const { return {std::max(x, o.x), std::max(y, o.y), std::max(z, o.z)}; }
};

/// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return Mat3{}; }
  static Mat3 rotation_z(double yaw);

  double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }
  double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }

  Mat3 operator*(const Mat3& o) const;
  Vec3 operator*(const Vec3& v) const;
  Mat3 transposed() const;
  double determinant() const;
  /// Largest absolute entry of R^T R - I.
  double orthonormality_error() const;
};

/// Nearest rotation to `rotation` (polar factor). Throws when the input is a
/// reflection ("improper rotation") or farther than `tolerance` from
/// orthonormal.
Mat3 orthonormalize(const Mat3& rotation, double tolerance);

/// Rotation + translation; rotation is orthonormal with det +1 (checked at 1e-6).
class RigidTransform {
 public:
  RigidTransform() = default;
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform translation_only(const Vec3& t) { return RigidTransform(Mat3::identity(), t); }
  /// 12 reals, row-major [R|t] 3x4. Rotation is re-orthonormalized when it is
  /// within `tolerance`; otherwise an error is raised.
  static RigidTransform from_row_major_3x4(std::span<const double, 12> rows, double tolerance = 1e-3);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  RigidTransform operator*(const RigidTransform& rhs) const;  // this ∘ rhs
  RigidTransform inverse() const;
  std::array<double, 12> row_major_3x4() const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

enum class Frame : std::uint8_t { Lidar, World };

const char* frame_name(Frame f);

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

struct CameraModel {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;
  RigidTransform extrinsics;  // LiDAR -> camera

  void validate() const;
};

struct PointCloud {
  std::vector<Vec3> points;
  Frame frame = Frame::Lidar;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct Aabb3 {
  Vec3 min;
  Vec3 max;
  Frame frame = Frame::Lidar;

  double volume() const;
  Vec3 center() const { return (min + max) * 0.5; }
  Vec3 extent() const { return max - min; }
  double diagonal() const { return extent().norm(); }
  bool contains(const Vec3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z && p.z <= max.z;
  }
  void expand(const Vec3& p);
  void expand(const Aabb3& b);
  bool operator==(const Aabb3&) const = default;
};

/// Minimum camera-frame depth for a projectable point.
inline constexpr double kMinProjectionDepth = 1e-6;

/// Pinhole projection K [R|t] p. Empty when the point is at or behind the
/// image plane. No clipping to image bounds.
std::optional<Pixel> project_point(const Vec3& p, const CameraModel& cam);

inline Vec3 transform_point(const Vec3& p, const RigidTransform& t) { return t.apply(p); }

/// Point-wise transform; index i of the output is index i of the input.
PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t, Frame target);

/// Componentwise min/max box. Throws Geometry "empty cluster" on empty input.
Aabb3 fit_aabb(std::span<const Vec3> points, Frame frame);

enum class OverlapMetric { Iou, MinRatio };

const char* overlap_metric_name(OverlapMetric m);

double intersection_volume(const Aabb3& a, const Aabb3& b);

/// iou: |a∩b| / |a∪b|. min_ratio: |a∩b| / min(|a|, |b|). Zero-volume operands
/// give 0. Throws on frame mismatch.
double overlap_ratio(const Aabb3& a, const Aabb3& b, OverlapMetric metric);

}  // namespace box3d
