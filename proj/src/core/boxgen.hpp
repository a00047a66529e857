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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "core/detection.hpp"
#include "core/geometry.hpp"

namespace box3d {

/// Labeled point set of one object observation.
struct Cluster {
  std::vector<std::uint32_t> indices;  // into the source cloud; may be empty for merged world clusters
  std::vector<Vec3> points;
  Frame frame = Frame::Lidar;
  int class_id = 0;
  double confidence = 0.0;
};

/// Layer I output for one scan; clusters[i] is fitted by boxes[i].
struct ScanDetections {
  std::int64_t scan_id = 0;
  std::vector<Cluster> clusters;
  std::vector<Aabb3> boxes;
};

inline constexpr std::int32_t kBackground = -1;

/// Per-point instance label (index into `detections`) or kBackground. A point
/// contested by several masks goes to the earliest detection.
std::vector<std::int32_t> label_points(const PointCloud& scan, const CameraModel& cam,
                                       std::span<const Detection2D> detections);

/// Connected components under "distance <= tolerance", smaller components
/// dropped. Indices ascending within a cluster; clusters by descending size,
/// ties by smallest index.
std::vector<std::vector<std::uint32_t>> euclidean_cluster(std::span<const Vec3> points, double tolerance,
                                                          std::size_t min_size);

/// Largest cluster (ties: smallest contained index).
std::optional<std::vector<std::uint32_t>> select_object_cluster(
    std::span<const std::vector<std::uint32_t>> clusters);

struct BoxGenOptions {
  double tolerance = 0.5;
  std::size_t min_size = 5;
};

ScanDetections generate_boxes(const PointCloud& scan, const CameraModel& cam,
                              std::span<const Detection2D> detections, const BoxGenOptions& options,
                              std::int64_t scan_id = 0);

}  // namespace box3d
