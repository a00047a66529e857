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
#include <string>
#include <vector>

#include "core/dataset_io.hpp"
#include "core/geometry.hpp"

namespace box3d {

enum class SurfaceSampling {
  Jittered,  // one uniform sample per spacing cell per face, fresh every scan
  Grid,      // lattice nodes at multiples of the spacing, identical every scan
};

struct SynthObject {
  Aabb3 box;  // frame W
  int class_id = 2;
  bool detectable = true;  // false: never appears in any detection record
};

struct SynthSpec {
  std::vector<SynthObject> objects;  // explicit layout; empty: `object_count` random cuboids
  int object_count = 3;
  Vec3 min_size{1.5, 1.2, 1.0};
  Vec3 max_size{3.0, 2.0, 1.8};
  double min_gap = 1.5;  // free space between random cuboids
  int class_id = 2;      // class of random cuboids
  std::vector<std::size_t> undetected_objects;  // indices into the final layout, never detected

  int scans = 10;
  double step = 0.5;            // forward motion along +x per scan
  double yaw_amplitude = 0.0;   // radians
  double sensor_height = 1.73;  // LiDAR origin above the ground plane z = 0

  double spacing = 0.05;
  SurfaceSampling sampling = SurfaceSampling::Jittered;
  double noise_sigma = 0.0;  // per-coordinate Gaussian noise on LiDAR points
  int clutter_points = 200;  // static background points, kept > 1 m from every object

  double dropout_rate = 0.0;                 // fraction of scans without a detection record
  std::vector<std::int64_t> withheld_scans;  // additionally without a record
  double mask_coverage = 1.0;                // silhouette area fraction kept in each mask
  DetectionMode mode = DetectionMode::Decoded;
  double confidence = 0.9;
  std::uint64_t seed = 1;
};

struct SynthResult {
  fs::path manifest_path;
  fs::path ground_truth_path;
  std::vector<GroundTruthBox> ground_truth;
  std::vector<std::int64_t> scans_without_detections;
  std::vector<std::string> warnings;
};

/// 1242 x 375 pinhole camera looking along LiDAR +x.
CameraModel synthetic_camera();

/// Writes calib.txt, poses.txt, manifest.txt, gt.txt, scans/, detections/
/// and (raw mode) protos/ under `out_dir`. Same parameters and seed give identical
/// bytes. Throws Config on invalid parameters.
SynthResult generate_synthetic_sequence(const SynthSpec& spec, const fs::path& out_dir);

}  // namespace box3d
