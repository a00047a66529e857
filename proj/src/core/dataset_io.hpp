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
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/detection.hpp"
#include "core/geometry.hpp"
#include "core/registry.hpp"

namespace box3d {

namespace fs = std::filesystem;

// ---- LiDAR scans: N x (x, y, z, reflectance) little-endian float32 ----------

struct ScanReadResult {
  PointCloud cloud;
  std::size_t dropped_nonfinite = 0;
};

ScanReadResult read_scan(const fs::path& path);
void write_scan(const fs::path& path, const PointCloud& cloud);

// ---- calibration ------------------------------------------------------------
//   K: fx fy cx cy
//   size: width height
//   Tr: r11 r12 r13 tx r21 r22 r23 ty r31 r32 r33 tz     (LiDAR -> camera)

CameraModel read_calibration(const fs::path& path);
void write_calibration(const fs::path& path, const CameraModel& cam);

/// KITTI object/raw `calib` file (P0..P3, R0_rect, Tr_velo_to_cam) composed
/// into one K [R|t]. `projection_key` selects the camera, e.g. "P2".
CameraModel convert_kitti_calibration(const fs::path& path, const std::string& projection_key, int width,
                                      int height);

// ---- poses: one row-major 3x4 T_WL per line, line i is scan i -------------

std::vector<Pose> read_poses(const fs::path& path);
void write_poses(const fs::path& path, const std::vector<Pose>& poses);

// ---- detection records ------------------------------------------------------

enum class DetectionMode { Decoded, Raw };

const char* detection_mode_name(DetectionMode m);

/// Per-frame detector input: decoded-mode detections, or raw head rows plus
/// their prototype set.
struct FrameDetections {
  int frame_width = 0;
  int frame_height = 0;
  std::vector<Detection2D> decoded;
  std::vector<RawDetection> raw;
  std::optional<PrototypeSet> protos;
};

/// Alternating false/true run lengths, row-major, starting with false.
std::vector<std::uint32_t> rle_encode(const BinaryMask& mask);
BinaryMask rle_decode(const std::vector<std::uint32_t>& runs, int width, int height);

inline constexpr std::size_t kPrototypeBlobBytes =
    static_cast<std::size_t>(kNumMaskWeights) * kPrototypeSize * kPrototypeSize * sizeof(float);

FrameDetections read_detections(const fs::path& path, DetectionMode mode,
                                const std::optional<fs::path>& protos_path = std::nullopt);
void write_decoded_detections(const fs::path& path, int frame_w, int frame_h,
                              const std::vector<Detection2D>& detections);
void write_raw_detections(const fs::path& path, int frame_w, int frame_h, const std::vector<RawDetection>& raw);
PrototypeSet read_prototypes(const fs::path& path);
void write_prototypes(const fs::path& path, const PrototypeSet& protos);

// ---- sequence manifest ------------------------------------------------------

struct ManifestEntry {
  std::int64_t scan_id = 0;
  fs::path scan_path;
  std::optional<fs::path> detections_path;  // absent: zero detections for this scan
  std::optional<fs::path> protos_path;      // raw mode only
  std::size_t pose_row = 0;
};

struct SequenceManifest {
  fs::path calibration_path;
  fs::path poses_path;
  int frame_width = 0;
  int frame_height = 0;
  DetectionMode mode = DetectionMode::Decoded;
  std::vector<ManifestEntry> entries;
};

/// Relative paths resolve against the manifest's directory; every referenced
/// path must exist.
SequenceManifest read_manifest(const fs::path& path);
/// Paths are written relative to the manifest directory when possible.
void write_manifest(const fs::path& path, const SequenceManifest& manifest);

// ---- registry export --------------------------------------------------------

/// Header comment lines (e.g. the effective configuration) followed by a
/// column header and one record per object, 6 decimals.
void write_registry(const fs::path& path, const std::vector<SnapshotEntry>& snapshot,
                    const std::vector<std::string>& header_comments = {});
std::string format_registry(const std::vector<SnapshotEntry>& snapshot,
                            const std::vector<std::string>& header_comments = {});
std::vector<SnapshotEntry> read_registry(const fs::path& path);

// ---- ground truth -----------------------------------------------------------

struct GroundTruthBox {
  std::optional<std::int64_t> scan_id;  // empty: global (whole-sequence) box
  int class_id = 0;
  Aabb3 box;
};

std::vector<GroundTruthBox> read_ground_truth(const fs::path& path);
void write_ground_truth(const fs::path& path, const std::vector<GroundTruthBox>& boxes);

/// "<detector class id> <ground-truth class id>" per line.
std::map<int, int> read_class_map(const fs::path& path);

// ---- PLY --------------------------------------------------------------------

struct ColoredPoint {
  Vec3 p;
  std::array<std::uint8_t, 3> rgb{255, 255, 255};
};

void write_ply(const fs::path& path, const std::vector<ColoredPoint>& points);
std::array<std::uint8_t, 3> object_color(ObjectId id);

}  // namespace box3d
