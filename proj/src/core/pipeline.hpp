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

#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/dataset_io.hpp"
#include "core/eval.hpp"
#include "core/global_map.hpp"
#include "core/registry.hpp"

namespace box3d {

/// Wall time of one scan step, milliseconds; layer times never exceed total.
struct ScanTiming {
  double layer1_ms = 0.0;
  double layer2_ms = 0.0;
  double layer3_ms = 0.0;
  double total_ms = 0.0;
};

/// The three layers over a scan sequence: detections to per-scan boxes,
/// registry pairing in W, global-map refinement. Scans are applied in order.
class Pipeline {
 public:
  Pipeline(RunConfig config, CameraModel camera);

  /// `detections` null means the detector produced nothing for this scan; the
  /// scan is still integrated into the map.
  ScanTiming process_scan(const PointCloud& scan_l, const Pose& pose, const FrameDetections* detections);

  const RunConfig& config() const { return config_; }
  const CameraModel& camera() const { return camera_; }
  const ObjectRegistry& registry() const { return registry_; }
  const GlobalMap& map() const { return map_; }
  const TimingReport& timing() const { return timing_; }
  const std::vector<ScanTiming>& scan_timings() const { return scan_timings_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

  /// Registry export header: the effective configuration.
  std::vector<std::string> provenance() const;
  /// Map points in white, then object points colored per object id.
  std::vector<ColoredPoint> colored_points() const;

 private:
  RunConfig config_;
  CameraModel camera_;
  ObjectRegistry registry_;
  GlobalMap map_;
  TimingReport timing_;
  std::vector<ScanTiming> scan_timings_;
  std::vector<std::string> warnings_;
};

/// Reads and applies one scan at a time, in manifest order. Reader errors
/// abort with the offending path; a scan without a detection record counts
/// as zero detections.
Pipeline run_pipeline(const fs::path& manifest_path, const RunConfig& config);

}  // namespace box3d
