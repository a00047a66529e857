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

#include "core/pipeline.hpp"

#include <chrono>
#include <unordered_set>

#include "core/boxgen.hpp"
#include "core/error.hpp"

namespace box3d {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

}  // namespace

Pipeline::Pipeline(RunConfig config, CameraModel camera)
    : config_(std::move(config)),
      camera_(std::move(camera)),
      registry_((config_.validate(), config_.merge)),
      map_(config_.voxel_r, config_.map_leaf) {
  camera_.validate();
}

ScanTiming Pipeline::process_scan(const PointCloud& scan_l, const Pose& pose, const FrameDetections* detections) {
  if (scan_l.frame != Frame::Lidar) throw_geometry("process_scan expects a LiDAR-frame scan");
  ScanTiming t;
  const auto t0 = Clock::now();

  // Layer I: detections -> per-scan clusters and boxes (frame L).
  std::vector<Detection2D> decoded;
  const std::vector<Detection2D>* dets = &decoded;
  if (detections != nullptr) {
    if (detections->frame_width != camera_.width || detections->frame_height != camera_.height) {
      throw_input("detection frame " + std::to_string(detections->frame_width) + "x" +
                  std::to_string(detections->frame_height) + " does not match camera " +
                  std::to_string(camera_.width) + "x" + std::to_string(camera_.height));
    }
    if (detections->protos) {
      decoded = decode_detections(detections->raw, *detections->protos, camera_.width, camera_.height,
                                  config_.decode);
    } else {
      dets = &detections->decoded;
    }
  }
  const ScanDetections scan_dets = generate_boxes(scan_l, camera_, *dets, config_.boxgen, pose.scan_id);
  const auto t1 = Clock::now();

  // Layer II: move to W and pair with the registry.
  registry_.pair_and_merge(to_world(scan_dets, pose));
  const auto t2 = Clock::now();

  // Map maintenance belongs to no layer.
  map_.integrate_scan(transform_cloud(scan_l, pose.T_WL, Frame::World), pose.scan_id);
  const auto t3 = Clock::now();

  // Layer III: absorb map points around touched (or, periodically, all)
  // instances.
  auto t4 = t3;
  if (config_.refine) {
    const int k = config_.refine_opts.refresh_period;
    const bool refresh_all = k > 0 && (timing_.scans + 1) % static_cast<std::size_t>(k) == 0;
    refine_registry(map_, registry_, config_.refine_opts, refresh_all);
    t4 = Clock::now();
  }

  t.layer1_ms = elapsed_ms(t0, t1);
  t.layer2_ms = elapsed_ms(t1, t2);
  t.layer3_ms = elapsed_ms(t3, t4);
  t.total_ms = elapsed_ms(t0, t4);
  timing_.layer1.add(t.layer1_ms);
  timing_.layer2.add(t.layer2_ms);
  timing_.layer3.add(t.layer3_ms);
  timing_.total.add(t.total_ms);
  ++timing_.scans;
  scan_timings_.push_back(t);
  return t;
}

std::vector<std::string> Pipeline::provenance() const {
  std::vector<std::string> out;
  for (const auto& kv : config_.dump()) out.push_back("config " + kv);
  out.push_back("scans " + std::to_string(timing_.scans));
  out.push_back("map_points " + std::to_string(map_.size()));
  return out;
}

std::vector<ColoredPoint> Pipeline::colored_points() const {
  std::unordered_set<Vec3, PointKeyHash> object_points;
  for (const auto& [id, inst] : registry_.instances()) object_points.insert(inst.cluster.points.begin(), inst.cluster.points.end());
  std::vector<ColoredPoint> out;
  out.reserve(map_.size() + object_points.size());
  for (const Vec3& p : map_.points()) {
    if (!object_points.count(p)) out.push_back({p, {255, 255, 255}});
  }
  for (const auto& [id, inst] : registry_.instances()) {
    const auto rgb = object_color(id);
    for (const Vec3& p : inst.cluster.points) out.push_back({p, rgb});
  }
  return out;
}

Pipeline run_pipeline(const fs::path& manifest_path, const RunConfig& config) {
  config.validate();
  const SequenceManifest manifest = read_manifest(manifest_path);
  const CameraModel camera = read_calibration(manifest.calibration_path);
  if (manifest.frame_width != camera.width || manifest.frame_height != camera.height) {
    throw_input(manifest_path.string() + ": frame " + std::to_string(manifest.frame_width) + "x" +
                std::to_string(manifest.frame_height) + " does not match calibration size " +
                std::to_string(camera.width) + "x" + std::to_string(camera.height));
  }
  const std::vector<Pose> poses = read_poses(manifest.poses_path);
  Pipeline pipeline(config, camera);
  for (const ManifestEntry& e : manifest.entries) {
    if (e.pose_row >= poses.size()) {
      throw_input(manifest_path.string() + ": scan " + std::to_string(e.scan_id) + " references pose row " +
                  std::to_string(e.pose_row) + " but " + manifest.poses_path.string() + " has " +
                  std::to_string(poses.size()) + " rows");
    }
    ScanReadResult scan = read_scan(e.scan_path);
    if (scan.dropped_nonfinite > 0) {
      pipeline.add_warning(e.scan_path.string() + ": dropped " + std::to_string(scan.dropped_nonfinite) +
                           " non-finite points");
    }
    std::optional<FrameDetections> dets;
    if (e.detections_path) dets = read_detections(*e.detections_path, manifest.mode, e.protos_path);
    pipeline.process_scan(scan.cloud, Pose{e.scan_id, poses[e.pose_row].T_WL}, dets ? &*dets : nullptr);
  }
  return pipeline;
}

}  // namespace box3d
