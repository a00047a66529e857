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
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "core/boxgen.hpp"
#include "core/geometry.hpp"
#include "core/point_set.hpp"
#include "core/voxel.hpp"

namespace box3d {

struct Pose {
  std::int64_t scan_id = 0;
  RigidTransform T_WL;  // LiDAR -> world
};

/// Clusters moved to W; boxes are re-fit from the moved points, never
/// corner-transformed.
ScanDetections to_world(const ScanDetections& scan_dets, const Pose& pose);

using ObjectId = std::int64_t;

/// Progress of global-map refinement for one instance. When valid, the first
/// map_index.size() cluster points are the map points map_index[i]
/// (ascending), and any later points are observations merged since.
struct RefineCache {
  bool valid = false;
  std::vector<std::uint32_t> map_index;
  std::vector<std::uint8_t> probed;  // neighborhood searched against map[0, watermark)
  std::size_t watermark = 0;

  std::size_t refined_count() const { return valid ? map_index.size() : 0; }
};

struct ObjectInstance {
  ObjectId object_id = 0;
  int class_id = 0;
  double best_confidence = 0.0;
  Cluster cluster;  // frame W
  Aabb3 box;        // fit_aabb(cluster.points)
  int observation_count = 1;
  std::int64_t last_seen_scan = 0;
  RefineCache refine;
};

struct SnapshotEntry {
  ObjectId object_id = 0;
  int class_id = 0;
  Aabb3 box;
  Vec3 centroid;
  int observation_count = 0;
  std::size_t point_count = 0;
};

enum class RegistryIndex { SpatialHash, LinearScan };

struct MergeOptions {
  OverlapMetric metric = OverlapMetric::MinRatio;
  double threshold = 0.3;
  bool class_agnostic = false;
  RegistryIndex index = RegistryIndex::SpatialHash;
};

struct MergeOutcome {
  ObjectId object_id = 0;
  bool merged = false;
};

/// Unique world-frame objects. Single writer; scans are applied in order.
class ObjectRegistry {
 public:
  explicit ObjectRegistry(MergeOptions options = {});

  /// Pairs each new detection with its best same-class instance (merging when
  /// the overlap exceeds the threshold, else inserting), then merges any
  /// instance pairs that now exceed it until none do; the lower id survives.
  /// Outcome ids refer to the instance each detection ended up in.
  std::vector<MergeOutcome> pair_and_merge(const ScanDetections& world_dets);

  std::vector<SnapshotEntry> snapshot() const;

  const std::map<ObjectId, ObjectInstance>& instances() const { return instances_; }
  const ObjectInstance* find(ObjectId id) const;
  std::size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }
  ObjectId next_id() const { return next_id_; }
  const MergeOptions& options() const { return options_; }

  /// Instances created or merged by the last pair_and_merge.
  const std::vector<ObjectId>& touched() const { return touched_; }

  /// Layer III hook: replace the instance cluster with the map points listed in
  /// `cache.map_index` and refit its box.
  void apply_refinement(ObjectId id, RefineCache cache, std::span<const Vec3> map_points);

  /// Overlap evaluations performed so far (candidate search cost).
  std::uint64_t overlap_evaluations() const { return overlap_evaluations_; }

 private:
  struct Slot {
    PointSet points;
    VoxelKey cell;
    bool dirty = false;
  };

  double ratio(const Aabb3& a, const Aabb3& b) const;
  bool class_compatible(int a, int b) const { return options_.class_agnostic || a == b; }
  std::vector<ObjectId> candidates(const Aabb3& box) const;
  ObjectId insert(const Cluster& cluster, const Aabb3& box, std::int64_t scan_id);
  void absorb_observation(ObjectId id, const Cluster& cluster, const Aabb3& box, std::int64_t scan_id);
  void merge_instances(ObjectId keep, ObjectId drop);
  void transitive_pass();
  void hash_insert(ObjectId id);
  void hash_erase(ObjectId id);
  void hash_update(ObjectId id);
  void rebuild_hash(double cell);

  MergeOptions options_;
  std::map<ObjectId, ObjectInstance> instances_;
  std::unordered_map<ObjectId, Slot> slots_;
  ObjectId next_id_ = 0;
  std::vector<ObjectId> touched_;

  double cell_ = 0.0;
  Vec3 max_extent_;  // per-axis bound on every hashed box extent
  std::unordered_map<VoxelKey, std::vector<ObjectId>, VoxelKeyHash> grid_;
  mutable std::uint64_t overlap_evaluations_ = 0;
};

}  // namespace box3d
