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

#include "core/registry.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "core/error.hpp"

namespace box3d {

ScanDetections to_world(const ScanDetections& scan_dets, const Pose& pose) {
  if (pose.scan_id != scan_dets.scan_id) {
    throw_input("pose scan_id " + std::to_string(pose.scan_id) + " does not match detections scan_id " +
                std::to_string(scan_dets.scan_id));
  }
  ScanDetections out;
  out.scan_id = scan_dets.scan_id;
  out.clusters.reserve(scan_dets.clusters.size());
  out.boxes.reserve(scan_dets.clusters.size());
  for (const Cluster& c : scan_dets.clusters) {
    Cluster w;
    w.indices = c.indices;
    w.frame = Frame::World;
    w.class_id = c.class_id;
    w.confidence = c.confidence;
    w.points.reserve(c.points.size());
    for (const Vec3& p : c.points) w.points.push_back(pose.T_WL.apply(p));
    out.boxes.push_back(fit_aabb(w.points, Frame::World));
    out.clusters.push_back(std::move(w));
  }
  return out;
}

ObjectRegistry::ObjectRegistry(MergeOptions options) : options_(options) {}

const ObjectInstance* ObjectRegistry::find(ObjectId id) const {
  const auto it = instances_.find(id);
  return it == instances_.end() ? nullptr : &it->second;
}

double ObjectRegistry::ratio(const Aabb3& a, const Aabb3& b) const {
  ++overlap_evaluations_;
  return overlap_ratio(a, b, options_.metric);
}

std::vector<SnapshotEntry> ObjectRegistry::snapshot() const {
  std::vector<SnapshotEntry> out;
  out.reserve(instances_.size());
  for (const auto& [id, inst] : instances_) {
    Vec3 sum;
    for (const Vec3& p : inst.cluster.points) sum += p;
    const double n = static_cast<double>(inst.cluster.points.size());
    out.push_back({id, inst.class_id, inst.box, n > 0 ? sum / n : Vec3{}, inst.observation_count,
                   inst.cluster.points.size()});
  }
  return out;
}

// --- spatial hash over box centers -------------------------------------------

void ObjectRegistry::rebuild_hash(double cell) {
  cell_ = cell;
  grid_.clear();
  max_extent_ = Vec3{};
  for (const auto& [id, inst] : instances_) {
    max_extent_ = max_extent_.cwise_max(inst.box.extent());
    Slot& s = slots_.at(id);
    s.cell = voxel_key(inst.box.center(), cell_);
    grid_[s.cell].push_back(id);
  }
}

void ObjectRegistry::hash_insert(ObjectId id) {
  if (options_.index != RegistryIndex::SpatialHash) return;
  const Aabb3& box = instances_.at(id).box;
  // Cell side must bound every stored diagonal so overlapping boxes have
  // centers in adjacent cells.
  if (box.diagonal() * (1.0 + 1e-6) >= cell_) {
    rebuild_hash(std::max(box.diagonal() * 1.5, 1e-3));  // includes `id`
    return;
  }
  max_extent_ = max_extent_.cwise_max(box.extent());
  Slot& s = slots_.at(id);
  s.cell = voxel_key(box.center(), cell_);
  grid_[s.cell].push_back(id);
}

void ObjectRegistry::hash_erase(ObjectId id) {
  if (options_.index != RegistryIndex::SpatialHash) return;
  const auto it = grid_.find(slots_.at(id).cell);
  if (it == grid_.end()) return;
  auto& v = it->second;
  v.erase(std::remove(v.begin(), v.end(), id), v.end());
  if (v.empty()) grid_.erase(it);
}

void ObjectRegistry::hash_update(ObjectId id) {
  hash_erase(id);
  hash_insert(id);
}

std::vector<ObjectId> ObjectRegistry::candidates(const Aabb3& box) const {
  std::vector<ObjectId> out;
  if (options_.index == RegistryIndex::LinearScan) {
    out.reserve(instances_.size());
    for (const auto& [id, _] : instances_) out.push_back(id);
    return out;
  }
  if (grid_.empty()) return out;
  // Overlap needs |center offset| < (extent_a + extent_b) / 2 on every axis,
  // and max_extent_ bounds extent_b. The slack absorbs center rounding.
  const Vec3 c = box.center();
  const Vec3 reach = (box.extent() + max_extent_) * (0.5 * (1.0 + 1e-6));
  const VoxelKey lo = voxel_key(c - reach, cell_), hi = voxel_key(c + reach, cell_);
  for (std::int64_t x = lo.ix; x <= hi.ix; ++x)
    for (std::int64_t y = lo.iy; y <= hi.iy; ++y)
      for (std::int64_t z = lo.iz; z <= hi.iz; ++z) {
        const auto it = grid_.find(VoxelKey{x, y, z});
        if (it != grid_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
      }
  std::sort(out.begin(), out.end());
  return out;
}

// --- mutation --------------------------------------------------------------

ObjectId ObjectRegistry::insert(const Cluster& cluster, const Aabb3& box, std::int64_t scan_id) {
  const ObjectId id = next_id_++;
  ObjectInstance inst;
  inst.object_id = id;
  inst.class_id = cluster.class_id;
  inst.best_confidence = cluster.confidence;
  inst.cluster.frame = Frame::World;
  inst.cluster.class_id = cluster.class_id;
  inst.cluster.confidence = cluster.confidence;
  inst.last_seen_scan = scan_id;
  Slot slot;
  slot.dirty = true;
  inst.cluster.points.reserve(cluster.points.size());
  slot.points.reserve(cluster.points.size());
  for (const Vec3& p : cluster.points) {
    if (slot.points.insert(p)) inst.cluster.points.push_back(p);
  }
  inst.box = box;
  inst.box.frame = Frame::World;
  instances_.emplace(id, std::move(inst));
  slots_.emplace(id, std::move(slot));
  hash_insert(id);
  return id;
}

void ObjectRegistry::absorb_observation(ObjectId id, const Cluster& cluster, const Aabb3& box,
                                        std::int64_t scan_id) {
  ObjectInstance& inst = instances_.at(id);
  Slot& slot = slots_.at(id);
  for (const Vec3& p : cluster.points) {
    if (slot.points.insert(p)) inst.cluster.points.push_back(p);
  }
  inst.box.expand(box);
  inst.observation_count += 1;
  inst.best_confidence = std::max(inst.best_confidence, cluster.confidence);
  inst.cluster.confidence = inst.best_confidence;
  inst.last_seen_scan = std::max(inst.last_seen_scan, scan_id);
  slot.dirty = true;
  hash_update(id);
}

void ObjectRegistry::merge_instances(ObjectId keep, ObjectId drop) {
  hash_erase(drop);
  ObjectInstance& a = instances_.at(keep);
  ObjectInstance& b = instances_.at(drop);
  Slot& sa = slots_.at(keep);
  for (const Vec3& p : b.cluster.points) {
    if (sa.points.insert(p)) a.cluster.points.push_back(p);
  }
  a.box.expand(b.box);
  a.observation_count += b.observation_count;
  a.best_confidence = std::max(a.best_confidence, b.best_confidence);
  a.cluster.confidence = a.best_confidence;
  a.last_seen_scan = std::max(a.last_seen_scan, b.last_seen_scan);
  a.refine = RefineCache{};  // point order no longer matches; refine from scratch
  sa.dirty = true;
  instances_.erase(drop);
  slots_.erase(drop);
  hash_update(keep);
}

void ObjectRegistry::transitive_pass() {
  for (;;) {
    std::optional<std::pair<ObjectId, ObjectId>> best;
    if (options_.index == RegistryIndex::LinearScan) {
      // First hit in (i, j) lexicographic order.
      for (auto i = instances_.begin(); i != instances_.end() && !best; ++i) {
        for (auto j = std::next(i); j != instances_.end(); ++j) {
          if (!class_compatible(i->second.class_id, j->second.class_id)) continue;
          if (ratio(i->second.box, j->second.box) > options_.threshold) {
            best = {i->first, j->first};
            break;
          }
        }
      }
    } else {
      // Only boxes changed since the last fixed point can form a new pair.
      for (const auto& [id, slot] : slots_) {
        if (!slot.dirty) continue;
        const ObjectInstance& inst = instances_.at(id);
        for (ObjectId other : candidates(inst.box)) {
          if (other == id) continue;
          const ObjectInstance& o = instances_.at(other);
          if (!class_compatible(inst.class_id, o.class_id)) continue;
          const std::pair<ObjectId, ObjectId> key{std::min(id, other), std::max(id, other)};
          if (best && key >= *best) continue;
          if (ratio(inst.box, o.box) > options_.threshold) best = key;
        }
      }
    }
    if (!best) break;
    merge_instances(best->first, best->second);
    for (ObjectId& t : touched_) {
      if (t == best->second) t = best->first;
    }
    touched_.push_back(best->first);
  }
  for (auto& [_, slot] : slots_) slot.dirty = false;
}

std::vector<MergeOutcome> ObjectRegistry::pair_and_merge(const ScanDetections& world_dets) {
  if (world_dets.clusters.size() != world_dets.boxes.size()) {
    throw_input("scan detections: clusters and boxes are not index-aligned");
  }
  touched_.clear();
  std::vector<MergeOutcome> outcomes;
  outcomes.reserve(world_dets.clusters.size());
  for (std::size_t d = 0; d < world_dets.clusters.size(); ++d) {
    const Cluster& c = world_dets.clusters[d];
    const Aabb3& box = world_dets.boxes[d];
    if (c.frame != Frame::World || box.frame != Frame::World) {
      throw_geometry("pair_and_merge expects world-frame detections");
    }
    if (c.points.empty()) continue;
    ObjectId best_id = -1;
    double best_ratio = -1.0;
    for (ObjectId id : candidates(box)) {
      const ObjectInstance& inst = instances_.at(id);
      if (!class_compatible(inst.class_id, c.class_id)) continue;
      const double r = ratio(box, inst.box);
      if (r > best_ratio) {  // candidates ascend, so ties keep the lower id
        best_ratio = r;
        best_id = id;
      }
    }
    if (best_id >= 0 && best_ratio > options_.threshold) {
      absorb_observation(best_id, c, box, world_dets.scan_id);
      outcomes.push_back({best_id, true});
    } else {
      outcomes.push_back({insert(c, box, world_dets.scan_id), false});
    }
    touched_.push_back(outcomes.back().object_id);
  }
  transitive_pass();
  // Re-point outcomes whose instance was absorbed by the transitive pass.
  for (std::size_t i = 0; i < outcomes.size(); ++i) outcomes[i].object_id = touched_[i];
  std::sort(touched_.begin(), touched_.end());
  touched_.erase(std::unique(touched_.begin(), touched_.end()), touched_.end());
  return outcomes;
}

void ObjectRegistry::apply_refinement(ObjectId id, RefineCache cache, std::span<const Vec3> map_points) {
  ObjectInstance& inst = instances_.at(id);
  Slot& slot = slots_.at(id);
  if (cache.map_index.empty()) return;

  std::vector<Vec3> points;
  points.reserve(cache.map_index.size());
  for (std::uint32_t mi : cache.map_index) points.push_back(map_points[mi]);

  if (!inst.refine.valid) {
    slot.points.clear();
    slot.points.insert(points.begin(), points.end());
  } else {
    // The old refined prefix stays. Pending observations leave the set and
    // newly referenced map points enter it.
    const std::size_t old_prefix = inst.refine.refined_count();
    for (std::size_t i = old_prefix; i < inst.cluster.points.size(); ++i) slot.points.erase(inst.cluster.points[i]);
    const auto& old_idx = inst.refine.map_index;
    std::size_t o = 0;
    for (std::size_t k = 0; k < cache.map_index.size(); ++k) {
      const std::uint32_t mi = cache.map_index[k];
      while (o < old_prefix && old_idx[o] < mi) ++o;
      if (!(o < old_prefix && old_idx[o] == mi)) slot.points.insert(points[k]);
    }
  }

  const Aabb3 old_box = inst.box;
  inst.cluster.points = std::move(points);
  inst.cluster.indices.clear();
  inst.box = fit_aabb(inst.cluster.points, Frame::World);
  inst.refine = std::move(cache);
  inst.refine.valid = true;
  if (!(inst.box == old_box)) {
    slot.dirty = true;
    hash_update(id);
  }
}

}  // namespace box3d
