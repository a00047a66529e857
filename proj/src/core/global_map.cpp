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

#include "core/global_map.hpp"

#include <algorithm>

#include "core/error.hpp"

namespace box3d {

GlobalMap::GlobalMap(double voxel_side, double leaf) : side_(voxel_side), leaf_(leaf) {
  if (!(voxel_side > 0.0)) throw_config("voxel side r must be positive");
  if (!(leaf >= 0.0)) throw_config("map leaf size must be >= 0");
}

std::size_t GlobalMap::integrate_scan(const PointCloud& scan_w, std::int64_t scan_id) {
  if (scan_w.frame != Frame::World) throw_geometry("integrate_scan expects a world-frame cloud");
  std::size_t added = 0;
  for (const Vec3& p : scan_w.points) {
    if (leaf_ > 0.0 && !leaf_occupied_.insert(voxel_key(p, leaf_)).second) continue;
    const auto idx = static_cast<std::uint32_t>(points_.size());
    points_.push_back(p);
    source_scan_.push_back(scan_id);
    Bucket& b = index_[voxel_key(p, side_)];
    b.indices.push_back(idx);
    b.points.push_back(p);
    ++added;
  }
  return added;
}

const GlobalMap::Bucket* GlobalMap::bucket(const VoxelKey& key) const {
  const auto it = index_.find(key);
  return it == index_.end() ? nullptr : &it->second;
}

void GlobalMap::cube_query(const Vec3& p, std::vector<std::uint32_t>& out, std::uint32_t from) const {
  for_each_in_cube(p, [&](std::uint32_t i, const Vec3&) { out.push_back(i); }, from);
}

namespace {

void sort_unique(std::vector<std::uint32_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

Cluster refine_cluster(const GlobalMap& map, const Cluster& cluster) {
  if (cluster.frame != Frame::World) throw_geometry("refine_cluster expects a world-frame cluster");
  std::vector<std::uint32_t> found;
  for (const Vec3& p : cluster.points) map.cube_query(p, found);
  sort_unique(found);
  Cluster out;
  out.frame = Frame::World;
  out.class_id = cluster.class_id;
  out.confidence = cluster.confidence;
  out.indices = found;
  out.points.reserve(found.size());
  for (std::uint32_t i : found) out.points.push_back(map.points()[i]);
  return out;
}

Vec3 localize(const Cluster& cluster) {
  if (cluster.points.empty()) throw_geometry("empty cluster");
  Vec3 sum;
  for (const Vec3& p : cluster.points) sum += p;
  return sum / static_cast<double>(cluster.points.size());
}

std::size_t refine_instance(const GlobalMap& map, ObjectRegistry& registry, ObjectId id) {
  const ObjectInstance* inst = registry.find(id);
  if (inst == nullptr) return 0;
  const auto& pts = inst->cluster.points;
  const auto& map_pts = map.points();
  const RefineCache& old = inst->refine;
  const std::size_t prefix = old.refined_count();

  // Per-thread visit stamps over map indices; a fresh epoch per call.
  thread_local std::vector<std::uint32_t> stamp;
  thread_local std::uint32_t epoch = 0;
  if (stamp.size() < map.size()) stamp.resize(map.size(), 0);
  if (++epoch == 0) {
    std::fill(stamp.begin(), stamp.end(), 0);
    epoch = 1;
  }
  const std::uint32_t seen = epoch;
  for (std::size_t k = 0; k < prefix; ++k) stamp[old.map_index[k]] = seen;

  std::vector<std::uint32_t> found;  // new map indices, unique
  std::vector<std::uint32_t> exact;  // map copies of points probed in this pass
  std::vector<std::uint32_t> hits;
  GlobalMap::CubeProbe probe(map);
  auto probe_all = [&](const Vec3& p) {
    probe.visit(p, [&](std::uint32_t h, const Vec3& q) {
      if (stamp[h] != seen) {
        stamp[h] = seen;
        found.push_back(h);
      }
      if (q == p) exact.push_back(h);
    });
  };

  // Probe grouped by cube base voxel so consecutive queries share buckets.
  std::vector<std::pair<VoxelKey, const Vec3*>> pending;
  pending.reserve(pts.size() - prefix);
  for (std::size_t i = prefix; i < pts.size(); ++i) {
    pending.emplace_back(GlobalMap::CubeProbe::base_key(map, pts[i]), &pts[i]);
  }
  for (std::size_t k = 0; k < prefix; ++k) {
    if (!old.probed[k]) pending.emplace_back(GlobalMap::CubeProbe::base_key(map, pts[k]), &pts[k]);
  }
  std::sort(pending.begin(), pending.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [key, p] : pending) probe_all(*p);

  // Map points appended since the last pass can only be reached from the
  // already-probed prefix through their own cube.
  const std::size_t watermark = old.valid ? old.watermark : map.size();
  if (prefix > 0 && watermark < map.size()) {
    const double half = 0.5 * map.voxel_side();
    Aabb3 reach = inst->box;
    reach.min = reach.min - Vec3{half, half, half};
    reach.max = reach.max + Vec3{half, half, half};
    for (std::size_t q = watermark; q < map.size(); ++q) {
      if (stamp[q] == seen || !reach.contains(map_pts[q])) continue;
      hits.clear();
      map.cube_query(map_pts[q], hits);
      for (std::uint32_t h : hits) {
        const auto it = std::lower_bound(old.map_index.begin(), old.map_index.end(), h);
        if (it != old.map_index.end() && *it == h && old.probed[static_cast<std::size_t>(it - old.map_index.begin())]) {
          stamp[q] = seen;
          found.push_back(static_cast<std::uint32_t>(q));
          break;
        }
      }
    }
  }

  std::sort(found.begin(), found.end());
  sort_unique(exact);
  RefineCache next;
  next.valid = true;
  next.watermark = map.size();
  next.map_index.resize(prefix + found.size());
  std::merge(old.map_index.begin(), old.map_index.begin() + static_cast<std::ptrdiff_t>(prefix), found.begin(),
             found.end(), next.map_index.begin());
  next.probed.resize(next.map_index.size());
  std::size_t o = 0;
  std::size_t e = 0;
  for (std::size_t k = 0; k < next.map_index.size(); ++k) {
    const std::uint32_t mi = next.map_index[k];
    while (o < prefix && old.map_index[o] < mi) ++o;
    while (e < exact.size() && exact[e] < mi) ++e;
    const bool in_prefix = o < prefix && old.map_index[o] == mi;
    const bool is_exact = e < exact.size() && exact[e] == mi;
    next.probed[k] = (in_prefix || is_exact) ? 1 : 0;
  }
  const std::size_t added = found.size();
  registry.apply_refinement(id, std::move(next), map_pts);
  return added;
}

std::vector<ObjectId> refine_registry(const GlobalMap& map, ObjectRegistry& registry, const RefineOptions& options,
                                      bool refresh_all) {
  std::vector<ObjectId> ids;
  if (refresh_all) {
    for (const auto& [id, _] : registry.instances()) ids.push_back(id);
  } else {
    ids = registry.touched();
  }
  for (ObjectId id : ids) {
    std::size_t added = refine_instance(map, registry, id);
    while (options.to_fixpoint && added > 0) added = refine_instance(map, registry, id);
  }
  return ids;
}

}  // namespace box3d
