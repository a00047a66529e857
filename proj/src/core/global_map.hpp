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

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "core/boxgen.hpp"
#include "core/geometry.hpp"
#include "core/registry.hpp"
#include "core/voxel.hpp"

namespace box3d {

/// Accumulated world cloud, append-only, bucketed by voxels of side r.
class GlobalMap {
 public:
  /// `leaf` > 0 keeps at most one point per leaf voxel; 0 disables it.
  explicit GlobalMap(double voxel_side = 0.2, double leaf = 0.0);

  /// Returns the number of points appended.
  std::size_t integrate_scan(const PointCloud& scan_w, std::int64_t scan_id = 0);

  const std::vector<Vec3>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  std::int64_t source_scan(std::size_t i) const { return source_scan_[i]; }
  double voxel_side() const { return side_; }
  double leaf() const { return leaf_; }

  /// Map indices in one voxel (ascending) with copies of their points.
  struct Bucket {
    std::vector<std::uint32_t> indices;
    std::vector<Vec3> points;
  };

  /// nullptr for an empty voxel.
  const Bucket* bucket(const VoxelKey& key) const;
  std::size_t bucket_count() const { return index_.size(); }

  /// Appends to `out` every map point q with |q - p|_inf <= r/2, probing the
  /// <= 8 voxels that overlap the cube. Only indices >= `from` are reported.
  void cube_query(const Vec3& p, std::vector<std::uint32_t>& out, std::uint32_t from = 0) const;

  /// Calls f(index, point) for every map point the cube query would report.
  template <typename F>
  void for_each_in_cube(const Vec3& p, F&& f, std::uint32_t from = 0) const {
    CubeProbe probe(*this);
    probe.visit(p, f, from);
  }

  /// Cube queries that reuse the bucket lookups of the previous query when
  /// both cubes start in the same voxel.
  class CubeProbe {
   public:
    explicit CubeProbe(const GlobalMap& map) : map_(map) {}

    static VoxelKey base_key(const GlobalMap& map, const Vec3& p) {
      const double half = 0.5 * map.side_;
      return voxel_key(p - Vec3{half, half, half}, map.side_);
    }

    template <typename F>
    void visit(const Vec3& p, F&& f, std::uint32_t from = 0) {
      const double half = 0.5 * map_.side_;
      const VoxelKey lo = base_key(map_, p);
      const VoxelKey hi = voxel_key(p + Vec3{half, half, half}, map_.side_);
      if (!valid_ || !(lo == lo_) || !(hi == hi_)) {
        lo_ = lo;
        hi_ = hi;
        valid_ = true;
        count_ = 0;
        for (std::int64_t ix = lo.ix; ix <= hi.ix; ++ix)
          for (std::int64_t iy = lo.iy; iy <= hi.iy; ++iy)
            for (std::int64_t iz = lo.iz; iz <= hi.iz; ++iz) {
              const Bucket* b = map_.bucket({ix, iy, iz});
              if (b != nullptr && count_ < buckets_.size()) buckets_[count_++] = b;
            }
      }
      for (std::size_t k = 0; k < count_; ++k) {
        const Bucket* b = buckets_[k];
        const auto first = std::lower_bound(b->indices.begin(), b->indices.end(), from) - b->indices.begin();
        for (auto i = static_cast<std::size_t>(first); i < b->indices.size(); ++i) {
          if ((b->points[i] - p).max_abs() <= half) f(b->indices[i], b->points[i]);
        }
      }
    }

   private:
    const GlobalMap& map_;
    VoxelKey lo_;
    VoxelKey hi_;
    bool valid_ = false;
    std::array<const Bucket*, 27> buckets_{};  // 2 voxels per axis, 3 under rounding
    std::size_t count_ = 0;
  };

 private:
  double side_;
  double leaf_;
  std::vector<Vec3> points_;
  std::vector<std::int64_t> source_scan_;
  std::unordered_map<VoxelKey, Bucket, VoxelKeyHash> index_;
  std::unordered_set<VoxelKey, VoxelKeyHash> leaf_occupied_;
};

/// Map points inside the side-r cube around any cluster point, ascending by
/// map index. Indices of the result are map indices.
Cluster refine_cluster(const GlobalMap& map, const Cluster& cluster);

/// Centroid; throws Geometry "empty cluster" on empty input.
Vec3 localize(const Cluster& cluster);

struct RefineOptions {
  int refresh_period = 10;  // refresh untouched instances every K scans; 0 = never
  bool to_fixpoint = false;
};

/// Refines one registry instance against the map. Work already done on
/// previous calls (neighborhoods probed up to the cached map size) is not
/// repeated; the result equals refine_cluster on the current cluster.
/// Returns the number of map points newly added to the cluster.
std::size_t refine_instance(const GlobalMap& map, ObjectRegistry& registry, ObjectId id);

/// Refines the instances touched by the last pair_and_merge, or every
/// instance when `refresh_all`. Returns the refined ids.
std::vector<ObjectId> refine_registry(const GlobalMap& map, ObjectRegistry& registry, const RefineOptions& options,
                                      bool refresh_all);

}  // namespace box3d
