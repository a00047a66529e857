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

#include "core/boxgen.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "core/error.hpp"
#include "core/voxel.hpp"

namespace box3d {

std::vector<std::int32_t> label_points(const PointCloud& scan, const CameraModel& cam,
                                       std::span<const Detection2D> detections) {
  for (const Detection2D& d : detections) {
    if (d.mask.width() != cam.width || d.mask.height() != cam.height) {
      throw_input("detection mask " + std::to_string(d.mask.width()) + "x" + std::to_string(d.mask.height()) +
                  " does not match camera " + std::to_string(cam.width) + "x" + std::to_string(cam.height));
    }
  }
  std::vector<std::int32_t> labels(scan.points.size(), kBackground);
  if (detections.empty()) return labels;

  // Detections listed per 32 px tile of their mask bounds, in input order, so
  // a pixel only tests masks that can contain it.
  constexpr int kTile = 32;
  const int tiles_x = (cam.width + kTile - 1) / kTile;
  const int tiles_y = (cam.height + kTile - 1) / kTile;
  std::vector<std::vector<std::int32_t>> tiles(static_cast<std::size_t>(tiles_x) * static_cast<std::size_t>(tiles_y));
  for (std::size_t d = 0; d < detections.size(); ++d) {
    const PixelRect& b = detections[d].mask.bounds();
    if (b.empty()) continue;
    for (int ty = b.y0 / kTile; ty <= b.y1 / kTile; ++ty)
      for (int tx = b.x0 / kTile; tx <= b.x1 / kTile; ++tx)
        tiles[static_cast<std::size_t>(ty * tiles_x + tx)].push_back(static_cast<std::int32_t>(d));
  }

  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const auto px = project_point(scan.points[i], cam);
    if (!px) continue;
    const double u = std::floor(px->u + 0.5);
    const double v = std::floor(px->v + 0.5);
    if (u < 0.0 || v < 0.0 || u >= cam.width || v >= cam.height) continue;
    const int x = static_cast<int>(u);
    const int y = static_cast<int>(v);
    for (std::int32_t d : tiles[static_cast<std::size_t>((y / kTile) * tiles_x + x / kTile)]) {
      if (detections[static_cast<std::size_t>(d)].mask.get(x, y)) {
        labels[i] = d;
        break;
      }
    }
  }
  return labels;
}

std::vector<std::vector<std::uint32_t>> euclidean_cluster(std::span<const Vec3> points, double tolerance,
                                                          std::size_t min_size) {
  if (!(tolerance > 0.0)) throw_input("cluster tolerance must be positive");
  if (min_size < 1) throw_input("cluster min_size must be >= 1");
  std::vector<std::vector<std::uint32_t>> clusters;
  if (points.empty()) return clusters;
  const double tol2 = tolerance * tolerance;
  constexpr std::uint32_t kNone = ~0u;

  // Same components as the grid path below; the pairwise test is cheaper
  // than building cells for a handful of points.
  constexpr std::size_t kDirectLimit = 96;
  if (points.size() <= kDirectLimit) {
    std::vector<std::uint32_t> rest(points.size());
    for (std::uint32_t i = 0; i < rest.size(); ++i) rest[i] = i;
    std::vector<std::uint32_t> queue;
    while (!rest.empty()) {
      // `rest` stays sorted, so its front is the smallest unvisited index.
      queue.assign(1, rest.front());
      rest.front() = kNone;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        const Vec3& p = points[queue[head]];
        for (std::uint32_t& j : rest) {
          if (j == kNone) continue;
          const Vec3 d = points[j] - p;
          if (d.x * d.x + d.y * d.y + d.z * d.z <= tol2) {
            queue.push_back(j);
            j = kNone;
          }
        }
      }
      std::erase(rest, kNone);
      if (queue.size() >= min_size) {
        std::sort(queue.begin(), queue.end());
        clusters.push_back(queue);
      }
    }
    std::stable_sort(clusters.begin(), clusters.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
    return clusters;
  }

  // Cells slightly wider than the tolerance: any in-tolerance pair is at
  // most one cell apart per axis, even after rounding.
  const double cell = tolerance * (1.0 + 1e-6);

  std::unordered_map<VoxelKey, std::uint32_t, VoxelKeyHash> cell_of_key;
  std::vector<VoxelKey> cell_keys;
  std::vector<std::vector<std::uint32_t>> unvisited;  // per cell
  std::vector<std::uint32_t> point_cell(points.size());
  for (std::uint32_t i = 0; i < points.size(); ++i) {
    const VoxelKey k = voxel_key(points[i], cell);
    auto [it, inserted] = cell_of_key.try_emplace(k, static_cast<std::uint32_t>(cell_keys.size()));
    if (inserted) {
      cell_keys.push_back(k);
      unvisited.emplace_back();
    }
    point_cell[i] = it->second;
    unvisited[it->second].push_back(i);
  }

  std::vector<std::array<std::uint32_t, 27>> neighbors(cell_keys.size());
  std::vector<bool> neighbors_ready(cell_keys.size(), false);
  auto neighbor_cells = [&](std::uint32_t c) -> const std::array<std::uint32_t, 27>& {
    if (!neighbors_ready[c]) {
      int n = 0;
      for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dz = -1; dz <= 1; ++dz) {
            const auto it = cell_of_key.find(cell_keys[c].offset(dx, dy, dz));
            neighbors[c][static_cast<std::size_t>(n++)] = it == cell_of_key.end() ? kNone : it->second;
          }
      neighbors_ready[c] = true;
    }
    return neighbors[c];
  };

  std::vector<bool> visited(points.size(), false);
  std::vector<std::uint32_t> queue;
  for (std::uint32_t seed = 0; seed < points.size(); ++seed) {
    if (visited[seed]) continue;
    visited[seed] = true;
    auto& seed_cell = unvisited[point_cell[seed]];
    seed_cell.erase(std::find(seed_cell.begin(), seed_cell.end(), seed));
    queue.assign(1, seed);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Vec3& p = points[queue[head]];
      for (std::uint32_t nc : neighbor_cells(point_cell[queue[head]])) {
        if (nc == kNone) continue;
        auto& list = unvisited[nc];
        for (std::size_t j = 0; j < list.size();) {
          const Vec3 d = points[list[j]] - p;
          if (d.x * d.x + d.y * d.y + d.z * d.z <= tol2) {
            visited[list[j]] = true;
            queue.push_back(list[j]);
            list[j] = list.back();
            list.pop_back();
          } else {
            ++j;
          }
        }
      }
    }
    if (queue.size() >= min_size) {
      std::sort(queue.begin(), queue.end());
      clusters.push_back(queue);
    }
  }
  // Seeds run in ascending index order, so each cluster's smallest index is
  // its seed and clusters already come out ordered by it.
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return clusters;
}

std::optional<std::vector<std::uint32_t>> select_object_cluster(
    std::span<const std::vector<std::uint32_t>> clusters) {
  const std::vector<std::uint32_t>* best = nullptr;
  for (const auto& c : clusters) {
    if (c.empty()) continue;
    const std::uint32_t lo = *std::min_element(c.begin(), c.end());
    if (best == nullptr || c.size() > best->size() ||
        (c.size() == best->size() && lo < *std::min_element(best->begin(), best->end()))) {
      best = &c;
    }
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

ScanDetections generate_boxes(const PointCloud& scan, const CameraModel& cam,
                              std::span<const Detection2D> detections, const BoxGenOptions& options,
                              std::int64_t scan_id) {
  ScanDetections out;
  out.scan_id = scan_id;
  const std::vector<std::int32_t> labels = label_points(scan, cam, detections);

  std::vector<std::vector<std::uint32_t>> members(detections.size());
  for (std::uint32_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != kBackground) members[static_cast<std::size_t>(labels[i])].push_back(i);
  }

  std::vector<Vec3> local;
  for (std::size_t d = 0; d < detections.size(); ++d) {
    const auto& idx = members[d];
    if (idx.empty()) continue;
    local.clear();
    local.reserve(idx.size());
    for (std::uint32_t i : idx) local.push_back(scan.points[i]);
    const auto clusters = euclidean_cluster(local, options.tolerance, options.min_size);
    const auto chosen = select_object_cluster(clusters);
    if (!chosen) continue;

    Cluster c;
    c.frame = scan.frame;
    c.class_id = detections[d].class_id;
    c.confidence = detections[d].confidence;
    c.indices.reserve(chosen->size());
    c.points.reserve(chosen->size());
    for (std::uint32_t li : *chosen) {
      c.indices.push_back(idx[li]);
      c.points.push_back(local[li]);
    }
    out.boxes.push_back(fit_aabb(c.points, c.frame));
    out.clusters.push_back(std::move(c));
  }
  return out;
}

}  // namespace box3d
