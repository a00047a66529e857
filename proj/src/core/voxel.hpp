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

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>

#include "core/geometry.hpp"

namespace box3d {

/// Integer cell coordinates floor(p / side).
struct VoxelKey {
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  std::int64_t iz = 0;

  bool operator==(const VoxelKey&) const = default;
  auto operator<=>(const VoxelKey&) const = default;
  VoxelKey offset(std::int64_t dx, std::int64_t dy, std::int64_t dz) const { return {ix + dx, iy + dy, iz + dz}; }
};

inline VoxelKey voxel_key(const Vec3& p, double side) {
  return {static_cast<std::int64_t>(std::floor(p.x / side)), static_cast<std::int64_t>(std::floor(p.y / side)),
          static_cast<std::int64_t>(std::floor(p.z / side))};
}

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    // Mix the three coordinates with large odd multipliers, then avalanche.
    std::uint64_t h = static_cast<std::uint64_t>(k.ix) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k.iy) * 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.iz) * 0x165667B19E3779F9ULL + (h << 6) + (h >> 2);
    h ^= h >> 33;
    h *= 0xFF51AFD7ED558CCDULL;
    h ^= h >> 33;
    return static_cast<std::size_t>(h);
  }
};

/// Exact-coordinate identity of a point, for deduplication.
struct PointKeyHash {
  std::size_t operator()(const Vec3& p) const noexcept {
    auto bits = [](double v) {
      if (v == 0.0) v = 0.0;  // fold -0.0 onto +0.0
      std::uint64_t u;
      static_assert(sizeof(u) == sizeof(v));
      std::memcpy(&u, &v, sizeof(u));
      return u;
    };
    std::uint64_t h = bits(p.x) * 0x9E3779B97F4A7C15ULL;
    h ^= bits(p.y) + 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
    h ^= bits(p.z) + 0x165667B19E3779F9ULL + (h << 6) + (h >> 2);
    h ^= h >> 31;
    return static_cast<std::size_t>(h);
  }
};

}  // namespace box3d
