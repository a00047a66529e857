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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "core/geometry.hpp"
#include "core/voxel.hpp"

namespace box3d {

/// Set of points under exact coordinate equality (-0.0 == +0.0), stored
/// flat with linear probing. Load factor stays at or below one half and
/// erase shifts the probe run back, so lookups never see tombstones.
class PointSet {
 public:
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  void clear() {
    slots_.clear();
    used_.clear();
    size_ = 0;
    shift_ = 64;
  }

  void reserve(std::size_t n) {
    std::size_t cap = 8;
    while (cap < 2 * n) cap *= 2;
    if (cap > slots_.size()) rehash(cap);
  }

  /// True when `p` was not yet present.
  bool insert(const Vec3& p) {
    if (2 * (size_ + 1) > slots_.size()) rehash(slots_.empty() ? 8 : 2 * slots_.size());
    std::size_t i = home(p);
    while (used_[i]) {
      if (slots_[i] == p) return false;
      i = (i + 1) & mask();
    }
    slots_[i] = p;
    used_[i] = 1;
    ++size_;
    return true;
  }

  template <class It>
  void insert(It first, It last) {
    for (; first != last; ++first) insert(*first);
  }

  bool contains(const Vec3& p) const {
    if (slots_.empty()) return false;
    for (std::size_t i = home(p); used_[i]; i = (i + 1) & mask()) {
      if (slots_[i] == p) return true;
    }
    return false;
  }

  /// True when `p` was present.
  bool erase(const Vec3& p) {
    if (slots_.empty()) return false;
    std::size_t i = home(p);
    while (used_[i] && !(slots_[i] == p)) i = (i + 1) & mask();
    if (!used_[i]) return false;
    // Backward shift: move later run members whose home does not lie in
    // (hole, j] into the hole.
    for (std::size_t j = (i + 1) & mask(); used_[j]; j = (j + 1) & mask()) {
      const std::size_t h = home(slots_[j]);
      const bool stays = i <= j ? (i < h && h <= j) : (i < h || h <= j);
      if (stays) continue;
      slots_[i] = slots_[j];
      i = j;
    }
    used_[i] = 0;
    --size_;
    return true;
  }

 private:
  std::size_t mask() const { return slots_.size() - 1; }

  std::size_t home(const Vec3& p) const {
    // Fibonacci hashing takes the high bits of the mixed key.
    return static_cast<std::size_t>((static_cast<std::uint64_t>(PointKeyHash{}(p)) * 0x9E3779B97F4A7C15ULL) >>
                                    shift_);
  }

  void rehash(std::size_t cap) {
    std::vector<Vec3> old_slots = std::move(slots_);
    std::vector<std::uint8_t> old_used = std::move(used_);
    slots_.assign(cap, Vec3{});
    used_.assign(cap, 0);
    shift_ = 64 - std::countr_zero(cap);
    size_ = 0;
    for (std::size_t k = 0; k < old_slots.size(); ++k) {
      if (old_used[k]) insert(old_slots[k]);
    }
  }

  std::vector<Vec3> slots_;
  std::vector<std::uint8_t> used_;
  std::size_t size_ = 0;
  int shift_ = 64;
};

}  // namespace box3d
