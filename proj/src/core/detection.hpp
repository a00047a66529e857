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
#include <vector>

namespace box3d {

inline constexpr int kNumClasses = 80;
inline constexpr int kNumMaskWeights = 32;
inline constexpr int kPrototypeSize = 160;

/// Axis-aligned image box in pixels. Pixel index i has its center at
/// coordinate i, matching round-to-nearest point labeling.
struct Box2 {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const;
  Box2 clamped(int frame_w, int frame_h) const;
  bool operator==(const Box2&) const = default;
};

double iou_2d(const Box2& a, const Box2& b);

/// One detector head row: box center/size, per-class confidences, mask weights.
struct RawDetection {
  double cx = 0.0;
  double cy = 0.0;
  double width = 0.0;
  double height = 0.0;
  std::array<double, kNumClasses> class_confidences{};
  std::array<double, kNumMaskWeights> mask_weights{};

  Box2 box() const { return {cx - width / 2, cy - height / 2, cx + width / 2, cy + height / 2}; }
};

/// Stack of single-channel prototype maps, map-major then row-major.
class PrototypeSet {
 public:
  PrototypeSet() = default;
  PrototypeSet(int count, int rows, int cols);
  PrototypeSet(int count, int rows, int cols, std::vector<float> data);

  int count() const { return count_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  float at(int k, int y, int x) const { return data_[index(k, y, x)]; }
  float& at(int k, int y, int x) { return data_[index(k, y, x)]; }
  const std::vector<float>& data() const { return data_; }

 private:
  std::size_t index(int k, int y, int x) const {
    return (static_cast<std::size_t>(k) * static_cast<std::size_t>(rows_) + static_cast<std::size_t>(y)) *
               static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(x);
  }

  int count_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<float> data_;
};

/// Inclusive pixel rectangle; empty when x0 > x1 or y0 > y1.
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = -1;
  int y1 = -1;

  bool empty() const { return x0 > x1 || y0 > y1; }
  bool operator==(const PixelRect&) const = default;
};

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool value = false);

  int width() const { return width_; }
  int height() const { return height_; }
  bool get(int x, int y) const { return cells_[offset(x, y)] != 0; }
  void set(int x, int y, bool v) {
    cells_[offset(x, y)] = v ? 1 : 0;
    if (v) grow(x, y);
  }
  /// Sets `length` consecutive row-major cells starting at `offset` to true.
  void fill_run(std::size_t offset, std::size_t length);
  std::size_t count() const;
  std::span<const std::uint8_t> cells() const { return cells_; }
  /// Writable access; bounds() widens to the whole frame.
  std::span<std::uint8_t> cells();
  /// Contains every true cell; may be loose after clearing cells.
  const PixelRect& bounds() const { return bounds_; }
  /// Smallest rectangle containing every true cell (full scan).
  PixelRect tight_bounds() const;
  bool operator==(const BinaryMask& o) const {
    return width_ == o.width_ && height_ == o.height_ && cells_ == o.cells_;
  }

 private:
  std::size_t offset(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }
  void grow(int x, int y) {
    bounds_.x0 = bounds_.empty() ? x : std::min(bounds_.x0, x);
    bounds_.y0 = bounds_.empty() ? y : std::min(bounds_.y0, y);
    bounds_.x1 = std::max(bounds_.x1, x);
    bounds_.y1 = std::max(bounds_.y1, y);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> cells_;
  PixelRect bounds_;
};

struct Detection2D {
  Box2 box;
  int class_id = 0;
  double confidence = 0.0;
  BinaryMask mask;
};

struct KeptDetection {
  RawDetection raw;
  int class_id = 0;
  double score = 0.0;
  std::size_t source_index = 0;
};

/// Class-wise greedy suppression; output by descending score, ties by lower
/// input index.
std::vector<KeptDetection> nms(std::span<const RawDetection> raw, double conf_threshold, double iou_threshold);

/// sigmoid(Σ w_k proto_k) on the prototype grid, bilinearly resized to the
/// frame, binarized with a strict `> bin_threshold`, and cleared outside the
/// clamped box. Works for any prototype grid size.
BinaryMask assemble_mask(std::span<const double> weights, const PrototypeSet& protos, const Box2& box,
                         int frame_w, int frame_h, double bin_threshold);

/// Binary erosion with a (2r+1)^2 square element; out-of-image cells count as false.
BinaryMask erode(const BinaryMask& mask, int kernel_radius, int iterations);

struct DecodeOptions {
  double conf_threshold = 0.25;
  double nms_iou = 0.45;
  double bin_threshold = 0.5;
  int erode_radius = 1;
  int erode_iterations = 1;
};

/// Full raw head -> Detection2D path: nms, mask assembly, erosion.
std::vector<Detection2D> decode_detections(std::span<const RawDetection> raw, const PrototypeSet& protos,
                                           int frame_w, int frame_h, const DecodeOptions& options);

}  // namespace box3d
