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

#include "core/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/error.hpp"

namespace box3d {

double Box2::area() const { return std::max(0.0, width()) * std::max(0.0, height()); }

Box2 Box2::clamped(int frame_w, int frame_h) const {
  const double xm = static_cast<double>(frame_w - 1);
  const double ym = static_cast<double>(frame_h - 1);
  return {std::clamp(x_min, 0.0, xm), std::clamp(y_min, 0.0, ym), std::clamp(x_max, 0.0, xm),
          std::clamp(y_max, 0.0, ym)};
}

double iou_2d(const Box2& a, const Box2& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

PrototypeSet::PrototypeSet(int count, int rows, int cols)
    : PrototypeSet(count, rows, cols,
                   std::vector<float>(static_cast<std::size_t>(count) * static_cast<std::size_t>(rows) *
                                      static_cast<std::size_t>(cols))) {}

PrototypeSet::PrototypeSet(int count, int rows, int cols, std::vector<float> data)
    : count_(count), rows_(rows), cols_(cols), data_(std::move(data)) {
  if (count <= 0 || rows <= 0 || cols <= 0) throw_input("prototype set dimensions must be positive");
  if (data_.size() != static_cast<std::size_t>(count) * static_cast<std::size_t>(rows) *
                          static_cast<std::size_t>(cols)) {
    throw_input("prototype data size does not match dimensions");
  }
}

BinaryMask::BinaryMask(int width, int height, bool value) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw_input("mask dimensions must be non-negative");
  cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), value ? 1 : 0);
  if (value && width > 0 && height > 0) bounds_ = {0, 0, width - 1, height - 1};
}

std::span<std::uint8_t> BinaryMask::cells() {
  if (width_ > 0 && height_ > 0) bounds_ = {0, 0, width_ - 1, height_ - 1};
  return cells_;
}

void BinaryMask::fill_run(std::size_t offset, std::size_t length) {
  if (length == 0) return;
  if (offset + length > cells_.size()) throw_input("mask run exceeds mask size");
  std::fill_n(cells_.begin() + static_cast<std::ptrdiff_t>(offset), length, std::uint8_t{1});
  const auto w = static_cast<std::size_t>(width_);
  const std::size_t last = offset + length - 1;
  const int ya = static_cast<int>(offset / w);
  const int yb = static_cast<int>(last / w);
  if (ya == yb) {
    grow(static_cast<int>(offset % w), ya);
    grow(static_cast<int>(last % w), yb);
  } else {
    grow(0, ya);
    grow(width_ - 1, yb);
  }
}

PixelRect BinaryMask::tight_bounds() const {
  PixelRect r;
  for (int y = bounds_.y0; y <= bounds_.y1; ++y) {
    for (int x = bounds_.x0; x <= bounds_.x1; ++x) {
      if (!get(x, y)) continue;
      if (r.empty()) {
        r = {x, y, x, y};
      } else {
        r.x0 = std::min(r.x0, x);
        r.y0 = std::min(r.y0, y);
        r.x1 = std::max(r.x1, x);
        r.y1 = std::max(r.y1, y);
      }
    }
  }
  return r;
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

std::vector<KeptDetection> nms(std::span<const RawDetection> raw, double conf_threshold, double iou_threshold) {
  std::vector<KeptDetection> candidates;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& conf = raw[i].class_confidences;
    const auto best = std::max_element(conf.begin(), conf.end());
    const double score = *best;
    if (score < conf_threshold) continue;
    candidates.push_back({raw[i], static_cast<int>(best - conf.begin()), score, i});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const KeptDetection& a, const KeptDetection& b) { return a.score > b.score; });

  std::vector<KeptDetection> kept;
  for (const KeptDetection& c : candidates) {
    const Box2 cb = c.raw.box();
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const KeptDetection& k) {
      return k.class_id == c.class_id && iou_2d(k.raw.box(), cb) > iou_threshold;
    });
    if (!suppressed) kept.push_back(c);
  }
  return kept;
}

namespace {

struct Tap {
  int i0;
  int i1;
  double frac;
};

// Half-pixel-centered source coordinate for a resize from `src` to `dst` cells.
Tap bilinear_tap(int dst_index, int src, int dst) {
  double s = (static_cast<double>(dst_index) + 0.5) * static_cast<double>(src) / static_cast<double>(dst) - 0.5;
  s = std::clamp(s, 0.0, static_cast<double>(src - 1));
  const int i0 = static_cast<int>(std::floor(s));
  const int i1 = std::min(i0 + 1, src - 1);
  return {i0, i1, s - static_cast<double>(i0)};
}

}  // namespace

BinaryMask assemble_mask(std::span<const double> weights, const PrototypeSet& protos, const Box2& box,
                         int frame_w, int frame_h, double bin_threshold) {
  if (frame_w <= 0 || frame_h <= 0) throw_input("frame dimensions must be positive");
  if (static_cast<int>(weights.size()) != protos.count()) {
    throw_input("mask weight count " + std::to_string(weights.size()) + " does not match " +
                std::to_string(protos.count()) + " prototypes");
  }
  const int rows = protos.rows();
  const int cols = protos.cols();

  std::vector<double> prob(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0);
  for (int k = 0; k < protos.count(); ++k) {
    const double w = weights[static_cast<std::size_t>(k)];
    if (w == 0.0) continue;
    for (int y = 0; y < rows; ++y) {
      for (int x = 0; x < cols; ++x) prob[static_cast<std::size_t>(y * cols + x)] += w * protos.at(k, y, x);
    }
  }
  for (double& v : prob) v = 1.0 / (1.0 + std::exp(-v));

  BinaryMask mask(frame_w, frame_h);
  const Box2 b = box.clamped(frame_w, frame_h);
  const int x0 = static_cast<int>(std::ceil(b.x_min));
  const int x1 = static_cast<int>(std::floor(b.x_max));
  const int y0 = static_cast<int>(std::ceil(b.y_min));
  const int y1 = static_cast<int>(std::floor(b.y_max));
  if (x0 > x1 || y0 > y1) return mask;

  std::vector<Tap> xtaps;
  xtaps.reserve(static_cast<std::size_t>(x1 - x0 + 1));
  for (int x = x0; x <= x1; ++x) xtaps.push_back(bilinear_tap(x, cols, frame_w));

  for (int y = y0; y <= y1; ++y) {
    const Tap ty = bilinear_tap(y, rows, frame_h);
    const double* r0 = &prob[static_cast<std::size_t>(ty.i0 * cols)];
    const double* r1 = &prob[static_cast<std::size_t>(ty.i1 * cols)];
    for (int x = x0; x <= x1; ++x) {
      const Tap& tx = xtaps[static_cast<std::size_t>(x - x0)];
      const double top = r0[tx.i0] * (1.0 - tx.frac) + r0[tx.i1] * tx.frac;
      const double bot = r1[tx.i0] * (1.0 - tx.frac) + r1[tx.i1] * tx.frac;
      const double p = top * (1.0 - ty.frac) + bot * ty.frac;
      if (p > bin_threshold) mask.set(x, y, true);
    }
  }
  return mask;
}

namespace {

// One pass of a 1-D "all true in window" filter along rows (transpose = false)
// or columns, with out-of-range cells treated as false.
BinaryMask erode_axis(const BinaryMask& in, int radius, bool along_columns) {
  const int w = in.width();
  const int h = in.height();
  BinaryMask out(w, h);
  const PixelRect b = in.bounds();
  if (b.empty()) return out;
  // Cells outside the bounds are false, so only windows inside them can survive.
  const int line_lo = along_columns ? b.x0 : b.y0;
  const int line_hi = along_columns ? b.x1 : b.y1;
  const int lo = along_columns ? b.y0 : b.x0;
  const int hi = along_columns ? b.y1 : b.x1;
  std::vector<int> prefix(static_cast<std::size_t>(hi - lo + 2));
  for (int line = line_lo; line <= line_hi; ++line) {
    prefix[0] = 0;
    for (int i = lo; i <= hi; ++i) {
      const bool v = along_columns ? in.get(line, i) : in.get(i, line);
      prefix[static_cast<std::size_t>(i - lo) + 1] = prefix[static_cast<std::size_t>(i - lo)] + (v ? 1 : 0);
    }
    for (int i = lo + radius; i + radius <= hi; ++i) {
      const int ones =
          prefix[static_cast<std::size_t>(i + radius - lo + 1)] - prefix[static_cast<std::size_t>(i - radius - lo)];
      if (ones == 2 * radius + 1) {
        if (along_columns) {
          out.set(line, i, true);
        } else {
          out.set(i, line, true);
        }
      }
    }
  }
  return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, int kernel_radius, int iterations) {
  if (kernel_radius < 0 || iterations < 0) throw_input("erosion radius and iterations must be non-negative");
  if (kernel_radius == 0 || iterations == 0) return mask;
  BinaryMask cur = mask;
  for (int it = 0; it < iterations; ++it) {
    cur = erode_axis(erode_axis(cur, kernel_radius, false), kernel_radius, true);
  }
  return cur;
}

std::vector<Detection2D> decode_detections(std::span<const RawDetection> raw, const PrototypeSet& protos,
                                           int frame_w, int frame_h, const DecodeOptions& options) {
  std::vector<Detection2D> out;
  for (const KeptDetection& k : nms(raw, options.conf_threshold, options.nms_iou)) {
    Detection2D d;
    d.box = k.raw.box().clamped(frame_w, frame_h);
    d.class_id = k.class_id;
    d.confidence = k.score;
    d.mask = erode(assemble_mask(k.raw.mask_weights, protos, d.box, frame_w, frame_h, options.bin_threshold),
                   options.erode_radius, options.erode_iterations);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace box3d
