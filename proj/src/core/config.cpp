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

#include "core/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "core/error.hpp"

namespace box3d {

namespace {

double to_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw_config(key + ": expected a real number, got '" + v + "'");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw_config(key + ": expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw_config(key + ": expected true/false, got '" + v + "'");
}

// Shortest round-trip form.
std::string real(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void check(bool ok, const std::string& msg) {
  if (!ok) throw_config(msg);
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = {
      "conf_threshold", "nms_iou",          "mask_threshold",    "erode_radius",  "erode_iterations",
      "cluster_tolerance", "min_cluster_size", "overlap_metric",  "overlap_threshold", "class_agnostic",
      "registry_index", "voxel_r",          "map_leaf",          "refresh_period", "refine",
      "refine_to_fixpoint", "matching"};
  return k;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "conf_threshold") {
    decode.conf_threshold = to_real(key, value);
  } else if (key == "nms_iou") {
    decode.nms_iou = to_real(key, value);
  } else if (key == "mask_threshold") {
    decode.bin_threshold = to_real(key, value);
  } else if (key == "erode_radius") {
    decode.erode_radius = static_cast<int>(std::clamp<long long>(to_int(key, value), -1, 1 << 20));
  } else if (key == "erode_iterations") {
    decode.erode_iterations = static_cast<int>(std::clamp<long long>(to_int(key, value), -1, 1 << 20));
  } else if (key == "cluster_tolerance") {
    boxgen.tolerance = to_real(key, value);
  } else if (key == "min_cluster_size") {
    const long long n = to_int(key, value);
    check(n >= 1, "min_cluster_size must be >= 1");
    boxgen.min_size = static_cast<std::size_t>(n);
  } else if (key == "overlap_metric") {
    if (value == "iou") {
      merge.metric = OverlapMetric::Iou;
    } else if (value == "min_ratio") {
      merge.metric = OverlapMetric::MinRatio;
    } else {
      throw_config("overlap_metric must be 'iou' or 'min_ratio', got '" + value + "'");
    }
  } else if (key == "overlap_threshold") {
    merge.threshold = to_real(key, value);
  } else if (key == "class_agnostic") {
    merge.class_agnostic = to_bool(key, value);
  } else if (key == "registry_index") {
    if (value == "hash") {
      merge.index = RegistryIndex::SpatialHash;
    } else if (value == "linear") {
      merge.index = RegistryIndex::LinearScan;
    } else {
      throw_config("registry_index must be 'hash' or 'linear', got '" + value + "'");
    }
  } else if (key == "voxel_r") {
    voxel_r = to_real(key, value);
  } else if (key == "map_leaf") {
    map_leaf = to_real(key, value);
  } else if (key == "refresh_period") {
    refine_opts.refresh_period = static_cast<int>(std::clamp<long long>(to_int(key, value), -1, 1 << 30));
  } else if (key == "refine") {
    refine = to_bool(key, value);
  } else if (key == "refine_to_fixpoint") {
    refine_opts.to_fixpoint = to_bool(key, value);
  } else if (key == "matching") {
    if (value == "greedy") {
      matching = MatchingProtocol::Greedy;
    } else if (value == "hungarian") {
      matching = MatchingProtocol::Hungarian;
    } else {
      throw_config("matching must be 'greedy' or 'hungarian', got '" + value + "'");
    }
  } else {
    throw_config("unknown configuration key '" + key + "'");
  }
}

void RunConfig::validate() const {
  check(decode.conf_threshold >= 0.0 && decode.conf_threshold <= 1.0, "conf_threshold must be in [0, 1]");
  check(decode.nms_iou >= 0.0 && decode.nms_iou <= 1.0, "nms_iou must be in [0, 1]");
  check(decode.bin_threshold > 0.0 && decode.bin_threshold < 1.0, "mask_threshold must be in (0, 1)");
  check(decode.erode_radius >= 0 && decode.erode_radius <= 64, "erode_radius must be in [0, 64]");
  check(decode.erode_iterations >= 0 && decode.erode_iterations <= 64, "erode_iterations must be in [0, 64]");
  check(boxgen.tolerance > 0.0 && boxgen.tolerance <= 100.0, "cluster_tolerance must be in (0, 100]");
  check(boxgen.min_size >= 1, "min_cluster_size must be >= 1");
  check(merge.threshold >= 0.0 && merge.threshold < 1.0, "overlap_threshold must be in [0, 1)");
  check(voxel_r > 0.0 && voxel_r <= 100.0, "voxel_r must be in (0, 100]");
  check(map_leaf >= 0.0 && map_leaf <= voxel_r, "map_leaf must be in [0, voxel_r]");
  check(refine_opts.refresh_period >= 0, "refresh_period must be >= 0");
}

std::vector<std::string> RunConfig::dump() const {
  return {
      "conf_threshold=" + real(decode.conf_threshold),
      "nms_iou=" + real(decode.nms_iou),
      "mask_threshold=" + real(decode.bin_threshold),
      "erode_radius=" + std::to_string(decode.erode_radius),
      "erode_iterations=" + std::to_string(decode.erode_iterations),
      "cluster_tolerance=" + real(boxgen.tolerance),
      "min_cluster_size=" + std::to_string(boxgen.min_size),
      std::string("overlap_metric=") + overlap_metric_name(merge.metric),
      "overlap_threshold=" + real(merge.threshold),
      std::string("class_agnostic=") + (merge.class_agnostic ? "true" : "false"),
      std::string("registry_index=") + (merge.index == RegistryIndex::SpatialHash ? "hash" : "linear"),
      "voxel_r=" + real(voxel_r),
      "map_leaf=" + real(map_leaf),
      "refresh_period=" + std::to_string(refine_opts.refresh_period),
      std::string("refine=") + (refine ? "true" : "false"),
      std::string("refine_to_fixpoint=") + (refine_opts.to_fixpoint ? "true" : "false"),
      std::string("matching=") + (matching == MatchingProtocol::Greedy ? "greedy" : "hungarian"),
  };
}

}  // namespace box3d
