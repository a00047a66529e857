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

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/dataset_io.hpp"
#include "core/registry.hpp"

namespace box3d {

enum class MatchingProtocol { Greedy, Hungarian };

/// Wall-time statistics of one pipeline stage, milliseconds.
struct LayerTiming {
  double mean_ms = 0.0;
  double max_ms = 0.0;
  double total_ms = 0.0;
  std::size_t samples = 0;

  void add(double ms);
};

struct TimingReport {
  LayerTiming layer1;  // decode + box generation
  LayerTiming layer2;  // world transform + pairing/merging
  LayerTiming layer3;  // global-map refinement
  LayerTiming total;   // whole scan step excluding file I/O
  std::size_t scans = 0;
};

struct ClassScore {
  int class_id = 0;
  std::size_t gt_count = 0;
  std::size_t matched = 0;
  double iou = 0.0;  // mean over ground-truth boxes of the class, unmatched count 0
};

struct EvalReport {
  std::vector<ClassScore> classes;  // ascending class id, classes present in ground truth
  double miou = 0.0;                // percent
  std::size_t matched = 0;
  std::size_t unmatched_gt = 0;
  std::size_t unmatched_pred = 0;
  std::optional<TimingReport> timing;
};

struct EvalOptions {
  MatchingProtocol matching = MatchingProtocol::Greedy;
  /// Detector class -> ground-truth class. Empty: identity. Predictions of
  /// unmapped classes are unmatched.
  std::map<int, int> class_map;
};

/// Per-class one-to-one matching on 3D IoU; only pairs with IoU > 0 match.
/// Only whole-sequence ground-truth boxes (no scan id) take part.
EvalReport match_and_score(std::span<const SnapshotEntry> pred, std::span<const GroundTruthBox> gt,
                           const EvalOptions& options = {});

/// Maximum-weight one-to-one assignment; result[i] is the column matched to
/// row i or -1. Exposed for tests.
std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weight);

std::string format_report_table(const EvalReport& report);
/// Single JSON object; `config` lines are embedded for provenance.
std::string format_report_json(const EvalReport& report, const std::vector<std::string>& config = {});

}  // namespace box3d
