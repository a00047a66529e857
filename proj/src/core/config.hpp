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

#include <string>
#include <vector>

#include "core/boxgen.hpp"
#include "core/detection.hpp"
#include "core/eval.hpp"
#include "core/global_map.hpp"
#include "core/registry.hpp"

namespace box3d {

/// Every pipeline tunable. `set` checks syntax, `validate` checks ranges and
/// cross-key constraints; both raise ErrorKind::Config.
struct RunConfig {
  DecodeOptions decode;
  BoxGenOptions boxgen;
  MergeOptions merge;
  double voxel_r = 0.2;
  double map_leaf = 0.05;  // <= r/4 keeps neighboring leaf representatives within r/2
  RefineOptions refine_opts;
  bool refine = true;  // false: Layer II output is final
  MatchingProtocol matching = MatchingProtocol::Greedy;

  /// Sets one tunable from its textual form, e.g. set("voxel_r", "0.2").
  void set(const std::string& key, const std::string& value);
  void validate() const;

  /// "key=value" for every tunable in a fixed order.
  std::vector<std::string> dump() const;

  static const std::vector<std::string>& keys();
};

}  // namespace box3d
