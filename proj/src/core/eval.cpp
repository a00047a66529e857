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

#include "core/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <tuple>

#include <json.hpp>

namespace box3d {

void LayerTiming::add(double ms) {
  ms = std::max(ms, 0.0);
  total_ms += ms;
  max_ms = std::max(max_ms, ms);
  ++samples;
  mean_ms = total_ms / static_cast<double>(samples);
}

std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weight) {
  const std::size_t rows = weight.size();
  const std::size_t cols = rows ? weight[0].size() : 0;
  std::vector<int> result(rows, -1);
  if (rows == 0 || cols == 0) return result;
  const bool transpose = rows > cols;
  const std::size_t n = transpose ? cols : rows;  // n <= m
  const std::size_t m = transpose ? rows : cols;
  auto cost = [&](std::size_t i, std::size_t j) { return transpose ? -weight[j][i] : -weight[i][j]; };

  // Shortest augmenting path with potentials, 1-based with a virtual column 0.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    if (transpose) {
      result[j - 1] = static_cast<int>(p[j] - 1);
    } else {
      result[p[j] - 1] = static_cast<int>(j - 1);
    }
  }
  return result;
}

namespace {

// Matched (gt index, IoU) pairs for one class.
std::vector<std::pair<std::size_t, double>> match_class(const std::vector<const Aabb3*>& gt,
                                                        const std::vector<const Aabb3*>& pred,
                                                        MatchingProtocol protocol) {
  std::vector<std::vector<double>> iou(gt.size(), std::vector<double>(pred.size(), 0.0));
  for (std::size_t g = 0; g < gt.size(); ++g)
    for (std::size_t p = 0; p < pred.size(); ++p) iou[g][p] = overlap_ratio(*gt[g], *pred[p], OverlapMetric::Iou);

  std::vector<std::pair<std::size_t, double>> out;
  if (protocol == MatchingProtocol::Hungarian) {
    const auto assign = max_weight_assignment(iou);
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (assign[g] >= 0 && iou[g][static_cast<std::size_t>(assign[g])] > 0.0) {
        out.emplace_back(g, iou[g][static_cast<std::size_t>(assign[g])]);
      }
    }
    return out;
  }
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t g = 0; g < gt.size(); ++g)
    for (std::size_t p = 0; p < pred.size(); ++p)
      if (iou[g][p] > 0.0) pairs.emplace_back(iou[g][p], g, p);
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
  });
  std::vector<char> gt_used(gt.size(), 0), pred_used(pred.size(), 0);
  for (const auto& [v, g, p] : pairs) {
    if (gt_used[g] || pred_used[p]) continue;
    gt_used[g] = pred_used[p] = 1;
    out.emplace_back(g, v);
  }
  return out;
}

}  // namespace

EvalReport match_and_score(std::span<const SnapshotEntry> pred, std::span<const GroundTruthBox> gt,
                           const EvalOptions& options) {
  std::map<int, std::vector<const Aabb3*>> gt_by_class;
  std::map<int, std::vector<const Aabb3*>> pred_by_class;
  for (const auto& g : gt) {
    if (!g.scan_id) gt_by_class[g.class_id].push_back(&g.box);
  }
  EvalReport report;
  for (const auto& p : pred) {
    int cls = p.class_id;
    if (!options.class_map.empty()) {
      const auto it = options.class_map.find(cls);
      if (it == options.class_map.end()) {
        ++report.unmatched_pred;
        continue;
      }
      cls = it->second;
    }
    pred_by_class[cls].push_back(&p.box);
  }
  for (const auto& [cls, preds] : pred_by_class) {
    if (!gt_by_class.count(cls)) report.unmatched_pred += preds.size();
  }

  double sum = 0.0;
  for (const auto& [cls, gts] : gt_by_class) {
    static const std::vector<const Aabb3*> kNone;
    const auto it = pred_by_class.find(cls);
    const auto& preds = it == pred_by_class.end() ? kNone : it->second;
    const auto matches = match_class(gts, preds, options.matching);
    ClassScore score;
    score.class_id = cls;
    score.gt_count = gts.size();
    score.matched = matches.size();
    double total = 0.0;
    for (const auto& m : matches) total += m.second;
    score.iou = total / static_cast<double>(gts.size());
    report.matched += matches.size();
    report.unmatched_gt += gts.size() - matches.size();
    report.unmatched_pred += preds.size() - matches.size();
    sum += score.iou;
    report.classes.push_back(score);
  }
  report.miou = report.classes.empty() ? 0.0 : 100.0 * sum / static_cast<double>(report.classes.size());
  return report;
}

std::string format_report_table(const EvalReport& r) {
  std::string s;
  char buf[256];
  s += "class   gt  matched   IoU(%)\n";
  for (const auto& c : r.classes) {
    std::snprintf(buf, sizeof buf, "%5d %4zu %8zu %8.2f\n", c.class_id, c.gt_count, c.matched, 100.0 * c.iou);
    s += buf;
  }
  std::snprintf(buf, sizeof buf, "mIoU %.2f  matched %zu  unmatched_gt %zu  unmatched_pred %zu\n", r.miou, r.matched,
                r.unmatched_gt, r.unmatched_pred);
  s += buf;
  if (r.timing) {
    const auto& t = *r.timing;
    std::snprintf(buf, sizeof buf, "timing over %zu scans      mean(ms)    max(ms)\n", t.scans);
    s += buf;
    const std::pair<const char*, const LayerTiming*> rows[] = {
        {"layer I   (2D->3D boxes)", &t.layer1},
        {"layer II  (registry)    ", &t.layer2},
        {"layer III (refinement)  ", &t.layer3},
        {"total                   ", &t.total}};
    for (const auto& [name, lt] : rows) {
      std::snprintf(buf, sizeof buf, "  %s %10.4f %10.4f\n", name, lt->mean_ms, lt->max_ms);
      s += buf;
    }
  }
  return s;
}

std::string format_report_json(const EvalReport& r, const std::vector<std::string>& config) {
  nlohmann::ordered_json j;
  j["miou"] = r.miou;
  j["matched"] = r.matched;
  j["unmatched_gt"] = r.unmatched_gt;
  j["unmatched_pred"] = r.unmatched_pred;
  j["classes"] = nlohmann::ordered_json::array();
  for (const auto& c : r.classes) {
    j["classes"].push_back({{"class_id", c.class_id}, {"gt_count", c.gt_count}, {"matched", c.matched},
                            {"iou", c.iou}});
  }
  if (r.timing) {
    auto layer = [](const LayerTiming& t) {
      return nlohmann::ordered_json{
          {"mean_ms", t.mean_ms}, {"max_ms", t.max_ms}, {"total_ms", t.total_ms}, {"samples", t.samples}};
    };
    j["timing"] = {{"scans", r.timing->scans},
                   {"layer1", layer(r.timing->layer1)},
                   {"layer2", layer(r.timing->layer2)},
                   {"layer3", layer(r.timing->layer3)},
                   {"total", layer(r.timing->total)}};
  }
  if (!config.empty()) {
    nlohmann::ordered_json cfg;
    for (const auto& kv : config) {
      const auto eq = kv.find('=');
      cfg[kv.substr(0, eq)] = eq == std::string::npos ? "" : kv.substr(eq + 1);
    }
    j["config"] = cfg;
  }
  return j.dump(2) + "\n";
}

}  // namespace box3d
