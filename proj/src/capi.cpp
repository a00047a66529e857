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

#include "box3d/box3d.h"

#include <charconv>
#include <exception>
#include <filesystem>
#include <map>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/dataset_io.hpp"
#include "core/error.hpp"
#include "core/eval.hpp"
#include "core/pipeline.hpp"
#include "core/synth.hpp"

struct box3d_config {
  box3d::RunConfig config;
  std::string dump;
};

struct box3d_pipeline {
  box3d::Pipeline pipeline;
  std::vector<box3d::SnapshotEntry> snapshot;
};

struct box3d_report {
  box3d::EvalReport report;
  std::string table;
  std::string json;
};

struct box3d_synth_spec {
  box3d::SynthSpec spec;
};

struct box3d_synth_result {
  box3d::SynthResult result;
  std::string manifest;
  std::string ground_truth;
};

namespace {

thread_local std::string g_last_error;

box3d_status fail(box3d_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

box3d_status status_of(box3d::ErrorKind kind) {
  switch (kind) {
    case box3d::ErrorKind::Input:
      return BOX3D_ERR_INPUT;
    case box3d::ErrorKind::Config:
      return BOX3D_ERR_CONFIG;
    case box3d::ErrorKind::Io:
      return BOX3D_ERR_IO;
    case box3d::ErrorKind::Geometry:
      return BOX3D_ERR_GEOMETRY;
    case box3d::ErrorKind::Internal:
      break;
  }
  return BOX3D_ERR_INTERNAL;
}

// NULL or out-of-range caller argument; maps to BOX3D_ERR_ARGUMENT.
struct ArgumentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs `body`, translating exceptions into status codes.
template <typename F>
box3d_status guarded(F&& body) {
  try {
    body();
    return BOX3D_OK;
  } catch (const box3d::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const ArgumentError& e) {
    return fail(BOX3D_ERR_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(BOX3D_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(BOX3D_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(BOX3D_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(BOX3D_ERR_INTERNAL, "unknown error");
  }
}

std::string text(const char* s, const char* what) {
  if (s == nullptr) throw ArgumentError(std::string(what) + " is NULL");
  return s;
}

std::vector<std::string> split(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* b = v.data();
  if (!v.empty() && v[0] == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) box3d::throw_config(key + ": expected a real number, got '" + v + "'");
  return out;
}

long long integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) box3d::throw_config(key + ": expected an integer, got '" + v + "'");
  return out;
}

std::vector<double> reals(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& part : split(v, ',')) out.push_back(real(key, part));
  return out;
}

box3d::Vec3 vec3(const std::string& key, const std::string& v) {
  const auto r = reals(key, v);
  if (r.size() != 3) box3d::throw_config(key + ": expected x,y,z");
  return {r[0], r[1], r[2]};
}

void set_synth(box3d::SynthSpec& s, const std::string& key, const std::string& v) {
  if (key == "objects") {
    s.object_count = static_cast<int>(integer(key, v));
  } else if (key == "scans") {
    s.scans = static_cast<int>(integer(key, v));
  } else if (key == "step") {
    s.step = real(key, v);
  } else if (key == "yaw") {
    s.yaw_amplitude = real(key, v);
  } else if (key == "sensor_height") {
    s.sensor_height = real(key, v);
  } else if (key == "spacing") {
    s.spacing = real(key, v);
  } else if (key == "sampling") {
    if (v == "jittered") {
      s.sampling = box3d::SurfaceSampling::Jittered;
    } else if (v == "grid") {
      s.sampling = box3d::SurfaceSampling::Grid;
    } else {
      box3d::throw_config("sampling must be 'jittered' or 'grid'");
    }
  } else if (key == "sigma") {
    s.noise_sigma = real(key, v);
  } else if (key == "clutter") {
    s.clutter_points = static_cast<int>(integer(key, v));
  } else if (key == "dropout") {
    s.dropout_rate = real(key, v);
  } else if (key == "withhold") {
    s.withheld_scans.clear();
    for (const auto& part : split(v, ',')) s.withheld_scans.push_back(integer(key, part));
  } else if (key == "coverage") {
    s.mask_coverage = real(key, v);
  } else if (key == "mode") {
    if (v == "decoded") {
      s.mode = box3d::DetectionMode::Decoded;
    } else if (v == "raw") {
      s.mode = box3d::DetectionMode::Raw;
    } else {
      box3d::throw_config("mode must be 'decoded' or 'raw'");
    }
  } else if (key == "confidence") {
    s.confidence = real(key, v);
  } else if (key == "seed") {
    s.seed = static_cast<std::uint64_t>(integer(key, v));
  } else if (key == "min_size") {
    s.min_size = vec3(key, v);
  } else if (key == "max_size") {
    s.max_size = vec3(key, v);
  } else if (key == "gap") {
    s.min_gap = real(key, v);
  } else if (key == "class") {
    s.class_id = static_cast<int>(integer(key, v));
  } else if (key == "object") {
    const auto r = reals(key, v);
    if (r.size() != 6 && r.size() != 7) box3d::throw_config("object: expected min_x,min_y,min_z,max_x,max_y,max_z[,class]");
    box3d::SynthObject o;
    o.box = {{r[0], r[1], r[2]}, {r[3], r[4], r[5]}, box3d::Frame::World};
    o.class_id = r.size() == 7 ? static_cast<int>(r[6]) : s.class_id;
    s.objects.push_back(o);
  } else if (key == "undetected") {
    s.undetected_objects.clear();
    for (const auto& part : split(v, ',')) {
      const long long k = integer(key, part);
      if (k < 0) box3d::throw_config("undetected: indices must be >= 0");
      s.undetected_objects.push_back(static_cast<std::size_t>(k));
    }
  } else {
    box3d::throw_config("unknown synth key '" + key + "'");
  }
}

std::optional<std::map<int, int>> class_map_from(const char* path) {
  if (path == nullptr) return std::nullopt;
  return box3d::read_class_map(path);
}

}  // namespace

extern "C" {

const char* box3d_version(void) { return "0.1.0"; }

const char* box3d_last_error(void) { return g_last_error.c_str(); }

const char* box3d_status_name(box3d_status status) {
  switch (status) {
    case BOX3D_OK:
      return "ok";
    case BOX3D_ERR_INPUT:
      return "input error";
    case BOX3D_ERR_CONFIG:
      return "config error";
    case BOX3D_ERR_IO:
      return "i/o error";
    case BOX3D_ERR_GEOMETRY:
      return "geometry error";
    case BOX3D_ERR_ARGUMENT:
      return "invalid argument";
    case BOX3D_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

// ---- configuration ------------------------------------------------------

box3d_status box3d_config_create(box3d_config** out) {
  if (out == nullptr) return fail(BOX3D_ERR_ARGUMENT, "out is NULL");
  return guarded([&] { *out = new box3d_config(); });
}

void box3d_config_destroy(box3d_config* config) { delete config; }

box3d_status box3d_config_set(box3d_config* config, const char* key, const char* value) {
  if (config == nullptr) return fail(BOX3D_ERR_ARGUMENT, "config is NULL");
  return guarded([&] {
    if (key == nullptr || value == nullptr) throw ArgumentError("key and value must not be NULL");
    config->config.set(key, value);
  });
}

box3d_status box3d_config_validate(const box3d_config* config) {
  if (config == nullptr) return fail(BOX3D_ERR_ARGUMENT, "config is NULL");
  return guarded([&] { config->config.validate(); });
}

size_t box3d_config_key_count(void) { return box3d::RunConfig::keys().size(); }

const char* box3d_config_key(size_t index) {
  const auto& keys = box3d::RunConfig::keys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

const char* box3d_config_dump(box3d_config* config) {
  if (config == nullptr) return "";
  config->dump.clear();
  for (const auto& line : config->config.dump()) config->dump += line + "\n";
  return config->dump.c_str();
}

// ---- pipeline ---------------------------------------------------------------

box3d_status box3d_pipeline_run(const char* manifest_path, const box3d_config* config, box3d_pipeline** out) {
  if (out == nullptr) return fail(BOX3D_ERR_ARGUMENT, "out is NULL");
  *out = nullptr;
  return guarded([&] {
    const box3d::RunConfig cfg = config ? config->config : box3d::RunConfig{};
    auto run = box3d::run_pipeline(text(manifest_path, "manifest path"), cfg);
    auto snapshot = run.registry().snapshot();
    *out = new box3d_pipeline{std::move(run), std::move(snapshot)};
  });
}

void box3d_pipeline_destroy(box3d_pipeline* pipeline) { delete pipeline; }

size_t box3d_pipeline_object_count(const box3d_pipeline* pipeline) {
  return pipeline ? pipeline->snapshot.size() : 0;
}

box3d_status box3d_pipeline_object(const box3d_pipeline* pipeline, size_t index, box3d_object* out) {
  if (pipeline == nullptr || out == nullptr) return fail(BOX3D_ERR_ARGUMENT, "pipeline or out is NULL");
  if (index >= pipeline->snapshot.size()) return fail(BOX3D_ERR_ARGUMENT, "object index out of range");
  const auto& e = pipeline->snapshot[index];
  out->object_id = e.object_id;
  out->class_id = e.class_id;
  out->observation_count = e.observation_count;
  out->point_count = e.point_count;
  const double c[3] = {e.centroid.x, e.centroid.y, e.centroid.z};
  const double lo[3] = {e.box.min.x, e.box.min.y, e.box.min.z};
  const double hi[3] = {e.box.max.x, e.box.max.y, e.box.max.z};
  for (int i = 0; i < 3; ++i) {
    out->centroid[i] = c[i];
    out->min[i] = lo[i];
    out->max[i] = hi[i];
  }
  return BOX3D_OK;
}

size_t box3d_pipeline_map_size(const box3d_pipeline* pipeline) {
  return pipeline ? pipeline->pipeline.map().size() : 0;
}

box3d_status box3d_pipeline_timing(const box3d_pipeline* pipeline, box3d_timing* out) {
  if (pipeline == nullptr || out == nullptr) return fail(BOX3D_ERR_ARGUMENT, "pipeline or out is NULL");
  const auto& t = pipeline->pipeline.timing();
  auto copy = [](const box3d::LayerTiming& in, box3d_layer_timing& o) {
    o.mean_ms = in.mean_ms;
    o.max_ms = in.max_ms;
    o.total_ms = in.total_ms;
    o.samples = in.samples;
  };
  copy(t.layer1, out->layer1);
  copy(t.layer2, out->layer2);
  copy(t.layer3, out->layer3);
  copy(t.total, out->total);
  out->scans = t.scans;
  return BOX3D_OK;
}

size_t box3d_pipeline_warning_count(const box3d_pipeline* pipeline) {
  return pipeline ? pipeline->pipeline.warnings().size() : 0;
}

const char* box3d_pipeline_warning(const box3d_pipeline* pipeline, size_t index) {
  if (pipeline == nullptr || index >= pipeline->pipeline.warnings().size()) return nullptr;
  return pipeline->pipeline.warnings()[index].c_str();
}

box3d_status box3d_pipeline_write_registry(const box3d_pipeline* pipeline, const char* path) {
  if (pipeline == nullptr) return fail(BOX3D_ERR_ARGUMENT, "pipeline is NULL");
  return guarded([&] {
    box3d::write_registry(text(path, "registry path"), pipeline->snapshot, pipeline->pipeline.provenance());
  });
}

box3d_status box3d_pipeline_write_ply(const box3d_pipeline* pipeline, const char* path) {
  if (pipeline == nullptr) return fail(BOX3D_ERR_ARGUMENT, "pipeline is NULL");
  return guarded([&] { box3d::write_ply(text(path, "PLY path"), pipeline->pipeline.colored_points()); });
}

// ---- evaluation -------------------------------------------------------------

namespace {

box3d_report* make_report(box3d::EvalReport report, const std::vector<std::string>& config) {
  auto* r = new box3d_report{std::move(report), {}, {}};
  r->table = box3d::format_report_table(r->report);
  r->json = box3d::format_report_json(r->report, config);
  return r;
}

}  // namespace

box3d_status box3d_evaluate_files(const char* registry_path, const char* ground_truth_path,
                                  const char* class_map_path, const box3d_config* config, box3d_report** out) {
  if (out == nullptr) return fail(BOX3D_ERR_ARGUMENT, "out is NULL");
  *out = nullptr;
  return guarded([&] {
    const auto pred = box3d::read_registry(text(registry_path, "registry path"));
    const auto gt = box3d::read_ground_truth(text(ground_truth_path, "ground-truth path"));
    box3d::EvalOptions opts;
    if (auto cm = class_map_from(class_map_path)) opts.class_map = std::move(*cm);
    const box3d::RunConfig cfg = config ? config->config : box3d::RunConfig{};
    cfg.validate();
    opts.matching = cfg.matching;
    *out = make_report(box3d::match_and_score(pred, gt, opts), cfg.dump());
  });
}

box3d_status box3d_evaluate_pipeline(const box3d_pipeline* pipeline, const char* ground_truth_path,
                                     const char* class_map_path, box3d_report** out) {
  if (pipeline == nullptr || out == nullptr) return fail(BOX3D_ERR_ARGUMENT, "pipeline or out is NULL");
  *out = nullptr;
  return guarded([&] {
    std::vector<box3d::GroundTruthBox> gt;
    if (ground_truth_path != nullptr) gt = box3d::read_ground_truth(ground_truth_path);
    box3d::EvalOptions opts;
    if (auto cm = class_map_from(class_map_path)) opts.class_map = std::move(*cm);
    opts.matching = pipeline->pipeline.config().matching;
    auto report = box3d::match_and_score(pipeline->snapshot, gt, opts);
    report.timing = pipeline->pipeline.timing();
    *out = make_report(std::move(report), pipeline->pipeline.config().dump());
  });
}

void box3d_report_destroy(box3d_report* report) { delete report; }

box3d_status box3d_report_summary(const box3d_report* report, box3d_eval_summary* out) {
  if (report == nullptr || out == nullptr) return fail(BOX3D_ERR_ARGUMENT, "report or out is NULL");
  out->miou = report->report.miou;
  out->matched = report->report.matched;
  out->unmatched_gt = report->report.unmatched_gt;
  out->unmatched_pred = report->report.unmatched_pred;
  out->classes = report->report.classes.size();
  return BOX3D_OK;
}

const char* box3d_report_table(const box3d_report* report) { return report ? report->table.c_str() : ""; }

const char* box3d_report_json(const box3d_report* report) { return report ? report->json.c_str() : ""; }

// ---- synthetic sequences ------------------------------------------------------

box3d_status box3d_synth_spec_create(box3d_synth_spec** out) {
  if (out == nullptr) return fail(BOX3D_ERR_ARGUMENT, "out is NULL");
  return guarded([&] { *out = new box3d_synth_spec(); });
}

void box3d_synth_spec_destroy(box3d_synth_spec* spec) { delete spec; }

box3d_status box3d_synth_spec_set(box3d_synth_spec* spec, const char* key, const char* value) {
  if (spec == nullptr) return fail(BOX3D_ERR_ARGUMENT, "box3d_synth_spec handle is NULL");
  return guarded([&] {
    if (key == nullptr || value == nullptr) throw ArgumentError("key and value must not be NULL");
    set_synth(spec->spec, key, value);
  });
}

box3d_status box3d_synth_generate(const box3d_synth_spec* spec, const char* out_dir, box3d_synth_result** out) {
  if (spec == nullptr) return fail(BOX3D_ERR_ARGUMENT, "box3d_synth_spec handle is NULL");
  if (out != nullptr) *out = nullptr;
  return guarded([&] {
    auto result = box3d::generate_synthetic_sequence(spec->spec, text(out_dir, "output directory"));
    if (out != nullptr) {
      auto* r = new box3d_synth_result{std::move(result), {}, {}};
      r->manifest = r->result.manifest_path.string();
      r->ground_truth = r->result.ground_truth_path.string();
      *out = r;
    }
  });
}

void box3d_synth_result_destroy(box3d_synth_result* result) { delete result; }

const char* box3d_synth_result_manifest(const box3d_synth_result* result) {
  return result ? result->manifest.c_str() : "";
}

const char* box3d_synth_result_ground_truth(const box3d_synth_result* result) {
  return result ? result->ground_truth.c_str() : "";
}

size_t box3d_synth_result_warning_count(const box3d_synth_result* result) {
  return result ? result->result.warnings.size() : 0;
}

const char* box3d_synth_result_warning(const box3d_synth_result* result, size_t index) {
  if (result == nullptr || index >= result->result.warnings.size()) return nullptr;
  return result->result.warnings[index].c_str();
}

// ---- calibration ----------------------------------------------------------------

box3d_status box3d_convert_kitti_calibration(const char* kitti_path, const char* camera_key, int width, int height,
                                             const char* out_path) {
  return guarded([&] {
    if (width <= 0 || height <= 0) box3d::throw_config("image width and height must be positive");
    const auto cam = box3d::convert_kitti_calibration(text(kitti_path, "KITTI calib path"),
                                                      text(camera_key, "camera key"), width, height);
    box3d::write_calibration(text(out_path, "output path"), cam);
  });
}

}  // extern "C"
