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

// Command-line front end over the box3d C interface.
//
// Exit codes: 0 success, 1 input error (malformed, inconsistent or
// unreadable/unwritable data), 2 config error (bad flag or tunable),
// 3 internal error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "box3d/box3d.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInternal = 3;

int exit_code(box3d_status s) {
  switch (s) {
    case BOX3D_OK:
      return kExitOk;
    case BOX3D_ERR_INPUT:
    case BOX3D_ERR_IO:
    case BOX3D_ERR_GEOMETRY:
      return kExitInput;
    case BOX3D_ERR_CONFIG:
      return kExitConfig;
    case BOX3D_ERR_ARGUMENT:
    case BOX3D_ERR_INTERNAL:
      break;
  }
  return kExitInternal;
}

// Carries a failed status out of a subcommand body.
struct Failure {
  box3d_status status;
  std::string message;
};

void check(box3d_status s) {
  if (s != BOX3D_OK) throw Failure{s, box3d_last_error()};
}

template <typename T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using ConfigPtr = std::unique_ptr<box3d_config, Deleter<box3d_config, box3d_config_destroy>>;
using PipelinePtr = std::unique_ptr<box3d_pipeline, Deleter<box3d_pipeline, box3d_pipeline_destroy>>;
using ReportPtr = std::unique_ptr<box3d_report, Deleter<box3d_report, box3d_report_destroy>>;
using SpecPtr = std::unique_ptr<box3d_synth_spec, Deleter<box3d_synth_spec, box3d_synth_spec_destroy>>;
using ResultPtr = std::unique_ptr<box3d_synth_result, Deleter<box3d_synth_result, box3d_synth_result_destroy>>;

struct TunableDoc {
  const char* key;
  const char* help;
};

// One flag per pipeline tunable; the key is also accepted by --set.
constexpr TunableDoc kTunables[] = {
    {"conf_threshold", "detection confidence cutoff in [0,1] (default 0.25)"},
    {"nms_iou", "NMS suppression IoU in [0,1] (default 0.45)"},
    {"mask_threshold", "mask probability cutoff in (0,1) (default 0.5)"},
    {"erode_radius", "square erosion radius in pixels, 0..64 (default 1)"},
    {"erode_iterations", "erosion passes, 0..64 (default 1)"},
    {"cluster_tolerance", "Euclidean clustering distance in m, (0,100] (default 0.5)"},
    {"min_cluster_size", "smallest accepted cluster, >= 1 (default 5)"},
    {"overlap_metric", "box overlap for merging: iou | min_ratio (default min_ratio)"},
    {"overlap_threshold", "merge when overlap exceeds this, [0,1) (default 0.3)"},
    {"class_agnostic", "merge across classes: true | false (default false)"},
    {"registry_index", "registry candidate search: hash | linear (default hash)"},
    {"voxel_r", "refinement cube side r in m, (0,100] (default 0.2)"},
    {"map_leaf", "global-map dedup leaf in m, [0, voxel_r], 0 keeps all (default 0.05)"},
    {"refresh_period", "refine every object each K scans, 0 disables (default 10)"},
    {"refine", "run global-map refinement: true | false (default true)"},
    {"refine_to_fixpoint", "repeat refinement until the cluster stops growing (default false)"},
    {"matching", "evaluation matching: greedy | hungarian (default greedy)"},
};

std::string flag_name(const char* key) {
  std::string s = key;
  for (char& c : s) {
    if (c == '_') c = '-';
  }
  return "--" + s;
}

// Tunable flags collected in command-line order.
struct TunableArgs {
  std::vector<std::pair<std::string, std::string>> values;
  std::vector<std::string> sets;
};

void add_tunables(CLI::App* cmd, TunableArgs& args) {
  for (const auto& t : kTunables) {
    const std::string key = t.key;
    std::string names = flag_name(t.key);
    if (key == "class_agnostic") names += ",--class-agnostic-merge";
    cmd->add_option_function<std::string>(
           names, [&args, key](const std::string& v) { args.values.emplace_back(key, v); }, t.help)
        ->group("Tunables");
  }
  cmd->add_option("--set", args.sets, "KEY=VALUE for any tunable; repeatable, applied after the named flags")
      ->group("Tunables");
}

ConfigPtr make_config(const TunableArgs& args) {
  box3d_config* raw = nullptr;
  check(box3d_config_create(&raw));
  ConfigPtr cfg(raw);
  for (const auto& [k, v] : args.values) check(box3d_config_set(cfg.get(), k.c_str(), v.c_str()));
  for (const auto& kv : args.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Failure{BOX3D_ERR_CONFIG, "--set expects KEY=VALUE, got '" + kv + "'"};
    check(box3d_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
  check(box3d_config_validate(cfg.get()));
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  f << text;
  f.close();
  if (!f) throw Failure{BOX3D_ERR_IO, path + ": cannot write"};
}

void print_warnings(const box3d_pipeline* p) {
  for (std::size_t i = 0; i < box3d_pipeline_warning_count(p); ++i) {
    std::cerr << "warning: " << box3d_pipeline_warning(p, i) << "\n";
  }
}

PipelinePtr run(const std::string& manifest, const TunableArgs& tunables) {
  ConfigPtr cfg = make_config(tunables);
  box3d_pipeline* raw = nullptr;
  check(box3d_pipeline_run(manifest.c_str(), cfg.get(), &raw));
  PipelinePtr p(raw);
  print_warnings(p.get());
  return p;
}

struct RunArgs {
  std::string manifest;
  std::string registry;
  std::string ply;
  std::string gt;
  std::string class_map;
  std::string json;
  bool quiet = false;
  TunableArgs tunables;
};

void cmd_run(const RunArgs& a) {
  PipelinePtr p = run(a.manifest, a.tunables);
  if (!a.registry.empty()) check(box3d_pipeline_write_registry(p.get(), a.registry.c_str()));
  if (!a.ply.empty()) check(box3d_pipeline_write_ply(p.get(), a.ply.c_str()));
  box3d_report* raw = nullptr;
  check(box3d_evaluate_pipeline(p.get(), a.gt.empty() ? nullptr : a.gt.c_str(),
                                a.class_map.empty() ? nullptr : a.class_map.c_str(), &raw));
  ReportPtr report(raw);
  if (!a.json.empty()) write_text(a.json, std::string(box3d_report_json(report.get())) + "\n");
  if (!a.quiet) {
    std::printf("objects %zu  map_points %zu\n", box3d_pipeline_object_count(p.get()),
                box3d_pipeline_map_size(p.get()));
    std::fputs(box3d_report_table(report.get()), stdout);
  }
}

struct EvalArgs {
  std::string registry;
  std::string gt;
  std::string class_map;
  std::string json;
  std::string format = "both";
  TunableArgs tunables;
};

void cmd_eval(const EvalArgs& a) {
  ConfigPtr cfg = make_config(a.tunables);
  box3d_report* raw = nullptr;
  check(box3d_evaluate_files(a.registry.c_str(), a.gt.c_str(), a.class_map.empty() ? nullptr : a.class_map.c_str(),
                             cfg.get(), &raw));
  ReportPtr report(raw);
  if (a.format != "json") std::fputs(box3d_report_table(report.get()), stdout);
  if (a.format != "table") std::printf("%s\n", box3d_report_json(report.get()));
  if (!a.json.empty()) write_text(a.json, std::string(box3d_report_json(report.get())) + "\n");
}

struct ExportArgs {
  std::string manifest;
  std::string ply;
  std::string registry;
  TunableArgs tunables;
};

void cmd_export(const ExportArgs& a) {
  PipelinePtr p = run(a.manifest, a.tunables);
  check(box3d_pipeline_write_ply(p.get(), a.ply.c_str()));
  if (!a.registry.empty()) check(box3d_pipeline_write_registry(p.get(), a.registry.c_str()));
}

struct SynthKey {
  const char* key;
  const char* help;
};

constexpr SynthKey kSynthKeys[] = {
    {"objects", "random cuboid count when no --object is given (default 3)"},
    {"scans", "scan count (default 10)"},
    {"step", "forward motion per scan in m (default 0.5)"},
    {"yaw", "yaw oscillation amplitude in rad (default 0)"},
    {"sensor_height", "LiDAR height above ground in m (default 1.73)"},
    {"spacing", "surface sample spacing in m (default 0.05)"},
    {"sampling", "surface sampling: jittered | grid (default jittered)"},
    {"sigma", "Gaussian point noise in m (default 0)"},
    {"clutter", "static background point count (default 200)"},
    {"dropout", "fraction of scans without detections, [0,1] (default 0)"},
    {"withhold", "comma list of scan ids without detections"},
    {"coverage", "silhouette area fraction kept per mask, (0,1] (default 1)"},
    {"mode", "detection records: decoded | raw (default decoded)"},
    {"confidence", "detection confidence (default 0.9)"},
    {"seed", "random seed (default 1)"},
    {"min_size", "random cuboid minimum size x,y,z (default 1.5,1.2,1.0)"},
    {"max_size", "random cuboid maximum size x,y,z (default 3,2,1.8)"},
    {"gap", "minimum free space between random cuboids in m (default 1.5)"},
    {"class", "class id of random cuboids (default 2)"},
    {"undetected", "comma list of object indices never detected"},
};

struct SynthArgs {
  std::string out;
  std::vector<std::pair<std::string, std::string>> values;
  std::vector<std::string> objects;
};

void cmd_synth(const SynthArgs& a) {
  box3d_synth_spec* raw = nullptr;
  check(box3d_synth_spec_create(&raw));
  SpecPtr spec(raw);
  for (const auto& o : a.objects) check(box3d_synth_spec_set(spec.get(), "object", o.c_str()));
  for (const auto& [k, v] : a.values) check(box3d_synth_spec_set(spec.get(), k.c_str(), v.c_str()));
  box3d_synth_result* res_raw = nullptr;
  check(box3d_synth_generate(spec.get(), a.out.c_str(), &res_raw));
  ResultPtr res(res_raw);
  for (std::size_t i = 0; i < box3d_synth_result_warning_count(res.get()); ++i) {
    std::cerr << "warning: " << box3d_synth_result_warning(res.get(), i) << "\n";
  }
  std::printf("manifest %s\nground_truth %s\n", box3d_synth_result_manifest(res.get()),
              box3d_synth_result_ground_truth(res.get()));
}

struct KittiArgs {
  std::string input;
  std::string output;
  std::string camera = "P2";
  int width = 1242;
  int height = 375;
};

void cmd_kitti(const KittiArgs& a) {
  check(box3d_convert_kitti_calibration(a.input.c_str(), a.camera.c_str(), a.width, a.height, a.output.c_str()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"box3d: camera-LiDAR fusion into a registry of 3D object boxes.\n"
               "Exit codes: 0 success, 1 input error, 2 config error, 3 internal error."};
  app.set_version_flag("--version", std::string(box3d_version()));
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "run all three layers over a sequence manifest");
  run_cmd->add_option("manifest", run_args.manifest, "sequence manifest")->required();
  run_cmd->add_option("-o,--registry", run_args.registry, "write the registry export (with effective config)");
  run_cmd->add_option("--ply", run_args.ply, "write the colored global map as ASCII PLY");
  run_cmd->add_option("--gt", run_args.gt, "ground-truth boxes; adds mIoU to the report");
  run_cmd->add_option("--class-map", run_args.class_map, "detector-to-ground-truth class table (default identity)");
  run_cmd->add_option("--json", run_args.json, "write the report as JSON ('-' for stdout)");
  run_cmd->add_flag("-q,--quiet", run_args.quiet, "suppress the report table");
  add_tunables(run_cmd, run_args.tunables);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "score a registry export against ground truth");
  eval_cmd->add_option("registry", eval_args.registry, "registry export")->required();
  eval_cmd->add_option("gt", eval_args.gt, "ground-truth boxes")->required();
  eval_cmd->add_option("--class-map", eval_args.class_map, "detector-to-ground-truth class table (default identity)");
  eval_cmd->add_option("--json", eval_args.json, "also write the JSON record to this file");
  eval_cmd->add_option("--format", eval_args.format, "stdout format: table | json | both")
      ->check(CLI::IsMember({"table", "json", "both"}))
      ->capture_default_str();
  add_tunables(eval_cmd, eval_args.tunables);

  ExportArgs export_args;
  auto* export_cmd = app.add_subcommand("export", "run a sequence and write the colored global map as PLY");
  export_cmd->add_option("manifest", export_args.manifest, "sequence manifest")->required();
  export_cmd->add_option("ply", export_args.ply, "output PLY path")->required();
  export_cmd->add_option("-o,--registry", export_args.registry, "also write the registry export");
  add_tunables(export_cmd, export_args.tunables);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic sequence with ground truth");
  synth_cmd->add_option("out_dir", synth_args.out, "output directory")->required();
  synth_cmd->add_option("--object", synth_args.objects,
                        "explicit cuboid min_x,min_y,min_z,max_x,max_y,max_z[,class] in W; repeatable");
  for (const auto& k : kSynthKeys) {
    const std::string key = k.key;
    synth_cmd->add_option_function<std::string>(
        flag_name(k.key), [&synth_args, key](const std::string& v) { synth_args.values.emplace_back(key, v); },
        k.help);
  }

  KittiArgs kitti_args;
  auto* kitti_cmd = app.add_subcommand("convert-kitti-calib", "convert a KITTI calib file to the native format");
  kitti_cmd->add_option("input", kitti_args.input, "KITTI calib_*.txt")->required();
  kitti_cmd->add_option("output", kitti_args.output, "native calibration output")->required();
  kitti_cmd->add_option("--camera", kitti_args.camera, "projection matrix key")->capture_default_str();
  kitti_cmd->add_option("--width", kitti_args.width, "image width in pixels")->capture_default_str();
  kitti_cmd->add_option("--height", kitti_args.height, "image height in pixels")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) cmd_run(run_args);
    if (*eval_cmd) cmd_eval(eval_args);
    if (*export_cmd) cmd_export(export_args);
    if (*synth_cmd) cmd_synth(synth_args);
    if (*kitti_cmd) cmd_kitti(kitti_args);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return exit_code(f.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
