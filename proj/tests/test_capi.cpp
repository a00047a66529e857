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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <box3d/box3d.h>

#include <cstring>
#include <string>

#include "cli_harness.hpp"

namespace fs = std::filesystem;
using box3d::cli_test::run_cli;
using box3d::cli_test::slurp;
using box3d::cli_test::spit;

namespace {

struct Scratch {
  fs::path root;
  explicit Scratch(const std::string& tag) {
    root = fs::temp_directory_path() / ("box3d_api_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
  fs::path operator/(const std::string& s) const { return root / s; }
};

// Synthesizes a default sequence through the C API; returns the manifest.
std::string synth(const fs::path& dir, const char* key = nullptr, const char* value = nullptr) {
  box3d_synth_spec* spec = nullptr;
  REQUIRE(box3d_synth_spec_create(&spec) == BOX3D_OK);
  if (key) REQUIRE(box3d_synth_spec_set(spec, key, value) == BOX3D_OK);
  box3d_synth_result* res = nullptr;
  REQUIRE(box3d_synth_generate(spec, dir.string().c_str(), &res) == BOX3D_OK);
  std::string manifest = box3d_synth_result_manifest(res);
  CHECK(fs::path(box3d_synth_result_ground_truth(res)) == dir / "gt.txt");
  box3d_synth_result_destroy(res);
  box3d_synth_spec_destroy(spec);
  return manifest;
}

}  // namespace

TEST_CASE("version, status names and error reporting") {
  CHECK(std::string(box3d_version()) == "0.1.0");
  CHECK(std::string(box3d_status_name(BOX3D_ERR_INPUT)).size() > 0);
  box3d_config* cfg = nullptr;
  REQUIRE(box3d_config_create(&cfg) == BOX3D_OK);
  CHECK(box3d_config_set(cfg, "voxel_r", "zero") == BOX3D_ERR_CONFIG);
  CHECK(std::string(box3d_last_error()).find("voxel_r") != std::string::npos);
  CHECK(box3d_config_set(cfg, "nope", "1") == BOX3D_ERR_CONFIG);
  CHECK(box3d_config_set(nullptr, "voxel_r", "1") == BOX3D_ERR_ARGUMENT);
  CHECK(box3d_config_set(cfg, nullptr, "1") == BOX3D_ERR_ARGUMENT);
  CHECK(box3d_config_create(nullptr) == BOX3D_ERR_ARGUMENT);
  box3d_config_destroy(cfg);
  box3d_config_destroy(nullptr);
}

TEST_CASE("configuration keys, validation and dump") {
  CHECK(box3d_config_key_count() == 17);
  CHECK(std::string(box3d_config_key(11)) == "voxel_r");
  CHECK(box3d_config_key(17) == nullptr);
  box3d_config* cfg = nullptr;
  REQUIRE(box3d_config_create(&cfg) == BOX3D_OK);
  CHECK(box3d_config_validate(cfg) == BOX3D_OK);
  REQUIRE(box3d_config_set(cfg, "voxel_r", "0.3") == BOX3D_OK);
  CHECK(std::string(box3d_config_dump(cfg)).find("voxel_r=0.3\n") != std::string::npos);
  REQUIRE(box3d_config_set(cfg, "map_leaf", "0.5") == BOX3D_OK);
  CHECK(box3d_config_validate(cfg) == BOX3D_ERR_CONFIG);
  box3d_config_destroy(cfg);
}

TEST_CASE("synthesize, run, export and evaluate through the C API") {
  Scratch s("run");
  const std::string manifest = synth(s / "seq");
  box3d_pipeline* p = nullptr;
  REQUIRE(box3d_pipeline_run(manifest.c_str(), nullptr, &p) == BOX3D_OK);
  CHECK(box3d_pipeline_object_count(p) == 3);
  CHECK(box3d_pipeline_map_size(p) > 1000);
  CHECK(box3d_pipeline_warning_count(p) == 0);
  CHECK(box3d_pipeline_warning(p, 0) == nullptr);
  box3d_object o0, o1;
  REQUIRE(box3d_pipeline_object(p, 0, &o0) == BOX3D_OK);
  REQUIRE(box3d_pipeline_object(p, 1, &o1) == BOX3D_OK);
  CHECK(o0.object_id < o1.object_id);
  CHECK(o0.class_id == 2);
  CHECK(o0.min[0] < o0.max[0]);
  CHECK(box3d_pipeline_object(p, 3, &o0) == BOX3D_ERR_ARGUMENT);
  box3d_timing t;
  REQUIRE(box3d_pipeline_timing(p, &t) == BOX3D_OK);
  CHECK(t.scans == 10);
  CHECK(t.layer1.samples == 10);

  const std::string reg = (s / "reg.txt").string();
  REQUIRE(box3d_pipeline_write_registry(p, reg.c_str()) == BOX3D_OK);
  CHECK(slurp(reg).find("# config voxel_r=0.2") != std::string::npos);
  REQUIRE(box3d_pipeline_write_ply(p, (s / "map.ply").string().c_str()) == BOX3D_OK);
  CHECK(slurp(s / "map.ply").rfind("ply\n", 0) == 0);
  CHECK(box3d_pipeline_write_registry(p, "/nonexistent_dir_for_box3d/r.txt") == BOX3D_ERR_IO);

  const std::string gt = (s / "seq" / "gt.txt").string();
  box3d_report* rep = nullptr;
  REQUIRE(box3d_evaluate_pipeline(p, gt.c_str(), nullptr, &rep) == BOX3D_OK);
  box3d_eval_summary sum;
  REQUIRE(box3d_report_summary(rep, &sum) == BOX3D_OK);
  CHECK(sum.miou >= 90.0);
  CHECK(sum.matched == 3);
  CHECK(sum.classes == 1);
  CHECK(std::string(box3d_report_json(rep)).find("\"timing\"") != std::string::npos);
  box3d_report_destroy(rep);

  box3d_report* from_file = nullptr;
  REQUIRE(box3d_evaluate_files(reg.c_str(), gt.c_str(), nullptr, nullptr, &from_file) == BOX3D_OK);
  box3d_eval_summary sum2;
  REQUIRE(box3d_report_summary(from_file, &sum2) == BOX3D_OK);
  // The export rounds to 6 decimals.
  CHECK(sum2.miou == doctest::Approx(sum.miou).epsilon(1e-4));
  CHECK(std::string(box3d_report_table(from_file)).find("mIoU") != std::string::npos);
  box3d_report_destroy(from_file);
  box3d_pipeline_destroy(p);
}

TEST_CASE("C API input errors carry structured messages") {
  Scratch s("errors");
  box3d_pipeline* p = nullptr;
  CHECK(box3d_pipeline_run((s / "missing.txt").string().c_str(), nullptr, &p) == BOX3D_ERR_INPUT);
  CHECK(p == nullptr);
  CHECK(std::string(box3d_last_error()).find("missing.txt") != std::string::npos);
  CHECK(box3d_pipeline_run(nullptr, nullptr, &p) == BOX3D_ERR_ARGUMENT);

  box3d_synth_spec* spec = nullptr;
  REQUIRE(box3d_synth_spec_create(&spec) == BOX3D_OK);
  CHECK(box3d_synth_spec_set(spec, "scans", "many") == BOX3D_ERR_CONFIG);
  CHECK(box3d_synth_spec_set(spec, "colour", "red") == BOX3D_ERR_CONFIG);
  CHECK(box3d_synth_spec_set(spec, "object", "0,0,0,1,1") == BOX3D_ERR_CONFIG);
  CHECK(box3d_synth_spec_set(spec, "object", "8,-1,0,10,1,1.5,3") == BOX3D_OK);
  CHECK(box3d_synth_spec_set(spec, "withhold", "1,2") == BOX3D_OK);
  box3d_synth_spec_destroy(spec);

  spit(s / "kitti.txt", "P2: 700 0 600 0 0 700 180 0 0 0 1 0\nTr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n");
  const std::string out = (s / "calib.txt").string();
  CHECK(box3d_convert_kitti_calibration((s / "kitti.txt").string().c_str(), "P2", 1242, 375, out.c_str()) == BOX3D_OK);
  CHECK(slurp(out).find("K: 700 700 600 180") != std::string::npos);
  CHECK(box3d_convert_kitti_calibration((s / "kitti.txt").string().c_str(), "P2", 0, 375, out.c_str()) ==
        BOX3D_ERR_CONFIG);
  CHECK(box3d_convert_kitti_calibration((s / "kitti.txt").string().c_str(), "P1", 10, 10, out.c_str()) ==
        BOX3D_ERR_INPUT);
}

TEST_CASE("CLI help documents every subcommand and tunable") {
  Scratch s("help");
  const auto top = run_cli({"--help"}, s.root);
  CHECK(top.exit_code == 0);
  CHECK(top.out.find("Exit codes: 0 success, 1 input error, 2 config error") != std::string::npos);
  for (const char* sub : {"run", "eval", "export", "synth", "convert-kitti-calib"}) {
    CHECK(top.out.find(sub) != std::string::npos);
    CHECK(run_cli({sub, "--help"}, s.root).exit_code == 0);
  }
  const auto run = run_cli({"run", "--help"}, s.root);
  for (std::size_t i = 0; i < box3d_config_key_count(); ++i) {
    std::string flag = std::string("--") + box3d_config_key(i);
    for (char& c : flag)
      if (c == '_') c = '-';
    CHECK_MESSAGE(run.out.find(flag) != std::string::npos, flag);
  }
  CHECK(run_cli({"--version"}, s.root).out.find("0.1.0") != std::string::npos);
}

TEST_CASE("CLI exit codes separate input, config and usage errors") {
  Scratch s("exit");
  CHECK(run_cli({"synth", (s / "seq").string(), "--scans", "3"}, s.root).exit_code == 0);
  const std::string manifest = (s / "seq" / "manifest.txt").string();
  const auto ok = run_cli({"run", manifest, "-o", (s / "r.txt").string(), "--gt", (s / "seq/gt.txt").string()},
                          s.root);
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("objects 3") != std::string::npos);
  CHECK(ok.out.find("mIoU") != std::string::npos);

  const auto missing = run_cli({"run", (s / "nope.txt").string()}, s.root);
  CHECK(missing.exit_code == 1);
  CHECK(missing.err.rfind("error: ", 0) == 0);

  CHECK(run_cli({"run", manifest, "--voxel-r", "-1"}, s.root).exit_code == 2);
  CHECK(run_cli({"run", manifest, "--set", "bogus=1"}, s.root).exit_code == 2);
  CHECK(run_cli({"run", manifest, "--no-such-flag"}, s.root).exit_code == 2);
  CHECK(run_cli({"frobnicate"}, s.root).exit_code == 2);
  CHECK(run_cli({"synth", (s / "bad").string(), "--dropout", "2"}, s.root).exit_code == 2);
  CHECK(run_cli({"eval", (s / "r.txt").string(), (s / "seq/gt.txt").string(), "--format", "xml"}, s.root).exit_code ==
        2);

  const auto ev = run_cli({"eval", (s / "r.txt").string(), (s / "seq/gt.txt").string(), "--format", "json"}, s.root);
  CHECK(ev.exit_code == 0);
  CHECK(ev.out.find("\"miou\"") != std::string::npos);
  const auto ex = run_cli({"export", manifest, (s / "m.ply").string()}, s.root);
  CHECK(ex.exit_code == 0);
  CHECK(slurp(s / "m.ply").rfind("ply\n", 0) == 0);
}

TEST_CASE("CLI tunable flags and --set select the same configuration") {
  Scratch s("flags");
  REQUIRE(run_cli({"synth", (s / "seq").string(), "--scans", "2"}, s.root).exit_code == 0);
  const std::string manifest = (s / "seq" / "manifest.txt").string();
  REQUIRE(run_cli({"run", manifest, "-q", "-o", (s / "a.txt").string(), "--voxel-r", "0.3", "--matching",
                   "hungarian"},
                  s.root)
              .exit_code == 0);
  REQUIRE(run_cli({"run", manifest, "-q", "-o", (s / "b.txt").string(), "--set", "matching=hungarian", "--set",
                   "voxel_r=0.3"},
                  s.root)
              .exit_code == 0);
  const std::string a = slurp(s / "a.txt");
  CHECK(a == slurp(s / "b.txt"));
  CHECK(a.find("# config voxel_r=0.3\n") != std::string::npos);

  // --class-agnostic-merge is an alias of --class-agnostic.
  REQUIRE(run_cli({"run", manifest, "-q", "-o", (s / "c.txt").string(), "--class-agnostic-merge", "true"}, s.root)
              .exit_code == 0);
  CHECK(slurp(s / "c.txt").find("# config class_agnostic=true\n") != std::string::npos);
}

TEST_CASE("CLI KITTI calibration conversion") {
  Scratch s("kitti");
  spit(s / "kitti.txt",
       "P0: 700 0 600 0 0 700 180 0 0 0 1 0\nP2: 700 0 600 42 0 700 180 0 0 0 1 0\nR0_rect: 1 0 0 0 1 0 0 0 1\n"
       "Tr_velo_to_cam: 0 -1 0 0 0 0 -1 0 1 0 0 0\n");
  const auto r = run_cli({"convert-kitti-calib", (s / "kitti.txt").string(), (s / "c.txt").string()}, s.root);
  CHECK(r.exit_code == 0);
  const std::string c = slurp(s / "c.txt");
  CHECK(c.find("size: 1242 375") != std::string::npos);
  CHECK(c.find("Tr: 0 -1 0 0.06 0 0 -1 0 1 0 0 0") != std::string::npos);
  CHECK(run_cli({"convert-kitti-calib", (s / "kitti.txt").string(), (s / "c.txt").string(), "--camera", "P7"},
                s.root)
            .exit_code == 1);
}

TEST_CASE("malformed corpus exits 1 with structured messages and never crashes") {
  Scratch s("malformed");
  const auto cases = box3d::cli_test::build_malformed_corpus(s / "corpus");
  REQUIRE(cases.size() >= 4);
  for (const auto& c : cases) {
    const auto r = run_cli({"run", c.manifest.string(), "-q", "-o", (s / "out.txt").string()}, s / "log");
    INFO(c.name << ": " << r.err);
    CHECK_FALSE(r.crashed);
    CHECK(r.exit_code == 1);
    CHECK(r.err.rfind("error: ", 0) == 0);
    CHECK(r.err.find(c.expected) != std::string::npos);
  }
}
