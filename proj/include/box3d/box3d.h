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

/* C interface of the box3d camera-LiDAR 3D box pipeline.
 *
 * Every function that can fail returns a box3d_status. On failure a
 * description is available from box3d_last_error() on the same thread until
 * the next failing call. Handles are opaque and owned by the caller, who
 * releases them with the matching *_destroy function (NULL is accepted).
 * Strings returned by accessors stay valid until the owning handle is
 * destroyed. Distinct handles may be used from different threads; a single
 * handle must not be used concurrently.
 */
#ifndef BOX3D_BOX3D_H
#define BOX3D_BOX3D_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(BOX3D_BUILDING_LIBRARY)
#define BOX3D_API __declspec(dllexport)
#else
#define BOX3D_API __declspec(dllimport)
#endif
#else
#define BOX3D_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum box3d_status {
  BOX3D_OK = 0,
  BOX3D_ERR_INPUT = 1,    /* malformed or inconsistent input data */
  BOX3D_ERR_CONFIG = 2,   /* invalid tunable or synthetic parameter */
  BOX3D_ERR_IO = 3,       /* output could not be written */
  BOX3D_ERR_GEOMETRY = 4, /* frame mismatch or degenerate geometry */
  BOX3D_ERR_ARGUMENT = 5, /* NULL handle, index out of range */
  BOX3D_ERR_INTERNAL = 6
} box3d_status;

typedef struct box3d_config box3d_config;
typedef struct box3d_pipeline box3d_pipeline;
typedef struct box3d_report box3d_report;
typedef struct box3d_synth_spec box3d_synth_spec;
typedef struct box3d_synth_result box3d_synth_result;

typedef struct box3d_object {
  int64_t object_id;
  int32_t class_id;
  int32_t observation_count;
  uint64_t point_count;
  double centroid[3];
  double min[3]; /* world-frame axis-aligned box */
  double max[3];
} box3d_object;

typedef struct box3d_layer_timing {
  double mean_ms;
  double max_ms;
  double total_ms;
  uint64_t samples;
} box3d_layer_timing;

typedef struct box3d_timing {
  box3d_layer_timing layer1; /* detections to per-scan boxes */
  box3d_layer_timing layer2; /* registry pairing and merging */
  box3d_layer_timing layer3; /* global-map refinement */
  box3d_layer_timing total;  /* whole scan step, file I/O excluded */
  uint64_t scans;
} box3d_timing;

typedef struct box3d_eval_summary {
  double miou; /* percent */
  uint64_t matched;
  uint64_t unmatched_gt;
  uint64_t unmatched_pred;
  uint64_t classes;
} box3d_eval_summary;

BOX3D_API const char* box3d_version(void);
BOX3D_API const char* box3d_last_error(void);
BOX3D_API const char* box3d_status_name(box3d_status status);

/* ---- configuration ---------------------------------------------------- */

BOX3D_API box3d_status box3d_config_create(box3d_config** out);
BOX3D_API void box3d_config_destroy(box3d_config* config);
/* Keys: conf_threshold nms_iou mask_threshold erode_radius erode_iterations
 * cluster_tolerance min_cluster_size overlap_metric overlap_threshold
 * class_agnostic registry_index voxel_r map_leaf refresh_period refine
 * refine_to_fixpoint matching. Ranges are checked by box3d_config_validate
 * and by every consumer. */
BOX3D_API box3d_status box3d_config_set(box3d_config* config, const char* key, const char* value);
BOX3D_API box3d_status box3d_config_validate(const box3d_config* config);
/* Number of configuration keys; box3d_config_key(i) names key i. */
BOX3D_API size_t box3d_config_key_count(void);
BOX3D_API const char* box3d_config_key(size_t index);
/* "key=value" lines joined by '\n'. */
BOX3D_API const char* box3d_config_dump(box3d_config* config);

/* ---- pipeline --------------------------------------------------------- */

/* Runs all scans of a manifest. `config` may be NULL for defaults. */
BOX3D_API box3d_status box3d_pipeline_run(const char* manifest_path, const box3d_config* config,
                                          box3d_pipeline** out);
BOX3D_API void box3d_pipeline_destroy(box3d_pipeline* pipeline);
BOX3D_API size_t box3d_pipeline_object_count(const box3d_pipeline* pipeline);
/* Objects in ascending id order. */
BOX3D_API box3d_status box3d_pipeline_object(const box3d_pipeline* pipeline, size_t index, box3d_object* out);
BOX3D_API size_t box3d_pipeline_map_size(const box3d_pipeline* pipeline);
BOX3D_API box3d_status box3d_pipeline_timing(const box3d_pipeline* pipeline, box3d_timing* out);
BOX3D_API size_t box3d_pipeline_warning_count(const box3d_pipeline* pipeline);
BOX3D_API const char* box3d_pipeline_warning(const box3d_pipeline* pipeline, size_t index);
/* Registry export with the effective configuration in its header. */
BOX3D_API box3d_status box3d_pipeline_write_registry(const box3d_pipeline* pipeline, const char* path);
/* Global map in white, object points colored per object. */
BOX3D_API box3d_status box3d_pipeline_write_ply(const box3d_pipeline* pipeline, const char* path);

/* ---- evaluation ------------------------------------------------------- */

/* Scores a registry export file. `class_map_path` may be NULL (identity);
 * `config` may be NULL and selects the matching protocol. */
BOX3D_API box3d_status box3d_evaluate_files(const char* registry_path, const char* ground_truth_path,
                                            const char* class_map_path, const box3d_config* config,
                                            box3d_report** out);
/* Scores a finished pipeline run; the report includes its timing. */
BOX3D_API box3d_status box3d_evaluate_pipeline(const box3d_pipeline* pipeline, const char* ground_truth_path,
                                               const char* class_map_path, box3d_report** out);
BOX3D_API void box3d_report_destroy(box3d_report* report);
BOX3D_API box3d_status box3d_report_summary(const box3d_report* report, box3d_eval_summary* out);
BOX3D_API const char* box3d_report_table(const box3d_report* report);
BOX3D_API const char* box3d_report_json(const box3d_report* report);

/* ---- synthetic sequences ---------------------------------------------- */

BOX3D_API box3d_status box3d_synth_spec_create(box3d_synth_spec** out);
BOX3D_API void box3d_synth_spec_destroy(box3d_synth_spec* spec);
/* Keys: objects scans step yaw sensor_height spacing sampling (jittered|grid)
 * sigma clutter dropout withhold (comma list of scan ids) coverage
 * mode (decoded|raw) confidence seed min_size max_size (x,y,z) gap class
 * object (min_x,min_y,min_z,max_x,max_y,max_z[,class]; repeatable)
 * undetected (comma list of object indices). */
BOX3D_API box3d_status box3d_synth_spec_set(box3d_synth_spec* spec, const char* key, const char* value);
BOX3D_API box3d_status box3d_synth_generate(const box3d_synth_spec* spec, const char* out_dir,
                                            box3d_synth_result** out);
BOX3D_API void box3d_synth_result_destroy(box3d_synth_result* result);
BOX3D_API const char* box3d_synth_result_manifest(const box3d_synth_result* result);
BOX3D_API const char* box3d_synth_result_ground_truth(const box3d_synth_result* result);
BOX3D_API size_t box3d_synth_result_warning_count(const box3d_synth_result* result);
BOX3D_API const char* box3d_synth_result_warning(const box3d_synth_result* result, size_t index);

/* ---- calibration ------------------------------------------------------ */

/* Composes a KITTI calib file (projection `camera_key`, R0_rect,
 * Tr_velo_to_cam) into the native calibration format. */
BOX3D_API box3d_status box3d_convert_kitti_calibration(const char* kitti_path, const char* camera_key, int width,
                                                       int height, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif /* BOX3D_BOX3D_H */
