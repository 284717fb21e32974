// Copyright 2026 The patchpose Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the patchpose library. Objects are opaque handles created
 * by *_new / *_load / *_train functions and released with *_free. Every
 * fallible call returns a pp_status; on failure pp_last_error() describes
 * the problem. Strings returned through char** are owned by the caller and
 * released with pp_string_free. */

#ifndef PATCHPOSE_PATCHPOSE_H_
#define PATCHPOSE_PATCHPOSE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PP_API __declspec(dllexport)
#else
#define PP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pp_status {
  PP_OK = 0,
  PP_ERR_INVALID_ARGUMENT = 1,
  PP_ERR_CONFIG = 2,
  PP_ERR_IO = 3,
  PP_ERR_GATE = 4,
  PP_ERR_DEGENERATE = 5,
  PP_ERR_RUNTIME = 6
} pp_status;

typedef enum pp_family {
  PP_FAMILY_YAW = 0,
  PP_FAMILY_ROLL = 1,
  PP_FAMILY_LOOM = 2,
  PP_FAMILY_GRID = 3
} pp_family;

/* Training support: yaw in [-yaw_max, yaw_max], roll in [-roll_max,
 * roll_max] (degrees), depth in [z_lo, z_hi]. */
typedef struct pp_support {
  double yaw_max;
  double roll_max;
  double z_lo;
  double z_hi;
} pp_support;

typedef struct pp_config pp_config;
typedef struct pp_model pp_model;
typedef struct pp_patch pp_patch;
typedef struct pp_sweep pp_sweep;
typedef struct pp_grid pp_grid;

PP_API const char* pp_version(void);
/* Message of the last failed call on this thread; empty after success. */
PP_API const char* pp_last_error(void);
PP_API void pp_string_free(char* s);
/* Worker threads for parallel loops. Results never depend on it. */
PP_API void pp_set_jobs(int jobs);
/* Progress lines on stderr for long-running calls. */
PP_API void pp_set_verbose(int verbose);

/* Configuration -------------------------------------------------------- */

/* preset: "desk" or "full"; NULL means "desk". */
PP_API pp_status pp_config_new(const char* preset, pp_config** out);
PP_API pp_status pp_config_parse(const char* json, pp_config** out);
PP_API pp_status pp_config_load(const char* path, pp_config** out);
/* pointer is a JSON pointer such as "/attack/n_batches"; value is JSON text
 * (bare words are taken as strings). */
PP_API pp_status pp_config_set(pp_config* config, const char* pointer, const char* value);
PP_API pp_status pp_config_set_seed(pp_config* config, uint64_t seed);
PP_API pp_status pp_config_set_out_dir(pp_config* config, const char* dir);
PP_API pp_status pp_config_out_dir(const pp_config* config, char** out);
PP_API pp_status pp_config_to_json(const pp_config* config, char** out);
/* Numeric field by JSON pointer, e.g. "/model/min_val_accuracy". */
PP_API pp_status pp_config_get_number(const pp_config* config, const char* pointer, double* out);
PP_API void pp_config_free(pp_config* config);

/* Classifier ------------------------------------------------------------ */

/* Trains on the config's synthetic dataset. Does not apply the accuracy
 * gate; compare val_accuracy yourself. metrics_json may be NULL. */
PP_API pp_status pp_model_train(const pp_config* config, pp_model** out, double* val_accuracy,
                                char** metrics_json);
PP_API pp_status pp_model_save(const pp_model* model, const char* path);
PP_API pp_status pp_model_load(const char* path, pp_model** out);
PP_API pp_status pp_model_num_classes(const pp_model* model, int* out);
/* image: height * width * 3 values in [0, 1], row-major, interleaved. */
PP_API pp_status pp_model_predict(const pp_model* model, const double* image, int height, int width,
                                  int* out_class);
PP_API void pp_model_free(pp_model* model);

/* Target tiers ---------------------------------------------------------- */

/* JSON {"high": [...], "mid": [...], "low": [...], "scores": [...]}. */
PP_API pp_status pp_targets_rank(const pp_config* config, const pp_model* model, char** tiers_json);
/* Explicit config tiers, else <out_dir>/tiers.json, else a fresh ranking
 * saved there. */
PP_API pp_status pp_targets_resolve(const pp_config* config, const pp_model* model,
                                    char** tiers_json);

/* Tiers known without computing: explicit config tiers, else
 * <out_dir>/tiers.json, else placeholder ids with the configured tier sizes
 * (*placeholder set to 1). */
PP_API pp_status pp_targets_known(const pp_config* config, char** tiers_json, int* placeholder);

/* Patches --------------------------------------------------------------- */

/* Canonical directory name of a support, e.g. "y20_r0_z7-7". */
PP_API pp_status pp_support_id(const pp_support* support, char** out);

PP_API pp_status pp_patch_train(const pp_config* config, const pp_model* model, int target,
                                const pp_support* support, pp_patch** out);
/* PNG plus a JSON sidecar next to it. */
PP_API pp_status pp_patch_save(const pp_patch* patch, const char* png_path);
PP_API pp_status pp_patch_load(const char* png_path, pp_patch** out);
PP_API pp_status pp_patch_target(const pp_patch* patch, int* out);
PP_API void pp_patch_free(pp_patch* patch);

/* Evaluation ------------------------------------------------------------ */

/* family: yaw, roll or loom; sampling comes from the config. */
PP_API pp_status pp_sweep_run(const pp_config* config, const pp_model* model, const pp_patch* patch,
                              pp_family family, pp_sweep** out);
PP_API pp_status pp_sweep_size(const pp_sweep* sweep, size_t* out);
PP_API pp_status pp_sweep_point(const pp_sweep* sweep, size_t i, double* phi, double* success);
/* Normalized trapezoidal area of the curve (the per-class mAST term). */
PP_API pp_status pp_sweep_mast(const pp_sweep* sweep, double* out);
PP_API pp_status pp_sweep_write_csv(const pp_sweep* sweep, const char* path);
PP_API void pp_sweep_free(pp_sweep* sweep);

PP_API pp_status pp_grid_run(const pp_config* config, const pp_model* model, const pp_patch* patch,
                             pp_grid** out);
/* rows follow yaw, columns follow roll. */
PP_API pp_status pp_grid_dims(const pp_grid* grid, size_t* rows, size_t* cols);
PP_API pp_status pp_grid_cell(const pp_grid* grid, size_t row, size_t col, double* yaw, double* roll,
                              double* success);
PP_API pp_status pp_grid_write_csv(const pp_grid* grid, const char* path);
PP_API void pp_grid_free(pp_grid* grid);

/* mAST over sweep CSV files that share one sampling. */
PP_API pp_status pp_mast_from_csv(const char* const* paths, size_t n, double* out);

/* Experiments ----------------------------------------------------------- */

/* Job plan JSON for a family given tiers JSON (as from pp_targets_rank). */
PP_API pp_status pp_experiment_plan(const pp_config* config, pp_family family,
                                    const char* tiers_json, char** plan_json);
/* Runs all jobs under <out_dir>/<family>/ and writes the report. The
 * summary JSON holds the plan and the counters actually observed. */
PP_API pp_status pp_experiment_run(const pp_config* config, const pp_model* model, pp_family family,
                                   char** summary_json);
/* Re-aggregates <out_dir>/<family>/ into mast.csv, table.md and plots;
 * returns the table as markdown. Tiers come from tiers_json or, when NULL,
 * from <out_dir>/tiers.json. */
PP_API pp_status pp_report(const pp_config* config, pp_family family, const char* tiers_json,
                           char** table_markdown);
/* One SVG named after the CSV in out_dir; the written path is returned. */
PP_API pp_status pp_plot_csv(const char* csv_path, const char* out_dir, char** svg_path);
/* Schema check of any CSV the library writes. */
PP_API pp_status pp_validate_csv(const char* csv_path);

#ifdef __cplusplus
}
#endif

#endif /* PATCHPOSE_PATCHPOSE_H_ */
