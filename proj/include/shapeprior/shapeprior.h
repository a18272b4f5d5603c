// ----------------------------------------------------------------------------
// Copyright 2026 The shapeprior Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ----------------------------------------------------------------------------

#ifndef SHAPEPRIOR_SHAPEPRIOR_H
#define SHAPEPRIOR_SHAPEPRIOR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(SHAPEPRIOR_CAPI_BUILD)
#define SP_API __declspec(dllexport)
#else
#define SP_API __declspec(dllimport)
#endif
#else
#define SP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/*
 * shapeprior library: C interface.
 *
 * Every fallible call returns an sp_status. On failure the message of the
 * last error on the calling thread is available through sp_last_error().
 * Strings returned through char** out-parameters are owned by the caller and
 * released with sp_string_free(). Handles are released with their *_free
 * function; passing NULL to a *_free function is a no-op.
 *
 * JSON configuration arguments may be NULL or "" to use the defaults.
 */

typedef enum sp_status {
  SP_OK = 0,
  SP_ERR_INVALID_ARGUMENT = 1, /* NULL handle, bad enum, negative count */
  SP_ERR_IO = 2,               /* missing file, unwritable path */
  SP_ERR_FORMAT = 3,           /* malformed volume / checkpoint contents */
  SP_ERR_STRUCTURAL = 4,       /* shape, dims or index disagreements */
  SP_ERR_CONFIG = 5,           /* invalid JSON configuration */
  SP_ERR_NUMERIC = 6,          /* NaN or divergence during optimization */
  SP_ERR_USAGE = 7,            /* API used out of order */
  SP_ERR_INTERNAL = 8
} sp_status;

typedef struct sp_volume sp_volume;
typedef struct sp_model sp_model;
typedef struct sp_plan sp_plan;

typedef void (*sp_log_fn)(const char* message, void* user);
typedef void (*sp_epoch_fn)(int epoch, double objective, double dice, double cross_entropy, void* user);

SP_API const char* sp_version(void);
SP_API const char* sp_status_name(sp_status status);
SP_API const char* sp_last_error(void);
SP_API void sp_string_free(char* s);

/* ---- label volumes (SEGV1) ------------------------------------------- */

SP_API sp_status sp_volume_create(const int dims[3], const double spacing_mm[3], int n_class, const uint8_t* labels,
                                  sp_volume** out);
SP_API sp_status sp_volume_read(const char* path, sp_volume** out);
SP_API sp_status sp_volume_write(const sp_volume* volume, const char* path);
SP_API sp_status sp_volume_info(const sp_volume* volume, int dims[3], double spacing_mm[3], int* n_class);
/* Borrowed pointer valid until the volume is freed. */
SP_API sp_status sp_volume_labels(const sp_volume* volume, const uint8_t** labels, size_t* count);
SP_API void sp_volume_free(sp_volume* volume);

/* ---- phantom populations --------------------------------------------- */

/* name: "organs", "muscle" or "muscle-shifted". */
SP_API sp_status sp_phantom_default_spec(const char* name, char** spec_json);
/* Writes <out_dir>/<split>/subject_NNN.segv and <out_dir>/population.json;
 * returns the population manifest. */
SP_API sp_status sp_phantom_generate(const char* spec_json, uint64_t seed, const char* out_dir, char** manifest_json);

/* ---- training and checkpoints ---------------------------------------- */

SP_API sp_status sp_train(const sp_volume* const* volumes, const char* const* shape_ids, size_t count,
                          const char* config_json, sp_epoch_fn on_epoch, void* user, sp_model** out);
SP_API sp_status sp_model_read(const char* path, sp_model** out);
SP_API sp_status sp_model_write(const sp_model* model, const char* path);
/* {"descriptor": {...}, "latents": [...], "manifest": {...}, "parameter_checksum": "..."} */
SP_API sp_status sp_model_info(const sp_model* model, char** json);
/* Per-epoch CSV of a model trained in this process; header only otherwise. */
SP_API sp_status sp_model_history_csv(const sp_model* model, char** csv);
SP_API void sp_model_free(sp_model* model);

/* ---- slice plans ----------------------------------------------------- */

SP_API sp_status sp_plan_equidistant(int k, int nz, sp_plan** out);
SP_API sp_status sp_plan_uc1(const sp_model* model, const sp_volume* const* train_set, size_t count, int max_slices,
                             const char* infer_config_json, int threads, sp_log_fn log, void* user, sp_plan** out);
/* adaptation_set must hold exactly three volumes. */
SP_API sp_status sp_plan_uc2(const sp_model* model, const sp_volume* const* adaptation_set, size_t count, int max_slices,
                             const char* infer_config_json, int threads, sp_log_fn log, void* user, sp_plan** out);
SP_API sp_status sp_plan_from_json(const char* json, sp_plan** out);
/* [{"kind": "absolute"|"percent", "value": number}, ...] */
SP_API sp_status sp_plan_to_json(const sp_plan* plan, char** json);
SP_API sp_status sp_plan_read(const char* path, sp_plan** out);
SP_API sp_status sp_plan_write(const sp_plan* plan, const char* path);
/* {"strategy": ..., "provenance": ..., "events": [{"kind", "detail"}, ...]} */
SP_API sp_status sp_plan_info(const sp_plan* plan, char** json);
SP_API sp_status sp_plan_set_provenance(sp_plan* plan, const char* provenance);
SP_API sp_status sp_plan_size(const sp_plan* plan, size_t* size);
SP_API sp_status sp_plan_prefix(const sp_plan* plan, size_t k, sp_plan** out);
/* Sorted, deduplicated axial indices on this volume; count receives the
 * number of indices even when capacity is too small (then nothing is copied
 * and SP_ERR_INVALID_ARGUMENT is returned). */
SP_API sp_status sp_plan_resolve(const sp_plan* plan, const sp_volume* volume, int* indices, size_t capacity,
                                 size_t* count);
SP_API void sp_plan_free(sp_plan* plan);

/* ---- inference ------------------------------------------------------- */

/* Annotates the plan's slices from gt (simulated expert), fits a latent and
 * predicts the full volume. probability_path (optional) receives the
 * per-voxel class probabilities; fit_json (optional) the fit summary. */
SP_API sp_status sp_infer_from_gt(const sp_model* model, const sp_plan* plan, const sp_volume* gt,
                                  const char* infer_config_json, const char* probability_path, sp_volume** prediction,
                                  char** fit_json);

/* ---- evaluation ------------------------------------------------------ */

/* CSV rows (subject_id,strategy,n_slices,class_id,dsc,asd_mm,hd_max_mm,
 * vol_err_pct) for every foreground class, with the header line when
 * with_header is nonzero. Undefined entries are written as NA. */
SP_API sp_status sp_evaluate(const sp_volume* const* predictions, const sp_volume* const* ground_truths,
                             const char* const* subject_ids, size_t count, const char* strategy, int n_slices,
                             int threads, int with_header, char** csv);
/* Reads a metrics CSV and writes summary.csv plus one plot-ready CSV per
 * metric into out_dir; returns the summary table as text. */
SP_API sp_status sp_report(const char* csv_path, const char* out_dir, char** summary);

#ifdef __cplusplus
}
#endif

#endif /* SHAPEPRIOR_SHAPEPRIOR_H */
