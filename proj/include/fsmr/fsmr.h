/*
 * Copyright 2026 The FSMR Authors
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

/*
 * C interface to the FSMR library: synthetic data generation, training,
 * evaluation and the ablation / strategy sweep harness.
 *
 * Every object is an opaque handle released by its *_free function (which
 * accepts NULL). Functions return an fsmr_status; on failure the message
 * is available from fsmr_last_error() on the calling thread until the next
 * failing call. Status values double as the CLI exit codes.
 */
#ifndef FSMR_FSMR_H
#define FSMR_FSMR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FSMR_BUILDING_LIBRARY)
#    define FSMR_API __declspec(dllexport)
#  else
#    define FSMR_API __declspec(dllimport)
#  endif
#else
#  define FSMR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fsmr_status {
  FSMR_OK = 0,
  FSMR_ERR_CONFIG = 1,  /* usage or configuration error */
  FSMR_ERR_DATA = 2,    /* malformed dataset or checkpoint */
  FSMR_ERR_NUMERIC = 3, /* numeric contract violation */
  FSMR_ERR_INTERNAL = 4
} fsmr_status;

typedef enum fsmr_category {
  FSMR_CAT_AT = 0,
  FSMR_CAT_D1 = 1,
  FSMR_CAT_AF = 2,
  FSMR_CAT_D2 = 3
} fsmr_category;

typedef enum fsmr_experiment {
  FSMR_EXPERIMENT_ABLATE = 0,
  FSMR_EXPERIMENT_SWEEP_SWAP = 1,
  FSMR_EXPERIMENT_SWEEP_ATTN = 2
} fsmr_experiment;

typedef struct fsmr_config fsmr_config;
typedef struct fsmr_dataset fsmr_dataset;
typedef struct fsmr_model fsmr_model;
typedef struct fsmr_metrics fsmr_metrics;
typedef struct fsmr_table fsmr_table;

/* Called after every training epoch. `label` names the experiment arm and
 * is an empty string for plain training runs. */
typedef void (*fsmr_epoch_callback)(const char* label, size_t epoch, double mean_loss,
                                    double val_accuracy, void* user);

FSMR_API const char* fsmr_version(void);
FSMR_API const char* fsmr_last_error(void);

/* Configuration (JSON object; unknown keys are rejected). */
FSMR_API fsmr_status fsmr_config_default(fsmr_config** out);
FSMR_API fsmr_status fsmr_config_load(const char* path, fsmr_config** out);
FSMR_API fsmr_status fsmr_config_parse(const char* json, fsmr_config** out);
FSMR_API fsmr_status fsmr_config_set_data_dir(fsmr_config* cfg, const char* dir);
/* Writes the canonical JSON into buf (NUL-terminated) and the untruncated
 * length into *needed. Pass buf = NULL to query the size. */
FSMR_API fsmr_status fsmr_config_to_json(const fsmr_config* cfg, char* buf, size_t size,
                                         size_t* needed);
FSMR_API void fsmr_config_free(fsmr_config* cfg);

/* Datasets (JSON lines). */
FSMR_API fsmr_status fsmr_generate_splits(const fsmr_config* cfg, const char* out_dir);
FSMR_API fsmr_status fsmr_dataset_read(const char* path, fsmr_dataset** out);
FSMR_API fsmr_status fsmr_dataset_write(const fsmr_dataset* data, const char* path);
FSMR_API size_t fsmr_dataset_size(const fsmr_dataset* data);
FSMR_API void fsmr_dataset_free(fsmr_dataset* data);

/* Training. `data_dir` may be NULL to use the config's data_dir, or to
 * generate data in memory when that is empty too. On success *model holds
 * the best-validation parameters and *metrics the test metrics with the
 * loss curve. Either output pointer may be NULL. */
FSMR_API fsmr_status fsmr_train(const fsmr_config* cfg, const char* data_dir,
                                fsmr_epoch_callback on_epoch, void* user, fsmr_model** model,
                                fsmr_metrics** metrics);

FSMR_API fsmr_status fsmr_model_save(const fsmr_model* model, const char* path);
FSMR_API fsmr_status fsmr_model_load(const char* path, fsmr_model** out);
FSMR_API fsmr_status fsmr_model_select(const fsmr_model* model, const fsmr_dataset* data,
                                       size_t index, size_t* choice);
FSMR_API void fsmr_model_free(fsmr_model* model);

/* Evaluation. */
FSMR_API fsmr_status fsmr_evaluate(const fsmr_model* model, const fsmr_dataset* data,
                                   fsmr_metrics** out);
FSMR_API double fsmr_metrics_accuracy(const fsmr_metrics* m);
FSMR_API double fsmr_metrics_dist(const fsmr_metrics* m, fsmr_category category);
FSMR_API size_t fsmr_metrics_epochs(const fsmr_metrics* m);
FSMR_API fsmr_status fsmr_metrics_write_json(const fsmr_metrics* m, const char* path);
FSMR_API fsmr_status fsmr_metrics_write_csv(const fsmr_metrics* m, const char* path);
FSMR_API void fsmr_metrics_free(fsmr_metrics* m);

/* Ablation matrix and strategy sweeps. With more than one seed, per-arm
 * mean rows follow the per-seed rows. */
FSMR_API fsmr_status fsmr_run_experiment(const fsmr_config* cfg, fsmr_experiment kind,
                                         const uint64_t* seeds, size_t num_seeds,
                                         fsmr_epoch_callback on_epoch, void* user,
                                         fsmr_table** out);
FSMR_API size_t fsmr_table_rows(const fsmr_table* table);
FSMR_API fsmr_status fsmr_table_row(const fsmr_table* table, size_t index, const char** label,
                                    const char** seed, double* val_accuracy,
                                    double* test_accuracy);
FSMR_API fsmr_status fsmr_table_write_csv(const fsmr_table* table, const char* path);
FSMR_API void fsmr_table_free(fsmr_table* table);

#ifdef __cplusplus
}
#endif

#endif /* FSMR_FSMR_H */
