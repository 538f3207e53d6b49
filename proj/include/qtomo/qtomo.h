// Copyright 2026 The qtomo Authors
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

/*
 * qtomo: quantum state tomography with classical and neural-network
 * estimators.
 *
 * Plain C interface over the C++ core. Objects are opaque handles created by
 * *_load / *_generate / *_create functions and released with the matching
 * *_free. Every fallible call returns a qt_status; on failure a description
 * is available from qt_last_error() on the same thread until the next call.
 *
 * Density matrices cross the boundary as 2*d*d doubles: row-major entries,
 * each as (real, imaginary).
 */

#ifndef QTOMO_QTOMO_H
#define QTOMO_QTOMO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(QTOMO_BUILDING_LIBRARY)
#    define QTOMO_API __declspec(dllexport)
#  else
#    define QTOMO_API __declspec(dllimport)
#  endif
#else
#  define QTOMO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qt_status {
    QT_OK = 0,
    QT_ERR_INVALID_ARGUMENT = 1,
    QT_ERR_DIMENSION = 2,
    QT_ERR_NUMERIC = 3,
    QT_ERR_IO = 4,
    QT_ERR_PARSE = 5,
    QT_ERR_INTEGRITY = 6,
    QT_ERR_INTERNAL = 7
} qt_status;

typedef enum qt_estimator {
    QT_ESTIMATOR_LI = 0,          /* linear inversion */
    QT_ESTIMATOR_LI_POS = 1,      /* linear inversion, negative eigenvalues clipped */
    QT_ESTIMATOR_CLS = 2,         /* least squares constrained to density matrices */
    QT_ESTIMATOR_MLE = 3,         /* maximum likelihood (R rho R iteration) */
    QT_ESTIMATOR_NN_BLOCH = 4,
    QT_ESTIMATOR_NN_CHOLESKY = 5
} qt_estimator;

typedef enum qt_head {
    QT_HEAD_BLOCH = 0,
    QT_HEAD_CHOLESKY = 1
} qt_head;

typedef struct qt_povm qt_povm;
typedef struct qt_model qt_model;
typedef struct qt_config qt_config;

QTOMO_API const char *qt_version(void);

/* Message for the last failed call on this thread ("" if none). */
QTOMO_API const char *qt_last_error(void);

QTOMO_API const char *qt_status_name(qt_status status);

/* ---- key=value configuration files -------------------------------------- */

QTOMO_API qt_status qt_config_load(const char *path, qt_config **out);
/* Returns NULL when the key is absent. The pointer lives as long as cfg. */
QTOMO_API const char *qt_config_get(const qt_config *cfg, const char *key);
QTOMO_API size_t qt_config_size(const qt_config *cfg);
QTOMO_API const char *qt_config_key_at(const qt_config *cfg, size_t index);
QTOMO_API void qt_config_free(qt_config *cfg);

/* ---- measurements -------------------------------------------------------- */

/* Square-root measurement built from dim^2 Haar-random states. */
QTOMO_API qt_status qt_povm_generate_srm(int dim, uint64_t seed, qt_povm **out);
QTOMO_API qt_status qt_povm_load(const char *path, qt_povm **out);
QTOMO_API qt_status qt_povm_save(const qt_povm *povm, const char *path);
QTOMO_API int qt_povm_dim(const qt_povm *povm);
QTOMO_API int qt_povm_outcomes(const qt_povm *povm);
/* Copies element `index` into out (2*d*d doubles). */
QTOMO_API qt_status qt_povm_element(const qt_povm *povm, int index, double *out);
QTOMO_API void qt_povm_free(qt_povm *povm);

/* Random Ginibre density matrix, written to rho_out (2*d*d doubles). */
QTOMO_API qt_status qt_random_state(int dim, uint64_t seed, double *rho_out);

/* Born probabilities of rho (2*d*d doubles) into probs_out (m doubles). */
QTOMO_API qt_status qt_born_probabilities(const qt_povm *povm, const double *rho, double *probs_out);

/* Multinomial frequencies for `trials` shots, written to freqs_out (m doubles). */
QTOMO_API qt_status qt_sample_frequencies(const double *probs, size_t outcomes, int64_t trials,
                                          uint64_t seed, double *freqs_out);

/* ---- estimation ---------------------------------------------------------- */

typedef struct qt_estimate_info {
    int iterations;
    int converged;
    double wall_seconds;
    double min_eigenvalue;
} qt_estimate_info;

/* Runs a classical estimator (LI, LI_POS, CLS or MLE) on m frequencies with
 * default solver settings. rho_out receives 2*d*d doubles; info may be NULL. */
QTOMO_API qt_status qt_estimate(const qt_povm *povm, qt_estimator estimator, const double *freqs,
                                size_t outcomes, double *rho_out, qt_estimate_info *info);

/* Hilbert-Schmidt distance between two 2*d*d matrices. */
QTOMO_API qt_status qt_hs_distance(int dim, const double *a, const double *b, double *out);

/* ---- neural-network models ----------------------------------------------- */

QTOMO_API qt_status qt_model_load(const char *path, qt_model **out);
QTOMO_API qt_status qt_model_save(const qt_model *model, const char *path);
/* Untrained network with randomly initialized weights. hidden may be NULL
 * (with n_hidden 0) for the default eight-layer architecture. */
QTOMO_API qt_status qt_model_create(int dim, qt_head head, const int *hidden, size_t n_hidden,
                                    uint64_t seed, qt_model **out);
QTOMO_API int qt_model_dim(const qt_model *model);
QTOMO_API qt_head qt_model_head(const qt_model *model);
QTOMO_API size_t qt_model_parameter_count(const qt_model *model);
/* Predicted state (2*d*d doubles); the Bloch head may be non-positive. */
QTOMO_API qt_status qt_model_predict(const qt_model *model, const double *freqs, size_t outcomes,
                                     double *rho_out);
QTOMO_API void qt_model_free(qt_model *model);

/* ---- datasets and training ----------------------------------------------- */

typedef struct qt_dataset_options {
    int64_t count;            /* records in total */
    double sampled_fraction;  /* default 0.25 */
    int64_t trials_min;       /* 0 selects dim^2 */
    int64_t trials_max;       /* default 100000 */
    double train_fraction;    /* default 0.8 */
    uint64_t seed;
} qt_dataset_options;

QTOMO_API void qt_dataset_options_init(qt_dataset_options *opts);

/* Writes manifest.txt, povm.dat, train.dat and val.dat into out_dir. */
QTOMO_API qt_status qt_dataset_generate(const qt_povm *povm, const qt_dataset_options *opts,
                                        const char *out_dir);

typedef struct qt_train_options {
    qt_head head;
    const int *hidden;        /* NULL: default eight-layer architecture */
    size_t n_hidden;
    double learning_rate;     /* default 0.001 */
    double mu;                /* default 0.9 */
    double nu;                /* default 0.999 */
    double epsilon;           /* default 1e-7 */
    int batches_per_epoch;    /* default 100 */
    int max_epochs;           /* default 500 */
    int patience;             /* default 200 */
    uint64_t seed;
} qt_train_options;

typedef struct qt_train_summary {
    int epochs_run;
    int best_epoch;
    int stopped_early;
    double initial_validation_loss;
    double best_validation_loss;
} qt_train_summary;

QTOMO_API void qt_train_options_init(qt_train_options *opts);

/* Trains on a dataset directory and writes the model file. summary may be NULL. */
QTOMO_API qt_status qt_train(const char *data_dir, const qt_train_options *opts, const char *model_out,
                             qt_train_summary *summary);

/* ---- experiments ----------------------------------------------------------- */

typedef struct qt_experiment_options {
    int dim;
    const char *povm_path;
    const char *estimators;     /* comma-separated tags: li,li_pos,cls,mle,nn_bloch,nn_cholesky */
    const int64_t *trial_grid;  /* strictly increasing; 0 = exact probabilities, last; NULL = default grid */
    size_t grid_size;
    int test_states;            /* default 100 */
    uint64_t seed;
    const char *bloch_model;    /* may be NULL */
    const char *cholesky_model; /* may be NULL */
    int threads;                /* default 1 */
} qt_experiment_options;

QTOMO_API void qt_experiment_options_init(qt_experiment_options *opts);

/* Each writes a versioned CSV report to csv_out. */
QTOMO_API qt_status qt_run_accuracy(const qt_experiment_options *opts, const char *csv_out);
QTOMO_API qt_status qt_run_timing(const qt_experiment_options *opts, const char *csv_out);
QTOMO_API qt_status qt_run_positivity(const qt_experiment_options *opts, const char *csv_out);

/* Merges report CSVs into one long-format summary table. */
QTOMO_API qt_status qt_report_merge(const char *const *inputs, size_t n_inputs, const char *csv_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* QTOMO_QTOMO_H */
