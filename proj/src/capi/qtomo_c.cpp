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

#include "qtomo/qtomo.h"

#include <exception>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "qst/bench.hpp"
#include "qst/datagen.hpp"
#include "qst/error.hpp"
#include "qst/text_io.hpp"

struct qt_povm {
    qst::Povm povm;
};

struct qt_model {
    qst::Model model;
    qst::OperatorBasis basis;
};

struct qt_config {
    qst::KeyValueFile kv;
};

namespace {

thread_local std::string g_last_error;

qt_status to_status(qst::ErrorKind kind) {
    switch (kind) {
    case qst::ErrorKind::InvalidArgument:
        return QT_ERR_INVALID_ARGUMENT;
    case qst::ErrorKind::Dimension:
        return QT_ERR_DIMENSION;
    case qst::ErrorKind::Numeric:
        return QT_ERR_NUMERIC;
    case qst::ErrorKind::Io:
        return QT_ERR_IO;
    case qst::ErrorKind::Parse:
        return QT_ERR_PARSE;
    case qst::ErrorKind::Integrity:
        return QT_ERR_INTEGRITY;
    }
    return QT_ERR_INTERNAL;
}

/// Runs fn, translating exceptions into status codes plus a message.
template <typename Fn>
qt_status guarded(Fn &&fn) {
    g_last_error.clear();
    try {
        fn();
        return QT_OK;
    } catch (const qst::Error &e) {
        g_last_error = e.what();
        return to_status(e.kind());
    } catch (const std::bad_alloc &) {
        g_last_error = "out of memory";
        return QT_ERR_INTERNAL;
    } catch (const std::exception &e) {
        g_last_error = e.what();
        return QT_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return QT_ERR_INTERNAL;
    }
}

void require(bool ok, const char *what) {
    if (!ok) {
        qst::fail(qst::ErrorKind::InvalidArgument, what);
    }
}

qst::ComplexMatrix read_matrix(int d, const double *data) {
    qst::ComplexMatrix m(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const std::size_t k = 2 * (static_cast<std::size_t>(i) * d + j);
            m(i, j) = qst::Complex(data[k], data[k + 1]);
        }
    }
    return m;
}

void write_matrix(const qst::ComplexMatrix &m, double *out) {
    const auto d = m.rows();
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const auto k = static_cast<std::size_t>(2 * (i * d + j));
            out[k] = m(i, j).real();
            out[k + 1] = m(i, j).imag();
        }
    }
}

qst::FrequencyVector read_frequencies(const double *freqs, std::size_t outcomes) {
    require(freqs != nullptr, "frequencies must not be NULL");
    qst::FrequencyVector f;
    f.values = Eigen::Map<const qst::RealVector>(freqs, static_cast<Eigen::Index>(outcomes));
    return f;
}

qst::TrainConfig to_train_config(const qt_train_options &o) {
    qst::TrainConfig c;
    c.learning_rate = o.learning_rate;
    c.mu = o.mu;
    c.nu = o.nu;
    c.epsilon = o.epsilon;
    c.batches_per_epoch = o.batches_per_epoch;
    c.max_epochs = o.max_epochs;
    c.patience = o.patience;
    c.seed = o.seed;
    return c;
}

std::vector<qst::LayerSpec> architecture(int dim, const int *hidden, std::size_t n_hidden) {
    if (hidden == nullptr || n_hidden == 0) {
        return qst::default_architecture(dim);
    }
    return qst::make_architecture(std::vector<int>(hidden, hidden + n_hidden), dim * dim);
}

qst::ExperimentConfig to_experiment(const qt_experiment_options *o) {
    require(o != nullptr, "experiment options must not be NULL");
    qst::ExperimentConfig c;
    c.dim = o->dim;
    c.povm_path = o->povm_path ? o->povm_path : "";
    c.estimators = qst::parse_estimator_list(o->estimators ? o->estimators : "");
    if (o->trial_grid != nullptr && o->grid_size > 0) {
        c.trial_grid.assign(o->trial_grid, o->trial_grid + o->grid_size);
    } else {
        c.trial_grid = qst::default_trial_grid(o->dim);
    }
    c.test_states = o->test_states;
    c.seed = o->seed;
    c.bloch_model_path = o->bloch_model ? o->bloch_model : "";
    c.cholesky_model_path = o->cholesky_model ? o->cholesky_model : "";
    c.threads = o->threads;
    c.validate();
    return c;
}

} // namespace

extern "C" {

const char *qt_version(void) {
    return "1.0.0";
}

const char *qt_last_error(void) {
    return g_last_error.c_str();
}

const char *qt_status_name(qt_status status) {
    switch (status) {
    case QT_OK:
        return "ok";
    case QT_ERR_INVALID_ARGUMENT:
        return "invalid argument";
    case QT_ERR_DIMENSION:
        return "dimension mismatch";
    case QT_ERR_NUMERIC:
        return "numerical error";
    case QT_ERR_IO:
        return "i/o error";
    case QT_ERR_PARSE:
        return "parse error";
    case QT_ERR_INTEGRITY:
        return "integrity check failed";
    case QT_ERR_INTERNAL:
        return "internal error";
    }
    return "unknown status";
}

qt_status qt_config_load(const char *path, qt_config **out) {
    return guarded([&] {
        require(path != nullptr && out != nullptr, "qt_config_load: NULL argument");
        *out = new qt_config{qst::KeyValueFile::load(path)};
    });
}

const char *qt_config_get(const qt_config *cfg, const char *key) {
    if (cfg == nullptr || key == nullptr) {
        return nullptr;
    }
    for (const auto &[k, v] : cfg->kv.entries()) {
        if (k == key) {
            return v.c_str();
        }
    }
    return nullptr;
}

size_t qt_config_size(const qt_config *cfg) {
    return cfg ? cfg->kv.entries().size() : 0;
}

const char *qt_config_key_at(const qt_config *cfg, size_t index) {
    if (cfg == nullptr || index >= cfg->kv.entries().size()) {
        return nullptr;
    }
    return cfg->kv.entries()[index].first.c_str();
}

void qt_config_free(qt_config *cfg) {
    delete cfg;
}

qt_status qt_povm_generate_srm(int dim, uint64_t seed, qt_povm **out) {
    return guarded([&] {
        require(out != nullptr, "qt_povm_generate_srm: out must not be NULL");
        qst::Rng rng(seed);
        *out = new qt_povm{qst::random_srm(dim, rng)};
    });
}

qt_status qt_povm_load(const char *path, qt_povm **out) {
    return guarded([&] {
        require(path != nullptr && out != nullptr, "qt_povm_load: NULL argument");
        *out = new qt_povm{qst::load_povm(path)};
    });
}

qt_status qt_povm_save(const qt_povm *povm, const char *path) {
    return guarded([&] {
        require(povm != nullptr && path != nullptr, "qt_povm_save: NULL argument");
        qst::save_povm(povm->povm, path);
    });
}

int qt_povm_dim(const qt_povm *povm) {
    return povm ? povm->povm.dim() : 0;
}

int qt_povm_outcomes(const qt_povm *povm) {
    return povm ? povm->povm.outcomes() : 0;
}

qt_status qt_povm_element(const qt_povm *povm, int index, double *out) {
    return guarded([&] {
        require(povm != nullptr && out != nullptr, "qt_povm_element: NULL argument");
        require(index >= 0 && index < povm->povm.outcomes(), "qt_povm_element: index out of range");
        write_matrix(povm->povm[index], out);
    });
}

void qt_povm_free(qt_povm *povm) {
    delete povm;
}

qt_status qt_random_state(int dim, uint64_t seed, double *rho_out) {
    return guarded([&] {
        require(rho_out != nullptr, "qt_random_state: rho_out must not be NULL");
        qst::Rng rng(seed);
        write_matrix(qst::random_density_ginibre(dim, rng).matrix(), rho_out);
    });
}

qt_status qt_born_probabilities(const qt_povm *povm, const double *rho, double *probs_out) {
    return guarded([&] {
        require(povm != nullptr && rho != nullptr && probs_out != nullptr, "qt_born_probabilities: NULL argument");
        const qst::DensityMatrix state(read_matrix(povm->povm.dim(), rho));
        const auto p = qst::born_probabilities(state, povm->povm);
        qst::RealVector::Map(probs_out, p.values.size()) = p.values;
    });
}

qt_status qt_sample_frequencies(const double *probs, size_t outcomes, int64_t trials, uint64_t seed,
                                double *freqs_out) {
    return guarded([&] {
        require(probs != nullptr && freqs_out != nullptr, "qt_sample_frequencies: NULL argument");
        qst::ProbabilityVector p{Eigen::Map<const qst::RealVector>(probs, static_cast<Eigen::Index>(outcomes))};
        qst::Rng rng(seed);
        const auto f = qst::sample_frequencies(p, trials, rng);
        qst::RealVector::Map(freqs_out, f.values.size()) = f.values;
    });
}

qt_status qt_estimate(const qt_povm *povm, qt_estimator estimator, const double *freqs, size_t outcomes,
                      double *rho_out, qt_estimate_info *info) {
    return guarded([&] {
        require(povm != nullptr && rho_out != nullptr, "qt_estimate: NULL argument");
        const qst::FrequencyVector f = read_frequencies(freqs, outcomes);
        const auto &p = povm->povm;
        const qst::OperatorBasis basis = qst::gell_mann_basis(p.dim());
        const qst::MeasurementMatrix c = qst::measurement_matrix(p, basis);
        qst::EstimatorReport report;
        switch (estimator) {
        case QT_ESTIMATOR_LI:
            report.estimate = qst::from_bloch(qst::linear_inversion(f, c, p.dim()), basis);
            report.converged = true;
            break;
        case QT_ESTIMATOR_LI_POS:
            report.estimate =
                qst::positivize(qst::from_bloch(qst::linear_inversion(f, c, p.dim()), basis)).hermitian();
            report.converged = true;
            break;
        case QT_ESTIMATOR_CLS:
            report = qst::constrained_ls(f, c, basis);
            break;
        case QT_ESTIMATOR_MLE:
            report = qst::mle(f, p);
            break;
        default:
            qst::fail(qst::ErrorKind::InvalidArgument,
                      "qt_estimate: network estimators run through qt_model_predict");
        }
        write_matrix(report.estimate.matrix(), rho_out);
        if (info != nullptr) {
            info->iterations = report.iterations;
            info->converged = report.converged ? 1 : 0;
            info->wall_seconds = report.wall_seconds;
            info->min_eigenvalue = qst::min_eigenvalue(report.estimate);
        }
    });
}

qt_status qt_hs_distance(int dim, const double *a, const double *b, double *out) {
    return guarded([&] {
        require(a != nullptr && b != nullptr && out != nullptr && dim >= 1, "qt_hs_distance: bad argument");
        *out = qst::hs_distance(qst::HermitianMatrix(read_matrix(dim, a)), qst::HermitianMatrix(read_matrix(dim, b)));
    });
}

qt_status qt_model_load(const char *path, qt_model **out) {
    return guarded([&] {
        require(path != nullptr && out != nullptr, "qt_model_load: NULL argument");
        qst::Model m = qst::load_model(path);
        const int d = m.dim;
        *out = new qt_model{std::move(m), qst::gell_mann_basis(d)};
    });
}

qt_status qt_model_save(const qt_model *model, const char *path) {
    return guarded([&] {
        require(model != nullptr && path != nullptr, "qt_model_save: NULL argument");
        qst::save_model(model->model, path);
    });
}

qt_status qt_model_create(int dim, qt_head head, const int *hidden, size_t n_hidden, uint64_t seed,
                          qt_model **out) {
    return guarded([&] {
        require(out != nullptr, "qt_model_create: out must not be NULL");
        require(dim >= 2, "qt_model_create: dimension must be at least 2");
        qst::Model m;
        m.dim = dim;
        m.head = head == QT_HEAD_CHOLESKY ? qst::HeadKind::Cholesky : qst::HeadKind::Bloch;
        m.seed = seed;
        qst::Rng rng(qst::derive_seed(seed, 0, 1));
        m.net = qst::Mlp::initialized(dim * dim, architecture(dim, hidden, n_hidden), rng);
        *out = new qt_model{std::move(m), qst::gell_mann_basis(dim)};
    });
}

int qt_model_dim(const qt_model *model) {
    return model ? model->model.dim : 0;
}

qt_head qt_model_head(const qt_model *model) {
    return model && model->model.head == qst::HeadKind::Cholesky ? QT_HEAD_CHOLESKY : QT_HEAD_BLOCH;
}

size_t qt_model_parameter_count(const qt_model *model) {
    return model ? model->model.net.parameter_count() : 0;
}

qt_status qt_model_predict(const qt_model *model, const double *freqs, size_t outcomes, double *rho_out) {
    return guarded([&] {
        require(model != nullptr && rho_out != nullptr, "qt_model_predict: NULL argument");
        const qst::FrequencyVector f = read_frequencies(freqs, outcomes);
        const auto &m = model->model;
        if (m.head == qst::HeadKind::Bloch) {
            write_matrix(qst::predict_state_bloch(m.net, model->basis, f).matrix(), rho_out);
        } else {
            write_matrix(qst::predict_state_cholesky(m.net, m.dim, f).state.matrix(), rho_out);
        }
    });
}

void qt_model_free(qt_model *model) {
    delete model;
}

void qt_dataset_options_init(qt_dataset_options *opts) {
    if (opts == nullptr) {
        return;
    }
    const qst::DatasetOptions d;
    opts->count = 1000;
    opts->sampled_fraction = d.sampled_fraction;
    opts->trials_min = d.trials_min;
    opts->trials_max = d.trials_max;
    opts->train_fraction = 0.8;
    opts->seed = 0;
}

qt_status qt_dataset_generate(const qt_povm *povm, const qt_dataset_options *opts, const char *out_dir) {
    return guarded([&] {
        require(povm != nullptr && opts != nullptr && out_dir != nullptr, "qt_dataset_generate: NULL argument");
        qst::DatasetOptions o;
        o.count = opts->count;
        o.sampled_fraction = opts->sampled_fraction;
        o.trials_min = opts->trials_min;
        o.trials_max = opts->trials_max;
        o.seed = opts->seed;
        qst::write_dataset_directory(out_dir, povm->povm, o, opts->train_fraction);
    });
}

void qt_train_options_init(qt_train_options *opts) {
    if (opts == nullptr) {
        return;
    }
    const qst::TrainConfig c;
    opts->head = QT_HEAD_BLOCH;
    opts->hidden = nullptr;
    opts->n_hidden = 0;
    opts->learning_rate = c.learning_rate;
    opts->mu = c.mu;
    opts->nu = c.nu;
    opts->epsilon = c.epsilon;
    opts->batches_per_epoch = c.batches_per_epoch;
    opts->max_epochs = c.max_epochs;
    opts->patience = c.patience;
    opts->seed = c.seed;
}

qt_status qt_train(const char *data_dir, const qt_train_options *opts, const char *model_out,
                   qt_train_summary *summary) {
    return guarded([&] {
        require(data_dir != nullptr && opts != nullptr && model_out != nullptr, "qt_train: NULL argument");
        const qst::LoadedDataset data = qst::load_dataset_directory(data_dir);
        const qst::HeadKind head = opts->head == QT_HEAD_CHOLESKY ? qst::HeadKind::Cholesky : qst::HeadKind::Bloch;
        const qst::Dataset train = qst::to_training_set(data.train, head);
        const qst::Dataset val = qst::to_training_set(data.validation, head);
        const qst::TrainConfig config = to_train_config(*opts);
        qst::TrainResult result =
            qst::train(architecture(data.manifest.dim, opts->hidden, opts->n_hidden), train, val, config);

        qst::Model model;
        model.net = std::move(result.model);
        model.head = head;
        model.dim = data.manifest.dim;
        model.seed = opts->seed;
        qst::save_model(model, model_out);

        if (summary != nullptr) {
            const auto &h = result.history;
            summary->epochs_run = static_cast<int>(h.validation_loss.size());
            summary->best_epoch = h.best_epoch;
            summary->stopped_early = h.stopped_early ? 1 : 0;
            summary->initial_validation_loss = h.initial_validation_loss;
            summary->best_validation_loss =
                h.best_epoch >= 0 ? h.validation_loss[static_cast<std::size_t>(h.best_epoch)] : 0.0;
        }
    });
}

void qt_experiment_options_init(qt_experiment_options *opts) {
    if (opts == nullptr) {
        return;
    }
    opts->dim = 0;
    opts->povm_path = nullptr;
    opts->estimators = "li,li_pos,cls,mle";
    opts->trial_grid = nullptr;
    opts->grid_size = 0;
    opts->test_states = 100;
    opts->seed = 0;
    opts->bloch_model = nullptr;
    opts->cholesky_model = nullptr;
    opts->threads = 1;
}

qt_status qt_run_accuracy(const qt_experiment_options *opts, const char *csv_out) {
    return guarded([&] {
        require(csv_out != nullptr, "qt_run_accuracy: csv_out must not be NULL");
        const auto config = to_experiment(opts);
        const auto suite = qst::EstimatorSuite::load(config);
        qst::write_file(csv_out, qst::accuracy_csv(qst::run_accuracy(config, suite)));
    });
}

qt_status qt_run_timing(const qt_experiment_options *opts, const char *csv_out) {
    return guarded([&] {
        require(csv_out != nullptr, "qt_run_timing: csv_out must not be NULL");
        const auto config = to_experiment(opts);
        const auto suite = qst::EstimatorSuite::load(config);
        qst::write_file(csv_out, qst::timing_csv(qst::run_timing(config, suite)));
    });
}

qt_status qt_run_positivity(const qt_experiment_options *opts, const char *csv_out) {
    return guarded([&] {
        require(csv_out != nullptr, "qt_run_positivity: csv_out must not be NULL");
        const auto config = to_experiment(opts);
        for (auto e : config.estimators) {
            if (e != qst::EstimatorKind::LinearInversion && e != qst::EstimatorKind::NetworkBloch) {
                qst::fail(qst::ErrorKind::InvalidArgument,
                          "positivity: estimator '" + qst::to_string(e) +
                              "' always returns a positive semidefinite state; only li and nn_bloch can be analysed");
            }
        }
        const auto suite = qst::EstimatorSuite::load(config);
        qst::write_file(csv_out, qst::positivity_csv(qst::run_positivity(config, suite)));
    });
}

qt_status qt_report_merge(const char *const *inputs, size_t n_inputs, const char *csv_out) {
    return guarded([&] {
        require(inputs != nullptr && csv_out != nullptr, "qt_report_merge: NULL argument");
        std::vector<std::string> paths;
        for (size_t i = 0; i < n_inputs; ++i) {
            require(inputs[i] != nullptr, "qt_report_merge: NULL input path");
            paths.emplace_back(inputs[i]);
        }
        qst::write_file(csv_out, qst::merge_reports(paths));
    });
}

} // extern "C"
