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

/**
 * @file
 * Benchmark experiments over random test states: accuracy against the number
 * of trials, time per estimate, and positivity of unconstrained estimates.
 * Every estimator sees the same sampled frequencies for a given (state, N).
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qst/estimators.hpp"
#include "qst/neuralnet.hpp"

namespace qst {

enum class EstimatorKind { LinearInversion, PositivizedLinearInversion, ConstrainedLeastSquares,
                           MaximumLikelihood, NetworkBloch, NetworkCholesky };

std::string to_string(EstimatorKind e);
EstimatorKind estimator_from_string(const std::string &tag);
/// Comma-separated tags, e.g. "li,li_pos,cls,mle,nn_bloch,nn_cholesky".
std::vector<EstimatorKind> parse_estimator_list(const std::string &list);

/// Trial count standing for exact (noise-free) probabilities.
inline constexpr std::int64_t kExactTrials = 0;

std::string trials_to_string(std::int64_t n);
std::int64_t trials_from_string(const std::string &s);
/// Comma-separated trial counts; "exact" maps to kExactTrials.
std::vector<std::int64_t> parse_trial_grid(const std::string &list);

/// {d^2, 10^2, 10^3, 10^4, 10^5, 10^6}, dropping entries not above d^2.
std::vector<std::int64_t> default_trial_grid(int d);

struct ExperimentConfig {
    int dim = 0;
    std::string povm_path;
    std::vector<EstimatorKind> estimators;
    std::vector<std::int64_t> trial_grid;
    int test_states = 100;
    std::uint64_t seed = 0;
    std::string bloch_model_path;
    std::string cholesky_model_path;
    int threads = 1;
    SolverOptions mle_options = SolverOptions::mle_defaults();
    SolverOptions cls_options = SolverOptions::least_squares_defaults();

    /// Grid strictly increasing, at least one test state and one estimator.
    void validate() const;
};

/// Measurement, cached linear-inversion operator and optional trained models.
class EstimatorSuite {
  public:
    EstimatorSuite(Povm povm, std::optional<Model> bloch, std::optional<Model> cholesky,
                   SolverOptions mle_options = SolverOptions::mle_defaults(),
                   SolverOptions cls_options = SolverOptions::least_squares_defaults());

    /// Loads the POVM and whichever models the estimator list needs.
    static EstimatorSuite load(const ExperimentConfig &config);

    [[nodiscard]] int dim() const noexcept { return povm_.dim(); }
    [[nodiscard]] const Povm &povm() const noexcept { return povm_; }
    [[nodiscard]] const OperatorBasis &basis() const noexcept { return basis_; }
    [[nodiscard]] bool supports(EstimatorKind e) const;

    [[nodiscard]] HermitianMatrix estimate(EstimatorKind e, const FrequencyVector &f) const;

  private:
    Povm povm_;
    OperatorBasis basis_;
    MeasurementMatrix c_;
    LinearInverter inverter_;
    std::optional<Model> bloch_;
    std::optional<Model> cholesky_;
    SolverOptions mle_options_;
    SolverOptions cls_options_;
};

struct AccuracyRow {
    std::string estimator;
    std::int64_t trials = 0;
    double mean_hs = 0.0;
    double q10_hs = 0.0;
    double q90_hs = 0.0;
    double std_error = 0.0;
    int states = 0;
};

struct TimingRow {
    std::string estimator;
    std::int64_t trials = 0;
    double mean_seconds = 0.0;
    int samples = 0;
};

struct PositivityRow {
    std::string estimator;
    std::int64_t trials = 0;
    double mean_negative_eigenvalue = 0.0; ///< mean of min(0, lambda_min)
    double fraction_psd = 0.0;
    int states = 0;
};

/// Empirical quantile with linear interpolation between order statistics.
double empirical_quantile(std::vector<double> values, double q);

std::vector<AccuracyRow> run_accuracy(const ExperimentConfig &config, const EstimatorSuite &suite);
std::vector<TimingRow> run_timing(const ExperimentConfig &config, const EstimatorSuite &suite);
/// Only li and nn_bloch are accepted; constrained estimators are rejected.
std::vector<PositivityRow> run_positivity(const ExperimentConfig &config, const EstimatorSuite &suite);

inline constexpr int kCsvFormatVersion = 1;

std::string accuracy_csv(const std::vector<AccuracyRow> &rows);
std::string timing_csv(const std::vector<TimingRow> &rows);
std::string positivity_csv(const std::vector<PositivityRow> &rows);

/// Merges report CSVs into one long-format table: kind,estimator,trials,metric,value.
std::string merge_reports(const std::vector<std::string> &paths);

} // namespace qst
