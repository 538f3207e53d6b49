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

#include "qst/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "qst/datagen.hpp"
#include "qst/error.hpp"
#include "qst/text_io.hpp"

namespace qst {

namespace {

constexpr std::uint64_t kTestStateStream = 20;
constexpr std::uint64_t kSamplingStream = 21;

struct TagEntry {
    EstimatorKind kind;
    const char *tag;
};

constexpr TagEntry kTags[] = {
    {EstimatorKind::LinearInversion, "li"},
    {EstimatorKind::PositivizedLinearInversion, "li_pos"},
    {EstimatorKind::ConstrainedLeastSquares, "cls"},
    {EstimatorKind::MaximumLikelihood, "mle"},
    {EstimatorKind::NetworkBloch, "nn_bloch"},
    {EstimatorKind::NetworkCholesky, "nn_cholesky"},
};

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    const auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index owns
/// its output slot, so results do not depend on scheduling.
template <typename Body>
void parallel_for(int n, int threads, Body body) {
    threads = std::clamp(threads, 1, std::max(1, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < n; i += threads) {
                    body(i);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto &th : pool) {
        th.join();
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

DensityMatrix test_state(const ExperimentConfig &config, int i) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(i), kTestStateStream));
    return random_density_ginibre(config.dim, rng);
}

FrequencyVector test_frequencies(const ExperimentConfig &config, int i, const ProbabilityVector &p,
                                 std::int64_t trials) {
    if (trials == kExactTrials) {
        return FrequencyVector::exact(p);
    }
    Rng rng(derive_seed(derive_seed(config.seed, static_cast<std::uint64_t>(i), kSamplingStream),
                        static_cast<std::uint64_t>(trials)));
    return sample_frequencies(p, trials, rng);
}

void check_suite(const ExperimentConfig &config, const EstimatorSuite &suite) {
    config.validate();
    if (suite.dim() != config.dim) {
        fail(ErrorKind::Dimension, "experiment: configured dimension " + std::to_string(config.dim) +
                                       " differs from the POVM dimension " + std::to_string(suite.dim()));
    }
    for (auto e : config.estimators) {
        if (!suite.supports(e)) {
            fail(ErrorKind::InvalidArgument, "experiment: estimator '" + to_string(e) +
                                                 "' needs a trained model file, none was given");
        }
    }
}

std::string csv_preamble(const char *kind) {
    return "# qtomo-csv format_version=" + std::to_string(kCsvFormatVersion) + " kind=" + kind + "\n";
}

} // namespace

std::string to_string(EstimatorKind e) {
    for (const auto &t : kTags) {
        if (t.kind == e) {
            return t.tag;
        }
    }
    return "?";
}

EstimatorKind estimator_from_string(const std::string &tag) {
    for (const auto &t : kTags) {
        if (tag == t.tag) {
            return t.kind;
        }
    }
    fail(ErrorKind::InvalidArgument,
         "unknown estimator '" + tag + "' (expected li, li_pos, cls, mle, nn_bloch or nn_cholesky)");
}

std::vector<EstimatorKind> parse_estimator_list(const std::string &list) {
    std::vector<EstimatorKind> out;
    for (auto token : split_fields(list, ',')) {
        const std::string tag = trim(std::string(token));
        if (!tag.empty()) {
            out.push_back(estimator_from_string(tag));
        }
    }
    return out;
}

std::string trials_to_string(std::int64_t n) {
    return n == kExactTrials ? "exact" : std::to_string(n);
}

std::int64_t trials_from_string(const std::string &s) {
    if (s == "exact") {
        return kExactTrials;
    }
    const auto n = parse_int(s, "trial count");
    if (n < 1) {
        fail(ErrorKind::InvalidArgument, "trial counts must be >= 1 (or 'exact')");
    }
    return n;
}

std::vector<std::int64_t> parse_trial_grid(const std::string &list) {
    std::vector<std::int64_t> out;
    for (auto token : split_fields(list, ',')) {
        const std::string t = trim(std::string(token));
        if (!t.empty()) {
            out.push_back(trials_from_string(t));
        }
    }
    return out;
}

std::vector<std::int64_t> default_trial_grid(int d) {
    std::vector<std::int64_t> grid{std::int64_t(d) * d};
    for (std::int64_t n : {100LL, 1000LL, 10000LL, 100000LL, 1000000LL}) {
        if (n > grid.back()) {
            grid.push_back(n);
        }
    }
    return grid;
}

void ExperimentConfig::validate() const {
    if (dim < 2) {
        fail(ErrorKind::InvalidArgument, "experiment: dimension must be at least 2");
    }
    if (test_states < 1) {
        fail(ErrorKind::InvalidArgument, "experiment: need at least one test state");
    }
    if (estimators.empty()) {
        fail(ErrorKind::InvalidArgument, "experiment: no estimators selected");
    }
    if (trial_grid.empty()) {
        fail(ErrorKind::InvalidArgument, "experiment: empty trial grid");
    }
    // "exact" is the infinite-trial limit, so it may only close the grid.
    const auto order = [](std::int64_t n) {
        return n == kExactTrials ? std::numeric_limits<std::int64_t>::max() : n;
    };
    for (std::size_t i = 0; i < trial_grid.size(); ++i) {
        if (trial_grid[i] < 0 || (i > 0 && order(trial_grid[i]) <= order(trial_grid[i - 1]))) {
            fail(ErrorKind::InvalidArgument, "experiment: trial grid must be strictly increasing");
        }
    }
}

EstimatorSuite::EstimatorSuite(Povm povm, std::optional<Model> bloch, std::optional<Model> cholesky,
                               SolverOptions mle_options, SolverOptions cls_options)
    : povm_(std::move(povm)), basis_(gell_mann_basis(povm_.dim())), c_(measurement_matrix(povm_, basis_)),
      inverter_(c_, povm_.dim()), bloch_(std::move(bloch)), cholesky_(std::move(cholesky)),
      mle_options_(mle_options), cls_options_(cls_options) {
    auto check = [&](const std::optional<Model> &m, HeadKind head) {
        if (!m) {
            return;
        }
        if (m->head != head) {
            fail(ErrorKind::InvalidArgument, "EstimatorSuite: model head is '" + to_string(m->head) +
                                                 "', expected '" + to_string(head) + "'");
        }
        if (m->dim != povm_.dim() || m->net.input_width() != povm_.outcomes()) {
            fail(ErrorKind::Dimension, "EstimatorSuite: model does not match the POVM shape");
        }
    };
    check(bloch_, HeadKind::Bloch);
    check(cholesky_, HeadKind::Cholesky);
}

EstimatorSuite EstimatorSuite::load(const ExperimentConfig &config) {
    if (config.povm_path.empty()) {
        fail(ErrorKind::InvalidArgument, "experiment: no POVM file given");
    }
    Povm povm = load_povm(config.povm_path);
    std::optional<Model> bloch;
    std::optional<Model> cholesky;
    for (auto e : config.estimators) {
        if (e == EstimatorKind::NetworkBloch && !bloch) {
            if (config.bloch_model_path.empty()) {
                fail(ErrorKind::InvalidArgument, "experiment: nn_bloch needs a model file (bloch_model)");
            }
            bloch = load_model(config.bloch_model_path);
        }
        if (e == EstimatorKind::NetworkCholesky && !cholesky) {
            if (config.cholesky_model_path.empty()) {
                fail(ErrorKind::InvalidArgument, "experiment: nn_cholesky needs a model file (cholesky_model)");
            }
            cholesky = load_model(config.cholesky_model_path);
        }
    }
    return EstimatorSuite(std::move(povm), std::move(bloch), std::move(cholesky), config.mle_options,
                          config.cls_options);
}

bool EstimatorSuite::supports(EstimatorKind e) const {
    if (e == EstimatorKind::NetworkBloch) {
        return bloch_.has_value();
    }
    if (e == EstimatorKind::NetworkCholesky) {
        return cholesky_.has_value();
    }
    return true;
}

HermitianMatrix EstimatorSuite::estimate(EstimatorKind e, const FrequencyVector &f) const {
    switch (e) {
    case EstimatorKind::LinearInversion:
        return from_bloch(inverter_.invert(f), basis_);
    case EstimatorKind::PositivizedLinearInversion:
        return positivize(from_bloch(inverter_.invert(f), basis_)).hermitian();
    case EstimatorKind::ConstrainedLeastSquares:
        return constrained_ls(f, c_, basis_, cls_options_).estimate;
    case EstimatorKind::MaximumLikelihood:
        return mle(f, povm_, mle_options_).estimate;
    case EstimatorKind::NetworkBloch:
        if (!bloch_) {
            fail(ErrorKind::InvalidArgument, "nn_bloch: no model loaded");
        }
        return predict_state_bloch(bloch_->net, basis_, f);
    case EstimatorKind::NetworkCholesky:
        if (!cholesky_) {
            fail(ErrorKind::InvalidArgument, "nn_cholesky: no model loaded");
        }
        return predict_state_cholesky(cholesky_->net, povm_.dim(), f).state.hermitian();
    }
    fail(ErrorKind::InvalidArgument, "unknown estimator");
}

double empirical_quantile(std::vector<double> values, double q) {
    if (values.empty()) {
        fail(ErrorKind::InvalidArgument, "empirical_quantile: no values");
    }
    std::sort(values.begin(), values.end());
    const double pos = q * double(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - double(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<AccuracyRow> run_accuracy(const ExperimentConfig &config, const EstimatorSuite &suite) {
    check_suite(config, suite);
    const std::size_t n_est = config.estimators.size();
    const std::size_t n_grid = config.trial_grid.size();
    const auto n_states = static_cast<std::size_t>(config.test_states);
    // errors[(e * n_grid + g) * n_states + i]
    std::vector<double> errors(n_est * n_grid * n_states, 0.0);

    parallel_for(config.test_states, config.threads, [&](int i) {
        const DensityMatrix rho = test_state(config, i);
        const ProbabilityVector p = born_probabilities(rho, suite.povm());
        for (std::size_t g = 0; g < n_grid; ++g) {
            const FrequencyVector f = test_frequencies(config, i, p, config.trial_grid[g]);
            for (std::size_t e = 0; e < n_est; ++e) {
                errors[(e * n_grid + g) * n_states + static_cast<std::size_t>(i)] =
                    hs_distance(suite.estimate(config.estimators[e], f), rho);
            }
        }
    });

    std::vector<AccuracyRow> rows;
    for (std::size_t e = 0; e < n_est; ++e) {
        for (std::size_t g = 0; g < n_grid; ++g) {
            const auto first = errors.begin() + static_cast<long>((e * n_grid + g) * n_states);
            const std::vector<double> v(first, first + static_cast<long>(n_states));
            double mean = 0.0;
            for (double x : v) {
                mean += x;
            }
            mean /= double(n_states);
            double var = 0.0;
            for (double x : v) {
                var += (x - mean) * (x - mean);
            }
            var = n_states > 1 ? var / double(n_states - 1) : 0.0;
            rows.push_back({to_string(config.estimators[e]), config.trial_grid[g], mean,
                            empirical_quantile(v, 0.1), empirical_quantile(v, 0.9),
                            std::sqrt(var / double(n_states)), config.test_states});
        }
    }
    return rows;
}

std::vector<TimingRow> run_timing(const ExperimentConfig &config, const EstimatorSuite &suite) {
    check_suite(config, suite);
    using Clock = std::chrono::steady_clock;

    // Inputs are prepared up front so only the estimate itself is timed.
    std::vector<std::vector<FrequencyVector>> inputs(config.trial_grid.size());
    for (int i = 0; i < config.test_states; ++i) {
        const DensityMatrix rho = test_state(config, i);
        const ProbabilityVector p = born_probabilities(rho, suite.povm());
        for (std::size_t g = 0; g < config.trial_grid.size(); ++g) {
            inputs[g].push_back(test_frequencies(config, i, p, config.trial_grid[g]));
        }
    }

    std::vector<TimingRow> rows;
    for (auto e : config.estimators) {
        volatile double sink = suite.estimate(e, inputs.front().front()).matrix()(0, 0).real();
        (void)sink;
        for (std::size_t g = 0; g < config.trial_grid.size(); ++g) {
            double total = 0.0;
            for (const auto &f : inputs[g]) {
                const auto start = Clock::now();
                const HermitianMatrix h = suite.estimate(e, f);
                total += std::chrono::duration<double>(Clock::now() - start).count();
                sink = h.matrix()(0, 0).real();
            }
            rows.push_back({to_string(e), config.trial_grid[g], total / double(config.test_states),
                            config.test_states});
        }
    }
    return rows;
}

std::vector<PositivityRow> run_positivity(const ExperimentConfig &config, const EstimatorSuite &suite) {
    for (auto e : config.estimators) {
        if (e != EstimatorKind::LinearInversion && e != EstimatorKind::NetworkBloch) {
            fail(ErrorKind::InvalidArgument,
                 "positivity: estimator '" + to_string(e) +
                     "' always returns a positive semidefinite state; only li and nn_bloch can be analysed");
        }
    }
    check_suite(config, suite);
    const std::size_t n_est = config.estimators.size();
    const std::size_t n_grid = config.trial_grid.size();
    const auto n_states = static_cast<std::size_t>(config.test_states);
    std::vector<double> lowest(n_est * n_grid * n_states, 0.0);

    parallel_for(config.test_states, config.threads, [&](int i) {
        const DensityMatrix rho = test_state(config, i);
        const ProbabilityVector p = born_probabilities(rho, suite.povm());
        for (std::size_t g = 0; g < n_grid; ++g) {
            const FrequencyVector f = test_frequencies(config, i, p, config.trial_grid[g]);
            for (std::size_t e = 0; e < n_est; ++e) {
                lowest[(e * n_grid + g) * n_states + static_cast<std::size_t>(i)] =
                    min_eigenvalue(suite.estimate(config.estimators[e], f));
            }
        }
    });

    std::vector<PositivityRow> rows;
    for (std::size_t e = 0; e < n_est; ++e) {
        for (std::size_t g = 0; g < n_grid; ++g) {
            double negative = 0.0;
            int psd = 0;
            for (std::size_t i = 0; i < n_states; ++i) {
                const double l = lowest[(e * n_grid + g) * n_states + i];
                negative += std::min(0.0, l);
                psd += l >= -kEigenTolerance ? 1 : 0;
            }
            rows.push_back({to_string(config.estimators[e]), config.trial_grid[g], negative / double(n_states),
                            double(psd) / double(n_states), config.test_states});
        }
    }
    return rows;
}

std::string accuracy_csv(const std::vector<AccuracyRow> &rows) {
    std::string out = csv_preamble("accuracy") + "estimator,trials,mean_hs,q10_hs,q90_hs,std_error,states\n";
    for (const auto &r : rows) {
        out += r.estimator + "," + trials_to_string(r.trials) + "," + format_double(r.mean_hs) + "," +
               format_double(r.q10_hs) + "," + format_double(r.q90_hs) + "," + format_double(r.std_error) +
               "," + std::to_string(r.states) + "\n";
    }
    return out;
}

std::string timing_csv(const std::vector<TimingRow> &rows) {
    std::string out = csv_preamble("timing") + "estimator,trials,mean_seconds,samples\n";
    for (const auto &r : rows) {
        out += r.estimator + "," + trials_to_string(r.trials) + "," + format_double(r.mean_seconds) + "," +
               std::to_string(r.samples) + "\n";
    }
    return out;
}

std::string positivity_csv(const std::vector<PositivityRow> &rows) {
    std::string out =
        csv_preamble("positivity") + "estimator,trials,mean_negative_eigenvalue,fraction_psd,states\n";
    for (const auto &r : rows) {
        out += r.estimator + "," + trials_to_string(r.trials) + "," + format_double(r.mean_negative_eigenvalue) +
               "," + format_double(r.fraction_psd) + "," + std::to_string(r.states) + "\n";
    }
    return out;
}

std::string merge_reports(const std::vector<std::string> &paths) {
    if (paths.empty()) {
        fail(ErrorKind::InvalidArgument, "report: no input files");
    }
    std::string out = csv_preamble("report") + "kind,estimator,trials,metric,value\n";
    const std::string prefix = "# qtomo-csv format_version=" + std::to_string(kCsvFormatVersion) + " kind=";
    for (const auto &path : paths) {
        std::istringstream in(read_file(path));
        std::string line;
        if (!std::getline(in, line) || line.rfind(prefix, 0) != 0) {
            fail(ErrorKind::Parse, path + ": missing or unsupported qtomo-csv version line");
        }
        const std::string kind = trim(line.substr(prefix.size()));
        if (!std::getline(in, line)) {
            fail(ErrorKind::Parse, path + ": missing header row");
        }
        std::vector<std::string> header;
        for (const auto field : split_fields(line, ',')) {
            header.emplace_back(field);
        }
        if (header.size() < 3 || header[0] != "estimator" || header[1] != "trials") {
            fail(ErrorKind::Parse, path + ": unexpected header row");
        }
        int lineno = 2;
        while (std::getline(in, line)) {
            ++lineno;
            if (trim(line).empty()) {
                continue;
            }
            const auto fields = split_fields(line, ',');
            if (fields.size() != header.size()) {
                fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": wrong number of columns");
            }
            for (std::size_t c = 2; c < header.size(); ++c) {
                out += kind + "," + std::string(fields[0]) + "," + std::string(fields[1]) + "," +
                       header[c] + "," + std::string(fields[c]) + "\n";
            }
        }
    }
    return out;
}

} // namespace qst
