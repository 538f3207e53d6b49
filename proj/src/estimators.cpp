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

#include "qst/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>

#include "qst/error.hpp"

namespace qst {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// POVM elements stacked as rows of vec(Pi_l), so Born probabilities and the
/// R operator are single matrix-vector products.
struct StackedPovm {
    explicit StackedPovm(const Povm &povm) : dim(povm.dim()), rows(povm.outcomes(), povm.dim() * povm.dim()) {
        for (int l = 0; l < povm.outcomes(); ++l) {
            rows.row(l) = Eigen::Map<const ComplexVector>(povm[l].data(), rows.cols()).transpose();
        }
        rows_conj = rows.conjugate();
    }

    // p_l = Tr(rho Pi_l) = <vec(Pi_l), vec(rho)> for Hermitian Pi_l
    [[nodiscard]] RealVector probabilities(const ComplexMatrix &rho) const {
        const Eigen::Map<const ComplexVector> v(rho.data(), rho.size());
        return (rows_conj * v).real();
    }

    [[nodiscard]] ComplexMatrix combine(const RealVector &weights) const {
        const ComplexVector v = rows.transpose() * weights.cast<Complex>();
        return Eigen::Map<const ComplexMatrix>(v.data(), dim, dim);
    }

    int dim;
    ComplexMatrix rows;
    ComplexMatrix rows_conj;
};

double likelihood_of(const RealVector &f, const RealVector &p) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < f.size(); ++j) {
        if (f[j] > 0.0) {
            s += f[j] * std::log(std::max(p[j], 1e-300));
        }
    }
    return s;
}

void check_frequencies(const FrequencyVector &f, Eigen::Index expected, const char *what) {
    if (f.values.size() != expected) {
        fail(ErrorKind::Dimension, std::string(what) + ": frequency vector has " +
                                       std::to_string(f.values.size()) + " entries, expected " +
                                       std::to_string(expected));
    }
    if (!f.values.allFinite()) {
        fail(ErrorKind::Numeric, std::string(what) + ": non-finite frequency");
    }
}

} // namespace

void SolverOptions::validate() const {
    if (max_iterations < 1) {
        fail(ErrorKind::InvalidArgument, "SolverOptions: max_iterations must be >= 1");
    }
    if (!(tolerance > 0.0)) {
        fail(ErrorKind::InvalidArgument, "SolverOptions: tolerance must be positive");
    }
    if (!(initial_dilution > 0.0) || max_dilution_halvings < 0) {
        fail(ErrorKind::InvalidArgument, "SolverOptions: invalid dilution parameters");
    }
}

RealMatrix pseudoinverse(const RealMatrix &c, double relative_cutoff) {
    Eigen::JacobiSVD<RealMatrix> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector &s = svd.singularValues();
    const double cutoff = s.size() > 0 ? relative_cutoff * s[0] : 0.0;
    RealVector inv = RealVector::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] > cutoff) {
            inv[i] = 1.0 / s[i];
        }
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

LinearInverter::LinearInverter(const MeasurementMatrix &c, int dim)
    : pinv_(qst::pseudoinverse(c.c)), dim_(dim) {}

BlochVector LinearInverter::invert(const FrequencyVector &f) const {
    check_frequencies(f, pinv_.cols(), "linear_inversion");
    return {dim_, pinv_ * f.values};
}

BlochVector linear_inversion(const FrequencyVector &f, const MeasurementMatrix &c, int dim) {
    return LinearInverter(c, dim).invert(f);
}

RealVector simplex_projection(const RealVector &v) {
    const Eigen::Index n = v.size();
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        cumulative += u[static_cast<std::size_t>(j)];
        const double t = (cumulative - 1.0) / double(j + 1);
        if (u[static_cast<std::size_t>(j)] - t > 0.0) {
            theta = t;
        }
    }
    return (v.array() - theta).cwiseMax(0.0);
}

DensityMatrix psd_simplex_projection(const HermitianMatrix &h) {
    const auto es = hermitian_eigen(h.matrix());
    const RealVector lambda = simplex_projection(es.eigenvalues());
    const ComplexMatrix &u = es.eigenvectors();
    return {hermitize(u * lambda.cast<Complex>().asDiagonal() * u.adjoint()), trusted};
}

EstimatorReport constrained_ls(const FrequencyVector &f, const MeasurementMatrix &c,
                               const OperatorBasis &basis, const SolverOptions &opts) {
    opts.validate();
    check_frequencies(f, c.c.rows(), "constrained_ls");
    if (c.c.cols() != basis.size()) {
        fail(ErrorKind::Dimension, "constrained_ls: measurement matrix and basis disagree");
    }
    const auto start = Clock::now();
    const int d = basis.dim();

    const RealMatrix ctc = c.c.transpose() * c.c;
    const RealVector ctf = c.c.transpose() * f.values;
    const double lipschitz = Eigen::SelfAdjointEigenSolver<RealMatrix>(ctc).eigenvalues().maxCoeff();
    if (!(lipschitz > 0.0)) {
        fail(ErrorKind::Numeric, "constrained_ls: measurement matrix is zero");
    }
    const double step = 1.0 / lipschitz;

    auto objective = [&](const RealVector &r) { return 0.5 * (f.values - c.c * r).squaredNorm(); };
    auto project = [&](const RealVector &r) {
        const DensityMatrix rho = psd_simplex_projection(from_bloch({d, r}, basis));
        return to_bloch(rho, basis).coords;
    };
    auto gradient_step = [&](const RealVector &r) {
        return project(r - step * (ctc * r - ctf));
    };

    // Warm start from the better of the clipped and the projected inversion.
    const RealVector li = pseudoinverse(c.c) * f.values;
    RealVector x = project(li);
    double fx = objective(x);
    try {
        const RealVector clipped = to_bloch(positivize(from_bloch({d, li}, basis)), basis).coords;
        const double fc = objective(clipped);
        if (fc < fx) {
            x = clipped;
            fx = fc;
        }
    } catch (const Error &) {
        // no positive part; the projection start stands
    }

    EstimatorReport report;
    report.method = "cls";
    report.objective_trace.push_back(std::sqrt(2.0 * fx));

    RealVector y = x;
    double t = 1.0;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        RealVector z = gradient_step(y);
        double fz = objective(z);
        if (fz > fx) {
            // Restart momentum; a plain projected step cannot increase the objective.
            t = 1.0;
            z = gradient_step(x);
            fz = objective(z);
            if (fz > fx) {
                report.converged = true;
                break;
            }
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double moved = (z - x).norm();
        y = z + ((t - 1.0) / t_next) * (z - x);
        x = std::move(z);
        fx = fz;
        t = t_next;
        report.iterations = it;
        report.objective_trace.push_back(std::sqrt(2.0 * fx));
        if (moved < opts.tolerance) {
            report.converged = true;
            break;
        }
    }

    report.estimate = psd_simplex_projection(from_bloch({d, x}, basis)).hermitian();
    report.wall_seconds = seconds_since(start);
    return report;
}

namespace {

EstimatorReport run_mle(const FrequencyVector &f, const Povm &povm, const SolverOptions &opts,
                        ComplexMatrix rho) {
    opts.validate();
    check_frequencies(f, povm.outcomes(), "mle");
    const auto start = Clock::now();
    const int d = povm.dim();
    const StackedPovm stacked(povm);
    const ComplexMatrix identity = ComplexMatrix::Identity(d, d);

    auto normalized_sandwich = [](const ComplexMatrix &m, const ComplexMatrix &state) {
        const ComplexMatrix out = m * state * m.adjoint();
        return ComplexMatrix(hermitize(out / out.trace().real()));
    };

    RealVector p = stacked.probabilities(rho);
    double loglik = likelihood_of(f.values, p);

    EstimatorReport report;
    report.method = "mle";
    report.objective_trace.push_back(loglik);

    for (int it = 1; it <= opts.max_iterations; ++it) {
        RealVector weights = RealVector::Zero(f.values.size());
        for (Eigen::Index j = 0; j < f.values.size(); ++j) {
            if (f.values[j] > 0.0) {
                weights[j] = f.values[j] / std::max(p[j], 1e-12);
            }
        }
        const ComplexMatrix r = stacked.combine(weights);

        ComplexMatrix next = normalized_sandwich(r, rho);
        RealVector p_next = stacked.probabilities(next);
        double l_next = likelihood_of(f.values, p_next);

        if (!(l_next >= loglik)) {
            bool accepted = false;
            double e = opts.initial_dilution;
            for (int h = 0; h <= opts.max_dilution_halvings; ++h, e *= 0.5) {
                next = normalized_sandwich(identity + e * r, rho);
                p_next = stacked.probabilities(next);
                l_next = likelihood_of(f.values, p_next);
                if (l_next >= loglik) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                // Numerically stationary: no step raises the likelihood.
                report.converged = true;
                break;
            }
        }

        const double moved = (next - rho).norm();
        rho = std::move(next);
        p = std::move(p_next);
        loglik = l_next;
        report.iterations = it;
        report.objective_trace.push_back(loglik);
        if (moved < opts.tolerance) {
            report.converged = true;
            break;
        }
    }

    report.estimate = HermitianMatrix(rho, trusted);
    report.wall_seconds = seconds_since(start);
    return report;
}

} // namespace

EstimatorReport mle(const FrequencyVector &f, const Povm &povm, const SolverOptions &opts) {
    const int d = povm.dim();
    return run_mle(f, povm, opts, ComplexMatrix::Identity(d, d) / double(d));
}

EstimatorReport mle(const FrequencyVector &f, const Povm &povm, const DensityMatrix &initial,
                    const SolverOptions &opts) {
    if (initial.dim() != povm.dim()) {
        fail(ErrorKind::Dimension, "mle: initial state and POVM dimensions differ");
    }
    return run_mle(f, povm, opts, initial.matrix());
}

double log_likelihood(const FrequencyVector &f, const ProbabilityVector &p) {
    if (f.values.size() != p.values.size()) {
        fail(ErrorKind::Dimension, "log_likelihood: length mismatch");
    }
    return likelihood_of(f.values, p.values);
}

} // namespace qst
