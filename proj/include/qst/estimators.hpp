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
 * Classical reconstruction: linear inversion, least squares constrained to
 * the density-matrix set, and the R rho R maximum-likelihood iteration.
 */

#pragma once

#include <string>
#include <vector>

#include "qst/measurement.hpp"

namespace qst {

struct SolverOptions {
    int max_iterations = 5000;
    double tolerance = 1e-10;
    /// Dilution used by the likelihood iteration when a plain R rho R step
    /// would lower the likelihood: rho <- (1 + e R) rho (1 + e R), e halved
    /// until the step is accepted. Ignored by the least-squares solver.
    double initial_dilution = 1.0;
    int max_dilution_halvings = 60;

    void validate() const;

    static SolverOptions mle_defaults() { return {}; }
    static SolverOptions least_squares_defaults() { return {20000, 1e-13, 1.0, 60}; }
};

struct EstimatorReport {
    HermitianMatrix estimate;
    std::string method;
    int iterations = 0;
    double wall_seconds = 0.0;
    bool converged = false;
    /// One entry per accepted iterate; least squares records ||f - C r||_2,
    /// maximum likelihood records sum_j f_j log p_j.
    std::vector<double> objective_trace;
};

/// Pseudoinverse solution r = C^+ f; singular values below 1e-10 sigma_max
/// are dropped.
BlochVector linear_inversion(const FrequencyVector &f, const MeasurementMatrix &c, int dim);

/// Caches C^+ for repeated linear inversion against one measurement.
class LinearInverter {
  public:
    LinearInverter(const MeasurementMatrix &c, int dim);

    [[nodiscard]] BlochVector invert(const FrequencyVector &f) const;
    [[nodiscard]] const RealMatrix &pseudoinverse() const noexcept { return pinv_; }

  private:
    RealMatrix pinv_;
    int dim_;
};

RealMatrix pseudoinverse(const RealMatrix &c, double relative_cutoff = 1e-10);

/// Frobenius-nearest density matrix (eigenvalues projected onto the simplex).
DensityMatrix psd_simplex_projection(const HermitianMatrix &h);

/// Euclidean projection of a vector onto the probability simplex.
RealVector simplex_projection(const RealVector &v);

EstimatorReport constrained_ls(const FrequencyVector &f, const MeasurementMatrix &c,
                               const OperatorBasis &basis,
                               const SolverOptions &opts = SolverOptions::least_squares_defaults());

EstimatorReport mle(const FrequencyVector &f, const Povm &povm,
                    const SolverOptions &opts = SolverOptions::mle_defaults());

/// Same iteration started from `initial` instead of the maximally mixed state.
EstimatorReport mle(const FrequencyVector &f, const Povm &povm, const DensityMatrix &initial,
                    const SolverOptions &opts = SolverOptions::mle_defaults());

/// sum over f_j > 0 of f_j log p_j, with p_j floored at 1e-300.
double log_likelihood(const FrequencyVector &f, const ProbabilityVector &p);

} // namespace qst
