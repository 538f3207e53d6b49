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
 * Measurement model: POVMs built by the square-root measurement, the Born
 * rule, the real measurement matrix that maps Bloch vectors to outcome
 * probabilities, and multinomial shot-noise sampling.
 */

#pragma once

#include <cstdint>
#include <vector>

#include "qst/quantum_core.hpp"

namespace qst {

/// Set of m positive operators summing to the identity.
class Povm {
  public:
    /// Validates positivity and completeness (1e-10 tolerances).
    explicit Povm(std::vector<ComplexMatrix> elements);
    Povm(std::vector<ComplexMatrix> elements, TrustedTag);

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] int outcomes() const noexcept { return static_cast<int>(elements_.size()); }
    [[nodiscard]] const ComplexMatrix &operator[](int l) const { return elements_[l]; }
    [[nodiscard]] const std::vector<ComplexMatrix> &elements() const noexcept { return elements_; }

    /// ||sum_l Pi_l - 1||_F
    [[nodiscard]] double completeness_error() const;

  private:
    int dim_ = 0;
    std::vector<ComplexMatrix> elements_;
};

/// m x d^2 real matrix with C(l, k) = Tr(Pi_l G_k); p = C r exactly.
struct MeasurementMatrix {
    RealMatrix c;
};

struct ProbabilityVector {
    RealVector values;
};

/// Observed relative frequencies. trials == 0 marks exact probabilities.
struct FrequencyVector {
    RealVector values;
    std::int64_t trials = 0;

    static FrequencyVector exact(const ProbabilityVector &p) { return {p.values, 0}; }
};

Povm square_root_measurement(const std::vector<PureState> &states);

/**
 * Square-root measurement from d^2 Haar-random states, redrawn until the
 * measurement matrix has full column rank (smallest singular value > 1e-8).
 */
Povm random_srm(int d, Rng &rng);

ProbabilityVector born_probabilities(const DensityMatrix &rho, const Povm &povm);

/// Born probabilities for an arbitrary Hermitian operator (no validity checks
/// on the result). Used inside iterative estimators.
RealVector born_values(const ComplexMatrix &rho, const Povm &povm);

MeasurementMatrix measurement_matrix(const Povm &povm, const OperatorBasis &basis);

/// Multinomial draw of `trials` shots via sequential conditional binomials.
FrequencyVector sample_frequencies(const ProbabilityVector &p, std::int64_t trials, Rng &rng);

/// Integer counts behind sample_frequencies (sum equals `trials`).
std::vector<std::int64_t> sample_counts(const ProbabilityVector &p, std::int64_t trials, Rng &rng);

} // namespace qst
