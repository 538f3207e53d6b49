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

#include "qst/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qst/error.hpp"

namespace qst {

Povm::Povm(std::vector<ComplexMatrix> elements) : elements_(std::move(elements)) {
    if (elements_.empty()) {
        fail(ErrorKind::InvalidArgument, "Povm: no elements");
    }
    dim_ = static_cast<int>(elements_.front().rows());
    for (std::size_t l = 0; l < elements_.size(); ++l) {
        auto &e = elements_[l];
        if (e.rows() != dim_ || e.cols() != dim_) {
            fail(ErrorKind::Dimension, "Povm: element " + std::to_string(l) + " has wrong shape");
        }
        e = HermitianMatrix(e).matrix();
        if (hermitian_eigen(e).eigenvalues()[0] < -kEigenTolerance) {
            fail(ErrorKind::Numeric, "Povm: element " + std::to_string(l) + " is not positive");
        }
    }
    if (completeness_error() >= 1e-10) {
        fail(ErrorKind::Numeric, "Povm: elements do not sum to the identity");
    }
}

Povm::Povm(std::vector<ComplexMatrix> elements, TrustedTag) : elements_(std::move(elements)) {
    dim_ = elements_.empty() ? 0 : static_cast<int>(elements_.front().rows());
}

double Povm::completeness_error() const {
    ComplexMatrix sum = ComplexMatrix::Zero(dim_, dim_);
    for (const auto &e : elements_) {
        sum += e;
    }
    return (sum - ComplexMatrix::Identity(dim_, dim_)).norm();
}

Povm square_root_measurement(const std::vector<PureState> &states) {
    if (states.empty()) {
        fail(ErrorKind::InvalidArgument, "square_root_measurement: no states");
    }
    const int d = states.front().dim();
    ComplexMatrix frame = ComplexMatrix::Zero(d, d);
    for (const auto &s : states) {
        if (s.dim() != d) {
            fail(ErrorKind::Dimension, "square_root_measurement: states differ in dimension");
        }
        frame.noalias() += s.amplitudes() * s.amplitudes().adjoint();
    }
    const auto es = hermitian_eigen(frame);
    const RealVector &lambda = es.eigenvalues();
    const auto rank = (lambda.array() > kEigenTolerance).count();
    if (rank < d) {
        fail(ErrorKind::Numeric, "square_root_measurement: states span only rank " +
                                     std::to_string(rank) + " of dimension " + std::to_string(d));
    }
    const RealVector inv_sqrt = lambda.cwiseSqrt().cwiseInverse();
    const ComplexMatrix g_inv_half =
        es.eigenvectors() * inv_sqrt.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();

    std::vector<ComplexMatrix> elements;
    elements.reserve(states.size());
    for (const auto &s : states) {
        const ComplexVector v = g_inv_half * s.amplitudes();
        elements.push_back(hermitize(v * v.adjoint()));
    }
    return Povm(std::move(elements), trusted);
}

Povm random_srm(int d, Rng &rng) {
    const OperatorBasis basis = gell_mann_basis(d);
    for (;;) {
        std::vector<PureState> states;
        states.reserve(static_cast<std::size_t>(d) * d);
        for (int l = 0; l < d * d; ++l) {
            states.push_back(random_haar_pure(d, rng));
        }
        try {
            Povm povm = square_root_measurement(states);
            const MeasurementMatrix m = measurement_matrix(povm, basis);
            Eigen::JacobiSVD<RealMatrix> svd(m.c);
            if (svd.singularValues().minCoeff() > 1e-8) {
                return povm;
            }
        } catch (const Error &) {
            // rank-deficient draw; try again
        }
    }
}

RealVector born_values(const ComplexMatrix &rho, const Povm &povm) {
    RealVector p(povm.outcomes());
    for (int l = 0; l < povm.outcomes(); ++l) {
        p[l] = trace_product(rho, povm[l]).real();
    }
    return p;
}

ProbabilityVector born_probabilities(const DensityMatrix &rho, const Povm &povm) {
    if (rho.dim() != povm.dim()) {
        fail(ErrorKind::Dimension, "born_probabilities: state and POVM dimensions differ");
    }
    return {born_values(rho.matrix(), povm)};
}

MeasurementMatrix measurement_matrix(const Povm &povm, const OperatorBasis &basis) {
    if (povm.dim() != basis.dim()) {
        fail(ErrorKind::Dimension, "measurement_matrix: POVM and basis dimensions differ");
    }
    RealMatrix c(povm.outcomes(), basis.size());
    for (int l = 0; l < povm.outcomes(); ++l) {
        for (int k = 0; k < basis.size(); ++k) {
            c(l, k) = trace_product(povm[l], basis[k]).real();
        }
    }
    return {c};
}

std::vector<std::int64_t> sample_counts(const ProbabilityVector &p, std::int64_t trials, Rng &rng) {
    if (trials < 1) {
        fail(ErrorKind::InvalidArgument,
             "sample_frequencies: trials must be >= 1 (use exact probabilities for N = 0)");
    }
    const auto m = p.values.size();
    if (m == 0) {
        fail(ErrorKind::InvalidArgument, "sample_frequencies: empty probability vector");
    }
    std::vector<std::int64_t> counts(static_cast<std::size_t>(m), 0);
    std::int64_t remaining = trials;
    double mass = 0.0;
    for (Eigen::Index l = 0; l < m; ++l) {
        mass += std::max(0.0, p.values[l]);
    }
    for (Eigen::Index l = 0; l + 1 < m && remaining > 0; ++l) {
        const double pl = std::max(0.0, p.values[l]);
        const double q = mass > 0.0 ? std::clamp(pl / mass, 0.0, 1.0) : 0.0;
        std::binomial_distribution<std::int64_t> binom(remaining, q);
        const std::int64_t k = q >= 1.0 ? remaining : (q <= 0.0 ? 0 : binom(rng));
        counts[static_cast<std::size_t>(l)] = k;
        remaining -= k;
        mass -= pl;
    }
    counts.back() += remaining;
    return counts;
}

FrequencyVector sample_frequencies(const ProbabilityVector &p, std::int64_t trials, Rng &rng) {
    const auto counts = sample_counts(p, trials, rng);
    FrequencyVector f{RealVector(p.values.size()), trials};
    for (std::size_t l = 0; l < counts.size(); ++l) {
        f.values[static_cast<Eigen::Index>(l)] = double(counts[l]) / double(trials);
    }
    return f;
}

} // namespace qst
