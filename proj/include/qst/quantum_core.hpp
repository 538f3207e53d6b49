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
 * Dense Hermitian linear algebra for d-dimensional quantum states: the
 * orthonormal operator basis, Bloch and Cholesky parametrizations, the
 * Hilbert-Schmidt distance and random-state generators.
 */

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qst/rng.hpp"

namespace qst {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Eigenvalues within this distance of zero count as zero in PSD checks.
inline constexpr double kEigenTolerance = 1e-10;

/// Tag selecting the unchecked constructors of the matrix wrappers. Only for
/// call sites where the invariant holds by construction.
struct TrustedTag {};
inline constexpr TrustedTag trusted{};

/// Returns (m + m^dagger) / 2.
ComplexMatrix hermitize(const ComplexMatrix &m);

/**
 * Square complex matrix that is Hermitian up to floating-point drift. The
 * checked constructor accepts residuals up to 1e-10 relative (Frobenius) and
 * stores the symmetrized matrix. It may have negative eigenvalues.
 */
class HermitianMatrix {
  public:
    HermitianMatrix() = default;
    explicit HermitianMatrix(const ComplexMatrix &m);
    HermitianMatrix(ComplexMatrix m, TrustedTag) : m_(std::move(m)) {}

    [[nodiscard]] const ComplexMatrix &matrix() const noexcept { return m_; }
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(m_.rows()); }

  private:
    ComplexMatrix m_;
};

/// Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
  public:
    DensityMatrix() = default;
    explicit DensityMatrix(const ComplexMatrix &m);
    DensityMatrix(ComplexMatrix m, TrustedTag) : m_(std::move(m)) {}

    [[nodiscard]] const ComplexMatrix &matrix() const noexcept { return m_; }
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(m_.rows()); }
    [[nodiscard]] HermitianMatrix hermitian() const { return {m_, trusted}; }
    [[nodiscard]] double purity() const;

    operator HermitianMatrix() const { return hermitian(); } // NOLINT

  private:
    ComplexMatrix m_;
};

/// Unit-norm state vector.
class PureState {
  public:
    explicit PureState(const ComplexVector &amplitudes);

    [[nodiscard]] const ComplexVector &amplitudes() const noexcept { return v_; }
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(v_.size()); }
    [[nodiscard]] DensityMatrix projector() const;

  private:
    ComplexVector v_;
};

/// Orthonormal Hermitian operator basis; element 0 is 1/sqrt(d), the rest are
/// traceless generalized Gell-Mann matrices.
class OperatorBasis {
  public:
    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(elements_.size()); }
    [[nodiscard]] const ComplexMatrix &operator[](int k) const { return elements_[k]; }
    [[nodiscard]] const std::vector<ComplexMatrix> &elements() const noexcept { return elements_; }

  private:
    friend OperatorBasis gell_mann_basis(int d);
    int dim_ = 0;
    std::vector<ComplexMatrix> elements_;
};

/// Real coordinates r_k = Tr(rho G_k) in an OperatorBasis; length d^2.
struct BlochVector {
    int dim = 0;
    RealVector coords;
};

/**
 * Lower-triangular factor A with rho = A A^dagger / Tr(A A^dagger). The
 * canonical form has a real nonnegative diagonal, which makes the factor of a
 * full-rank state unique.
 */
class CholeskyFactor {
  public:
    explicit CholeskyFactor(const ComplexMatrix &lower);

    [[nodiscard]] const ComplexMatrix &matrix() const noexcept { return a_; }
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(a_.rows()); }

    /// Flattens the d^2 real degrees of freedom row by row over the lower
    /// triangle: diagonal entries as one real, off-diagonal as (re, im).
    [[nodiscard]] RealVector to_real() const;
    /// Inverse of to_real(). Diagonal values are passed through std::abs.
    static CholeskyFactor from_real(int d, const RealVector &values);

  private:
    ComplexMatrix a_;
};

OperatorBasis gell_mann_basis(int d);

BlochVector to_bloch(const HermitianMatrix &rho, const OperatorBasis &basis);
HermitianMatrix from_bloch(const BlochVector &r, const OperatorBasis &basis);

DensityMatrix cholesky_to_state(const CholeskyFactor &a);
CholeskyFactor state_to_cholesky(const DensityMatrix &rho);

double hs_distance(const HermitianMatrix &a, const HermitianMatrix &b);

DensityMatrix random_density_ginibre(int d, Rng &rng);
PureState random_haar_pure(int d, Rng &rng);

double min_eigenvalue(const HermitianMatrix &h);

/// Clips negative eigenvalues to zero and renormalizes the trace.
DensityMatrix positivize(const HermitianMatrix &h);

/// Ascending eigenvalues and eigenvectors of the symmetrized matrix.
Eigen::SelfAdjointEigenSolver<ComplexMatrix> hermitian_eigen(const ComplexMatrix &m);

/// Tr(a b) without forming the product.
Complex trace_product(const ComplexMatrix &a, const ComplexMatrix &b);

} // namespace qst
