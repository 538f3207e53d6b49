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

#include "qst/quantum_core.hpp"

#include <cmath>
#include <string>

#include "qst/error.hpp"

namespace qst {

namespace {

void require_square(const ComplexMatrix &m, const char *what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        fail(ErrorKind::Dimension, std::string(what) + ": matrix must be square and nonempty");
    }
}

void require_finite(const ComplexMatrix &m, const char *what) {
    if (!m.allFinite()) {
        fail(ErrorKind::Numeric, std::string(what) + ": non-finite entry");
    }
}

void require_same_dim(int a, int b, const char *what) {
    if (a != b) {
        fail(ErrorKind::Dimension, std::string(what) + ": dimension mismatch (" +
                                       std::to_string(a) + " vs " + std::to_string(b) + ")");
    }
}

ComplexMatrix standard_gaussian_matrix(int rows, int cols, Rng &rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexMatrix x(rows, cols);
    // Column-major fill order is part of the determinism contract.
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            x(i, j) = Complex(re, im);
        }
    }
    return x;
}

} // namespace

ComplexMatrix hermitize(const ComplexMatrix &m) {
    return (m + m.adjoint()) * 0.5;
}

Complex trace_product(const ComplexMatrix &a, const ComplexMatrix &b) {
    // Tr(ab) = sum_ij a_ij b_ji
    return (a.array() * b.transpose().array()).sum();
}

Eigen::SelfAdjointEigenSolver<ComplexMatrix> hermitian_eigen(const ComplexMatrix &m) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(m));
    if (es.info() != Eigen::Success) {
        fail(ErrorKind::Numeric, "Hermitian eigendecomposition failed");
    }
    return es;
}

HermitianMatrix::HermitianMatrix(const ComplexMatrix &m) {
    require_square(m, "HermitianMatrix");
    require_finite(m, "HermitianMatrix");
    const double scale = m.norm();
    if ((m - m.adjoint()).norm() > 1e-10 * scale) {
        fail(ErrorKind::Numeric, "HermitianMatrix: input is not Hermitian");
    }
    m_ = hermitize(m);
}

DensityMatrix::DensityMatrix(const ComplexMatrix &m) {
    const HermitianMatrix h(m);
    if (std::abs(h.matrix().trace().real() - 1.0) > 1e-10) {
        fail(ErrorKind::Numeric, "DensityMatrix: trace differs from 1");
    }
    if (min_eigenvalue(h) < -kEigenTolerance) {
        fail(ErrorKind::Numeric, "DensityMatrix: negative eigenvalue");
    }
    m_ = h.matrix();
}

double DensityMatrix::purity() const {
    return trace_product(m_, m_).real();
}

PureState::PureState(const ComplexVector &amplitudes) : v_(amplitudes) {
    if (v_.size() == 0 || !v_.allFinite()) {
        fail(ErrorKind::InvalidArgument, "PureState: empty or non-finite amplitudes");
    }
    if (std::abs(v_.norm() - 1.0) > 1e-12) {
        fail(ErrorKind::Numeric, "PureState: amplitudes are not normalized");
    }
}

DensityMatrix PureState::projector() const {
    return {v_ * v_.adjoint(), trusted};
}

CholeskyFactor::CholeskyFactor(const ComplexMatrix &lower) : a_(lower) {
    require_square(a_, "CholeskyFactor");
    require_finite(a_, "CholeskyFactor");
    for (Eigen::Index j = 1; j < a_.cols(); ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
            if (a_(i, j) != Complex(0.0, 0.0)) {
                fail(ErrorKind::InvalidArgument, "CholeskyFactor: nonzero entry above the diagonal");
            }
        }
    }
}

RealVector CholeskyFactor::to_real() const {
    const int d = dim();
    RealVector out(d * d);
    int k = 0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < i; ++j) {
            out[k++] = a_(i, j).real();
            out[k++] = a_(i, j).imag();
        }
        out[k++] = a_(i, i).real();
    }
    return out;
}

CholeskyFactor CholeskyFactor::from_real(int d, const RealVector &values) {
    if (d < 1 || values.size() != static_cast<Eigen::Index>(d) * d) {
        fail(ErrorKind::Dimension, "CholeskyFactor::from_real: expected d^2 values");
    }
    ComplexMatrix a = ComplexMatrix::Zero(d, d);
    int k = 0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < i; ++j) {
            a(i, j) = Complex(values[k], values[k + 1]);
            k += 2;
        }
        a(i, i) = std::abs(values[k++]);
    }
    return CholeskyFactor(a);
}

OperatorBasis gell_mann_basis(int d) {
    if (d < 2) {
        fail(ErrorKind::InvalidArgument, "gell_mann_basis: dimension must be at least 2, got " +
                                             std::to_string(d));
    }
    OperatorBasis basis;
    basis.dim_ = d;
    basis.elements_.reserve(static_cast<std::size_t>(d) * d);
    basis.elements_.push_back(ComplexMatrix::Identity(d, d) / std::sqrt(double(d)));

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < d; ++j) {
        for (int k = j + 1; k < d; ++k) {
            ComplexMatrix sym = ComplexMatrix::Zero(d, d);
            sym(j, k) = inv_sqrt2;
            sym(k, j) = inv_sqrt2;
            basis.elements_.push_back(std::move(sym));

            ComplexMatrix anti = ComplexMatrix::Zero(d, d);
            anti(j, k) = Complex(0.0, -inv_sqrt2);
            anti(k, j) = Complex(0.0, inv_sqrt2);
            basis.elements_.push_back(std::move(anti));
        }
    }
    for (int l = 1; l < d; ++l) {
        ComplexMatrix diag = ComplexMatrix::Zero(d, d);
        const double norm = 1.0 / std::sqrt(double(l) * (l + 1));
        for (int j = 0; j < l; ++j) {
            diag(j, j) = norm;
        }
        diag(l, l) = -double(l) * norm;
        basis.elements_.push_back(std::move(diag));
    }
    return basis;
}

BlochVector to_bloch(const HermitianMatrix &rho, const OperatorBasis &basis) {
    require_same_dim(rho.dim(), basis.dim(), "to_bloch");
    BlochVector r{basis.dim(), RealVector(basis.size())};
    for (int k = 0; k < basis.size(); ++k) {
        r.coords[k] = trace_product(rho.matrix(), basis[k]).real();
    }
    return r;
}

HermitianMatrix from_bloch(const BlochVector &r, const OperatorBasis &basis) {
    if (r.coords.size() != basis.size()) {
        fail(ErrorKind::Dimension, "from_bloch: expected " + std::to_string(basis.size()) +
                                       " coordinates, got " + std::to_string(r.coords.size()));
    }
    if (!r.coords.allFinite()) {
        fail(ErrorKind::Numeric, "from_bloch: non-finite coordinate");
    }
    ComplexMatrix m = ComplexMatrix::Zero(basis.dim(), basis.dim());
    for (int k = 0; k < basis.size(); ++k) {
        m += r.coords[k] * basis[k];
    }
    return {m, trusted};
}

DensityMatrix cholesky_to_state(const CholeskyFactor &a) {
    const ComplexMatrix aat = a.matrix() * a.matrix().adjoint();
    const double tr = aat.trace().real();
    if (!(tr > 0.0)) {
        fail(ErrorKind::Numeric, "cholesky_to_state: degenerate (zero) factor");
    }
    return {hermitize(aat / tr), trusted};
}

CholeskyFactor state_to_cholesky(const DensityMatrix &rho) {
    const int d = rho.dim();
    const ComplexMatrix h = hermitize(rho.matrix());
    const double lowest = hermitian_eigen(h).eigenvalues()[0];
    if (lowest < -kEigenTolerance) {
        fail(ErrorKind::Numeric, "state_to_cholesky: state has a negative eigenvalue");
    }
    constexpr double jitter = 1e-12;
    double shift = 0.0;
    Eigen::LLT<ComplexMatrix> llt(h);
    if (llt.info() != Eigen::Success || lowest < jitter) {
        shift = jitter + std::max(0.0, -lowest);
        llt.compute(h + shift * ComplexMatrix::Identity(d, d));
        if (llt.info() != Eigen::Success) {
            fail(ErrorKind::Numeric, "state_to_cholesky: factorization failed");
        }
    }
    ComplexMatrix lower = llt.matrixL();
    for (int i = 0; i < d; ++i) {
        lower(i, i) = std::abs(lower(i, i));
    }
    lower /= std::sqrt(1.0 + d * shift);
    return CholeskyFactor(lower);
}

double hs_distance(const HermitianMatrix &a, const HermitianMatrix &b) {
    require_same_dim(a.dim(), b.dim(), "hs_distance");
    return (a.matrix() - b.matrix()).norm();
}

DensityMatrix random_density_ginibre(int d, Rng &rng) {
    if (d < 2) {
        fail(ErrorKind::InvalidArgument, "random_density_ginibre: dimension must be at least 2");
    }
    for (;;) {
        const ComplexMatrix x = standard_gaussian_matrix(d, d, rng);
        const ComplexMatrix xx = x * x.adjoint();
        const double tr = xx.trace().real();
        if (tr > 0.0) {
            return {hermitize(xx / tr), trusted};
        }
    }
}

PureState random_haar_pure(int d, Rng &rng) {
    if (d < 2) {
        fail(ErrorKind::InvalidArgument, "random_haar_pure: dimension must be at least 2");
    }
    for (;;) {
        const ComplexVector v = standard_gaussian_matrix(d, 1, rng).col(0);
        const double n = v.norm();
        if (n > 0.0) {
            return PureState(v / n);
        }
    }
}

double min_eigenvalue(const HermitianMatrix &h) {
    return hermitian_eigen(h.matrix()).eigenvalues()[0];
}

DensityMatrix positivize(const HermitianMatrix &h) {
    const auto es = hermitian_eigen(h.matrix());
    RealVector clipped = es.eigenvalues().cwiseMax(0.0);
    const double total = clipped.sum();
    if (es.eigenvalues().maxCoeff() <= kEigenTolerance || !(total > 0.0)) {
        fail(ErrorKind::Numeric, "positivize: matrix has no positive part");
    }
    clipped /= total;
    const ComplexMatrix &u = es.eigenvectors();
    return {hermitize(u * clipped.cast<Complex>().asDiagonal() * u.adjoint()), trusted};
}

} // namespace qst
