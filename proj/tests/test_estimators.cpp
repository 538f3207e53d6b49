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

#include <catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "qst/error.hpp"
#include "qst/estimators.hpp"
#include "qst/measurement.hpp"
#include "qst/rng.hpp"

using namespace qst;
using Catch::Approx;

namespace {

struct Setup {
    Povm povm;
    OperatorBasis basis;
    MeasurementMatrix c;
};

Setup make_setup(int d, std::uint64_t seed) {
    Rng rng(seed);
    Povm povm = random_srm(d, rng);
    auto basis = gell_mann_basis(d);
    auto c = measurement_matrix(povm, basis);
    return {std::move(povm), std::move(basis), std::move(c)};
}

Povm projective(int d) {
    std::vector<PureState> states;
    for (int k = 0; k < d; ++k) {
        ComplexVector v = ComplexVector::Zero(d);
        v[k] = 1.0;
        states.emplace_back(v);
    }
    return square_root_measurement(states);
}

} // namespace

TEST_CASE("linear inversion is exact on noiseless data") {
    for (int d : {2, 3, 5}) {
        const Setup s = make_setup(d, 100 + d);
        Rng rng(d);
        for (int i = 0; i < 20; ++i) {
            const auto rho = random_density_ginibre(d, rng);
            const auto f = FrequencyVector::exact(born_probabilities(rho, s.povm));
            const auto r = linear_inversion(f, s.c, d);
            CHECK((r.coords - to_bloch(rho, s.basis).coords).norm() < 1e-10);
            CHECK(hs_distance(from_bloch(r, s.basis), rho) < 1e-10);
        }
        const DensityMatrix mixed(ComplexMatrix::Identity(d, d) / double(d));
        const auto r = linear_inversion(FrequencyVector::exact(born_probabilities(mixed, s.povm)), s.c, d);
        CHECK(r.coords[0] == Approx(1.0 / std::sqrt(double(d))).epsilon(1e-12));
        CHECK(r.coords.tail(d * d - 1).norm() < 1e-12);
    }
}

TEST_CASE("LinearInverter matches linear_inversion") {
    const Setup s = make_setup(3, 7);
    const LinearInverter inv(s.c, 3);
    Rng rng(1);
    const auto f = sample_frequencies(born_probabilities(random_density_ginibre(3, rng), s.povm), 50, rng);
    CHECK((inv.invert(f).coords - linear_inversion(f, s.c, 3).coords).norm() < 1e-14);
}

TEST_CASE("pseudoinverse gives the least-squares solution of a 4x3 system") {
    // A duplicated row; the normal equations are well posed.
    RealMatrix c(4, 3);
    c << 1, 0, 2, 0, 1, 1, 1, 0, 2, 3, 1, 0;
    const RealVector f = (RealVector(4) << 0.3, 0.1, 0.5, 0.2).finished();
    const RealVector normal = (c.transpose() * c).inverse() * (c.transpose() * f);
    CHECK((pseudoinverse(c) * f - normal).norm() < 1e-12);
}

TEST_CASE("pseudoinverse gives the minimum-norm solution of a rank-deficient system") {
    // Third column = first + second, and a duplicated row: rank 2.
    RealMatrix b(4, 2);
    b << 1, 0, 0, 1, 1, 0, 1, 1;
    RealMatrix fmap(2, 3);
    fmap << 1, 0, 1, 0, 1, 1;
    const RealMatrix c = b * fmap;
    const RealVector f = (RealVector(4) << 0.3, 0.1, 0.5, 0.2).finished();
    // least squares in the column space, then the minimum-norm preimage
    const RealVector y = (b.transpose() * b).inverse() * (b.transpose() * f);
    const RealVector x = fmap.transpose() * (fmap * fmap.transpose()).inverse() * y;
    const RealVector got = pseudoinverse(c) * f;
    CHECK((got - x).norm() < 1e-12);
    CHECK((c * got - f).norm() == Approx((c * x - f).norm()).epsilon(1e-12));
}

TEST_CASE("simplex projection water-fills") {
    CHECK((simplex_projection((RealVector(2) << 1.5, -0.5).finished()) - RealVector::Unit(2, 0)).norm() == 0.0);
    const RealVector v = (RealVector(4) << 0.5, 0.4, 0.3, -1.0).finished();
    // sorted 0.5, 0.4, 0.3: theta = (1.2 - 1)/3
    const double theta = 0.2 / 3.0;
    const RealVector want = (RealVector(4) << 0.5 - theta, 0.4 - theta, 0.3 - theta, 0.0).finished();
    CHECK((simplex_projection(v) - want).norm() < 1e-15);
}

TEST_CASE("psd_simplex_projection examples") {
    Rng rng(3);
    const auto rho = random_density_ginibre(4, rng);
    CHECK(oracle::frobenius(psd_simplex_projection(rho).matrix() - rho.matrix()) < 1e-12);
    CHECK(oracle::frobenius(psd_simplex_projection(HermitianMatrix(oracle::diag({1.5, -0.5}))).matrix() -
                            oracle::diag({1.0, 0.0})) < 1e-15);
}

TEST_CASE("psd_simplex_projection is idempotent") {
    std::mt19937_64 g(5);
    for (int trial = 0; trial < 30; ++trial) {
        const HermitianMatrix h(oracle::random_hermitian(2 + trial % 5, g));
        const auto once = psd_simplex_projection(h);
        CHECK(oracle::frobenius(psd_simplex_projection(once).matrix() - once.matrix()) < 1e-12);
    }
}

TEST_CASE("psd_simplex_projection beats random states in Frobenius distance") {
    std::mt19937_64 g(6);
    for (int trial = 0; trial < 3; ++trial) {
        const ComplexMatrix h = oracle::random_hermitian(3, g) * 0.5;
        const double dist = oracle::frobenius(psd_simplex_projection(HermitianMatrix(h)).matrix() - h);
        int closer = 0;
        for (int i = 0; i < 10000; ++i) {
            closer += oracle::frobenius(oracle::random_state(3, g) - h) < dist ? 1 : 0;
        }
        CHECK(closer == 0);
    }
}

TEST_CASE("constrained least squares recovers interior states") {
    const Setup s = make_setup(3, 8);
    Rng rng(4);
    for (int i = 0; i < 10; ++i) {
        const auto rho = random_density_ginibre(3, rng);
        const auto f = FrequencyVector::exact(born_probabilities(rho, s.povm));
        const auto rep = constrained_ls(f, s.c, s.basis);
        CHECK(hs_distance(rep.estimate, rho) < 1e-6);
    }
}

TEST_CASE("constrained least squares lands on the Bloch sphere when LI leaves the ball") {
    const Setup s = make_setup(2, 9);
    const oracle::QubitBorn born(s.povm.elements());
    std::mt19937_64 g(10);
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> scale(1.05, 1.5);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::Vector3d u(n(g), n(g), n(g));
        u.normalize();
        double k = scale(g);
        while (born(k * u).minCoeff() < 0.0) {
            k = 1.0 + 0.5 * (k - 1.0);
        }
        const FrequencyVector f{born(k * u), 0};
        const auto li = linear_inversion(f, s.c, 2);
        REQUIRE(std::sqrt(2.0) * li.coords.tail(3).norm() > 1.0);

        const auto rep = constrained_ls(f, s.c, s.basis);
        const DensityMatrix est(rep.estimate.matrix());
        CHECK(est.purity() == Approx(1.0).margin(1e-6));
        const Eigen::Vector3d best = oracle::bloch_ball_grid_search(born, f.values);
        CHECK(oracle::frobenius(rep.estimate.matrix() - oracle::qubit_state(best)) < 2e-3);
    }
}

TEST_CASE("constrained least squares output is a state no worse than clipped LI") {
    const Setup s = make_setup(3, 11);
    Rng rng(12);
    for (int i = 0; i < 100; ++i) {
        const auto rho = random_density_ginibre(3, rng);
        const auto f = sample_frequencies(born_probabilities(rho, s.povm), 9 + i * 10, rng);
        const auto rep = constrained_ls(f, s.c, s.basis);
        CHECK_NOTHROW(DensityMatrix(rep.estimate.matrix()));
        const auto clipped = positivize(from_bloch(linear_inversion(f, s.c, 3), s.basis));
        const double obj = (f.values - s.c.c * to_bloch(rep.estimate, s.basis).coords).norm();
        const double obj_clip = (f.values - s.c.c * to_bloch(clipped, s.basis).coords).norm();
        CHECK(obj <= obj_clip + 1e-12);
        for (std::size_t k = 1; k < rep.objective_trace.size(); ++k) {
            CHECK(rep.objective_trace[k] <= rep.objective_trace[k - 1]);
        }
    }
}

TEST_CASE("mle: true probabilities leave the true state fixed") {
    const Setup s = make_setup(3, 13);
    Rng rng(14);
    SolverOptions opts;
    opts.max_iterations = 100;
    opts.tolerance = 1e-300;
    for (int i = 0; i < 10; ++i) {
        const auto rho = random_density_ginibre(3, rng);
        const auto f = FrequencyVector::exact(born_probabilities(rho, s.povm));
        const auto rep = mle(f, s.povm, rho, opts);
        CHECK(hs_distance(rep.estimate, rho) < 1e-10);
    }
}

TEST_CASE("mle with a projective measurement has diag(f) as its fixed point") {
    const Povm povm = projective(3);
    const FrequencyVector f{(RealVector(3) << 0.2, 0.5, 0.3).finished(), 10};
    SolverOptions opts;
    opts.max_iterations = 50;
    const auto fixed = mle(f, povm, DensityMatrix(oracle::diag({0.2, 0.5, 0.3})), opts);
    CHECK(fixed.converged);
    CHECK(oracle::frobenius(fixed.estimate.matrix() - oracle::diag({0.2, 0.5, 0.3})) < 1e-15);
    // From the mixed state the undamped map alternates p -> f^2/p; the
    // damped fallback still walks towards diag(f).
    const auto rep = mle(f, povm);
    CHECK(oracle::frobenius(rep.estimate.matrix() - oracle::diag({0.2, 0.5, 0.3})) < 1e-6);
}

TEST_CASE("mle log-likelihood never decreases") {
    const Setup s = make_setup(3, 15);
    Rng rng(16);
    for (int i = 0; i < 20; ++i) {
        const auto rho = random_density_ginibre(3, rng);
        const auto f = sample_frequencies(born_probabilities(rho, s.povm), 1000, rng);
        const auto rep = mle(f, s.povm);
        REQUIRE(rep.objective_trace.size() == static_cast<std::size_t>(rep.iterations) + 1);
        for (std::size_t k = 1; k < rep.objective_trace.size(); ++k) {
            CHECK(rep.objective_trace[k] >= rep.objective_trace[k - 1] - 1e-12);
        }
        CHECK_NOTHROW(DensityMatrix(rep.estimate.matrix()));
    }
}

TEST_CASE("mle reports non-convergence with the best iterate") {
    const Setup s = make_setup(3, 17);
    Rng rng(18);
    const auto f = sample_frequencies(born_probabilities(random_density_ginibre(3, rng), s.povm), 100, rng);
    SolverOptions opts;
    opts.max_iterations = 3;
    const auto rep = mle(f, s.povm, opts);
    CHECK_FALSE(rep.converged);
    CHECK(rep.iterations == 3);
    CHECK(rep.objective_trace.back() >= rep.objective_trace.front());
}

TEST_CASE("estimators are deterministic") {
    const Setup s = make_setup(3, 19);
    Rng rng(20);
    const auto f = sample_frequencies(born_probabilities(random_density_ginibre(3, rng), s.povm), 300, rng);
    CHECK(mle(f, s.povm).estimate.matrix() == mle(f, s.povm).estimate.matrix());
    CHECK(constrained_ls(f, s.c, s.basis).estimate.matrix() == constrained_ls(f, s.c, s.basis).estimate.matrix());
}

TEST_CASE("log_likelihood examples") {
    const RealVector uniform = RealVector::Constant(4, 0.25);
    CHECK(log_likelihood({uniform, 0}, {uniform}) == Approx(std::log(0.25)).epsilon(1e-15));
    const RealVector onehot = RealVector::Unit(4, 2);
    CHECK(log_likelihood({onehot, 0}, {onehot}) == 0.0);
}

TEST_CASE("log_likelihood is maximized at p = f on the 3-simplex") {
    const RealVector f = (RealVector(3) << 0.2, 0.3, 0.5).finished();
    double best = -1e300;
    RealVector arg;
    for (int i = 1; i < 100; ++i) {
        for (int j = 1; i + j < 100; ++j) {
            const RealVector p = (RealVector(3) << i / 100.0, j / 100.0, (100 - i - j) / 100.0).finished();
            const double l = log_likelihood({f, 0}, {p});
            if (l > best) {
                best = l;
                arg = p;
            }
        }
    }
    CHECK((arg - f).norm() < 1e-12);
}

TEST_CASE("solver options are validated") {
    const Setup s = make_setup(2, 21);
    const FrequencyVector f{RealVector::Constant(4, 0.25), 0};
    SolverOptions bad;
    bad.max_iterations = 0;
    CHECK_THROWS_AS(mle(f, s.povm, bad), Error);
    bad = SolverOptions{};
    bad.tolerance = 0.0;
    CHECK_THROWS_AS(constrained_ls(f, s.c, s.basis, bad), Error);
    CHECK_THROWS_AS(mle(FrequencyVector{RealVector::Constant(3, 1.0 / 3.0), 0}, s.povm), Error);
}
