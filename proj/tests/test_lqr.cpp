/*
 Copyright 2026 The statespace-kit Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sskit/builtins.hpp"
#include "sskit/lqr.hpp"
#include "sskit/realization.hpp"
#include "sskit/response.hpp"
#include "support.hpp"

using sskit::Complex;
using sskit::LqrProblem;
using sskit::Matrix;
using sskit::Polynomial;
using sskit::StateSpace;
using sskit::Vector;

namespace {

const double kSqrt3 = std::sqrt(3.0);

LqrProblem infiniteProblem(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r) {
    LqrProblem pr;
    pr.sys = StateSpace(a, b, Matrix::Identity(a.rows(), a.rows()), Matrix::Zero(a.rows(), b.cols()));
    pr.Q = q;
    pr.R = r;
    pr.infinite = true;
    return pr;
}

LqrProblem finiteProblem(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r, const Matrix& m, double t1) {
    LqrProblem pr = infiniteProblem(a, b, q, r);
    pr.infinite = false;
    pr.M = m;
    pr.t0 = 0.0;
    pr.t1 = t1;
    return pr;
}

/// Double integrator with friction: 1 / (s (s + 1)).
LqrProblem handExample() {
    Matrix a(2, 2);
    a << 0, 1, 0, -1;
    Matrix q = Matrix::Zero(2, 2);
    q(0, 0) = 1.0;
    return infiniteProblem(a, Eigen::Vector2d(0, 1), q, Matrix::Ones(1, 1));
}

LqrProblem multivariateExample() {
    Matrix a(2, 2), q(2, 2);
    a << 0, -1, 0, 0;
    q << 4, 2, 2, 1;
    return infiniteProblem(a, Matrix::Identity(2, 2), q, Matrix::Identity(2, 2));
}

/// Random stabilizable/detectable problem with Q = C'C of full rank.
LqrProblem randomProblem(Eigen::Index n, Eigen::Index m, std::mt19937_64& rng) {
    const Matrix a = oracle::randomMatrix(n, n, rng, -1.5, 1.5);
    const Matrix b = oracle::randomMatrix(n, m, rng);
    const Matrix c = oracle::randomMatrix(n, n, rng) + 1.5 * Matrix::Identity(n, n);
    const Matrix rr = oracle::randomMatrix(m, m, rng);
    return infiniteProblem(a, b, c.transpose() * c, rr * rr.transpose() + 0.5 * Matrix::Identity(m, m));
}

/// Stabilizing initial gain for Newton (Bass's method): K0 = B' X^-1 with X
/// the infinite grammian of the shifted pair (-A - sI, B).
Matrix stabilizingGain(const Matrix& a, const Matrix& b) {
    const Eigen::Index n = a.rows();
    const double shift = a.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
    const Matrix as = -a - shift * Matrix::Identity(n, n);
    // X solves as X + X as' + B B' = 0 (as is Hurwitz by the shift).
    const Matrix x = oracle::lyapunovKron(as.transpose(), b * b.transpose());
    return b.transpose() * x.inverse();
}

}  // namespace

TEST(Are, MultivariateExample) {
    const auto sol = sskit::solveAre(multivariateExample());
    Matrix pbar(2, 2);
    pbar << 2, 0, 0, 1;
    EXPECT_LT(oracle::maxAbsDiff(sol.Pbar, pbar), 1e-9);
    EXPECT_LT(oracle::maxAbsDiff(sol.K, pbar), 1e-9);
    EXPECT_LT(oracle::rootSetDistance(sol.closedLoopPoles, {-1.0, -2.0}), 1e-9);
}

TEST(Are, HandWorkedExample) {
    const auto sol = sskit::solveAre(handExample());
    Matrix pbar(2, 2);
    pbar << kSqrt3, 1, 1, kSqrt3 - 1;
    EXPECT_LT(oracle::maxAbsDiff(sol.Pbar, pbar), 1e-9);
    EXPECT_LT(oracle::maxAbsDiff(sol.K, Eigen::RowVector2d(1, kSqrt3 - 1)), 1e-9);
    const Complex p(-kSqrt3 / 2, 0.5);
    EXPECT_LT(oracle::rootSetDistance(sol.closedLoopPoles, {p, std::conj(p)}), 1e-9);
    ASSERT_TRUE(sol.pd.has_value());
    EXPECT_EQ(sol.pd->verdict, sskit::Definiteness::PositiveDefinite);
}

TEST(Are, HurwitzWithZeroWeight) {
    Matrix a(2, 2);
    a << -1, 2, 0, -3;
    const auto sol = sskit::solveAre(infiniteProblem(a, Eigen::Vector2d(0, 1), Matrix::Zero(2, 2), Matrix::Ones(1, 1)));
    EXPECT_LT(sol.Pbar.norm(), 1e-12);
    EXPECT_LT(sol.K.norm(), 1e-12);
    EXPECT_FALSE(sol.flags.empty());
}

TEST(Are, DetectabilityExampleValueVanishesOnUnobservableSubspace) {
    Matrix a(2, 2);
    a << -3, -2, 1, 0;
    const auto sol = sskit::solveAre(infiniteProblem(a, Eigen::Vector2d(0, 1), Matrix::Ones(2, 2), Matrix::Ones(1, 1)));
    // P = p 11' with p^2 + 4p - 1 = 0 (1'A = -2 1'), so p = sqrt(5) - 2.
    EXPECT_LT(oracle::maxAbsDiff(sol.Pbar, (std::sqrt(5.0) - 2.0) * Matrix::Ones(2, 2)), 1e-9);
    EXPECT_NEAR(sol.Pbar(0, 0), 0.24, 0.005);
    EXPECT_NEAR(sskit::lqrValue(sol, Eigen::Vector2d(1, -1)), 0.0, 1e-12);
    EXPECT_EQ(sskit::lqrValue(sol, Vector::Zero(2)), 0.0);
    ASSERT_TRUE(sol.pd.has_value());
    EXPECT_NE(sol.pd->verdict, sskit::Definiteness::PositiveDefinite);
}

TEST(Are, Errors) {
    Matrix a(2, 2);
    a << 1, 0, 0, -1;
    // Unstable mode 1 unreachable from B.
    EXPECT_SSKIT_ERROR(sskit::solveAre(infiniteProblem(a, Eigen::Vector2d(0, 1), Matrix::Identity(2, 2), Matrix::Ones(1, 1))),
                       NotStabilizable);
    // Unstable mode 1 invisible to Q.
    Matrix q = Matrix::Zero(2, 2);
    q(1, 1) = 1.0;
    EXPECT_SSKIT_ERROR(sskit::solveAre(infiniteProblem(a, Eigen::Vector2d(1, 1), q, Matrix::Ones(1, 1))), NotDetectable);
    EXPECT_SSKIT_ERROR(sskit::solveAre(infiniteProblem(a, Eigen::Vector2d(1, 1), Matrix::Identity(2, 2), Matrix::Zero(1, 1))),
                       InvalidArgument);
    Matrix qa(2, 2);
    qa << 1, 2, 0, 1;
    EXPECT_SSKIT_ERROR(sskit::solveAre(infiniteProblem(a, Eigen::Vector2d(1, 1), qa, Matrix::Ones(1, 1))), NotSymmetric);
}

TEST(Are, RandomAgainstNewtonKleinman) {
    std::mt19937_64 rng(81);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 1 + trial % 4, m = 1 + trial % 2;
        const LqrProblem pr = randomProblem(n, m, rng);
        const auto sol = sskit::solveAre(pr);
        const Matrix want = oracle::riccatiNewton(pr.sys.A, pr.sys.B, pr.Q, pr.R, stabilizingGain(pr.sys.A, pr.sys.B));
        EXPECT_LT(oracle::maxAbsDiff(sol.Pbar, want), 1e-7 * std::max(1.0, want.norm())) << "trial " << trial;
        const Matrix s = pr.sys.B * pr.R.inverse() * pr.sys.B.transpose();
        const double res = (pr.sys.A.transpose() * sol.Pbar + sol.Pbar * pr.sys.A - sol.Pbar * s * sol.Pbar + pr.Q).norm();
        EXPECT_LE(res, 1e-8 * (pr.Q.norm() + sol.Pbar.squaredNorm() * s.norm()));
        EXPECT_LT(oracle::rootSetDistance(oracle::eigenvalues(pr.sys.A - pr.sys.B * sol.K), sol.closedLoopPoles), 1e-6);
        // Hamiltonian spectrum pairs as (lambda, -lambda).
        std::vector<Complex> neg;
        for (const Complex& z : sol.hamiltonianSpectrum) neg.push_back(-z);
        EXPECT_LT(oracle::rootSetDistance(sol.hamiltonianSpectrum, neg), 1e-8 * std::max(1.0, pr.Q.norm()));
        // Q = C'C with C invertible: observable, so Pbar is positive definite.
        EXPECT_EQ(sol.pd->verdict, sskit::Definiteness::PositiveDefinite);
    }
}

TEST(Hamiltonian, Structure) {
    const LqrProblem pr = handExample();
    const Matrix h = sskit::hamiltonianMatrix(pr.sys.A, pr.sys.B, pr.Q, pr.R);
    Matrix jm = Matrix::Zero(4, 4);
    jm.topRightCorner(2, 2) = Matrix::Identity(2, 2);
    jm.bottomLeftCorner(2, 2) = -Matrix::Identity(2, 2);
    // J H is symmetric for a Hamiltonian matrix.
    EXPECT_LT(oracle::maxAbsDiff(jm * h, (jm * h).transpose()), 1e-15);
    EXPECT_EQ(h.topLeftCorner(2, 2), pr.sys.A);
    EXPECT_EQ(h.bottomRightCorner(2, 2), Matrix(-pr.sys.A.transpose()));
}

TEST(Rde, ScalarConvergesToAreValue) {
    const Matrix one = Matrix::Ones(1, 1);
    const auto sol = sskit::solveRde(finiteProblem(one, one, one, one, Matrix::Constant(1, 1, 5.0), 10.0));
    EXPECT_NEAR(sol.P.front()(0, 0), 1.0 + std::sqrt(2.0), 1e-4);
    EXPECT_EQ(sol.P.back()(0, 0), 5.0);
    EXPECT_LE(sol.residual, 1e-4);
    // Closed form through the Hamiltonian eigenvectors.
    const auto ham = sskit::solveRdeByHamiltonian(finiteProblem(one, one, one, one, Matrix::Constant(1, 1, 5.0), 10.0), 101);
    EXPECT_EQ(ham.P.back()(0, 0), 5.0);
    for (std::size_t k = 0; k < ham.times.size(); k += 10)
        EXPECT_NEAR(ham.P[k](0, 0), sol.Pat(ham.times[k])(0, 0), 1e-6) << ham.times[k];
    // Nonincreasing toward 1 + sqrt2 going backwards from M = 5.
    for (std::size_t k = 1; k < ham.times.size(); ++k) EXPECT_LE(ham.P[k - 1](0, 0), ham.P[k](0, 0) + 1e-12);
}

TEST(Rde, ZeroWeightsGiveZero) {
    Matrix a(2, 2);
    a << 0, 1, -1, 0;
    const auto sol = sskit::solveRde(finiteProblem(a, Eigen::Vector2d(0, 1), Matrix::Zero(2, 2), Matrix::Ones(1, 1), Matrix::Zero(2, 2), 3.0));
    for (const Matrix& p : sol.P) EXPECT_EQ(p.norm(), 0.0);
    EXPECT_EQ(sol.gainAt(1.0).norm(), 0.0);
}

TEST(Rde, MatchesHamiltonianClosedFormAndRk4) {
    Matrix a(2, 2), q(2, 2), m(2, 2);
    a << 0.5, 1, -0.3, -1;
    q << 2, 0.5, 0.5, 1;
    m << 1, 0.2, 0.2, 0.5;
    const LqrProblem pr = finiteProblem(a, Eigen::Vector2d(0.3, 1), q, Matrix::Constant(1, 1, 0.7), m, 3.0);
    const auto rde = sskit::solveRde(pr);
    const auto ham = sskit::solveRdeByHamiltonian(pr, 61);
    for (std::size_t k = 0; k < ham.times.size(); ++k) {
        EXPECT_LT(oracle::maxAbsDiff(ham.P[k], rde.Pat(ham.times[k])), 1e-6) << ham.times[k];
        EXPECT_LT((ham.P[k] - ham.P[k].transpose()).norm(), 1e-12);
        EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(ham.P[k]).eigenvalues().minCoeff(), -1e-10);
    }
    // Independent oracle: stack P into a vector and integrate backwards by RK4 in reversed time.
    const Matrix s = pr.sys.B * pr.R.inverse() * pr.sys.B.transpose();
    auto f = [&](double, const Vector& v) {
        const Matrix p = Eigen::Map<const Matrix>(v.data(), 2, 2);
        const Matrix d = q + p * a + a.transpose() * p - p * s * p;  // dP/d(tau), tau = t1 - t
        return Vector(Eigen::Map<const Vector>(d.data(), 4));
    };
    const Vector p0 = oracle::rk4(f, Eigen::Map<const Vector>(m.data(), 4), 0.0, 3.0, 6000);
    EXPECT_LT(oracle::maxAbsDiff(Eigen::Map<const Matrix>(p0.data(), 2, 2), rde.P.front()), 1e-8);
}

TEST(Rde, FixedPointWhenTerminalWeightIsAreSolution) {
    const LqrProblem inf = handExample();
    const auto are = sskit::solveAre(inf);
    LqrProblem pr = inf;
    pr.infinite = false;
    pr.M = are.Pbar;
    pr.t1 = 4.0;
    const auto ham = sskit::solveRdeByHamiltonian(pr, 21);
    for (const Matrix& p : ham.P) EXPECT_LT(oracle::maxAbsDiff(p, are.Pbar), 1e-9);
    const auto rde = sskit::solveRde(pr);
    for (std::size_t k = 0; k < rde.P.size(); k += 500) EXPECT_LT(oracle::maxAbsDiff(rde.P[k], are.Pbar), 1e-9);
}

TEST(Rde, MonotoneConvergenceWithZeroTerminalWeight) {
    std::mt19937_64 rng(82);
    for (int trial = 0; trial < 4; ++trial) {
        const LqrProblem inf = randomProblem(2 + trial % 2, 1, rng);
        const auto are = sskit::solveAre(inf);
        const Vector x0 = oracle::randomMatrix(inf.sys.n(), 1, rng);
        double prev = -1.0;
        for (double t1 : {2.0, 5.0, 10.0, 20.0}) {
            LqrProblem pr = inf;
            pr.infinite = false;
            pr.M = Matrix::Zero(inf.sys.n(), inf.sys.n());
            pr.t1 = t1;
            const double v = sskit::lqrValue(sskit::solveRde(pr), x0);
            EXPECT_GE(v, prev - 1e-12);
            prev = v;
            if (t1 == 20.0) {
                EXPECT_NEAR(v, sskit::lqrValue(are, x0), 1e-3);
            }
        }
    }
}

TEST(Rde, InvalidInputs) {
    const Matrix one = Matrix::Ones(1, 1);
    EXPECT_SSKIT_ERROR(sskit::solveRde(finiteProblem(one, one, one, one, one, 0.0)), InvalidHorizon);
    EXPECT_SSKIT_ERROR(sskit::solveRde(finiteProblem(one, one, one, one, -one, 1.0)), InvalidArgument);
    Matrix a(2, 2);
    a << 1, 0, 0, 1;
    EXPECT_SSKIT_ERROR(sskit::solveRdeByHamiltonian(finiteProblem(a, Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                                                                  Matrix::Zero(2, 2), 1.0)),
                       RepeatedHamiltonianEigenvalues);
    Matrix rot(2, 2);
    rot << 0, 1, -1, 0;
    EXPECT_SSKIT_ERROR(sskit::solveRdeByHamiltonian(finiteProblem(rot, Eigen::Vector2d(0, 1), Matrix::Zero(2, 2), Matrix::Ones(1, 1),
                                                                  Matrix::Zero(2, 2), 1.0)),
                       AxisEigenvalue);
}

TEST(ReturnDifference, KalmanInequalityAndIdentity) {
    const LqrProblem hand = handExample();
    const auto sol = sskit::solveAre(hand);
    const auto rep = sskit::returnDifferenceReport(hand.sys, hand.Q, hand.R, sol.K);
    EXPECT_GE(rep.minReturnDifference, 1.0 - 1e-6);
    EXPECT_LE(rep.identityResidual, 1e-7);
    // Independent evaluation of |1 + L(jw)| at one frequency.
    const Complex s(0.0, 0.7);
    const Eigen::MatrixXcd res = (s * Eigen::MatrixXcd::Identity(2, 2) - hand.sys.A.cast<Complex>()).inverse();
    const Complex loop = (sol.K.cast<Complex>() * res * hand.sys.B.cast<Complex>())(0, 0);
    const auto one = sskit::returnDifferenceReport(hand.sys, hand.Q, hand.R, sol.K, {0.7});
    EXPECT_NEAR(one.returnDifference[0], std::abs(1.0 + loop), 1e-12);
    EXPECT_NEAR(one.sensitivity[0], 1.0 / std::abs(1.0 + loop), 1e-12);

    const LqrProblem multi = multivariateExample();
    const auto ms = sskit::solveAre(multi);
    EXPECT_LE(sskit::returnDifferenceReport(multi.sys, multi.Q, multi.R, ms.K).identityResidual, 1e-7);

    const auto zero = sskit::returnDifferenceReport(hand.sys, Matrix::Zero(2, 2), hand.R, Matrix::Zero(1, 2), {0.1, 1.0, 10.0});
    for (double rd : zero.returnDifference) EXPECT_EQ(rd, 1.0);
}

TEST(ReturnDifference, RandomFullStateDesigns) {
    std::mt19937_64 rng(83);
    for (int trial = 0; trial < 15; ++trial) {
        const LqrProblem pr = randomProblem(1 + trial % 4, 1, rng);
        const auto sol = sskit::solveAre(pr);
        const auto rep = sskit::returnDifferenceReport(pr.sys, pr.Q, pr.R, sol.K);
        // Scalar R: |1 + L|^2 >= 1 holds for any positive R, so the bound is R-free.
        EXPECT_GE(rep.minReturnDifference, 1.0 - 1e-6) << "trial " << trial;
        EXPECT_LE(rep.identityResidual, 1e-7) << "trial " << trial;
    }
}

TEST(Srl, HandExampleAndAreAgreement) {
    const sskit::RationalFunction plant(Polynomial{1}, Polynomial{1, 1, 0});
    const auto pts = sskit::symmetricRootLocus(plant, {1.0});
    ASSERT_EQ(pts.size(), 1u);
    const Complex p(-kSqrt3 / 2, 0.5);
    EXPECT_LT(oracle::rootSetDistance(pts[0].stable, {p, std::conj(p)}), 1e-9);
    EXPECT_LT(pts[0].symmetryError, 1e-8);
    EXPECT_LT(oracle::rootSetDistance(pts[0].stable, sskit::solveAre(handExample()).closedLoopPoles), 1e-6);
}

TEST(Srl, LargeWeightApproachesReflectedOpenLoopPoles) {
    // Open loop poles 1 and -2: cheap-control limit keeps -2 and reflects 1 to -1.
    const sskit::RationalFunction plant(Polynomial{1, 3}, Polynomial{1, 1, -2});
    const auto pts = sskit::symmetricRootLocus(plant, {1e2, 1e4, 1e8});
    double prev = 1e300;
    for (const auto& pt : pts) {
        const double d = oracle::rootSetDistance(pt.stable, {-1.0, -2.0});
        EXPECT_LE(d, prev);
        prev = d;
        EXPECT_LT(pt.symmetryError, 1e-6);
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(Srl, RandomPlantsMatchAre) {
    std::mt19937_64 rng(84);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index n = 2 + trial % 3;
        const StateSpace sys = sskit::ccf({Polynomial(std::vector<double>{1.0, static_cast<double>(trial % 2)}),
                                          Polynomial::fromRoots(oracle::eigenvalues(oracle::randomMatrix(n, n, rng)))});
        const double r = 0.5 + trial;
        LqrProblem pr = infiniteProblem(sys.A, sys.B, sys.C.transpose() * sys.C, Matrix::Constant(1, 1, r));
        const auto are = sskit::solveAre(pr);
        const auto pts = sskit::symmetricRootLocus(sskit::ssToTf(sys).at(0, 0), {r});
        EXPECT_LT(oracle::rootSetDistance(pts[0].stable, are.closedLoopPoles), 1e-6) << "trial " << trial;
    }
}

TEST(Srl, PendubotGeneralizedLocus) {
    const StateSpace pend = *sskit::builtinModel("pendubot").lti;
    const auto pts = sskit::symmetricRootLocus(pend, Matrix::Identity(4, 4), {1.0});
    const auto are = sskit::solveAre(infiniteProblem(pend.A, pend.B, Matrix::Identity(4, 4), Matrix::Ones(1, 1)));
    EXPECT_LT(oracle::rootSetDistance(pts[0].stable, are.closedLoopPoles), 1e-4);
}

TEST(LqrValue, MatchesSimulatedCost) {
    const LqrProblem pr = handExample();
    const auto sol = sskit::solveAre(pr);
    const Vector x0 = Eigen::Vector2d(1, 0);
    const StateSpace closed(pr.sys.A - pr.sys.B * sol.K, Matrix::Zero(2, 1), Matrix::Identity(2, 2), Matrix::Zero(2, 1));
    const auto tr = sskit::simulate(closed, x0, [](double) { return Vector::Zero(1); }, 0.0, 30.0, 0.002);
    double cost = 0.0;
    auto integrand = [&](std::size_t k) {
        const Vector& x = tr.states[k];
        const Vector u = -sol.K * x;
        return x.dot(pr.Q * x) + u.dot(pr.R * u);
    };
    for (std::size_t k = 1; k < tr.times.size(); ++k)
        cost += 0.5 * (tr.times[k] - tr.times[k - 1]) * (integrand(k - 1) + integrand(k));
    const double v = sskit::lqrValue(sol, x0);
    EXPECT_NEAR(v, kSqrt3, 1e-9);
    EXPECT_NEAR(cost, v, 0.02 * v);
}
