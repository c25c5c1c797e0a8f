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
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "sskit/numkit.hpp"
#include "sskit/rational.hpp"
#include "support.hpp"

using sskit::Complex;
using sskit::Matrix;
using sskit::Vector;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

}  // namespace

TEST(Eigen, IdentityHasOneTripleEigenvalue) {
    const auto es = sskit::eigen(Matrix::Identity(3, 3));
    ASSERT_EQ(es.groups.size(), 1u);
    EXPECT_EQ(es.groups[0].algebraic, 3);
    EXPECT_EQ(es.groups[0].geometric, 3);
    EXPECT_TRUE(es.isDiagonalizable);
    EXPECT_NEAR(std::abs(es.groups[0].value - Complex(1.0)), 0.0, 1e-12);
}

TEST(Eigen, DefectiveUpperTriangular) {
    const auto es = sskit::eigen(mat({{1, 1, 2}, {0, 1, 3}, {0, 0, 2}}));
    const auto v = es.sortedValues();
    EXPECT_LT(oracle::rootSetDistance(v, {1.0, 1.0, 2.0}), 1e-7);
    ASSERT_EQ(es.groups.size(), 2u);
    EXPECT_EQ(es.groups[0].algebraic, 2);
    EXPECT_EQ(es.groups[0].geometric, 1);
    EXPECT_EQ(es.groups[1].geometric, 1);
    EXPECT_FALSE(es.isDiagonalizable);
    EXPECT_FALSE(es.distinct());
}

TEST(Eigen, ProductIsDeterminantAndSumIsTrace) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const Eigen::Index n = 1 + trial % 6;
        const Matrix a = oracle::randomMatrix(n, n, rng, -3, 3);
        const auto es = sskit::eigen(a);
        Complex prod = 1.0, sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            prod *= es.values(i);
            sum += es.values(i);
        }
        const double det = a.determinant();
        EXPECT_NEAR(prod.real(), det, 1e-8 * std::max(1.0, std::abs(det)));
        EXPECT_NEAR(prod.imag(), 0.0, 1e-8 * std::max(1.0, std::abs(det)));
        EXPECT_NEAR(sum.real(), a.trace(), 1e-9 * std::max(1.0, std::abs(a.trace())));
        for (Eigen::Index j = 0; j < n; ++j) {
            const sskit::CVector r = a.cast<Complex>() * es.rightVectors.col(j) - es.values(j) * es.rightVectors.col(j);
            EXPECT_LT(r.norm(), 1e-9 * std::max(1.0, a.norm()));
        }
    }
}

TEST(Eigen, RejectsNonSquare) { EXPECT_SSKIT_ERROR(sskit::eigen(Matrix::Zero(2, 3)), NonSquare); }

TEST(Rank, ExamplesAgreeWithExactElimination) {
    EXPECT_EQ(sskit::rank(mat({{1, -2}, {1, -2}})), 1);
    EXPECT_EQ(sskit::rank(Matrix::Identity(4, 4)), 4);
    const Matrix m = mat({{1, 3, 2, 1}, {2, 0, 1, -1}, {-1, 1, 0, 1}});
    EXPECT_EQ(sskit::rank(m), 2);
    EXPECT_EQ(oracle::exactRank({{1, 3, 2, 1}, {2, 0, 1, -1}, {-1, 1, 0, 1}}), 2);
}

TEST(Rank, RandomIntegerMatricesMatchExactRank) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> d(-3, 3);
    for (int trial = 0; trial < 40; ++trial) {
        const int r = 2 + trial % 4, c = 2 + (trial / 4) % 4, k = 1 + trial % 3;
        // Low-rank product of integer factors.
        std::vector<std::vector<long long>> rows(static_cast<std::size_t>(r), std::vector<long long>(static_cast<std::size_t>(c), 0));
        Matrix left(r, k), right(k, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < k; ++j) left(i, j) = d(rng);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < c; ++j) right(i, j) = d(rng);
        const Matrix m = left * right;
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::llround(m(i, j));
        EXPECT_EQ(sskit::rank(m), oracle::exactRank(rows)) << m;
    }
}

TEST(Rank, ToleranceOverride) {
    Matrix m = mat({{1, 0}, {0, 1e-9}});
    EXPECT_EQ(sskit::rank(m), 2);
    EXPECT_EQ(sskit::rank(m, 1e-6), 1);
    EXPECT_EQ(sskit::rank(Matrix::Zero(3, 3)), 0);
}

TEST(Definiteness, Examples) {
    const auto pd = sskit::isPositiveDefinite(mat({{5.0 / 4, 1.0 / 4}, {1.0 / 4, 3.0 / 8}}));
    EXPECT_EQ(pd.verdict, sskit::Definiteness::PositiveDefinite);
    ASSERT_EQ(pd.minors.size(), 2u);
    EXPECT_NEAR(pd.minors[0], 5.0 / 4, 1e-14);
    EXPECT_NEAR(pd.minors[1], 5.0 / 4 * 3.0 / 8 - 1.0 / 16, 1e-14);
    EXPECT_EQ(sskit::isPositiveDefinite(Matrix::Zero(2, 2)).verdict, sskit::Definiteness::PositiveSemidefinite);
    EXPECT_EQ(sskit::isPositiveDefinite(mat({{1, 2}, {2, 1}})).verdict, sskit::Definiteness::Indefinite);
    EXPECT_EQ(sskit::isPositiveDefinite(mat({{1, 1}, {1, 1}})).verdict, sskit::Definiteness::PositiveSemidefinite);
    EXPECT_SSKIT_ERROR(sskit::isPositiveDefinite(mat({{1, 2}, {0, 1}})), NotSymmetric);
}

TEST(Definiteness, AgreesWithSampledQuadraticForms) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 60; ++trial) {
        const Eigen::Index n = 1 + trial % 6;
        const Matrix f = oracle::randomMatrix(n, n, rng);
        Matrix m;
        switch (trial % 3) {
        case 0: m = f * f.transpose() + 0.1 * Matrix::Identity(n, n); break;   // definite
        case 1: m = f.leftCols(std::max<Eigen::Index>(1, n - 1)) * f.leftCols(std::max<Eigen::Index>(1, n - 1)).transpose(); break;
        default: m = f + f.transpose() - 0.5 * Matrix::Identity(n, n); break;
        }
        const auto rep = sskit::isPositiveDefinite(m);
        const int brute = oracle::bruteDefiniteness(m, rng);
        if (rep.verdict == sskit::Definiteness::PositiveDefinite) {
            EXPECT_EQ(brute, 1) << m;
        } else if (rep.verdict == sskit::Definiteness::Indefinite) {
            // Sampling can miss a thin negative cone; only a found negative is decisive.
            EXPECT_NE(brute, 1) << m;
        } else {
            EXPECT_NE(brute, -1) << m;
        }
        if (brute == -1) {
            EXPECT_EQ(rep.verdict, sskit::Definiteness::Indefinite);
        }
    }
}

TEST(Expm, NilpotentSeriesTerminates) {
    const Matrix e = sskit::expm(mat({{0, 1}, {0, 0}}), 1.0);
    EXPECT_LT(oracle::maxAbsDiff(e, mat({{1, 1}, {0, 1}})), 1e-15);
}

TEST(Expm, CompanionMatrixClosedForm) {
    const Matrix a = mat({{0, 1}, {-2, -3}});
    for (double t : {0.0, 0.3, 1.0, 2.5, 7.0}) {
        const double e1 = std::exp(-t), e2 = std::exp(-2 * t);
        const Matrix want = mat({{2 * e1 - e2, e1 - e2}, {-2 * e1 + 2 * e2, -e1 + 2 * e2}});
        EXPECT_LT(oracle::maxAbsDiff(sskit::expm(a, t), want), 1e-12) << t;
    }
}

TEST(Expm, RotationByPi) {
    const double pi = std::numbers::pi;
    EXPECT_LT(oracle::maxAbsDiff(sskit::expm(mat({{0, pi}, {-pi, 0}}), 1.0), -Matrix::Identity(2, 2)), 1e-13);
}

TEST(Expm, SemigroupAndInverse) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> time(0.0, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 1 + trial % 5;
        const Matrix a = oracle::randomStable(n, rng);
        const double t = time(rng), s = time(rng);
        const Matrix ts = sskit::expm(a, t + s);
        EXPECT_LE((sskit::expm(a, t) * sskit::expm(a, s) - ts).norm(), 1e-8 * ts.norm());
        EXPECT_LE((sskit::expm(a, t) * sskit::expm(a, -t) - Matrix::Identity(n, n)).norm(), 1e-8);
    }
}

TEST(Expm, MatchesIndependentMethods) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index n = 2 + trial % 4;
        const Matrix a = oracle::randomMatrix(n, n, rng, -2, 2);
        const double t = 0.5 + trial * 0.2;
        const Matrix e = sskit::expm(a, t);
        EXPECT_LT(oracle::maxAbsDiff(e, oracle::expmRk4(a, t)), 1e-9 * std::max(1.0, e.norm()));
        EXPECT_LT(oracle::maxAbsDiff(e, oracle::expmEigen(a, t)), 1e-8 * std::max(1.0, e.norm()));
    }
}

TEST(Expm, LargeNormStaysAccurate) {
    const Matrix a = mat({{-50, 20}, {0, -60}});
    const Matrix e = sskit::expm(a, 1.0);
    EXPECT_TRUE(e.allFinite());
    EXPECT_LT(oracle::maxAbsDiff(e, oracle::expmEigen(a, 1.0)), 1e-20);
    EXPECT_SSKIT_ERROR(sskit::expm(a, std::nan("")), InvalidArgument);
}

TEST(Representation, Examples) {
    EXPECT_LT((sskit::representation(mat({{1, 0}, {1, 1}}), Vector::Map(std::vector<double>{2, 5}.data(), 2)) - Eigen::Vector2d(2, 3)).norm(), 1e-14);
    const Vector x = Eigen::Vector3d(0.3, -7, 2);
    EXPECT_LT((sskit::representation(Matrix::Identity(3, 3), x) - x).norm(), 1e-14);
    const Matrix e = mat({{1, 2, 1}, {1, 0, 0}, {1, 0, 1}});
    EXPECT_LT((sskit::representation(e, Eigen::Vector3d(3, 2, 1)) - Eigen::Vector3d(2, 1, -1)).norm(), 1e-13);
    EXPECT_SSKIT_ERROR(sskit::representation(mat({{1, 2}, {2, 4}}), Eigen::Vector2d(1, 1)), SingularBasis);
}

TEST(Representation, RoundTrip) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 1 + trial % 5;
        const Matrix e = oracle::randomMatrix(n, n, rng) + 2.0 * Matrix::Identity(n, n);
        const Vector x = oracle::randomMatrix(n, 1, rng, -5, 5);
        EXPECT_LT((e * sskit::representation(e, x) - x).norm(), 1e-10);
    }
}

TEST(Grammian, Examples) {
    const auto id = sskit::basisGrammianAndReciprocal(Matrix::Identity(3, 3));
    EXPECT_LT(oracle::maxAbsDiff(id.grammian, Matrix::Identity(3, 3)), 1e-15);
    EXPECT_LT(oracle::maxAbsDiff(id.reciprocal, Matrix::Identity(3, 3)), 1e-15);
    const double c = std::cos(0.7), s = std::sin(0.7);
    EXPECT_LT(oracle::maxAbsDiff(sskit::basisGrammianAndReciprocal(mat({{c, -s}, {s, c}})).grammian, Matrix::Identity(2, 2)), 1e-15);
    const auto g = sskit::basisGrammianAndReciprocal(mat({{1, 0}, {1, 1}}));
    EXPECT_LT(oracle::maxAbsDiff(g.grammian, mat({{2, 1}, {1, 1}})), 1e-15);
    EXPECT_LT(oracle::maxAbsDiff(g.reciprocal, mat({{1, 0}, {-1, 1}})), 1e-15);
}

TEST(Jordan, DefectiveExampleGivesTwoBlocks) {
    const Matrix a = mat({{1, 1, 2}, {0, 1, 3}, {0, 0, 2}});
    const auto j = sskit::jordanLike(a);
    ASSERT_EQ(j.blocks.size(), 2u);
    EXPECT_NEAR(std::abs(j.blocks[0].eigenvalue - Complex(1.0)), 0.0, 1e-7);
    EXPECT_EQ(j.blocks[0].size, 2);
    EXPECT_NEAR(std::abs(j.blocks[1].eigenvalue - Complex(2.0)), 0.0, 1e-7);
    EXPECT_EQ(j.blocks[1].size, 1);
    const Matrix want = mat({{1, 1, 0}, {0, 1, 0}, {0, 0, 2}});
    EXPECT_LT((j.form.real() - want).cwiseAbs().maxCoeff(), 1e-7);
    EXPECT_LT((j.transform * j.form * j.transform.inverse() - a.cast<Complex>()).norm(), 1e-6);
}

TEST(Jordan, DiagonalAndNilpotent) {
    const auto d = sskit::jordanLike(Eigen::Vector3d(3, -1, 0.5).asDiagonal().toDenseMatrix());
    EXPECT_EQ(d.blocks.size(), 3u);
    for (const auto& b : d.blocks) EXPECT_EQ(b.size, 1);
    // Transform columns are unit coordinate vectors up to scale and order.
    for (Eigen::Index c = 0; c < 3; ++c) EXPECT_NEAR(d.transform.col(c).cwiseAbs().maxCoeff(), d.transform.col(c).norm(), 1e-12);
    const auto nil = sskit::jordanLike(mat({{0, 1}, {0, 0}}));
    ASSERT_EQ(nil.blocks.size(), 1u);
    EXPECT_EQ(nil.blocks[0].size, 2);
    EXPECT_NEAR(std::abs(nil.blocks[0].eigenvalue), 0.0, 1e-12);
}

TEST(Jordan, ReconstructsIntegerMatrices) {
    const std::vector<Matrix> cases = {
        mat({{2, 1, 0, 0}, {0, 2, 0, 0}, {0, 0, 2, 0}, {0, 0, 0, 3}}),
        mat({{5, 4, 2, 1}, {0, 1, -1, -1}, {-1, -1, 3, 0}, {1, 1, -1, 2}}),
        mat({{0, 1, 0}, {0, 0, 1}, {1, -3, 3}}),
        mat({{1, -1}, {1, 1}}),
    };
    for (const Matrix& a : cases) {
        const auto j = sskit::jordanLike(a);
        EXPECT_LT((j.transform * j.form * j.transform.inverse() - a.cast<Complex>()).norm(), 1e-6 * std::max(1.0, a.norm())) << a;
    }
    EXPECT_SSKIT_ERROR(sskit::jordanLike(Matrix::Identity(9, 9)), InvalidArgument);
}

TEST(Polynomial, ArithmeticAndRoots) {
    const sskit::Polynomial p{1, -3, 2};  // (s-1)(s-2)
    EXPECT_EQ(p.degree(), 2);
    EXPECT_DOUBLE_EQ(p.coeff(0), 2.0);
    EXPECT_DOUBLE_EQ(p.coeff(2), 1.0);
    EXPECT_LT(oracle::rootSetDistance(p.roots(), {1.0, 2.0}), 1e-12);
    const auto [q, r] = divmod(sskit::Polynomial{1, 0, 0, -1}, sskit::Polynomial{1, -1});
    EXPECT_EQ(q, (sskit::Polynomial{1, 1, 1}));
    EXPECT_TRUE(r.isZero());
    EXPECT_EQ(p.derivative(), (sskit::Polynomial{2, -3}));
    EXPECT_EQ(p.reflected(), (sskit::Polynomial{1, 3, 2}));
    EXPECT_EQ(sskit::Polynomial({0, 0, 3}).degree(), 0);
    EXPECT_NEAR(std::abs(p(Complex(0, 1)) - Complex(1, -3)), 0.0, 1e-15);
}

TEST(Polynomial, CharacteristicPolynomialMatchesLeverrier) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 15; ++trial) {
        const Eigen::Index n = 1 + trial % 6;
        const Matrix a = oracle::randomMatrix(n, n, rng, -2, 2);
        const auto want = oracle::charPolyLeverrier(a);
        const auto got = sskit::characteristicPolynomial(a);
        ASSERT_EQ(got.degree(), n);
        for (Eigen::Index k = 0; k <= n; ++k)
            EXPECT_NEAR(got.coeff(static_cast<int>(n - k)), want[static_cast<std::size_t>(k)], 1e-9 * std::pow(3.0, static_cast<double>(n)));
    }
}

TEST(Rational, ReduceCoprimeCancelsCommonRoots) {
    // (s+1)(s+3) / ((s+1)(s+2)(s+4))
    const sskit::RationalFunction g(sskit::Polynomial{1, 4, 3}, sskit::Polynomial{1, 7, 14, 8});
    const auto r = sskit::reduceCoprime(g);
    EXPECT_TRUE(r.hadCancellation());
    ASSERT_EQ(r.cancelled.size(), 1u);
    EXPECT_NEAR(std::abs(r.cancelled[0] - Complex(-1.0)), 0.0, 1e-9);
    EXPECT_EQ(r.den.degree(), 2);
    for (Complex s : {Complex(0.3, 1.0), Complex(2.0, -0.5)}) EXPECT_NEAR(std::abs(r(s) - g(s)), 0.0, 1e-10);
    const sskit::RationalFunction coprime(sskit::Polynomial{2, 1}, sskit::Polynomial{2, 2, 4});
    const auto c = sskit::reduceCoprime(coprime);
    EXPECT_FALSE(c.hadCancellation());
    EXPECT_DOUBLE_EQ(c.den.leading(), 1.0);
}
