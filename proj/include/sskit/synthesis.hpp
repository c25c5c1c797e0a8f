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
#ifndef SSKIT_SYNTHESIS_HPP
#define SSKIT_SYNTHESIS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "realization.hpp"

namespace sskit {

struct GainSet {
    Matrix K;                                 // m x n, u = -K x
    std::optional<Matrix> L;                  // n x p observer gain
    std::vector<Complex> achievedStatePoles;  // eig(A - BK), sorted
    std::vector<Complex> achievedObserverPoles;
    Vector projection;                        // w used for multi-input placement (empty for SISO)
};

namespace detail {

inline void requireConjugateClosed(const std::vector<Complex>& poles) {
    for (const Complex& p : poles) {
        if (std::abs(p.imag()) <= 1e-12 * (1.0 + std::abs(p))) continue;
        int same = 0, conj = 0;
        for (const Complex& q : poles) {
            if (std::abs(q - p) <= 1e-9 * (1.0 + std::abs(p))) ++same;
            if (std::abs(q - std::conj(p)) <= 1e-9 * (1.0 + std::abs(p))) ++conj;
        }
        if (same != conj) fail(ErrorKind::ConjugacyViolation, "desired poles are not closed under conjugation");
    }
}

/// Largest relative error between achieved and desired spectra. Repeated
/// desired values are compared through the mean of the matched achieved
/// group, since a k-fold root is only determined to about eps^(1/k).
inline double spectrumMismatch(const std::vector<Complex>& achieved, const std::vector<Complex>& desired) {
    if (achieved.size() != desired.size()) return std::numeric_limits<double>::infinity();
    std::vector<bool> used(achieved.size(), false);
    std::vector<bool> grouped(desired.size(), false);
    double worst = 0.0;
    for (std::size_t i = 0; i < desired.size(); ++i) {
        if (grouped[i]) continue;
        const Complex p = desired[i];
        std::size_t k = 0;
        for (std::size_t j = i; j < desired.size(); ++j) {
            if (!grouped[j] && std::abs(desired[j] - p) <= 1e-9 * (1.0 + std::abs(p))) {
                grouped[j] = true;
                ++k;
            }
        }
        Complex sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t a = 0; a < achieved.size(); ++a) {
                if (!used[a] && std::abs(achieved[a] - p) < best) {
                    best = std::abs(achieved[a] - p);
                    arg = a;
                }
            }
            used[arg] = true;
            sum += achieved[arg];
            if (k == 1) worst = std::max(worst, best / (1.0 + std::abs(p)));
        }
        if (k > 1) worst = std::max(worst, std::abs(sum / static_cast<double>(k) - p) / (1.0 + std::abs(p)));
    }
    return worst;
}

inline std::vector<Complex> closedLoopPoles(const Matrix& A, const Matrix& B, const Matrix& K) {
    return eigen(Matrix(A - B * K)).sortedValues();
}

/// Single-input placement through the controllable canonical form:
/// P = Cbar * C^-1 takes x to the companion coordinates, where the gain is
/// the coefficient difference alpha_k - a_k. Returns K = Kbar P.
inline Matrix placeSingleInput(const Matrix& A, const Vector& b, const std::vector<Complex>& desired) {
    const Eigen::Index n = A.rows();
    const Polynomial a = characteristicPolynomial(A);
    const Polynomial alpha = Polynomial::fromRoots(desired);
    Matrix Abar = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) Abar(i, i + 1) = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) Abar(n - 1, j) = -a.coeff(static_cast<int>(j));
    const Matrix bbar = Vector::Unit(n, n - 1);
    const Matrix ctrb = ctrbMatrix(A, b);
    const Matrix ctrbBar = ctrbMatrix(Abar, bbar);
    Eigen::FullPivLU<Matrix> lu(ctrb.transpose());
    if (!lu.isInvertible()) fail(ErrorKind::Uncontrollable, "(A, b) is not controllable");
    // P = ctrbBar * ctrb^-1, computed as (ctrb^-T ctrbBar^T)^T.
    const Matrix P = lu.solve(ctrbBar.transpose()).transpose();
    Matrix Kbar(1, n);
    for (Eigen::Index j = 0; j < n; ++j) Kbar(0, j) = alpha.coeff(static_cast<int>(j)) - a.coeff(static_cast<int>(j));
    return Kbar * P;
}

/// Fixed quasi-random sequence of unit vectors in R^m, starting at the
/// normalized ones vector.
inline Vector projectionCandidate(Eigen::Index m, std::size_t k, std::uint64_t seed) {
    if (k == 0) return Vector::Ones(m) / std::sqrt(static_cast<double>(m));
    Vector w(m);
    static constexpr unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    for (Eigen::Index i = 0; i < m; ++i) {
        const unsigned base = primes[static_cast<std::size_t>(i) % std::size(primes)];
        std::size_t idx = k + static_cast<std::size_t>(seed % 997) + static_cast<std::size_t>(i / static_cast<Eigen::Index>(std::size(primes))) * 7919;
        double f = 1.0, r = 0.0;
        while (idx > 0) {
            f /= base;
            r += f * static_cast<double>(idx % base);
            idx /= base;
        }
        w(i) = 2.0 * r - 1.0;
    }
    const double nw = w.norm();
    return nw > 1e-12 ? Vector(w / nw) : Vector(Vector::Unit(m, 0));
}

}  // namespace detail

struct PlacementOptions {
    double verifyTol = 1e-6;
    std::uint64_t seed = 0;
    std::size_t maxProjections = 64;
};

/// State-feedback gain with eig(A - BK) at the desired poles. Multi-input
/// plants are reduced to one input through B w for the first w in a fixed
/// sequence that keeps (A, B w) controllable, so K = w Kbar has rank one.
[[nodiscard]] inline GainSet placePoles(const StateSpace& sys, const std::vector<Complex>& desired,
                                        const PlacementOptions& opt = {}) {
    const Eigen::Index n = sys.n(), m = sys.m();
    if (static_cast<Eigen::Index>(desired.size()) != n)
        detail::fail(ErrorKind::InvalidArgument, "need exactly n desired poles");
    detail::requireConjugateClosed(desired);
    GainSet g;
    if (n == 0) {
        g.K = Matrix::Zero(m, 0);
        return g;
    }
    if (m == 0) detail::fail(ErrorKind::Uncontrollable, "system has no inputs");
    const StructuralReport rep = structuralAnalysis(sys);
    if (!rep.uncontrollableModes.empty()) detail::fail(ErrorKind::Uncontrollable, "(A, B) has uncontrollable modes");

    auto attempt = [&](const Vector& w) -> std::optional<Matrix> {
        const Vector bw = sys.B * w;
        const StructuralReport r = structuralAnalysis(StateSpace(sys.A, bw, Matrix::Zero(0, n), Matrix::Zero(0, 1)));
        if (!r.uncontrollableModes.empty()) return std::nullopt;
        if (conditionNumber(r.ctrb) > 1e13) return std::nullopt;
        const Matrix K = w * detail::placeSingleInput(sys.A, bw, desired);
        if (detail::spectrumMismatch(detail::closedLoopPoles(sys.A, sys.B, K), desired) > opt.verifyTol) return std::nullopt;
        return K;
    };

    if (m == 1) {
        g.K = detail::placeSingleInput(sys.A, sys.B.col(0), desired);
    } else {
        bool ok = false;
        for (std::size_t k = 0; k < opt.maxProjections && !ok; ++k) {
            const Vector w = detail::projectionCandidate(m, k, opt.seed);
            if (auto K = attempt(w)) {
                g.K = *K;
                g.projection = w;
                ok = true;
            }
        }
        if (!ok) detail::fail(ErrorKind::ProjectionFailed, "no input projection in the fixed sequence gave a verified placement");
    }
    g.achievedStatePoles = detail::closedLoopPoles(sys.A, sys.B, g.K);
    if (detail::spectrumMismatch(g.achievedStatePoles, desired) > opt.verifyTol)
        detail::fail(ErrorKind::IllConditioned, "achieved closed-loop poles miss the request beyond tolerance");
    return g;
}

/// Observer gain by placement on the transposed dual: eig(A - LC).
[[nodiscard]] inline GainSet observerGain(const StateSpace& sys, const std::vector<Complex>& desired,
                                          const PlacementOptions& opt = {}) {
    detail::requireConjugateClosed(desired);
    const StructuralReport rep = structuralAnalysis(sys);
    if (!rep.unobservableModes.empty()) detail::fail(ErrorKind::Unobservable, "(A, C) has unobservable modes");
    GainSet d = placePoles(dual(sys), desired, opt);
    GainSet g;
    g.K = Matrix::Zero(sys.m(), sys.n());
    g.L = d.K.transpose();
    g.projection = d.projection;
    g.achievedObserverPoles = eigen(Matrix(sys.A - *g.L * sys.C)).sortedValues();
    return g;
}

struct ObserverFeedback {
    StateSpace closedLoop;   // states (x, e), e = x - xhat, input r added at u
    StateSpace compensator;  // y -> u with u = -(compensator output)
    TransferMatrix compensatorTf;
    std::vector<Complex> spectrum;
    double separationMismatch = 0.0;
};

/// Plant plus full-order observer with u = -K xhat + r.
[[nodiscard]] inline ObserverFeedback assembleObserverFeedback(const StateSpace& sys, const Matrix& K, const Matrix& L) {
    const Eigen::Index n = sys.n(), m = sys.m(), p = sys.p();
    if (K.rows() != m || K.cols() != n || L.rows() != n || L.cols() != p)
        detail::fail(ErrorKind::DimensionMismatch, "K must be m x n and L must be n x p");
    ObserverFeedback out;
    Matrix Acl(2 * n, 2 * n), Bcl(2 * n, m), Ccl(p, 2 * n);
    Acl << sys.A - sys.B * K, sys.B * K, Matrix::Zero(n, n), sys.A - L * sys.C;
    Bcl << sys.B, Matrix::Zero(n, m);
    Ccl << sys.C - sys.D * K, sys.D * K;
    out.closedLoop = StateSpace(Acl, Bcl, Ccl, sys.D);
    out.compensator = StateSpace(sys.A - sys.B * K - L * (sys.C - sys.D * K), L, K, Matrix::Zero(m, p));
    out.compensatorTf = ssToTf(out.compensator);
    out.spectrum = eigen(Acl).sortedValues();
    std::vector<Complex> expected = eigen(Matrix(sys.A - sys.B * K)).sortedValues();
    for (const Complex& c : eigen(Matrix(sys.A - L * sys.C)).sortedValues()) expected.push_back(c);
    out.separationMismatch = detail::spectrumMismatch(out.spectrum, expected);
    return out;
}

struct ReducedObserver {
    Matrix Lr;             // (n - p) x p
    StateSpace estimator;  // inputs (y, u), state z = xbar2 - Lr y, output xhat
    Matrix P;              // coordinates xbar = P x with top block C
    std::vector<Complex> achievedPoles;
};

/// Luenberger reduced-order observer in derivative-free form.
[[nodiscard]] inline ReducedObserver reducedOrderObserver(const StateSpace& sys, const std::vector<Complex>& poles,
                                                          const PlacementOptions& opt = {}) {
    const Eigen::Index n = sys.n(), m = sys.m(), p = sys.p();
    if (rank(sys.C, 1e-10) < p) detail::fail(ErrorKind::RankDeficientC, "C must have full row rank");
    if (static_cast<Eigen::Index>(poles.size()) != n - p)
        detail::fail(ErrorKind::InvalidArgument, "need exactly n - p observer poles");
    ReducedObserver out;
    // Rows of C, then unit rows picked by largest residual against the span.
    const Matrix completed = detail::independentColumnsCompleted(sys.C.transpose(), static_cast<int>(p), 1e-10);
    out.P = completed.transpose();
    const StateSpace t = similarityTransform(sys, out.P);
    const Eigen::Index r = n - p;
    const Matrix A11 = t.A.topLeftCorner(p, p), A12 = t.A.topRightCorner(p, r);
    const Matrix A21 = t.A.bottomLeftCorner(r, p), A22 = t.A.bottomRightCorner(r, r);
    const Matrix B1 = t.B.topRows(p), B2 = t.B.bottomRows(r);
    Matrix F(r, r), Gy(r, p);
    if (r > 0) {
        const StateSpace sub(A22, Matrix::Zero(r, 0), A12, Matrix::Zero(p, 0));
        const StructuralReport s = structuralAnalysis(sub);
        if (!s.unobservableModes.empty()) detail::fail(ErrorKind::SubpairUnobservable, "(A22, A12) is not observable");
        out.Lr = *observerGain(sub, poles, opt).L;
        F = A22 - out.Lr * A12;
        Gy = A21 - out.Lr * A11 + F * out.Lr;
    } else {
        out.Lr = Matrix::Zero(0, p);
    }
    const Matrix Gu = (B2 - out.Lr * B1) - Gy * sys.D;  // y enters as y - D u
    const Matrix Pinv = out.P.fullPivLu().inverse();
    Matrix stackY(n, p), stackZ(n, r);
    stackY << Matrix::Identity(p, p), out.Lr;
    stackZ << Matrix::Zero(p, r), Matrix::Identity(r, r);
    Matrix Bz(r, p + m), Dz(n, p + m);
    Bz << Gy, Gu;
    Dz << Pinv * stackY, -Pinv * stackY * sys.D;
    out.estimator = StateSpace(F, Bz, Pinv * stackZ, Dz);
    out.achievedPoles = eigen(F).sortedValues();
    return out;
}

struct IntegralDesign {
    Matrix K1, K2;        // u = -K1 x - K2 q, q' = y - r
    StateSpace augmented; // A~ = [[A, 0], [C, 0]], B~ = [B; D]
    int rankCheck = 0;    // rank [[A, B], [C, D]]
    std::vector<Complex> achievedPoles;
};

[[nodiscard]] inline IntegralDesign integralControl(const StateSpace& sys, const std::vector<Complex>& poles,
                                                    const PlacementOptions& opt = {}) {
    const Eigen::Index n = sys.n(), m = sys.m(), p = sys.p();
    if (static_cast<Eigen::Index>(poles.size()) != n + p)
        detail::fail(ErrorKind::InvalidArgument, "need exactly n + p poles");
    IntegralDesign d;
    Matrix S(n + p, n + m);
    S << sys.A, sys.B, sys.C, sys.D;
    d.rankCheck = rank(S, 1e-10);
    if (d.rankCheck < n + p) detail::fail(ErrorKind::ZeroAtOrigin, "plant has a transmission zero at s = 0");
    if (!structuralAnalysis(sys).uncontrollableModes.empty()) detail::fail(ErrorKind::Uncontrollable, "(A, B) is not controllable");
    Matrix At = Matrix::Zero(n + p, n + p), Bt(n + p, m);
    At.topLeftCorner(n, n) = sys.A;
    At.bottomLeftCorner(p, n) = sys.C;
    Bt << sys.B, sys.D;
    d.augmented = StateSpace(At, Bt, Matrix::Identity(n + p, n + p), Matrix::Zero(n + p, m));
    const GainSet g = placePoles(d.augmented, poles, opt);
    d.K1 = g.K.leftCols(n);
    d.K2 = g.K.rightCols(p);
    d.achievedPoles = g.achievedStatePoles;
    return d;
}

struct DiophantineProblem {
    Polynomial a, b;            // plant b / a with a monic
    Polynomial alphaC, alphaO;
    Polynomial d, n;            // compensator n / d, d monic of degree deg a
    double residual = 0.0;      // max coefficient error of a d + b n - alphaC alphaO, relative
    RationalFunction compensator;
};

/// Solves a d + b n = alphaC alphaO through the 2n x 2n Sylvester system.
[[nodiscard]] inline DiophantineProblem diophantineDesign(const RationalFunction& plant, const Polynomial& alphaC,
                                                          const Polynomial& alphaO) {
    DiophantineProblem pr;
    const double lead = plant.den.leading();
    pr.a = plant.den.monic();
    pr.b = (1.0 / lead) * plant.num;
    const int n = pr.a.degree();
    if (n < 1) detail::fail(ErrorKind::InvalidArgument, "plant denominator must have positive degree");
    if (!plant.proper()) detail::fail(ErrorKind::ImproperTransferFunction, "plant must be proper");
    if (alphaC.degree() != n || alphaO.degree() != n)
        detail::fail(ErrorKind::InvalidArgument, "target polynomials must share the plant order");
    pr.alphaC = alphaC;
    pr.alphaO = alphaO;
    const Polynomial target = (alphaC * alphaO).monic();
    if (pr.b.isZero()) detail::fail(ErrorKind::CommonFactor, "plant numerator is zero");
    // Common roots make the Sylvester matrix singular; name that case first.
    const std::vector<Complex> za = pr.a.roots(), zb = pr.b.roots();
    for (const Complex& x : za)
        for (const Complex& y : zb)
            if (std::abs(x - y) <= 1e-6 * (1.0 + std::abs(x))) detail::fail(ErrorKind::CommonFactor, "a(s) and b(s) share a root");
    // Unknowns: d_0 .. d_{n-1}, n_0 .. n_{n-1}; equations: powers s^0 .. s^{2n-1}.
    const int N = 2 * n;
    Matrix S = Matrix::Zero(N, N);
    Vector rhs(N);
    for (int k = 0; k < N; ++k) rhs(k) = target.coeff(k) - pr.a.coeff(k - n);  // a * s^n moved right
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i <= n; ++i) {
            if (i + j < N) S(i + j, j) += pr.a.coeff(i);
            if (i + j < N) S(i + j, n + j) += pr.b.coeff(i);
        }
    }
    if (conditionNumber(S) > 1e12) detail::fail(ErrorKind::SingularSylvester, "Sylvester matrix is numerically singular");
    const Vector sol = S.fullPivLu().solve(rhs);
    std::vector<double> dc(static_cast<std::size_t>(n + 1)), nc(static_cast<std::size_t>(n));
    dc[0] = 1.0;
    for (int k = 0; k < n; ++k) {
        dc[static_cast<std::size_t>(n - k)] = sol(k);
        nc[static_cast<std::size_t>(n - 1 - k)] = sol(n + k);
    }
    pr.d = Polynomial(dc);
    pr.n = Polynomial(nc);
    const Polynomial lhs = pr.a * pr.d + pr.b * pr.n;
    double worst = 0.0;
    for (int k = 0; k <= 2 * n; ++k) worst = std::max(worst, std::abs(lhs.coeff(k) - target.coeff(k)));
    pr.residual = worst / std::max(1.0, target.scale());
    if (pr.residual > 1e-8) detail::fail(ErrorKind::SingularSylvester, "Diophantine residual exceeds tolerance");
    pr.compensator = RationalFunction(pr.n, pr.d);
    return pr;
}

}  // namespace sskit

#endif  // SSKIT_SYNTHESIS_HPP
