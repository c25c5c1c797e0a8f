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
#ifndef SSKIT_LQR_HPP
#define SSKIT_LQR_HPP

#include <optional>
#include <string>
#include <vector>

#include "parallel.hpp"
#include "synthesis.hpp"

namespace sskit {

/// Cost int (x'Qx + u'Ru) dt + x(t1)' M x(t1) on [t0, t1], or the
/// infinite-horizon version when `infinite` is set (M, t1 ignored).
struct LqrProblem {
    StateSpace sys;
    Matrix Q, R, M;
    double t0 = 0.0, t1 = 1.0;
    bool infinite = false;
};

struct RiccatiSolution {
    bool infinite = false;
    std::vector<double> times;  // ascending; finite horizon only
    std::vector<Matrix> P;      // P(times[k])
    Matrix Pbar;                // infinite horizon
    Matrix K;                   // infinite horizon gain R^-1 B' Pbar
    Matrix gainFactor;          // R^-1 B'
    std::vector<Complex> closedLoopPoles;
    std::vector<Complex> hamiltonianSpectrum;
    double residual = 0.0;
    std::optional<DefinitenessReport> pd;
    std::vector<std::string> flags;

    /// Linear interpolation on the grid (exact at nodes).
    [[nodiscard]] Matrix Pat(double t) const {
        if (infinite) return Pbar;
        if (times.empty()) detail::fail(ErrorKind::InvalidArgument, "solution has no grid");
        if (t <= times.front()) return P.front();
        if (t >= times.back()) return P.back();
        const auto it = std::upper_bound(times.begin(), times.end(), t);
        const auto hi = static_cast<std::size_t>(it - times.begin());
        const double w = (t - times[hi - 1]) / (times[hi] - times[hi - 1]);
        return (1.0 - w) * P[hi - 1] + w * P[hi];
    }
    [[nodiscard]] Matrix gainAt(double t) const { return gainFactor * Pat(t); }
};

namespace detail {

inline void requireSymmetric(const Matrix& X, const char* what) {
    if ((X - X.transpose()).norm() > 1e-9 * std::max(1.0, X.norm()))
        fail(ErrorKind::NotSymmetric, std::string(what) + " is not symmetric");
}

inline void validateWeights(const LqrProblem& pr) {
    const Eigen::Index n = pr.sys.n(), m = pr.sys.m();
    if (pr.Q.rows() != n || pr.Q.cols() != n) fail(ErrorKind::DimensionMismatch, "Q must be n x n");
    if (pr.R.rows() != m || pr.R.cols() != m) fail(ErrorKind::DimensionMismatch, "R must be m x m");
    requireSymmetric(pr.Q, "Q");
    requireSymmetric(pr.R, "R");
    if (isPositiveDefinite(pr.Q).verdict == Definiteness::Indefinite) fail(ErrorKind::InvalidArgument, "Q must be PSD");
    if (isPositiveDefinite(pr.R).verdict != Definiteness::PositiveDefinite) fail(ErrorKind::InvalidArgument, "R must be PD");
    if (!pr.infinite) {
        if (pr.M.rows() != n || pr.M.cols() != n) fail(ErrorKind::DimensionMismatch, "M must be n x n");
        requireSymmetric(pr.M, "M");
        if (isPositiveDefinite(pr.M).verdict == Definiteness::Indefinite) fail(ErrorKind::InvalidArgument, "M must be PSD");
        if (!(pr.t1 > pr.t0)) fail(ErrorKind::InvalidHorizon, "t1 must exceed t0");
    }
}

inline Matrix gainFactor(const LqrProblem& pr) { return pr.R.ldlt().solve(pr.sys.B.transpose()); }

inline Matrix rdeRhs(const Matrix& A, const Matrix& S, const Matrix& Q, const Matrix& P) {
    // dP/dt = -(Q + PA + A'P - P S P)
    return -(Q + P * A + A.transpose() * P - P * S * P);
}

/// C with C'C = Q from the symmetric eigen square root (rows for positive
/// eigenvalues only).
inline Matrix weightFactor(const Matrix& Q) {
    const Eigen::Index n = Q.rows();
    if (n == 0) return Matrix(0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(Q));
    const double top = std::max(0.0, es.eigenvalues().maxCoeff());
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i)
        if (es.eigenvalues()(i) > 1e-12 * std::max(1.0, top)) keep.push_back(i);
    Matrix C(static_cast<Eigen::Index>(keep.size()), n);
    for (std::size_t r = 0; r < keep.size(); ++r)
        C.row(static_cast<Eigen::Index>(r)) = std::sqrt(es.eigenvalues()(keep[r])) * es.eigenvectors().col(keep[r]).transpose();
    return C;
}

}  // namespace detail

/// [[A, -B R^-1 B'], [-Q, -A']]
[[nodiscard]] inline Matrix hamiltonianMatrix(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R) {
    const Eigen::Index n = A.rows();
    Matrix H(2 * n, 2 * n);
    H << A, -B * R.ldlt().solve(B.transpose()), -Q, -A.transpose();
    return H;
}

struct RdeOptions {
    long steps = -1;  // negative: ceil(2000 max(1, |A| (t1 - t0))), capped at maxSteps
    long maxSteps = 200000;
};

/// Backward RK4 from P(t1) = M, symmetrized every step.
[[nodiscard]] inline RiccatiSolution solveRde(const LqrProblem& pr, const RdeOptions& opt = {}) {
    detail::validateWeights(pr);
    const Matrix& A = pr.sys.A;
    const double span = pr.t1 - pr.t0;
    long N = opt.steps;
    if (N <= 0) {
        N = static_cast<long>(std::ceil(2000.0 * std::max(1.0, norm2(A) * span)));
        N = std::min(N, opt.maxSteps);
    }
    const double h = span / static_cast<double>(N);
    RiccatiSolution sol;
    sol.gainFactor = detail::gainFactor(pr);
    const Matrix S = pr.sys.B * sol.gainFactor;
    std::vector<Matrix> back(static_cast<std::size_t>(N + 1));
    Matrix P = symmetrize(pr.M);
    back[static_cast<std::size_t>(N)] = P;
    for (long k = N; k > 0; --k) {
        const double t = pr.t0 + h * static_cast<double>(k);
        const Matrix k1 = detail::rdeRhs(A, S, pr.Q, P);
        const Matrix k2 = detail::rdeRhs(A, S, pr.Q, P - h / 2 * k1);
        const Matrix k3 = detail::rdeRhs(A, S, pr.Q, P - h / 2 * k2);
        const Matrix k4 = detail::rdeRhs(A, S, pr.Q, P - h * k3);
        P = symmetrize(P - h / 6 * (k1 + 2 * k2 + 2 * k3 + k4));
        if (!P.allFinite() || P.cwiseAbs().maxCoeff() > 1e12)
            detail::fail(ErrorKind::FiniteEscape, "Riccati solution escapes near t = " + std::to_string(t - h));
        back[static_cast<std::size_t>(k - 1)] = P;
    }
    sol.times.resize(static_cast<std::size_t>(N + 1));
    for (long k = 0; k <= N; ++k) sol.times[static_cast<std::size_t>(k)] = pr.t0 + h * static_cast<double>(k);
    sol.times.back() = pr.t1;
    sol.P = std::move(back);
    double worst = 0.0;
    for (long k = 0; k < N; ++k) {
        const Matrix& P0 = sol.P[static_cast<std::size_t>(k)];
        const Matrix& P1 = sol.P[static_cast<std::size_t>(k + 1)];
        const Matrix mid = 0.5 * (P0 + P1);
        const Matrix deriv = (P1 - P0) / h;
        worst = std::max(worst, (deriv - detail::rdeRhs(A, S, pr.Q, mid)).norm());
    }
    sol.residual = worst;
    sol.closedLoopPoles = eigen(Matrix(A - pr.sys.B * sol.gainFactor * sol.P.front())).sortedValues();
    return sol;
}

struct HamiltonianEigen {
    Matrix H;
    CVector values;
    CMatrix vectors;
    std::vector<Eigen::Index> stable;    // n indices, sorted by ascending real part
    std::vector<Eigen::Index> unstable;  // partner of stable[i] at about -lambda_i
};

namespace detail {

inline HamiltonianEigen hamiltonianEigen(const Matrix& H, bool requireDistinct) {
    const Eigen::Index n2 = H.rows(), n = n2 / 2;
    HamiltonianEigen he;
    he.H = H;
    Eigen::EigenSolver<Matrix> es(H, true);
    if (es.info() != Eigen::Success) fail(ErrorKind::BackendFailure, "Hamiltonian eigen iteration failed");
    he.values = es.eigenvalues();
    he.vectors = es.eigenvectors();
    const double scale = std::max(1.0, norm2(H));
    const double band = 1e-9 * scale;
    for (Eigen::Index i = 0; i < n2; ++i) {
        if (std::abs(he.values(i).real()) <= band) fail(ErrorKind::AxisEigenvalue, "Hamiltonian has an eigenvalue on the imaginary axis");
        if (requireDistinct)
            for (Eigen::Index j = i + 1; j < n2; ++j)
                if (std::abs(he.values(i) - he.values(j)) <= 1e-8 * scale)
                    fail(ErrorKind::RepeatedHamiltonianEigenvalues, "Hamiltonian eigenvalues are not distinct");
    }
    for (Eigen::Index i = 0; i < n2; ++i)
        if (he.values(i).real() < -band) he.stable.push_back(i);
    if (static_cast<Eigen::Index>(he.stable.size()) != n)
        fail(ErrorKind::StableSpaceDefect, "could not select n stable Hamiltonian directions");
    std::sort(he.stable.begin(), he.stable.end(), [&](Eigen::Index a, Eigen::Index b) { return complexLess(he.values(a), he.values(b)); });
    std::vector<bool> used(static_cast<std::size_t>(n2), false);
    for (Eigen::Index s : he.stable) used[static_cast<std::size_t>(s)] = true;
    for (Eigen::Index s : he.stable) {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index arg = -1;
        for (Eigen::Index j = 0; j < n2; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double d = std::abs(he.values(j) + he.values(s));
            if (d < best) {
                best = d;
                arg = j;
            }
        }
        used[static_cast<std::size_t>(arg)] = true;
        he.unstable.push_back(arg);
    }
    return he;
}

inline CMatrix columns(const CMatrix& V, const std::vector<Eigen::Index>& idx, Eigen::Index first, Eigen::Index count) {
    CMatrix out(count, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = V.col(idx[j]).segment(first, count);
    return out;
}

}  // namespace detail

/// Closed form P(t) = [U21 + U22 E G E][U11 + U12 E G E]^-1 with
/// E = e^{-Ls (t - t1)} and G = -(U22 - M U12)^-1 (U21 - M U11), evaluated
/// on `gridPoints` uniform times.
[[nodiscard]] inline RiccatiSolution solveRdeByHamiltonian(const LqrProblem& pr, int gridPoints = 201) {
    detail::validateWeights(pr);
    const Eigen::Index n = pr.sys.n();
    const Matrix H = hamiltonianMatrix(pr.sys.A, pr.sys.B, pr.Q, pr.R);
    const HamiltonianEigen he = detail::hamiltonianEigen(H, true);
    const CMatrix U11 = detail::columns(he.vectors, he.stable, 0, n), U21 = detail::columns(he.vectors, he.stable, n, n);
    const CMatrix U12 = detail::columns(he.vectors, he.unstable, 0, n), U22 = detail::columns(he.vectors, he.unstable, n, n);
    CVector lam(n);
    for (Eigen::Index i = 0; i < n; ++i) lam(i) = he.values(he.stable[static_cast<std::size_t>(i)]);
    const CMatrix Mc = pr.M.cast<Complex>();
    const CMatrix G = -(U22 - Mc * U12).fullPivLu().solve(U21 - Mc * U11);
    RiccatiSolution sol;
    sol.gainFactor = detail::gainFactor(pr);
    for (Eigen::Index i = 0; i < 2 * n; ++i) sol.hamiltonianSpectrum.push_back(he.values(i));
    std::sort(sol.hamiltonianSpectrum.begin(), sol.hamiltonianSpectrum.end(), complexLess);
    if (gridPoints < 2) gridPoints = 2;
    for (int k = 0; k < gridPoints; ++k) {
        const double t = k + 1 == gridPoints ? pr.t1 : pr.t0 + (pr.t1 - pr.t0) * k / (gridPoints - 1);
        CVector e(n);
        for (Eigen::Index i = 0; i < n; ++i) e(i) = std::exp(-lam(i) * (t - pr.t1));
        const CMatrix EGE = e.asDiagonal() * G * e.asDiagonal();
        const CMatrix X = U11 + U12 * EGE, Y = U21 + U22 * EGE;
        sol.times.push_back(t);
        if (k + 1 == gridPoints) {
            sol.P.push_back(symmetrize(pr.M));  // boundary condition, exact
            continue;
        }
        const CMatrix Pc = X.transpose().fullPivLu().solve(Y.transpose()).transpose();
        sol.P.push_back(symmetrize(Pc.real()));
    }
    sol.closedLoopPoles = eigen(Matrix(pr.sys.A - pr.sys.B * sol.gainFactor * sol.P.front())).sortedValues();
    return sol;
}

struct AreOptions {
    bool refine = true;  // one Newton (Kleinman) step through the Lyapunov solver when it lowers the residual
};

[[nodiscard]] inline double areResidual(const Matrix& A, const Matrix& S, const Matrix& Q, const Matrix& P) {
    return (A.transpose() * P + P * A - P * S * P + Q).norm();
}

/// Stabilizing ARE solution from the stable eigenvectors of the Hamiltonian.
[[nodiscard]] inline RiccatiSolution solveAre(const LqrProblem& prIn, const AreOptions& opt = {}) {
    LqrProblem pr = prIn;
    pr.infinite = true;
    detail::validateWeights(pr);
    const Eigen::Index n = pr.sys.n();
    const Matrix& A = pr.sys.A;
    RiccatiSolution sol;
    sol.infinite = true;
    const Matrix Cq = detail::weightFactor(pr.Q);
    if (Cq.rows() == 0) sol.flags.push_back("Q is zero: detectability reduces to A being Hurwitz");
    const StructuralReport ctrl = structuralAnalysis(StateSpace(A, pr.sys.B, Matrix::Zero(0, n), Matrix::Zero(0, pr.sys.m())));
    if (!ctrl.stabilizable) detail::fail(ErrorKind::NotStabilizable, "(A, B) is not stabilizable");
    const StructuralReport obs = structuralAnalysis(StateSpace(A, Matrix::Zero(n, 0), Cq, Matrix::Zero(Cq.rows(), 0)));
    if (!obs.detectable) detail::fail(ErrorKind::NotDetectable, "(A, C) is not detectable for C'C = Q");

    sol.gainFactor = detail::gainFactor(pr);
    const Matrix S = pr.sys.B * sol.gainFactor;
    const Matrix H = hamiltonianMatrix(A, pr.sys.B, pr.Q, pr.R);
    const HamiltonianEigen he = detail::hamiltonianEigen(H, false);
    for (Eigen::Index i = 0; i < 2 * n; ++i) sol.hamiltonianSpectrum.push_back(he.values(i));
    std::sort(sol.hamiltonianSpectrum.begin(), sol.hamiltonianSpectrum.end(), complexLess);
    const CMatrix U11 = detail::columns(he.vectors, he.stable, 0, n), U21 = detail::columns(he.vectors, he.stable, n, n);
    CMatrix basis(2 * n, n);
    basis << U11, U21;
    if (n > 0 && rank(basis, 1e-10) < n) detail::fail(ErrorKind::StableSpaceDefect, "stable eigenvectors are dependent");
    if (n > 0 && conditionNumber(U11) > 1e12) detail::fail(ErrorKind::IllConditioned, "U11 is numerically singular");
    const CMatrix Pc = n > 0 ? CMatrix(U11.transpose().fullPivLu().solve(U21.transpose()).transpose()) : CMatrix(0, 0);
    const double pn = Pc.norm();
    if (Pc.imag().norm() > 1e-8 * std::max(pn, 1e-300) && Pc.imag().norm() > 1e-14)
        detail::fail(ErrorKind::IllConditioned, "Riccati solution has a significant imaginary part");
    Matrix P = symmetrize(Pc.real());
    double res = areResidual(A, S, pr.Q, P);
    if (opt.refine && n > 0 && n <= 30) {
        const Matrix Ak = A - S * P;
        try {
            const Matrix Pn = symmetrize(solveLyapunov(Ak, Matrix(pr.Q + P * S * P)).P);
            const double rn = areResidual(A, S, pr.Q, Pn);
            if (rn < res) {
                P = Pn;
                res = rn;
            }
        } catch (const Error&) {
            // keep the eigenvector solution
        }
    }
    sol.Pbar = P;
    sol.residual = res;
    sol.K = sol.gainFactor * P;
    for (Eigen::Index s : he.stable) sol.closedLoopPoles.push_back(he.values(s));
    std::sort(sol.closedLoopPoles.begin(), sol.closedLoopPoles.end(), complexLess);
    const auto achieved = eigen(Matrix(A - pr.sys.B * sol.K)).sortedValues();
    if (detail::spectrumMismatch(achieved, sol.closedLoopPoles) > 1e-6)
        detail::fail(ErrorKind::InternalError, "eig(A - BK) disagrees with the stable Hamiltonian spectrum");
    const double bound = 1e-8 * (pr.Q.norm() + P.squaredNorm() * S.norm()) + 1e-12;
    if (res > bound) sol.flags.push_back("ARE residual above the nominal bound");
    sol.pd = isPositiveDefinite(P);
    return sol;
}

/// x0' P(t0) x0
[[nodiscard]] inline double lqrValue(const RiccatiSolution& sol, const Vector& x0) {
    const Matrix P = sol.infinite ? sol.Pbar : sol.P.front();
    if (x0.size() != P.rows()) detail::fail(ErrorKind::DimensionMismatch, "x0 has the wrong length");
    return x0.dot(P * x0);
}

struct FrequencyReport {
    std::vector<double> omega;
    std::vector<CMatrix> loop;              // L(jw) = K (jwI - A)^-1 B
    std::vector<double> returnDifference;   // |1 + L| (SISO) or sigma_min(I + L)
    std::vector<double> sensitivity;        // 1 / returnDifference
    double minReturnDifference = std::numeric_limits<double>::infinity();
    double argminOmega = 0.0;
    double identityResidual = 0.0;          // max relative mismatch of R + G*QG = (I+L)* R (I+L)
};

[[nodiscard]] inline std::vector<double> logGrid(double lo, double hi, std::size_t count) {
    std::vector<double> w(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double f = count > 1 ? static_cast<double>(k) / static_cast<double>(count - 1) : 0.0;
        w[k] = std::pow(10.0, std::log10(lo) + f * (std::log10(hi) - std::log10(lo)));
    }
    return w;
}

/// Both sides of the return-difference identity on a frequency grid.
[[nodiscard]] inline FrequencyReport returnDifferenceReport(const StateSpace& sys, const Matrix& Q, const Matrix& R,
                                                            const Matrix& K, std::vector<double> omega = {}) {
    if (omega.empty()) omega = logGrid(1e-2, 1e3, 400);
    const Eigen::Index m = sys.m();
    FrequencyReport rep;
    rep.omega = omega;
    rep.loop.resize(omega.size());
    rep.returnDifference.resize(omega.size());
    rep.sensitivity.resize(omega.size());
    std::vector<double> resid(omega.size());
    const CMatrix Ac = sys.A.cast<Complex>(), Bc = sys.B.cast<Complex>(), Kc = K.cast<Complex>();
    const CMatrix Qc = Q.cast<Complex>(), Rc = R.cast<Complex>();
    const CMatrix I = CMatrix::Identity(m, m);
    detail::parallel_for(omega.size(), [&](std::size_t k) {
        CMatrix pencil = -Ac;
        pencil.diagonal().array() += Complex(0.0, omega[k]);
        const CMatrix G = pencil.partialPivLu().solve(Bc);
        const CMatrix L = Kc * G;
        const CMatrix lhs = Rc + G.adjoint() * Qc * G;
        const CMatrix rhs = (I + L).adjoint() * Rc * (I + L);
        rep.loop[k] = L;
        const double rd = m == 1 ? std::abs(1.0 + L(0, 0)) : singularValues(CMatrix(I + L))(m - 1);
        rep.returnDifference[k] = rd;
        rep.sensitivity[k] = 1.0 / rd;
        resid[k] = (lhs - rhs).norm() / std::max(1.0, lhs.norm());
    });
    for (std::size_t k = 0; k < omega.size(); ++k) {
        if (rep.returnDifference[k] < rep.minReturnDifference) {
            rep.minReturnDifference = rep.returnDifference[k];
            rep.argminOmega = omega[k];
        }
        rep.identityResidual = std::max(rep.identityResidual, resid[k]);
    }
    return rep;
}

struct SrlPoint {
    double r = 0.0;
    std::vector<Complex> roots;   // all roots, sorted
    std::vector<Complex> stable;  // Re < 0, the optimal closed-loop poles for this weight
    double symmetryError = 0.0;   // distance between the root set and its reflection
};

/// Roots of r a(s) a(-s) + sum_i b_i(s) b_i(-s) for each r.
[[nodiscard]] inline std::vector<SrlPoint> symmetricRootLocus(const Polynomial& a, const std::vector<Polynomial>& bs,
                                                              const std::vector<double>& rGrid) {
    std::vector<SrlPoint> out(rGrid.size());
    const Polynomial aa = a * a.reflected();
    Polynomial bb;
    for (const Polynomial& b : bs) bb = bb + b * b.reflected();
    detail::parallel_for(rGrid.size(), [&](std::size_t k) {
        const double r = rGrid[k];
        if (!(r > 0)) detail::fail(ErrorKind::InvalidArgument, "SRL weight must be positive");
        const Polynomial poly = r * aa + bb;
        SrlPoint pt;
        pt.r = r;
        pt.roots = poly.roots();
        std::vector<Complex> refl;
        for (const Complex& z : pt.roots) {
            refl.push_back(-z);
            if (z.real() < 0) pt.stable.push_back(z);
        }
        pt.symmetryError = multisetDistance(pt.roots, refl);
        std::sort(pt.stable.begin(), pt.stable.end(), complexLess);
        out[k] = std::move(pt);
    });
    return out;
}

[[nodiscard]] inline std::vector<SrlPoint> symmetricRootLocus(const RationalFunction& plant, const std::vector<double>& rGrid) {
    const double lead = plant.den.leading();
    return symmetricRootLocus(plant.den.monic(), {(1.0 / lead) * plant.num}, rGrid);
}

/// Generalized locus for weight Q = C'C on the states of (A, B): the
/// numerators are those of C (sI - A)^-1 B over det(sI - A).
[[nodiscard]] inline std::vector<SrlPoint> symmetricRootLocus(const StateSpace& sys, const Matrix& Cweight,
                                                              const std::vector<double>& rGrid) {
    if (sys.m() != 1) detail::fail(ErrorKind::InvalidArgument, "generalized locus is single-input");
    const StateSpace w(sys.A, sys.B, Cweight, Matrix::Zero(Cweight.rows(), 1));
    const TransferMatrix G = ssToTf(w, false);
    std::vector<Polynomial> bs;
    for (Eigen::Index i = 0; i < G.rows; ++i) bs.push_back(G.at(i, 0).num);
    const Polynomial a = G.rows > 0 ? G.at(0, 0).den : characteristicPolynomial(sys.A);
    return symmetricRootLocus(a, bs, rGrid);
}

}  // namespace sskit

#endif  // SSKIT_LQR_HPP
