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
#ifndef SSKIT_STRUCTURAL_HPP
#define SSKIT_STRUCTURAL_HPP

#include <vector>

#include "response.hpp"
#include "stability.hpp"

namespace sskit {

/// [B, AB, ..., A^{n-1} B]
[[nodiscard]] inline Matrix ctrbMatrix(const Matrix& A, const Matrix& B) {
    const Eigen::Index n = A.rows(), m = B.cols();
    Matrix out(n, n * m);
    Matrix blk = B;
    for (Eigen::Index k = 0; k < n; ++k) {
        out.middleCols(k * m, m) = blk;
        blk = A * blk;
    }
    return out;
}

/// [C; CA; ...; C A^{n-1}]
[[nodiscard]] inline Matrix obsvMatrix(const Matrix& A, const Matrix& C) {
    return ctrbMatrix(A.transpose(), C.transpose()).transpose();
}

struct StructuralOptions {
    double rankTol = -1.0;   // relative; negative selects max(rows, cols) * eps
    double modalTol = 1e-8;  // Hautus tests: sigma <= modalTol * max(1, |[A B]|) counts as zero
};

struct ModeRow {
    Complex eigenvalue;
    int algebraic = 1;
    bool controllable = true;
    bool observable = true;
};

struct StructuralReport {
    Matrix ctrb, obsv;
    int ctrbRank = 0, obsvRank = 0;
    std::vector<ModeRow> modes;
    std::vector<Complex> uncontrollableModes, unobservableModes;
    bool stabilizable = true, detectable = true;
    Matrix controllableSubspaceBasis, unobservableSubspaceBasis;

    [[nodiscard]] bool controllable() const { return ctrbRank == ctrb.rows(); }
    [[nodiscard]] bool observable() const { return obsvRank == obsv.cols(); }
};

namespace detail {

/// rank [lambda I - A | B] < n at the modal tolerance.
inline bool hautusDeficient(const Matrix& A, const Matrix& B, Complex lambda, double modalTol) {
    const Eigen::Index n = A.rows();
    if (n == 0) return false;
    CMatrix H(n, n + B.cols());
    H.leftCols(n) = -A.cast<Complex>();
    H.leftCols(n).diagonal().array() += lambda;
    H.rightCols(B.cols()) = B.cast<Complex>();
    const double scale = std::max({1.0, norm2(A), norm2(B)});
    const Vector s = singularValues(H);
    return s(n - 1) <= modalTol * scale;
}

}  // namespace detail

[[nodiscard]] inline StructuralReport structuralAnalysis(const StateSpace& sys, const StructuralOptions& opt = {}) {
    StructuralReport r;
    const Eigen::Index n = sys.n();
    r.ctrb = ctrbMatrix(sys.A, sys.B);
    r.obsv = obsvMatrix(sys.A, sys.C);
    r.ctrbRank = rank(r.ctrb, opt.rankTol);
    r.obsvRank = rank(r.obsv, opt.rankTol);
    const double band = axisBand(sys.A);
    const EigenStructure es = eigen(sys.A);
    for (const EigenGroup& g : es.groups) {
        ModeRow row;
        row.eigenvalue = g.value;
        row.algebraic = g.algebraic;
        row.controllable = !detail::hautusDeficient(sys.A, sys.B, g.value, opt.modalTol);
        row.observable = !detail::hautusDeficient(sys.A.transpose(), sys.C.transpose(), std::conj(g.value), opt.modalTol);
        if (!row.controllable) {
            r.uncontrollableModes.push_back(g.value);
            if (!(g.value.real() < -band)) r.stabilizable = false;
        }
        if (!row.observable) {
            r.unobservableModes.push_back(g.value);
            if (!(g.value.real() < -band)) r.detectable = false;
        }
        r.modes.push_back(row);
    }
    // Bases consistent with the reported ranks.
    r.controllableSubspaceBasis = Matrix(n, 0);
    r.unobservableSubspaceBasis = Matrix::Identity(n, n);
    if (n > 0 && r.ctrb.cols() > 0) {
        Eigen::JacobiSVD<Matrix> sc(r.ctrb, Eigen::ComputeThinU);
        r.controllableSubspaceBasis = sc.matrixU().leftCols(r.ctrbRank);
    }
    if (n > 0 && r.obsv.rows() > 0) {
        Eigen::JacobiSVD<Matrix> so(r.obsv, Eigen::ComputeFullV);
        r.unobservableSubspaceBasis = so.matrixV().rightCols(n - r.obsvRank);
    }
    return r;
}

// ----------------------------------------------------------------------------
// Grammians
// ----------------------------------------------------------------------------

struct GrammianReport {
    Matrix W;
    double conditioning = 1.0;  // sigma_max / sigma_min (infinite when singular)
    double t0 = 0.0, t1 = 0.0;
    Vector eigenvalues;         // ascending

    [[nodiscard]] bool singular(double relTol = 1e-9) const {
        if (eigenvalues.size() == 0) return false;
        const double hi = eigenvalues(eigenvalues.size() - 1);
        return !(eigenvalues(0) > relTol * hi) || hi <= 0;
    }
};

namespace detail {

inline GrammianReport finishGrammian(Matrix W, double t0, double t1) {
    GrammianReport g;
    g.W = symmetrize(W);
    g.t0 = t0;
    g.t1 = t1;
    if (g.W.rows() > 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(g.W, Eigen::EigenvaluesOnly);
        g.eigenvalues = es.eigenvalues();
        g.conditioning = conditionNumber(g.W);
    }
    return g;
}

/// Composite Simpson on [0, T] of F(s) G G' F(s)' where F(s) = e^{M s}.
inline Matrix simpsonExpQuadratic(const Matrix& M, const Matrix& G, double T, double quadStep) {
    const Eigen::Index n = M.rows();
    if (!(quadStep > 0)) fail(ErrorKind::InvalidArgument, "quadrature step must be positive");
    auto N = static_cast<long>(std::max(2.0, std::ceil(T / quadStep - 1e-9)));
    if (N % 2 == 1) ++N;
    const double h = T / static_cast<double>(N);
    const Matrix stepM = expm(M, h);
    Matrix F = Matrix::Identity(n, n);
    Matrix acc = Matrix::Zero(n, n);
    Matrix comp = Matrix::Zero(n, n);  // Kahan compensation
    for (long k = 0; k <= N; ++k) {
        const double w = (k == 0 || k == N) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        const Matrix FG = F * G;
        const Matrix term = w * (FG * FG.transpose()) - comp;
        const Matrix next = acc + term;
        comp = (next - acc) - term;
        acc = next;
        F = F * stepM;
    }
    return acc * (h / 3.0);
}

}  // namespace detail

/// W(t0, tf) = int_{t0}^{tf} e^{A(t0 - tau)} B B' e^{A'(t0 - tau)} dtau.
[[nodiscard]] inline GrammianReport controllabilityGrammian(const StateSpace& sys, double t0, double tf,
                                                            double quadStep = 1e-3) {
    if (!(tf > t0)) detail::fail(ErrorKind::InvalidArgument, "tf must exceed t0");
    return detail::finishGrammian(detail::simpsonExpQuadratic(-sys.A, sys.B, tf - t0, quadStep), t0, tf);
}

/// H(t1, t0) = int_{t0}^{t1} e^{A'(tau - t0)} C'C e^{A(tau - t0)} dtau.
[[nodiscard]] inline GrammianReport observabilityGrammian(const StateSpace& sys, double t0, double t1,
                                                          double quadStep = 1e-3) {
    if (!(t1 > t0)) detail::fail(ErrorKind::InvalidArgument, "t1 must exceed t0");
    return detail::finishGrammian(detail::simpsonExpQuadratic(sys.A.transpose(), sys.C.transpose(), t1 - t0, quadStep), t0,
                                  t1);
}

namespace detail {

template <class Integrand>
Matrix simpsonGrid(double t0, double t1, double quadStep, Eigen::Index n, Integrand&& f) {
    auto N = static_cast<long>(std::max(2.0, std::ceil((t1 - t0) / quadStep - 1e-9)));
    if (N % 2 == 1) ++N;
    const double h = (t1 - t0) / static_cast<double>(N);
    Matrix acc = Matrix::Zero(n, n);
    for (long k = 0; k <= N; ++k) {
        const double w = (k == 0 || k == N) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        acc += w * f(t0 + h * static_cast<double>(k));
    }
    return acc * (h / 3.0);
}

}  // namespace detail

/// LTV controllability grammian; phi comes from the fundamental matrix.
[[nodiscard]] inline GrammianReport controllabilityGrammian(const LtvModel& model, double t0, double tf,
                                                            double quadStep = 1e-3) {
    if (!(tf > t0)) detail::fail(ErrorKind::InvalidArgument, "tf must exceed t0");
    const StateTransition phi = fundamentalMatrixLtv(model, t0, tf - t0, quadStep / 2);
    const Matrix W = detail::simpsonGrid(t0, tf, quadStep, model.n, [&](double tau) {
        const Matrix PB = phi(t0, tau) * model.B(tau);
        return Matrix(PB * PB.transpose());
    });
    return detail::finishGrammian(W, t0, tf);
}

[[nodiscard]] inline GrammianReport observabilityGrammian(const LtvModel& model, double t0, double t1,
                                                          double quadStep = 1e-3) {
    if (!(t1 > t0)) detail::fail(ErrorKind::InvalidArgument, "t1 must exceed t0");
    const StateTransition phi = fundamentalMatrixLtv(model, t0, t1 - t0, quadStep / 2);
    const Matrix H = detail::simpsonGrid(t0, t1, quadStep, model.n, [&](double tau) {
        const Matrix CP = model.C(tau) * phi(tau, t0);
        return Matrix(CP.transpose() * CP);
    });
    return detail::finishGrammian(H, t0, t1);
}

/// int_0^inf e^{As} B B' e^{A's} ds for Hurwitz A, from A W + W A' = -B B'.
[[nodiscard]] inline Matrix infiniteControllabilityGrammian(const StateSpace& sys) {
    if (ltiStability(sys.A).kind != StabilityKind::AsymptoticallyStable)
        detail::fail(ErrorKind::InvalidArgument, "infinite-horizon grammian needs a Hurwitz A");
    return symmetrize(solveLyapunov(sys.A.transpose(), sys.B * sys.B.transpose()).P);
}

[[nodiscard]] inline Matrix infiniteObservabilityGrammian(const StateSpace& sys) {
    if (ltiStability(sys.A).kind != StabilityKind::AsymptoticallyStable)
        detail::fail(ErrorKind::InvalidArgument, "infinite-horizon grammian needs a Hurwitz A");
    return symmetrize(solveLyapunov(sys.A, sys.C.transpose() * sys.C).P);
}

// ----------------------------------------------------------------------------
// Modal test and Kalman decompositions
// ----------------------------------------------------------------------------

struct ModalTestRow {
    Complex eigenvalue;
    CVector bbarRow;
    double rowNorm = 0.0;
    bool controllable = true;
};

struct ModalTestResult {
    CMatrix M;     // eigenvectors, largest entry scaled to 1
    CMatrix Bbar;  // M^-1 B
    std::vector<ModalTestRow> rows;
};

[[nodiscard]] inline ModalTestResult modalControllabilityTest(const StateSpace& sys, double tol = 1e-8) {
    const EigenStructure es = eigen(sys.A);
    if (!es.distinct()) detail::fail(ErrorKind::RepeatedEigenvalues, "modal test needs distinct eigenvalues");
    const Eigen::Index n = sys.n();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return complexLess(es.values(a), es.values(b)); });
    ModalTestResult r;
    r.M = CMatrix(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        CVector v = es.rightVectors.col(order[static_cast<std::size_t>(j)]);
        Eigen::Index k = 0;
        v.cwiseAbs().maxCoeff(&k);
        r.M.col(j) = v / v(k);
    }
    r.Bbar = r.M.fullPivLu().solve(sys.B.cast<Complex>());
    const double scale = std::max(1.0, r.Bbar.norm());
    for (Eigen::Index j = 0; j < n; ++j) {
        ModalTestRow row;
        row.eigenvalue = es.values(order[static_cast<std::size_t>(j)]);
        row.bbarRow = r.Bbar.row(j).transpose();
        row.rowNorm = row.bbarRow.norm();
        row.controllable = row.rowNorm > tol * scale;
        r.rows.push_back(row);
    }
    return r;
}

enum class KalmanKind { KCCF, KOCF };

struct KalmanDecomposition {
    KalmanKind kind = KalmanKind::KCCF;
    Matrix P, Pinv;
    StateSpace transformed;
    Eigen::Index n1 = 0;  // controllable (KCCF) or observable (KOCF) dimension
    double offBlockResidual = 0.0;

    // KCCF blocks: A = [[Ac, A12], [0, Acbar]], B = [Bc; 0]
    // KOCF blocks: A = [[Ao, 0], [A21, Aobar]], C = [Co, 0]
    [[nodiscard]] Matrix A11() const { return transformed.A.topLeftCorner(n1, n1); }
    [[nodiscard]] Matrix A22() const {
        const Eigen::Index r = transformed.n() - n1;
        return transformed.A.bottomRightCorner(r, r);
    }
    [[nodiscard]] Matrix A12() const { return transformed.A.topRightCorner(n1, transformed.n() - n1); }
    [[nodiscard]] Matrix A21() const { return transformed.A.bottomLeftCorner(transformed.n() - n1, n1); }
};

namespace detail {

/// Columns of `cols` taken greedily left to right when they add a new
/// direction, then completed to a basis with standard unit vectors chosen
/// by largest residual (ties go to the lowest index).
inline Matrix independentColumnsCompleted(const Matrix& cols, int wanted, double relTol) {
    const Eigen::Index n = cols.rows();
    Matrix basis(n, 0);
    Matrix q(n, 0);  // orthonormal copy of the kept span, used only for tests
    const double smax = cols.size() > 0 ? norm2(cols) : 0.0;
    auto residual = [&](const Vector& v) { return q.cols() > 0 ? Vector(v - q * (q.transpose() * v)) : v; };
    auto keep = [&](const Vector& v, const Vector& r) {
        basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
        basis.col(basis.cols() - 1) = v;
        q.conservativeResize(Eigen::NoChange, q.cols() + 1);
        q.col(q.cols() - 1) = r / r.norm();
    };
    for (Eigen::Index j = 0; j < cols.cols() && basis.cols() < wanted; ++j) {
        const Vector v = cols.col(j);
        Vector r = residual(v);
        r = residual(r);  // second pass for orthogonality
        if (r.norm() > relTol * std::max(smax, 1e-300) && v.norm() > 0) keep(v, r);
    }
    while (basis.cols() < n) {
        double best = -1.0;
        Eigen::Index arg = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double rn = residual(Vector::Unit(n, i)).norm();
            if (rn > best + 1e-12) {
                best = rn;
                arg = i;
            }
        }
        Vector r = residual(Vector::Unit(n, arg));
        r = residual(r);
        keep(Vector::Unit(n, arg), r);
    }
    return basis;
}

inline KalmanDecomposition kccf(const StateSpace& sys, double rankTol) {
    const Eigen::Index n = sys.n();
    KalmanDecomposition d;
    const Matrix ctrb = ctrbMatrix(sys.A, sys.B);
    const int r = rank(ctrb, rankTol);
    d.n1 = r;
    if (r == n) {
        d.P = Matrix::Identity(n, n);
        d.Pinv = d.P;
        d.transformed = sys;
        return d;
    }
    const double tol = 1e3 * static_cast<double>(std::max<Eigen::Index>(n, 1)) * kEps;
    d.Pinv = independentColumnsCompleted(ctrb, r, std::max(tol, rankTol > 0 ? rankTol : 0.0));
    d.P = d.Pinv.fullPivLu().inverse();
    d.transformed = similarityTransform(sys, d.P);
    d.offBlockResidual = std::max(d.transformed.A.bottomLeftCorner(n - r, r).norm(), d.transformed.B.bottomRows(n - r).norm());
    return d;
}

}  // namespace detail

/// KCCF splits off the uncontrollable part; KOCF the unobservable part
/// (built on the transposed dual).
[[nodiscard]] inline KalmanDecomposition kalmanDecompose(const StateSpace& sys, KalmanKind kind, double rankTol = -1.0) {
    if (kind == KalmanKind::KCCF) {
        KalmanDecomposition d = detail::kccf(sys, rankTol);
        d.kind = KalmanKind::KCCF;
        return d;
    }
    const KalmanDecomposition dd = detail::kccf(dual(sys), rankTol);
    KalmanDecomposition d;
    d.kind = KalmanKind::KOCF;
    d.n1 = dd.n1;
    d.Pinv = dd.P.transpose();
    d.P = dd.Pinv.transpose();
    d.transformed = similarityTransform(sys, d.P);
    const Eigen::Index n = sys.n(), r = d.n1;
    d.offBlockResidual = std::max(d.transformed.A.topRightCorner(r, n - r).norm(), d.transformed.C.rightCols(n - r).norm());
    return d;
}

// ----------------------------------------------------------------------------
// Transmission zeros
// ----------------------------------------------------------------------------

struct ZeroSet {
    std::vector<Complex> transmissionZeros;
    double pencilRankDeficiencyTol = 0.0;
};

namespace detail {

inline CMatrix systemMatrix(const StateSpace& sys, Complex s) {
    const Eigen::Index n = sys.n(), m = sys.m(), p = sys.p();
    CMatrix S(n + p, n + m);
    S.topLeftCorner(n, n) = -sys.A.cast<Complex>();
    S.topLeftCorner(n, n).diagonal().array() += s;
    S.topRightCorner(n, m) = -sys.B.cast<Complex>();
    S.bottomLeftCorner(p, n) = sys.C.cast<Complex>();
    S.bottomRightCorner(p, m) = sys.D.cast<Complex>();
    return S;
}

}  // namespace detail

/// Finite generalized eigenvalues of the pencil ([A B; -C -D], diag(I, 0)),
/// each verified as a rank drop of [sI - A, -B; C, D].
[[nodiscard]] inline ZeroSet transmissionZeros(const StateSpace& sys, double relTol = 1e-7) {
    if (sys.p() != sys.m()) detail::fail(ErrorKind::NonSquarePlant, "transmission zeros need p = m");
    const Eigen::Index n = sys.n(), m = sys.m();
    ZeroSet z;
    Matrix M(n + m, n + m), N = Matrix::Zero(n + m, n + m);
    M << sys.A, sys.B, -sys.C, -sys.D;
    N.topLeftCorner(n, n).setIdentity();
    const double scale = std::max(1.0, norm2(M));
    z.pencilRankDeficiencyTol = relTol * scale;
    bool regular = n + m == 0;
    for (Complex probe : {Complex(0.3183, 0.5772), Complex(-1.4142, 0.2718), Complex(2.2361, -1.7321)}) {
        const Vector s = singularValues(detail::systemMatrix(sys, probe));
        if (s.size() > 0 && s(s.size() - 1) > z.pencilRankDeficiencyTol) regular = true;
    }
    if (!regular) detail::fail(ErrorKind::DegeneratePencil, "system pencil is singular for every s");
    if (n == 0) return z;
    {
        Eigen::GeneralizedEigenSolver<Matrix> ges(M, N, false);
        if (ges.info() != Eigen::Success) detail::fail(ErrorKind::BackendFailure, "QZ iteration did not converge");
        const CVector alphas = ges.alphas();
        const Vector betas = ges.betas();
        for (Eigen::Index i = 0; i < alphas.size(); ++i) {
            if (std::abs(betas(i)) <= 1e-10 * std::abs(alphas(i)) || betas(i) == 0.0) continue;
            const Complex zero = alphas(i) / betas(i);
            if (std::abs(zero) > 1e8 * scale) continue;
            const CMatrix S = detail::systemMatrix(sys, zero);
            const Vector sv = singularValues(S);
            const double smin = sv(sv.size() - 1);
            if (smin <= 1e-6 * std::max(1.0, sv(0))) z.transmissionZeros.push_back(zero);
        }
    }
    std::sort(z.transmissionZeros.begin(), z.transmissionZeros.end(), complexLess);
    return z;
}

// ----------------------------------------------------------------------------
// Minimum-energy steering and discrete reachability
// ----------------------------------------------------------------------------

struct SteeringResult {
    InputFn control;
    Trajectory trajectory;
    GrammianReport grammian;
    double endpointError = 0.0;
};

/// u(t) = -B' e^{A'(t0 - t)} W^-1 (x0 - e^{A(t0 - tf)} xf), which carries x0
/// to xf on [t0, tf] with minimum input energy.
[[nodiscard]] inline SteeringResult minimumEnergySteer(const StateSpace& sys, const Vector& x0, const Vector& xf, double t0,
                                                       double tf, double quadStep = 1e-3) {
    if (x0.size() != sys.n() || xf.size() != sys.n()) detail::fail(ErrorKind::DimensionMismatch, "endpoint length mismatch");
    SteeringResult r;
    r.grammian = controllabilityGrammian(sys, t0, tf, quadStep);
    if (r.grammian.singular()) detail::fail(ErrorKind::SingularGrammian, "controllability grammian is singular on the horizon");
    const Vector target = x0 - expm(sys.A, t0 - tf) * xf;
    const Vector eta = r.grammian.W.ldlt().solve(target);
    const Matrix A = sys.A, B = sys.B;
    r.control = [A, B, eta, t0](double t) -> Vector { return -B.transpose() * expm(A.transpose(), t0 - t) * eta; };
    r.trajectory = simulate(sys, x0, r.control, t0, tf, quadStep);
    r.endpointError = (r.trajectory.states.back() - xf).norm();
    return r;
}

struct ReachabilityReport {
    std::vector<int> ranks;  // rank of [B ... A^{k-1} B] for k = 1..r
    bool reachable = false;  // rank n at step r
};

[[nodiscard]] inline ReachabilityReport discreteReachability(const Matrix& A, const Matrix& B, int steps, double rankTol = -1.0) {
    requireSquare(A, "A");
    if (steps < 1) detail::fail(ErrorKind::InvalidArgument, "steps must be at least 1");
    if (B.rows() != A.rows()) detail::fail(ErrorKind::DimensionMismatch, "B must have n rows");
    ReachabilityReport r;
    const Eigen::Index n = A.rows(), m = B.cols();
    Matrix R(n, 0);
    Matrix blk = B;
    for (int k = 0; k < steps; ++k) {
        R.conservativeResize(Eigen::NoChange, R.cols() + m);
        R.rightCols(m) = blk;
        blk = A * blk;
        r.ranks.push_back(rank(R, rankTol));
    }
    r.reachable = r.ranks.back() == n;
    return r;
}

}  // namespace sskit

#endif  // SSKIT_STRUCTURAL_HPP
