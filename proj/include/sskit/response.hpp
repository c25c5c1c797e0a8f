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
#ifndef SSKIT_RESPONSE_HPP
#define SSKIT_RESPONSE_HPP

#include <functional>
#include <memory>
#include <variant>
#include <vector>

#include "model.hpp"

namespace sskit {

enum class StmMethod { Series, CayleyHamilton, Modal, LtvFundamental, PeanoBaker };

[[nodiscard]] constexpr std::string_view to_string(StmMethod m) noexcept {
    switch (m) {
    case StmMethod::Series: return "series";
    case StmMethod::CayleyHamilton: return "cayleyHamilton";
    case StmMethod::Modal: return "modal";
    case StmMethod::LtvFundamental: return "ltvFundamental";
    case StmMethod::PeanoBaker: return "peanoBaker";
    }
    return "unknown";
}

/// phi(t, tau) together with the method that produced it.
struct StateTransition {
    std::function<Matrix(double, double)> evaluator;
    StmMethod method = StmMethod::Series;
    Eigen::Index n = 0;

    [[nodiscard]] Matrix operator()(double t, double tau) const {
        if (t == tau) return Matrix::Identity(n, n);
        return evaluator(t, tau);
    }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<Vector> inputs;
    std::vector<Vector> outputs;
    bool blewUp = false;  // integration stopped early on a non-finite or huge state
};

using InputFn = std::function<Vector(double)>;

// ----------------------------------------------------------------------------
// LTI transition matrices
// ----------------------------------------------------------------------------

[[nodiscard]] inline StateTransition stmSeries(const Matrix& A) {
    requireSquare(A, "A");
    return {[A](double t, double tau) { return expm(A, t - tau); }, StmMethod::Series, A.rows()};
}

namespace detail {

inline CVector requireDistinctEigenvalues(const Matrix& A) {
    const EigenStructure es = eigen(A);
    if (!es.distinct()) fail(ErrorKind::RepeatedEigenvalues, "eigenvalues of A are not distinct");
    return es.values;
}

}  // namespace detail

/// Coefficients beta_k(t) in e^{At} = sum_{k<n} beta_k(t) A^k. Requires
/// distinct eigenvalues; the confluent case is rejected.
[[nodiscard]] inline Vector cayleyHamiltonCoefficients(const Matrix& A, double t) {
    requireSquare(A, "A");
    const Eigen::Index n = A.rows();
    const CVector lambda = detail::requireDistinctEigenvalues(A);
    CMatrix V(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Complex pw(1.0);
        for (Eigen::Index k = 0; k < n; ++k) {
            V(i, k) = pw;
            pw *= lambda(i);
        }
    }
    if (conditionNumber(V) > 1e12) detail::fail(ErrorKind::IllConditionedVandermonde, "Vandermonde system is ill-conditioned");
    CVector rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) rhs(i) = std::exp(lambda(i) * t);
    const CVector beta = V.fullPivLu().solve(rhs);
    return beta.real();
}

[[nodiscard]] inline StateTransition stmCayleyHamilton(const Matrix& A) {
    requireSquare(A, "A");
    const Eigen::Index n = A.rows();
    detail::requireDistinctEigenvalues(A);
    auto powers = std::make_shared<std::vector<Matrix>>();
    Matrix pw = Matrix::Identity(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        powers->push_back(pw);
        pw = pw * A;
    }
    return {[A, powers](double t, double tau) {
                const Vector beta = cayleyHamiltonCoefficients(A, t - tau);
                Matrix phi = Matrix::Zero(A.rows(), A.rows());
                for (Eigen::Index k = 0; k < beta.size(); ++k) phi += beta(k) * (*powers)[static_cast<std::size_t>(k)];
                return phi;
            },
            StmMethod::CayleyHamilton, n};
}

[[nodiscard]] inline StateTransition stmModal(const Matrix& A) {
    requireSquare(A, "A");
    const Eigen::Index n = A.rows();
    const EigenStructure es = eigen(A);
    if (!es.isDiagonalizable) detail::fail(ErrorKind::NotDiagonalizable, "A has a deficient eigenspace");
    const CMatrix M = es.rightVectors;
    if (n > 0 && conditionNumber(M) > 1e12) detail::fail(ErrorKind::NotDiagonalizable, "modal matrix is numerically singular");
    const CMatrix Minv = n > 0 ? CMatrix(M.inverse()) : CMatrix(0, 0);
    const CVector lambda = es.values;
    return {[M, Minv, lambda](double t, double tau) {
                CVector e(lambda.size());
                for (Eigen::Index i = 0; i < lambda.size(); ++i) e(i) = std::exp(lambda(i) * (t - tau));
                const CMatrix phi = M * e.asDiagonal() * Minv;
                return Matrix(phi.real());
            },
            StmMethod::Modal, n};
}

// ----------------------------------------------------------------------------
// LTV transition matrices
// ----------------------------------------------------------------------------

namespace detail {

/// Integration mesh over [t0, t1]: every break strictly inside is a mesh
/// point, and each segment is cut into equal steps no longer than `step`.
inline std::vector<double> meshWithBreaks(double t0, double t1, double step, const std::vector<double>& breaks) {
    if (!(step > 0)) fail(ErrorKind::InvalidArgument, "step must be positive");
    std::vector<double> knots{t0};
    for (double b : breaks)
        if (b > t0 && b < t1) knots.push_back(b);
    knots.push_back(t1);
    std::vector<double> mesh{t0};
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double len = knots[i + 1] - knots[i];
        const auto steps = static_cast<long>(std::max(1.0, std::ceil(len / step - 1e-9)));
        for (long k = 1; k < steps; ++k) mesh.push_back(knots[i] + len * static_cast<double>(k) / static_cast<double>(steps));
        mesh.push_back(knots[i + 1]);
    }
    return mesh;
}

/// Evaluates a piecewise-continuous coefficient from inside [a, b] so that a
/// jump sitting exactly on an endpoint is taken from the correct side.
inline double insideInterval(double t, double a, double b) {
    const double d = 1e-12 * (1.0 + std::abs(a) + std::abs(b));
    return std::clamp(t, a + d, b - d);
}

}  // namespace detail

/// Fundamental matrix U' = A(t) U, U(t0) = I, by fixed-step RK4 on
/// [t0, t0 + horizon] with cubic Hermite dense output.
/// phi(t, tau) = U(t) U(tau)^-1, formed by a linear solve.
[[nodiscard]] inline StateTransition fundamentalMatrixLtv(const LtvModel& model, double t0, double horizon, double step) {
    if (!(horizon > 0)) detail::fail(ErrorKind::InvalidArgument, "horizon must be positive");
    const double t1 = t0 + horizon;
    const Eigen::Index n = model.n;
    struct Node {
        double t;
        Matrix U;
        Matrix dLeft, dRight;  // derivative seen from the previous and next step
    };
    auto mesh = detail::meshWithBreaks(t0, t1, step, model.breaks);
    auto nodes = std::make_shared<std::vector<Node>>();
    nodes->reserve(mesh.size());
    Matrix U = Matrix::Identity(n, n);
    nodes->push_back({t0, U, Matrix(), Matrix()});
    for (std::size_t k = 0; k + 1 < mesh.size(); ++k) {
        const double a = mesh[k], b = mesh[k + 1], h = b - a;
        auto Aat = [&](double t) { return model.A(detail::insideInterval(t, a, b)); };
        const Matrix k1 = Aat(a) * U;
        const Matrix k2 = Aat(a + h / 2) * (U + h / 2 * k1);
        const Matrix k3 = Aat(a + h / 2) * (U + h / 2 * k2);
        const Matrix k4 = Aat(b) * (U + h * k3);
        (*nodes)[k].dRight = k1;
        U = U + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        if (!U.allFinite() || conditionNumber(U) > 1e12)
            detail::fail(ErrorKind::SingularFundamental, "fundamental matrix lost invertibility during integration");
        nodes->push_back({b, U, Aat(b) * U, Matrix()});
    }
    nodes->back().dRight = nodes->back().dLeft;
    nodes->front().dLeft = nodes->front().dRight;

    auto sample = [nodes, t0, t1](double t) -> Matrix {
        const double slack = 1e-12 * (1.0 + std::abs(t0) + std::abs(t1));
        if (t < t0 - slack || t > t1 + slack)
            detail::fail(ErrorKind::OutOfRange, "time lies outside the integrated horizon");
        const auto& nv = *nodes;
        if (t <= nv.front().t) return nv.front().U;
        if (t >= nv.back().t) return nv.back().U;
        const auto it = std::upper_bound(nv.begin(), nv.end(), t, [](double v, const Node& nd) { return v < nd.t; });
        const Node& hi = *it;
        const Node& lo = *(it - 1);
        const double h = hi.t - lo.t;
        const double s = (t - lo.t) / h;
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
        const double h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s);
        const double h11 = s * s * (s - 1);
        return h00 * lo.U + h10 * h * lo.dRight + h01 * hi.U + h11 * h * hi.dLeft;
    };
    return {[sample](double t, double tau) {
                const Matrix Ut = sample(t);
                const Matrix Utau = sample(tau);
                // phi = U(t) U(tau)^-1  <=>  phi' = U(tau)^-T U(t)'
                return Matrix(Utau.transpose().fullPivLu().solve(Ut.transpose()).transpose());
            },
            StmMethod::LtvFundamental, n};
}

/// Peano-Baker iterate phi_k(t, t0) by cumulative trapezoid quadrature on a
/// uniform grid. phi_0 = I.
[[nodiscard]] inline Matrix peanoBaker(const LtvModel& model, double t0, double t, int iterations, double quadStep) {
    if (iterations < 1) detail::fail(ErrorKind::InvalidArgument, "iterations must be at least 1");
    if (!(quadStep > 0)) detail::fail(ErrorKind::InvalidArgument, "quadrature step must be positive");
    const Eigen::Index n = model.n;
    if (t == t0) return Matrix::Identity(n, n);
    const auto N = static_cast<std::size_t>(std::max(1.0, std::ceil(std::abs(t - t0) / quadStep - 1e-9)));
    const double h = (t - t0) / static_cast<double>(N);
    std::vector<Matrix> As(N + 1);
    for (std::size_t j = 0; j <= N; ++j) As[j] = model.A(t0 + h * static_cast<double>(j));
    std::vector<Matrix> phi(N + 1, Matrix::Identity(n, n));
    for (int it = 0; it < iterations; ++it) {
        std::vector<Matrix> next(N + 1);
        next[0] = Matrix::Identity(n, n);
        Matrix integral = Matrix::Zero(n, n);
        for (std::size_t j = 1; j <= N; ++j) {
            integral += 0.5 * h * (As[j - 1] * phi[j - 1] + As[j] * phi[j]);
            next[j] = Matrix::Identity(n, n) + integral;
        }
        phi = std::move(next);
    }
    return phi[N];
}

// ----------------------------------------------------------------------------
// Simulation
// ----------------------------------------------------------------------------

namespace detail {

inline bool blownUp(const Vector& x) { return !x.allFinite() || x.cwiseAbs().maxCoeff() > 1e150; }

inline std::vector<double> uniformMesh(double t0, double t1, double step) {
    if (!(step > 0)) fail(ErrorKind::InvalidArgument, "step must be positive");
    if (!(t1 >= t0)) fail(ErrorKind::InvalidArgument, "t1 must not precede t0");
    const auto N = static_cast<std::size_t>(std::max(1.0, std::ceil((t1 - t0) / step - 1e-9)));
    std::vector<double> mesh(N + 1);
    for (std::size_t k = 0; k <= N; ++k) mesh[k] = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(N);
    mesh.back() = t1;
    return mesh;
}

inline Vector checkedInput(const InputFn& u, double t, Eigen::Index m) {
    Vector v = u ? u(t) : Vector::Zero(m);
    if (v.size() != m) fail(ErrorKind::DimensionMismatch, "input function returned the wrong length");
    return v;
}

}  // namespace detail

/// LTI: exact transition over each step plus Simpson quadrature of the
/// convolution term.
[[nodiscard]] inline Trajectory simulate(const StateSpace& sys, const Vector& x0, const InputFn& u, double t0, double t1,
                                         double step) {
    if (x0.size() != sys.n()) detail::fail(ErrorKind::DimensionMismatch, "x0 has the wrong length");
    const auto mesh = detail::uniformMesh(t0, t1, step);
    const double h = mesh.size() > 1 ? mesh[1] - mesh[0] : 0.0;
    const Matrix Phi = expm(sys.A, h);
    const Matrix PhiHalfB = expm(sys.A, h / 2) * sys.B;
    const Matrix PhiB = Phi * sys.B;
    Trajectory tr;
    Vector x = x0;
    Vector uk = detail::checkedInput(u, mesh[0], sys.m());
    for (std::size_t k = 0; k < mesh.size(); ++k) {
        tr.times.push_back(mesh[k]);
        tr.states.push_back(x);
        tr.inputs.push_back(uk);
        tr.outputs.push_back(sys.C * x + sys.D * uk);
        if (k + 1 == mesh.size()) break;
        const Vector um = detail::checkedInput(u, mesh[k] + h / 2, sys.m());
        const Vector un = detail::checkedInput(u, mesh[k + 1], sys.m());
        x = Phi * x + h / 6 * (PhiB * uk + 4 * PhiHalfB * um + sys.B * un);
        uk = un;
        if (detail::blownUp(x)) {
            tr.blewUp = true;
            break;
        }
    }
    return tr;
}

/// RK4 on x' = A(t) x + B(t) u(t); the mesh includes the model breaks.
[[nodiscard]] inline Trajectory simulate(const LtvModel& model, const Vector& x0, const InputFn& u, double t0, double t1,
                                         double step) {
    if (x0.size() != model.n) detail::fail(ErrorKind::DimensionMismatch, "x0 has the wrong length");
    const auto mesh = t1 > t0 ? detail::meshWithBreaks(t0, t1, step, model.breaks) : std::vector<double>{t0};
    Trajectory tr;
    Vector x = x0;
    for (std::size_t k = 0; k < mesh.size(); ++k) {
        const double t = mesh[k];
        const Vector uk = detail::checkedInput(u, t, model.m);
        tr.times.push_back(t);
        tr.states.push_back(x);
        tr.inputs.push_back(uk);
        const double te = k + 1 < mesh.size() ? detail::insideInterval(t, t, mesh[k + 1]) : t;
        tr.outputs.push_back(model.C(te) * x + model.D(te) * uk);
        if (k + 1 == mesh.size()) break;
        const double a = t, b = mesh[k + 1], h = b - a;
        auto f = [&](double s, const Vector& xv) {
            const double si = detail::insideInterval(s, a, b);
            return Vector(model.A(si) * xv + model.B(si) * detail::checkedInput(u, s, model.m));
        };
        const Vector k1 = f(a, x);
        const Vector k2 = f(a + h / 2, x + h / 2 * k1);
        const Vector k3 = f(a + h / 2, x + h / 2 * k2);
        const Vector k4 = f(b, x + h * k3);
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        if (detail::blownUp(x)) {
            tr.blewUp = true;
            break;
        }
    }
    return tr;
}

/// RK4 on x' = f(x, u(t), t).
[[nodiscard]] inline Trajectory simulate(const NonlinearModel& model, const Vector& x0, const InputFn& u, double t0,
                                         double t1, double step) {
    if (x0.size() != model.n) detail::fail(ErrorKind::DimensionMismatch, "x0 has the wrong length");
    const auto mesh = detail::uniformMesh(t0, t1, step);
    Trajectory tr;
    Vector x = x0;
    for (std::size_t k = 0; k < mesh.size(); ++k) {
        const double t = mesh[k];
        const Vector uk = detail::checkedInput(u, t, model.m);
        tr.times.push_back(t);
        tr.states.push_back(x);
        tr.inputs.push_back(uk);
        tr.outputs.push_back(model.output(x, uk, t));
        if (k + 1 == mesh.size()) break;
        const double h = mesh[k + 1] - t;
        auto f = [&](double s, const Vector& xv) { return model.eval(xv, detail::checkedInput(u, s, model.m), s); };
        const Vector k1 = f(t, x);
        const Vector k2 = f(t + h / 2, x + h / 2 * k1);
        const Vector k3 = f(t + h / 2, x + h / 2 * k2);
        const Vector k4 = f(t + h, x + h * k3);
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        if (detail::blownUp(x)) {
            tr.blewUp = true;
            break;
        }
    }
    return tr;
}

}  // namespace sskit

#endif  // SSKIT_RESPONSE_HPP
