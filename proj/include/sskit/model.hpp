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
#ifndef SSKIT_MODEL_HPP
#define SSKIT_MODEL_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "numkit.hpp"

namespace sskit {

/// LTI model x' = Ax + Bu, y = Cx + Du.
struct StateSpace {
    Matrix A, B, C, D;

    StateSpace() = default;
    StateSpace(Matrix a, Matrix b, Matrix c, Matrix d) : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
        validate();
    }

    [[nodiscard]] Eigen::Index n() const noexcept { return A.rows(); }
    [[nodiscard]] Eigen::Index m() const noexcept { return B.cols(); }
    [[nodiscard]] Eigen::Index p() const noexcept { return C.rows(); }

    void validate() const {
        requireSquare(A, "A");
        if (B.rows() != A.rows()) detail::fail(ErrorKind::DimensionMismatch, "B must have n rows");
        if (C.cols() != A.rows()) detail::fail(ErrorKind::DimensionMismatch, "C must have n columns");
        if (D.rows() != C.rows() || D.cols() != B.cols()) detail::fail(ErrorKind::DimensionMismatch, "D must be p x m");
        requireFiniteEntries(A, "A");
        requireFiniteEntries(B, "B");
        requireFiniteEntries(C, "C");
        requireFiniteEntries(D, "D");
    }
};

/// The transposed dual (A', C', B', D') used by every rank-based duality test.
[[nodiscard]] inline StateSpace dual(const StateSpace& sys) {
    return {sys.A.transpose(), sys.C.transpose(), sys.B.transpose(), sys.D.transpose()};
}

using MatrixOfTime = std::function<Matrix(double)>;

struct LtvModel {
    MatrixOfTime A, B, C, D;
    Eigen::Index n = 0, m = 0, p = 0;
    std::vector<double> breaks;  // sorted times where A(t) may jump

    [[nodiscard]] static LtvModel fromLti(const StateSpace& sys) {
        LtvModel out;
        out.A = [a = sys.A](double) { return a; };
        out.B = [b = sys.B](double) { return b; };
        out.C = [c = sys.C](double) { return c; };
        out.D = [d = sys.D](double) { return d; };
        out.n = sys.n();
        out.m = sys.m();
        out.p = sys.p();
        return out;
    }
};

using VectorField = std::function<Vector(const Vector& x, const Vector& u, double t)>;

struct NonlinearModel {
    VectorField f;
    VectorField h;
    Eigen::Index n = 0, m = 0, p = 0;

    [[nodiscard]] Vector eval(const Vector& x, const Vector& u, double t) const {
        Vector v = f(x, u, t);
        if (v.size() != n) detail::fail(ErrorKind::DimensionMismatch, "f returned a vector of the wrong length");
        return v;
    }
    [[nodiscard]] Vector output(const Vector& x, const Vector& u, double t) const {
        if (!h) return x;
        Vector v = h(x, u, t);
        if (v.size() != p) detail::fail(ErrorKind::DimensionMismatch, "h returned a vector of the wrong length");
        return v;
    }

    [[nodiscard]] static NonlinearModel fromLti(const StateSpace& sys) {
        NonlinearModel out;
        out.f = [sys](const Vector& x, const Vector& u, double) -> Vector { return sys.A * x + sys.B * u; };
        out.h = [sys](const Vector& x, const Vector& u, double) -> Vector { return sys.C * x + sys.D * u; };
        out.n = sys.n();
        out.m = sys.m();
        out.p = sys.p();
        return out;
    }
};

struct Equilibrium {
    Vector xe;
    Vector ue;
    double residual = 0.0;
};

namespace detail {

inline double defaultStep(double x) { return std::cbrt(kEps) * (1.0 + std::abs(x)); }

/// Central-difference Jacobian of g with respect to its vector argument.
template <class G>
Matrix centralJacobian(G&& g, const Vector& at, Eigen::Index outDim, double step) {
    Matrix jac(outDim, at.size());
    for (Eigen::Index j = 0; j < at.size(); ++j) {
        const double h = step > 0 ? step * (1.0 + std::abs(at(j))) : defaultStep(at(j));
        if (h < 64.0 * kEps * (1.0 + std::abs(at(j))))
            fail(ErrorKind::StepTooSmall, "finite-difference step is dominated by rounding");
        Vector xp = at, xm = at;
        xp(j) += h;
        xm(j) -= h;
        jac.col(j) = (g(xp) - g(xm)) / (xp(j) - xm(j));
    }
    return jac;
}

}  // namespace detail

/// Damped Newton iteration on f(., ue, 0) = 0 from the supplied guess.
[[nodiscard]] inline Equilibrium findEquilibrium(const NonlinearModel& model, const Vector& ue, const Vector& guess,
                                                 double tol = 1e-10, int maxIter = 100) {
    if (guess.size() != model.n || ue.size() != model.m)
        detail::fail(ErrorKind::DimensionMismatch, "equilibrium guess or input has the wrong length");
    auto g = [&](const Vector& x) { return model.eval(x, ue, 0.0); };
    Vector x = guess;
    Vector fx = g(x);
    for (int it = 0; it < maxIter && fx.norm() > tol; ++it) {
        const Matrix jac = detail::centralJacobian(g, x, model.n, -1.0);
        Eigen::FullPivLU<Matrix> lu(jac);
        if (!lu.isInvertible() || conditionNumber(jac) > 1e14)
            detail::fail(ErrorKind::SingularJacobian, "Jacobian is singular at iteration " + std::to_string(it));
        const Vector dx = lu.solve(-fx);
        double lambda = 1.0;
        Vector trial = x + dx;
        Vector ft = g(trial);
        while (!(ft.norm() < fx.norm()) && lambda > 1e-6) {
            lambda *= 0.5;
            trial = x + lambda * dx;
            ft = g(trial);
        }
        x = trial;
        fx = ft;
    }
    if (!(fx.norm() <= tol))
        detail::fail(ErrorKind::NoConvergence, "Newton iteration did not reach the residual tolerance");
    return {x, ue, fx.norm()};
}

/// Jacobians of f and h at the equilibrium by central differences. A
/// non-positive `step` selects cbrt(eps) * (1 + |x_i|).
[[nodiscard]] inline StateSpace linearizeAt(const NonlinearModel& model, const Vector& x, const Vector& u, double t,
                                            double step = -1.0) {
    auto fx = [&](const Vector& v) { return model.eval(v, u, t); };
    auto fu = [&](const Vector& v) { return model.eval(x, v, t); };
    auto hx = [&](const Vector& v) { return model.output(v, u, t); };
    auto hu = [&](const Vector& v) { return model.output(x, v, t); };
    const Eigen::Index p = model.h ? model.p : model.n;
    return {detail::centralJacobian(fx, x, model.n, step), detail::centralJacobian(fu, u, model.n, step),
            detail::centralJacobian(hx, x, p, step), detail::centralJacobian(hu, u, p, step)};
}

[[nodiscard]] inline StateSpace linearizeAtEquilibrium(const NonlinearModel& model, const Equilibrium& eq,
                                                       double step = -1.0) {
    return linearizeAt(model, eq.xe, eq.ue, 0.0, step);
}

/// Jacobians sampled along a nominal trajectory and linearly interpolated
/// between samples. The nominal is checked with the trapezoid rule:
/// |x_{k+1} - x_k - h/2 (f_k + f_{k+1})| must stay below relTol * h * (1 + |f|).
[[nodiscard]] inline LtvModel linearizeAlongTrajectory(const NonlinearModel& model, const std::vector<double>& times,
                                                       const std::vector<Vector>& xs, const std::vector<Vector>& us,
                                                       double relTol = 1e-2, double step = -1.0) {
    const std::size_t k = times.size();
    if (k < 2 || xs.size() != k || us.size() != k)
        detail::fail(ErrorKind::InvalidArgument, "nominal trajectory needs at least two aligned samples");
    for (std::size_t i = 1; i < k; ++i)
        if (!(times[i] > times[i - 1])) detail::fail(ErrorKind::InvalidArgument, "sample times must increase");
    std::vector<Vector> fs(k);
    for (std::size_t i = 0; i < k; ++i) fs[i] = model.eval(xs[i], us[i], times[i]);
    for (std::size_t i = 0; i + 1 < k; ++i) {
        const double h = times[i + 1] - times[i];
        const double resid = (xs[i + 1] - xs[i] - 0.5 * h * (fs[i] + fs[i + 1])).norm();
        const double scale = 1.0 + std::max(fs[i].norm(), fs[i + 1].norm());
        if (resid > relTol * h * scale)
            detail::fail(ErrorKind::TrajectoryResidualTooLarge,
                         "nominal violates the dynamics near t = " + std::to_string(times[i]));
    }
    auto samples = std::make_shared<std::vector<StateSpace>>(k);
    for (std::size_t i = 0; i < k; ++i) (*samples)[i] = linearizeAt(model, xs[i], us[i], times[i], step);
    auto grid = std::make_shared<std::vector<double>>(times);

    auto interp = [samples, grid](double t, Matrix StateSpace::*field) -> Matrix {
        const auto& tv = *grid;
        if (t <= tv.front()) return (*samples).front().*field;
        if (t >= tv.back()) return (*samples).back().*field;
        const auto it = std::upper_bound(tv.begin(), tv.end(), t);
        const std::size_t hi = static_cast<std::size_t>(it - tv.begin());
        const std::size_t lo = hi - 1;
        const double w = (t - tv[lo]) / (tv[hi] - tv[lo]);
        return (1.0 - w) * ((*samples)[lo].*field) + w * ((*samples)[hi].*field);
    };
    LtvModel out;
    out.A = [interp](double t) { return interp(t, &StateSpace::A); };
    out.B = [interp](double t) { return interp(t, &StateSpace::B); };
    out.C = [interp](double t) { return interp(t, &StateSpace::C); };
    out.D = [interp](double t) { return interp(t, &StateSpace::D); };
    out.n = model.n;
    out.m = model.m;
    out.p = (*samples)[0].p();
    return out;
}

/// (P A P^-1, P B, C P^-1, D)
[[nodiscard]] inline StateSpace similarityTransform(const StateSpace& sys, const Matrix& P) {
    if (P.rows() != sys.n() || P.cols() != sys.n()) detail::fail(ErrorKind::DimensionMismatch, "P must be n x n");
    if (sys.n() == 0) return sys;
    Eigen::FullPivLU<Matrix> lu(P);
    if (!lu.isInvertible() || conditionNumber(P) > 1e14) detail::fail(ErrorKind::SingularTransform, "P is singular");
    const Matrix pinv = lu.inverse();
    return {P * sys.A * pinv, P * sys.B, sys.C * pinv, sys.D};
}

/// C (sI - A)^-1 B + D at one complex frequency.
[[nodiscard]] inline CMatrix evalTransfer(const StateSpace& sys, Complex s) {
    if (sys.n() == 0) return sys.D.cast<Complex>();
    CMatrix pencil = -sys.A.cast<Complex>();
    pencil.diagonal().array() += s;
    return sys.C.cast<Complex>() * pencil.partialPivLu().solve(sys.B.cast<Complex>()) + sys.D.cast<Complex>();
}

}  // namespace sskit

#endif  // SSKIT_MODEL_HPP
