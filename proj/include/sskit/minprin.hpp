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
#ifndef SSKIT_MINPRIN_HPP
#define SSKIT_MINPRIN_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lqr.hpp"
#include "response.hpp"

namespace sskit {

// Conventions: cost int (x'Qx + u'Ru) dt + x(t1)' M x(t1), costate lambda
// (half the usual p), so that
//   xdot = A x - B R^-1 B' lambda,  lambdadot = -Q x - A' lambda,
//   u = -R^-1 B' lambda,  lambda(t1) = M x(t1) on free coordinates.

struct TpbvpProblem {
    StateSpace sys;
    Matrix Q, R;
    Vector x0, x1;
    double t0 = 0.0, t1 = 1.0;
    std::vector<bool> endpointMask;  // true = coordinate fixed at t1; empty means all fixed
    Matrix M;                        // terminal penalty, used on free coordinates; empty means zero
    long steps = 1000;               // output grid intervals
};

struct TpbvpSolution {
    Trajectory trajectory;          // x, u and y = Cx + Du on the grid
    std::vector<Vector> costate;    // lambda on the same grid
    std::vector<Vector> control;    // u on the same grid
    Vector lambda0;
    Matrix psi;                     // e^{H (t1 - t0)}
    double endpointResidual = 0.0;  // max over fixed coordinates of |x_j(t1) - x1_j|
    double transversalityResidual = 0.0;
};

namespace detail {

inline std::vector<bool> fixedMask(const TpbvpProblem& pr) {
    const auto n = static_cast<std::size_t>(pr.sys.n());
    if (pr.endpointMask.empty()) return std::vector<bool>(n, true);
    if (pr.endpointMask.size() != n) fail(ErrorKind::DimensionMismatch, "endpoint mask must have n entries");
    return pr.endpointMask;
}

}  // namespace detail

/// LQ two-point boundary-value problem by the transition matrix of the
/// Hamiltonian system. Fixed rows impose x_j(t1) = x1_j, free rows impose
/// lambda_j(t1) = (M x(t1))_j; both are linear in lambda0.
[[nodiscard]] inline TpbvpSolution solveLqTpbvp(const TpbvpProblem& pr) {
    const Eigen::Index n = pr.sys.n(), m = pr.sys.m();
    if (pr.x0.size() != n) detail::fail(ErrorKind::DimensionMismatch, "x0 must have n entries");
    if (!(pr.t1 > pr.t0)) detail::fail(ErrorKind::InvalidHorizon, "t1 must exceed t0");
    if (pr.steps < 1) detail::fail(ErrorKind::InvalidArgument, "steps must be positive");
    const std::vector<bool> fixed = detail::fixedMask(pr);
    const bool anyFixed = std::find(fixed.begin(), fixed.end(), true) != fixed.end();
    if (anyFixed && pr.x1.size() != n) detail::fail(ErrorKind::DimensionMismatch, "x1 must have n entries");
    const Matrix M = pr.M.size() == 0 ? Matrix(Matrix::Zero(n, n)) : pr.M;
    {
        LqrProblem lq{pr.sys, pr.Q, pr.R, M, pr.t0, pr.t1, false};
        detail::validateWeights(lq);
    }
    const Matrix H = hamiltonianMatrix(pr.sys.A, pr.sys.B, pr.Q, pr.R);
    const double span = pr.t1 - pr.t0;

    TpbvpSolution sol;
    sol.psi = expm(H, span);
    const Matrix p11 = sol.psi.topLeftCorner(n, n), p12 = sol.psi.topRightCorner(n, n);
    const Matrix p21 = sol.psi.bottomLeftCorner(n, n), p22 = sol.psi.bottomRightCorner(n, n);

    Matrix S(n, n);
    Vector rhs(n);
    const Matrix freeLhs = p22 - M * p12;
    const Vector freeRhs = -(p21 - M * p11) * pr.x0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (fixed[static_cast<std::size_t>(j)]) {
            S.row(j) = p12.row(j);
            rhs(j) = pr.x1(j) - p11.row(j).dot(pr.x0);
        } else {
            S.row(j) = freeLhs.row(j);
            rhs(j) = freeRhs(j);
        }
    }
    if (n > 0) {
        Eigen::FullPivLU<Matrix> lu(S);
        if (!lu.isInvertible() || conditionNumber(S) > 1e12)
            detail::fail(ErrorKind::SingularPsi12, "boundary matrix is singular; the endpoint is not reachable this way");
        sol.lambda0 = lu.solve(rhs);
    } else {
        sol.lambda0 = Vector(0);
    }

    const Matrix Rinv_Bt = pr.R.ldlt().solve(pr.sys.B.transpose());
    const double h = span / static_cast<double>(pr.steps);
    const Matrix step = expm(H, h);
    Vector z(2 * n);
    z << pr.x0, sol.lambda0;
    auto record = [&](double t, const Vector& zk) {
        const Vector x = zk.head(n), lam = zk.tail(n);
        const Vector u = m > 0 ? Vector(-Rinv_Bt * lam) : Vector(0);
        sol.trajectory.times.push_back(t);
        sol.trajectory.states.push_back(x);
        sol.trajectory.inputs.push_back(u);
        sol.trajectory.outputs.push_back(pr.sys.C * x + pr.sys.D * u);
        sol.costate.push_back(lam);
        sol.control.push_back(u);
    };
    record(pr.t0, z);
    for (long k = 1; k <= pr.steps; ++k) {
        // The last node is taken from psi directly so the endpoint does not
        // carry the accumulated product error.
        z = k == pr.steps ? Vector(sol.psi * (Vector(2 * n) << pr.x0, sol.lambda0).finished()) : Vector(step * z);
        record(k == pr.steps ? pr.t1 : pr.t0 + h * static_cast<double>(k), z);
    }
    const Vector& xf = sol.trajectory.states.back();
    const Vector& lf = sol.costate.back();
    for (Eigen::Index j = 0; j < n; ++j) {
        if (fixed[static_cast<std::size_t>(j)])
            sol.endpointResidual = std::max(sol.endpointResidual, std::abs(xf(j) - pr.x1(j)));
        else
            sol.transversalityResidual = std::max(sol.transversalityResidual, std::abs(lf(j) - M.row(j).dot(xf)));
    }
    return sol;
}

struct HamiltonianResidual {
    double stateResidual = 0.0;
    double costateResidual = 0.0;
    double stationarityResidual = 0.0;
};

/// Midpoint finite differences of both ODEs, and max |R u + B' lambda|
/// (the gradient of the Hamiltonian in u, up to the factor 2).
[[nodiscard]] inline HamiltonianResidual hamiltonianResidual(const TpbvpSolution& sol, const TpbvpProblem& pr) {
    HamiltonianResidual r;
    const Matrix& A = pr.sys.A;
    const Matrix& B = pr.sys.B;
    const auto& t = sol.trajectory.times;
    const auto& x = sol.trajectory.states;
    const auto& lam = sol.costate;
    const auto& u = sol.control;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        const double h = t[k + 1] - t[k];
        const Vector xm = 0.5 * (x[k] + x[k + 1]), lm = 0.5 * (lam[k] + lam[k + 1]), um = 0.5 * (u[k] + u[k + 1]);
        const double scale = 1.0 + xm.norm() + lm.norm();
        r.stateResidual = std::max(r.stateResidual, ((x[k + 1] - x[k]) / h - A * xm - B * um).norm() / scale);
        r.costateResidual = std::max(r.costateResidual, ((lam[k + 1] - lam[k]) / h + pr.Q * xm + A.transpose() * lm).norm() / scale);
    }
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double scale = 1.0 + lam[k].norm();
        r.stationarityResidual = std::max(r.stationarityResidual, (pr.R * u[k] + B.transpose() * lam[k]).norm() / scale);
    }
    return r;
}

/// max over the grid of |lambda(t) - P(t) x(t)| / (1 + |x(t)|) against a
/// Riccati solution of the same problem.
[[nodiscard]] inline double sweepMismatch(const TpbvpSolution& sol, const RiccatiSolution& ric) {
    double worst = 0.0;
    for (std::size_t k = 0; k < sol.trajectory.times.size(); ++k) {
        const Vector& x = sol.trajectory.states[k];
        const Vector d = sol.costate[k] - ric.Pat(sol.trajectory.times[k]) * x;
        worst = std::max(worst, d.norm() / (1.0 + x.norm()));
    }
    return worst;
}

// ----------------------------------------------------------------------------
// Bang-bang examples

struct BangBangSolution {
    std::vector<double> switchingTimes;
    std::vector<double> pieceBounds;          // t0, switches..., terminal time
    std::vector<double> controlPieces;        // constant control on each piece
    std::vector<std::string> trajectoryPieces;  // closed-form description of each arc
    double terminalTime = 0.0;
    Vector terminalState;
    double cost = 0.0;
    double numericSwitch = std::numeric_limits<double>::quiet_NaN();  // bisection on the switching function
    double terminalHamiltonian = 0.0;  // |H(t1)|, min-time problems
    std::vector<std::string> flags;
    std::function<Vector(double)> state;
    std::function<Vector(double)> costate;

    /// Piecewise-constant control. Exactly at a switch the later piece is
    /// returned; either bound is optimal there.
    [[nodiscard]] double control(double t) const {
        if (controlPieces.empty()) return 0.0;
        for (std::size_t k = 0; k + 1 < controlPieces.size(); ++k)
            if (t < pieceBounds[k + 1]) return controlPieces[k];
        return controlPieces.back();
    }

    /// State, costate and control sampled on a uniform grid.
    [[nodiscard]] Trajectory sample(std::size_t intervals) const {
        Trajectory tr;
        const double t0 = pieceBounds.empty() ? 0.0 : pieceBounds.front();
        const double span = terminalTime - t0;
        const std::size_t N = span > 0 ? std::max<std::size_t>(intervals, 1) : 0;
        for (std::size_t k = 0; k <= N; ++k) {
            const double t = N == 0 ? t0 : (k == N ? terminalTime : t0 + span * static_cast<double>(k) / static_cast<double>(N));
            const Vector x = state(t);
            tr.times.push_back(t);
            tr.states.push_back(x);
            tr.inputs.push_back(Vector::Constant(1, control(t)));
            tr.outputs.push_back(x);
        }
        return tr;
    }
};

namespace detail {

/// Bisection for a sign change of f on [a, b] down to `tol`.
inline double bisect(const std::function<double(double)>& f, double a, double b, double tol = 1e-10) {
    double fa = f(a);
    for (int it = 0; it < 200 && b - a > tol; ++it) {
        const double c = 0.5 * (a + b);
        const double fc = f(c);
        if ((fc < 0) == (fa < 0)) {
            a = c;
            fa = fc;
        } else {
            b = c;
        }
    }
    return 0.5 * (a + b);
}

/// Exact state and running cost of xdot = u x, l = (u - 1) x over one
/// interval of constant u.
inline void bilinearStep(double u, double h, double& x, double& cost) {
    const double g = std::exp(u * h);
    cost += (u - 1.0) * (std::abs(u) > 1e-300 ? x * (g - 1.0) / u : x * h);
    x *= g;
}

}  // namespace detail

/// xdot = u x, 0 <= u <= 1, minimize int_0^t1 (u - 1) x dt. The switching
/// function is p + 1 with pdot = -(u - 1) - p u, p(t1) = 0.
[[nodiscard]] inline BangBangSolution solveBilinearBangBang(double x0, double t1) {
    if (!(x0 > 0)) detail::fail(ErrorKind::InvalidArgument, "x0 must be positive");
    if (!(t1 > 0)) detail::fail(ErrorKind::InvalidHorizon, "t1 must be positive");
    BangBangSolution s;
    s.terminalTime = t1;
    if (t1 < 1.0) {
        // p + 1 = t - t1 + 1 > 0 on the whole horizon, so u stays at 0.
        s.flags.push_back("InvalidHorizon: t1 < 1, no switch");
        s.pieceBounds = {0.0, t1};
        s.controlPieces = {0.0};
        s.trajectoryPieces = {"x = x0"};
        s.state = [x0](double) { return Vector::Constant(1, x0); };
        s.costate = [t1](double t) { return Vector::Constant(1, t - t1); };
        s.terminalState = Vector::Constant(1, x0);
        s.cost = -x0 * t1;
        return s;
    }
    const double ts = t1 - 1.0;
    if (ts > 0) s.switchingTimes = {ts};
    s.pieceBounds = ts > 0 ? std::vector<double>{0.0, ts, t1} : std::vector<double>{0.0, t1};
    s.controlPieces = ts > 0 ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0};
    s.trajectoryPieces = ts > 0 ? std::vector<std::string>{"x = x0 exp(t)", "x = x0 exp(t1 - 1)"}
                                : std::vector<std::string>{"x = x0"};
    s.state = [x0, ts](double t) { return Vector::Constant(1, t < ts ? x0 * std::exp(t) : x0 * std::exp(ts)); };
    s.costate = [t1, ts](double t) { return Vector::Constant(1, t < ts ? -std::exp(-t + t1 - 1.0) : t - t1); };
    s.terminalState = Vector::Constant(1, x0 * std::exp(ts));
    s.cost = -x0 * std::exp(ts);

    // Backward RK4 on the costate with u chosen from the sign of p + 1; the
    // crossing is refined by bisection on a fresh sub-step from the last node.
    auto uOf = [](double p) { return p + 1.0 < 0 ? 1.0 : 0.0; };
    auto rhs = [&](double p, double u) { return -(u - 1.0) - p * u; };
    auto rk4 = [&](double p, double h, double u) {
        const double k1 = rhs(p, u), k2 = rhs(p + h / 2 * k1, u), k3 = rhs(p + h / 2 * k2, u), k4 = rhs(p + h * k3, u);
        return p + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    };
    const long N = std::max(1000L, static_cast<long>(std::ceil(t1 * 1000.0)));
    const double h = t1 / static_cast<double>(N);
    double p = 0.0;
    for (long k = N; k > 0; --k) {
        const double t = h * static_cast<double>(k);
        const double u = uOf(p);
        const double pn = rk4(p, -h, u);
        if ((p + 1.0 >= 0) != (pn + 1.0 >= 0)) {
            const double pk = p;
            s.numericSwitch = detail::bisect([&](double tau) { return rk4(pk, tau - t, u) + 1.0; }, t - h, t);
            break;
        }
        p = pn;
    }
    if (ts == 0.0 && std::isnan(s.numericSwitch)) s.numericSwitch = 0.0;
    return s;
}

/// Cost of a piecewise-constant control on a uniform grid over [0, t1].
[[nodiscard]] inline double bilinearCost(double x0, double t1, const std::vector<double>& u) {
    double x = x0, cost = 0.0;
    const double h = t1 / static_cast<double>(u.size());
    for (double uk : u) detail::bilinearStep(uk, h, x, cost);
    return cost;
}

struct DominanceReport {
    std::size_t draws = 0;
    std::size_t violations = 0;     // draws strictly better than the solver beyond tol
    double optimalCost = 0.0;
    double bestRandomCost = std::numeric_limits<double>::infinity();
};

/// Random feasible controls, one seed per draw so the result does not
/// depend on the thread schedule.
[[nodiscard]] inline DominanceReport bilinearDominance(double x0, double t1, std::size_t draws, std::uint64_t seed,
                                                       std::size_t intervals = 50, double tol = 1e-12) {
    const BangBangSolution opt = solveBilinearBangBang(x0, t1);
    DominanceReport rep;
    rep.draws = draws;
    rep.optimalCost = opt.cost;
    std::vector<double> costs(draws);
    detail::parallel_for(draws, [&](std::size_t d) {
        std::mt19937_64 rng(seed * 1000003ULL + d);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<double> u(intervals);
        for (double& v : u) v = U(rng);
        costs[d] = bilinearCost(x0, t1, u);
    });
    for (double c : costs) {
        rep.bestRandomCost = std::min(rep.bestRandomCost, c);
        if (c < opt.cost - tol * (1.0 + std::abs(opt.cost))) ++rep.violations;
    }
    return rep;
}

struct ArgminCheck {
    std::size_t samples = 0;
    std::size_t violations = 0;
    std::size_t violationsAwayFromSwitch = 0;  // more than one grid cell from a switch
};

/// H = (u - 1) x + p u x must be minimized over u in [0, 1] by the returned
/// control at each grid sample; checked against a u-grid.
[[nodiscard]] inline ArgminCheck bilinearArgminCheck(const BangBangSolution& s, std::size_t intervals = 1000,
                                                     std::size_t uGrid = 21) {
    ArgminCheck c;
    const double h = s.terminalTime / static_cast<double>(intervals);
    for (std::size_t k = 0; k <= intervals; ++k) {
        const double t = h * static_cast<double>(k);
        const double x = s.state(t)(0), p = s.costate(t)(0);
        auto H = [&](double u) { return (u - 1.0) * x + p * u * x; };
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < uGrid; ++j) best = std::min(best, H(static_cast<double>(j) / static_cast<double>(uGrid - 1)));
        ++c.samples;
        if (H(s.control(t)) > best + 1e-12 * (1.0 + std::abs(best))) {
            ++c.violations;
            bool near = false;
            for (double sw : s.switchingTimes) near = near || std::abs(t - sw) <= h;
            if (!near) ++c.violationsAwayFromSwitch;
        }
    }
    return c;
}

namespace detail {

/// Closed-form state of the double integrator after time tau at constant u.
inline Vector diArc(const Vector& x, double u, double tau) {
    Vector y(2);
    y << x(0) + x(1) * tau + 0.5 * u * tau * tau, x(1) + u * tau;
    return y;
}

struct MinTimePlan {
    double u0 = 0.0;
    double ts = 0.0;  // switch time (equal to t1 for a single arc)
    double t1 = 0.0;
};

inline MinTimePlan minTimePlan(const Vector& x0, double curveTol) {
    MinTimePlan pl;
    const double x1 = x0(0), x2 = x0(1);
    if (x0.norm() == 0.0) return pl;
    const double s = x1 + 0.5 * x2 * std::abs(x2);
    if (std::abs(s) <= curveTol * (1.0 + x0.squaredNorm())) {
        pl.u0 = x2 > 0 ? -1.0 : 1.0;
        pl.t1 = pl.ts = std::abs(x2);
    } else if (s > 0) {
        pl.u0 = -1.0;
        const double c = std::sqrt(x1 + 0.5 * x2 * x2);
        pl.ts = x2 + c;
        pl.t1 = x2 + 2.0 * c;
    } else {
        pl.u0 = 1.0;
        const double x2s = std::sqrt(-(x1 - 0.5 * x2 * x2));
        pl.ts = x2s - x2;
        pl.t1 = pl.ts + x2s;
    }
    return pl;
}

}  // namespace detail

/// Time-optimal transfer of xdot1 = x2, xdot2 = u, |u| <= 1, to the origin.
/// Above the curve x1 = -x2|x2|/2 the first arc uses u = -1, below it
/// u = +1; on the curve a single arc reaches the origin.
[[nodiscard]] inline BangBangSolution solveDoubleIntegratorMinTime(const Vector& x0, double curveTol = 1e-12) {
    if (x0.size() != 2) detail::fail(ErrorKind::DimensionMismatch, "double integrator state has two entries");
    if (!x0.allFinite()) detail::fail(ErrorKind::InvalidArgument, "x0 must be finite");
    const detail::MinTimePlan pl = detail::minTimePlan(x0, curveTol);
    BangBangSolution s;
    s.terminalTime = pl.t1;
    s.cost = pl.t1;
    const Vector xs = detail::diArc(x0, pl.u0, pl.ts);
    const bool twoArcs = pl.t1 > pl.ts;
    if (pl.t1 == 0.0) {
        s.pieceBounds = {0.0, 0.0};
        s.controlPieces = {0.0};
        s.trajectoryPieces = {"x = 0"};
        s.state = [](double) { return Vector(Vector::Zero(2)); };
        s.costate = [](double) { return Vector(Vector::Zero(2)); };
        s.terminalState = Vector::Zero(2);
        return s;
    }
    if (twoArcs) {
        s.switchingTimes = {pl.ts};
        s.pieceBounds = {0.0, pl.ts, pl.t1};
        s.controlPieces = {pl.u0, -pl.u0};
        s.trajectoryPieces = {pl.u0 > 0 ? "x1 = x1(0) + x2(0) t + t^2/2" : "x1 = x1(0) + x2(0) t - t^2/2",
                              pl.u0 > 0 ? "x1 = -x2^2/2, u = -1" : "x1 = x2^2/2, u = +1"};
    } else {
        s.pieceBounds = {0.0, pl.t1};
        s.controlPieces = {pl.u0};
        s.trajectoryPieces = {pl.u0 > 0 ? "x1 = x2^2/2, u = +1" : "x1 = -x2^2/2, u = -1"};
    }
    const Vector x0c = x0;
    const double u0 = pl.u0, ts = pl.ts;
    s.state = [x0c, xs, u0, ts, twoArcs](double t) {
        return t <= ts || !twoArcs ? detail::diArc(x0c, u0, t) : detail::diArc(xs, -u0, t - ts);
    };
    // p1 = c, p2 = c (ts - t), scaled so that H(t1) = 0; a single arc has
    // p = (0, -u).
    const double c1 = twoArcs ? -u0 / (pl.t1 - ts) : 0.0;
    s.costate = [c1, u0, ts, twoArcs](double t) {
        Vector p(2);
        if (twoArcs)
            p << c1, c1 * (ts - t);
        else
            p << 0.0, -u0;
        return p;
    };
    s.terminalState = s.state(pl.t1);
    const Vector pf = s.costate(pl.t1);
    const Vector& xf = s.terminalState;
    // 1 + p'Ax - |p'b| with A = [[0,1],[0,0]], b = (0,1).
    s.terminalHamiltonian = std::abs(1.0 + pf(0) * xf(1) - std::abs(pf(1)));
    if (twoArcs) {
        const auto costate = s.costate;
        s.numericSwitch = detail::bisect([&](double t) { return costate(t)(1); }, 0.0, pl.t1);
    }
    return s;
}

/// Dominance by the principle of optimality: a random feasible prefix on
/// [0, tau] followed by the optimal completion can never beat t1.
[[nodiscard]] inline DominanceReport minTimeDominance(const Vector& x0, std::size_t draws, std::uint64_t seed,
                                                      std::size_t intervals = 20, double tol = 1e-9) {
    const BangBangSolution opt = solveDoubleIntegratorMinTime(x0);
    DominanceReport rep;
    rep.draws = draws;
    rep.optimalCost = opt.terminalTime;
    std::vector<double> costs(draws);
    const double tau = 0.5 * opt.terminalTime;
    detail::parallel_for(draws, [&](std::size_t d) {
        std::mt19937_64 rng(seed * 1000003ULL + d);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        Vector x = x0;
        const double h = tau / static_cast<double>(intervals);
        for (std::size_t k = 0; k < intervals; ++k) x = detail::diArc(x, U(rng), h);
        costs[d] = tau + detail::minTimePlan(x, 1e-12).t1;
    });
    for (double c : costs) {
        rep.bestRandomCost = std::min(rep.bestRandomCost, c);
        if (c < opt.terminalTime - tol * (1.0 + opt.terminalTime)) ++rep.violations;
    }
    return rep;
}

/// Switches of u = -sign(b' e^{-A' t} p0) on [0, horizon]: sign changes on a
/// grid, each refined by bisection.
[[nodiscard]] inline std::vector<double> switchingTimes(const Matrix& A, const Vector& b, const Vector& p0, double horizon,
                                                        std::size_t samples = 2000) {
    auto f = [&](double t) { return b.dot(expm(Matrix(-A.transpose()), t) * p0); };
    std::vector<double> out;
    double prevT = 0.0, prevF = f(0.0);
    for (std::size_t k = 1; k <= samples; ++k) {
        const double t = horizon * static_cast<double>(k) / static_cast<double>(samples);
        const double ft = f(t);
        if (ft != 0.0 && prevF != 0.0 && (ft < 0) != (prevF < 0)) out.push_back(detail::bisect(f, prevT, t));
        if (ft != 0.0) {
            prevT = t;
            prevF = ft;
        }
    }
    return out;
}

}  // namespace sskit

#endif  // SSKIT_MINPRIN_HPP
