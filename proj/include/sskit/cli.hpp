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
#ifndef SSKIT_CLI_HPP
#define SSKIT_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "io.hpp"
#include "minprin.hpp"
#include "stability.hpp"

namespace sskit::cli {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
    std::string command;
    std::string inputPath;
    std::string outputDir;
    std::map<std::string, double> toleranceOverrides;
    std::uint64_t seed = 0;
};

/// Names accepted by --tol, with their defaults.
struct Tolerances {
    double rank = -1.0;    // structural rank threshold; negative selects n eps sigma_max
    double modal = 1e-8;   // Hautus / per-eigenvalue nullity threshold
    double verify = 1e-6;  // pole-placement spectrum check
    double cancel = 1e-6;  // pole-zero cancellation in transfer functions
    double curve = 1e-12;  // switching-curve membership for the minimum-time solver

    static const std::vector<std::string>& names() {
        static const std::vector<std::string> n{"cancel", "curve", "modal", "rank", "verify"};
        return n;
    }
    void set(const std::string& name, double v) {
        if (name == "rank") rank = v;
        else if (name == "modal") modal = v;
        else if (name == "verify") verify = v;
        else if (name == "cancel") cancel = v;
        else if (name == "curve") curve = v;
    }
};

struct CommandOutput {
    Json results = Json::object();
    std::vector<std::string> warnings;
    std::map<std::string, std::string> files;  // name -> contents, written next to report.json
};

struct Context {
    const Json& input;
    const RunConfig& config;
    Tolerances tol;
    CommandOutput& out;

    [[nodiscard]] StructuralOptions structural() const {
        StructuralOptions o;
        o.rankTol = tol.rank;
        o.modalTol = tol.modal;
        return o;
    }
    [[nodiscard]] PlacementOptions placement() const {
        PlacementOptions o;
        o.verifyTol = tol.verify;
        o.seed = config.seed;
        return o;
    }
};

/// 64-bit FNV-1a.
[[nodiscard]] inline std::uint64_t fnv1a(const std::string& data, std::uint64_t h = 1469598103934665603ULL) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

[[nodiscard]] inline std::string inputsDigest(const std::string& inputBytes, const RunConfig& cfg) {
    std::string keyed = cfg.command + '\n';
    for (const auto& [k, v] : cfg.toleranceOverrides) keyed += k + '=' + formatCsvNumber(v) + '\n';
    keyed += "seed=" + std::to_string(cfg.seed) + '\n';
    const std::uint64_t h = fnv1a(inputBytes, fnv1a(keyed));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace detail {

using sskit::json::child;
using sskit::json::has;

inline const Json& modelNode(const Json& in, std::string& ptr) {
    if (has(in, "model")) {
        ptr = "/model";
        return in.at("model");
    }
    ptr = "";
    return in;
}

inline LoadedModel model(const Context& c) {
    std::string ptr;
    const Json& node = modelNode(c.input, ptr);
    return loadModel(node, ptr);
}

/// LTI view of any model; builtins without one are linearized about the
/// equilibrium found from their default (or supplied) guess.
inline StateSpace lti(const Context& c, const LoadedModel& m) {
    if (m.lti) return *m.lti;
    if (m.nonlinear && m.builtin) {
        Vector ue = m.builtin->ue, guess = m.builtin->guess;
        if (has(c.input, "equilibrium")) {
            const Json& e = c.input.at("equilibrium");
            if (has(e, "ue")) ue = sskit::json::vector(e.at("ue"), "/equilibrium/ue");
            if (has(e, "guess")) guess = sskit::json::vector(e.at("guess"), "/equilibrium/guess");
        }
        const Equilibrium eq = findEquilibrium(*m.nonlinear, ue, guess);
        c.out.warnings.push_back("nonlinear model linearized at its equilibrium");
        c.out.results["equilibrium"] = Json{{"xe", sskit::json::ofVector(eq.xe)}, {"ue", sskit::json::ofVector(eq.ue)},
                                            {"residual", eq.residual}};
        return linearizeAtEquilibrium(*m.nonlinear, eq);
    }
    throw SchemaError("/type", "this command needs a time-invariant model");
}

inline std::vector<Complex> poles(const Json& in, const std::string& key) {
    return sskit::json::complexList(sskit::json::field(in, key, ""), "/" + key);
}

inline Matrix matrixField(const Json& in, const std::string& key) {
    return sskit::json::matrix(sskit::json::field(in, key, ""), "/" + key);
}

inline Vector vectorField(const Json& in, const std::string& key) {
    return sskit::json::vector(sskit::json::field(in, key, ""), "/" + key);
}

inline void requireShape(const Matrix& M, Eigen::Index r, Eigen::Index c, const std::string& ptr) {
    if (M.rows() != r || M.cols() != c)
        throw SchemaError(ptr, "expected a " + std::to_string(r) + " x " + std::to_string(c) + " matrix");
}

inline void requireLength(const Vector& v, Eigen::Index n, const std::string& ptr) {
    if (v.size() != n) throw SchemaError(ptr, "expected " + std::to_string(n) + " entries");
}

inline Json modesJson(const StructuralReport& r) {
    Json modes = Json::array();
    for (const ModeRow& row : r.modes)
        modes.push_back(Json{{"eigenvalue", sskit::json::of(row.eigenvalue)},
                             {"algebraic", row.algebraic},
                             {"controllable", row.controllable},
                             {"observable", row.observable}});
    return modes;
}

inline Json structuralJson(const StructuralReport& r) {
    return Json{{"ctrbRank", r.ctrbRank},
                {"obsvRank", r.obsvRank},
                {"controllable", r.controllable()},
                {"observable", r.observable()},
                {"stabilizable", r.stabilizable},
                {"detectable", r.detectable},
                {"modes", modesJson(r)},
                {"uncontrollableModes", sskit::json::of(r.uncontrollableModes)},
                {"unobservableModes", sskit::json::of(r.unobservableModes)}};
}

inline Json verdictJson(const StabilityVerdict& v) {
    return Json{{"verdict", std::string(to_string(v.kind))},
                {"eigenvalues", sskit::json::of(v.eigenvalues)},
                {"witnesses", sskit::json::of(v.witnesses)},
                {"nearAxis", v.nearAxis}};
}

inline Json grammianJson(const GrammianReport& g) {
    return Json{{"W", sskit::json::of(g.W)},
                {"eigenvalues", sskit::json::ofVector(g.eigenvalues)},
                {"conditioning", sskit::json::of(g.conditioning)},
                {"singular", g.singular()},
                {"t0", g.t0},
                {"t1", g.t1}};
}

inline Json gainJson(const GainSet& g) {
    Json j{{"K", sskit::json::of(g.K)}, {"achievedStatePoles", sskit::json::of(g.achievedStatePoles)}};
    if (g.projection.size() > 0) j["projection"] = sskit::json::ofVector(g.projection);
    return j;
}

inline InputFn inputFunction(const Json& in, Eigen::Index m) {
    if (!has(in, "input")) return [m](double) { return Vector(Vector::Zero(m)); };
    const std::string ptr = "/input";
    const Json& j = in.at("input");
    const std::string kind = sskit::json::string(sskit::json::field(j, "kind", ptr), child(ptr, "kind"));
    auto vec = [&](const std::string& key) {
        const Vector v = sskit::json::vector(sskit::json::field(j, key, ptr), child(ptr, key));
        requireLength(v, m, child(ptr, key));
        return v;
    };
    if (kind == "zero") return [m](double) { return Vector(Vector::Zero(m)); };
    if (kind == "constant") {
        const Vector v = vec("value");
        return [v](double) { return v; };
    }
    if (kind == "step") {
        const Vector v = vec("value");
        const double at = sskit::json::numberOr(j, "time", 0.0, ptr);
        return [v, at, m](double t) { return t >= at ? v : Vector(Vector::Zero(m)); };
    }
    if (kind == "sine") {
        const Vector a = vec("amplitude");
        const double w = sskit::json::number(sskit::json::field(j, "frequency", ptr), child(ptr, "frequency"));
        return [a, w](double t) { return Vector(a * std::sin(w * t)); };
    }
    throw SchemaError(child(ptr, "kind"), "unknown input kind '" + kind + "'");
}

inline std::vector<double> grid(const Json& in, const std::string& key, double lo, double hi, std::size_t count) {
    if (!has(in, key)) return logGrid(lo, hi, count);
    const std::string ptr = "/" + key;
    const Json& j = in.at(key);
    if (j.is_array()) {
        const Vector v = sskit::json::vector(j, ptr);
        return {v.data(), v.data() + v.size()};
    }
    const double a = sskit::json::number(sskit::json::field(j, "from", ptr), child(ptr, "from"));
    const double b = sskit::json::number(sskit::json::field(j, "to", ptr), child(ptr, "to"));
    const long k = sskit::json::integerOr(j, "count", 50, ptr);
    if (!(a > 0 && b > a) || k < 2) throw SchemaError(ptr, "grid needs 0 < from < to and count >= 2");
    return logGrid(a, b, static_cast<std::size_t>(k));
}

// ----------------------------------------------------------------------------
// Commands

inline void cmdRealize(Context& c) {
    Json& r = c.out.results;
    if (has(c.input, "tf")) {
        const TransferMatrix G = sskit::json::transferMatrix(c.input.at("tf"), "/tf");
        if (G.rows == 1 && G.cols == 1) {
            const RationalFunction g = reduceCoprime(G.at(0, 0), c.tol.cancel);
            r["transferFunction"] = sskit::json::of(g);
            if (g.hadCancellation()) c.out.warnings.push_back("common factors cancelled before realization");
            r["ccf"] = sskit::json::of(ccf(g));
            r["ocf"] = sskit::json::of(ocf(g));
            try {
                r["modal"] = sskit::json::of(modalForm(g));
            } catch (const Error& e) {
                r["modal"] = nullptr;
                c.out.warnings.push_back(std::string("modal form unavailable: ") + e.what());
            }
            r["order"] = g.den.degree();
        } else {
            const StateSpace s = mimoMinimalRealization(G, c.tol.rank < 0 ? 1e-9 : c.tol.rank);
            r["minimal"] = sskit::json::of(s);
            r["order"] = s.n();
        }
        return;
    }
    const LoadedModel m = model(c);
    const StateSpace s = lti(c, m);
    r["transferMatrix"] = sskit::json::of(ssToTf(s));
    const MinimalityReport mr = minimality(s, c.tol.rank);
    r["isMinimal"] = mr.isMinimal;
    r["degreeDeficit"] = mr.degreeDeficit;
}

inline void cmdAnalyze(Context& c) {
    const LoadedModel m = model(c);
    const StateSpace s = lti(c, m);
    Json& r = c.out.results;
    r["n"] = s.n();
    r["m"] = s.m();
    r["p"] = s.p();
    const StructuralReport sr = structuralAnalysis(s, c.structural());
    r["structural"] = structuralJson(sr);
    r["stability"] = verdictJson(ltiStability(s.A));
    r["transferMatrix"] = sskit::json::of(ssToTf(s));
    const MinimalityReport mr = minimality(s, c.tol.rank);
    r["isMinimal"] = mr.isMinimal;
    r["degreeDeficit"] = mr.degreeDeficit;
    r["bibo"] = biboStability(ssToTf(s)).stable;
}

inline void cmdStability(Context& c) {
    const LoadedModel m = model(c);
    Json& r = c.out.results;
    Json flags = Json::array();
    if (m.lti) {
        const LyapunovTestResult t = lyapunovStabilityTest(m.lti->A);
        const Json v = verdictJson(t.eigenVerdict);
        for (auto it = v.begin(); it != v.end(); ++it) r[it.key()] = it.value();
        if (t.certificate && t.asymptoticallyStable) r["lyapunovP"] = sskit::json::of(t.certificate->P);
        if (t.singularOperator) flags.push_back("singularLyapunovOperator");
        if (t.eigenVerdict.nearAxis) flags.push_back("nearAxis");
    } else if (m.nonlinear && m.builtin) {
        Vector ue = m.builtin->ue, guess = m.builtin->guess;
        if (has(c.input, "equilibrium")) {
            const Json& e = c.input.at("equilibrium");
            if (has(e, "ue")) ue = sskit::json::vector(e.at("ue"), "/equilibrium/ue");
            if (has(e, "guess")) guess = sskit::json::vector(e.at("guess"), "/equilibrium/guess");
        }
        const Equilibrium eq = findEquilibrium(*m.nonlinear, ue, guess);
        const LinearizationReport lr = linearizationVerdict(*m.nonlinear, eq);
        r["equilibrium"] = Json{{"xe", sskit::json::ofVector(eq.xe)}, {"ue", sskit::json::ofVector(eq.ue)}, {"residual", eq.residual}};
        r["verdict"] = std::string(to_string(lr.verdict));
        r["eigenvalues"] = sskit::json::of(lr.eigenvalues);
        r["linearization"] = sskit::json::of(lr.linearization);
        if (lr.verdict == LinearizationVerdict::Inconclusive) flags.push_back("linearizationInconclusive");
        if (has(c.input, "lyapunov")) {
            const Json& l = c.input.at("lyapunov");
            const Matrix P = sskit::json::matrix(sskit::json::field(l, "P", "/lyapunov"), "/lyapunov/P");
            requireShape(P, m.nonlinear->n, m.nonlinear->n, "/lyapunov/P");
            const double level = sskit::json::number(sskit::json::field(l, "level", "/lyapunov"), "/lyapunov/level");
            const long samples = sskit::json::integerOr(l, "samples", 10000, "/lyapunov");
            // The scan is centered at the origin of the state coordinates.
            NonlinearModel shifted = *m.nonlinear;
            const Vector xe = eq.xe, uE = eq.ue;
            const auto f = m.nonlinear->f;
            shifted.f = [f, xe, uE](const Vector& x, const Vector&, double t) { return f(Vector(x + xe), uE, t); };
            const ScanResult scan = quadraticLyapunovScan(shifted, P, level, static_cast<std::size_t>(std::max(1L, samples)));
            r["lyapunovScan"] = Json{{"certified", scan.certified}, {"worstValue", sskit::json::of(scan.worstValue)},
                                     {"samples", scan.samples}};
        }
    } else {
        throw SchemaError("/type", "stability needs an LTI or builtin model");
    }
    r["flags"] = flags;
}

inline void cmdStructural(Context& c) {
    const LoadedModel m = model(c);
    Json& r = c.out.results;
    if (has(c.input, "horizon")) {
        const Vector h = sskit::json::vector(c.input.at("horizon"), "/horizon");
        requireLength(h, 2, "/horizon");
        if (!(h(1) > h(0))) throw SchemaError("/horizon", "horizon must be increasing");
        if (m.lti) {
            r["controllabilityGrammian"] = grammianJson(controllabilityGrammian(*m.lti, h(0), h(1)));
            r["observabilityGrammian"] = grammianJson(observabilityGrammian(*m.lti, h(0), h(1)));
        } else if (m.ltv) {
            r["controllabilityGrammian"] = grammianJson(controllabilityGrammian(*m.ltv, h(0), h(1)));
            r["observabilityGrammian"] = grammianJson(observabilityGrammian(*m.ltv, h(0), h(1)));
        }
    }
    if (!m.lti && m.ltv) return;
    const StateSpace s = lti(c, m);
    const StructuralReport sr = structuralAnalysis(s, c.structural());
    const Json sj = structuralJson(sr);
    for (auto it = sj.begin(); it != sj.end(); ++it) r[it.key()] = it.value();
    if (has(c.input, "kalman")) {
        const std::string kind = sskit::json::string(c.input.at("kalman"), "/kalman");
        if (kind != "controllable" && kind != "observable") throw SchemaError("/kalman", "expected 'controllable' or 'observable'");
        const KalmanDecomposition d = kalmanDecompose(s, kind == "controllable" ? KalmanKind::KCCF : KalmanKind::KOCF, c.tol.rank);
        r["kalman"] = Json{{"P", sskit::json::of(d.P)}, {"transformed", sskit::json::of(d.transformed)}, {"n1", d.n1},
                           {"offBlockResidual", d.offBlockResidual}};
    }
    if (s.m() == s.p() && s.m() > 0) r["transmissionZeros"] = sskit::json::of(transmissionZeros(s).transmissionZeros);
}

inline void cmdPlace(Context& c) {
    const StateSpace s = lti(c, model(c));
    const GainSet g = placePoles(s, poles(c.input, "poles"), c.placement());
    const Json gj = gainJson(g);
    for (auto it = gj.begin(); it != gj.end(); ++it) c.out.results[it.key()] = it.value();
}

inline void cmdObserver(Context& c) {
    const StateSpace s = lti(c, model(c));
    Json& r = c.out.results;
    const auto op = poles(c.input, "poles");
    const bool reduced = has(c.input, "reduced") && c.input.at("reduced").is_boolean() && c.input.at("reduced").get<bool>();
    if (reduced) {
        const ReducedObserver ro = reducedOrderObserver(s, op, c.placement());
        r["Lr"] = sskit::json::of(ro.Lr);
        r["estimator"] = sskit::json::of(ro.estimator);
        r["P"] = sskit::json::of(ro.P);
        r["achievedPoles"] = sskit::json::of(ro.achievedPoles);
        return;
    }
    const GainSet g = observerGain(s, op, c.placement());
    r["L"] = sskit::json::of(*g.L);
    r["achievedObserverPoles"] = sskit::json::of(g.achievedObserverPoles);
    if (has(c.input, "statePoles")) {
        const GainSet k = placePoles(s, poles(c.input, "statePoles"), c.placement());
        const ObserverFeedback fb = assembleObserverFeedback(s, k.K, *g.L);
        r["K"] = sskit::json::of(k.K);
        r["compensator"] = sskit::json::of(fb.compensator);
        r["compensatorTf"] = sskit::json::of(fb.compensatorTf);
        r["spectrum"] = sskit::json::of(fb.spectrum);
        r["separationMismatch"] = fb.separationMismatch;
    }
}

inline void cmdIntegral(Context& c) {
    const StateSpace s = lti(c, model(c));
    const IntegralDesign d = integralControl(s, poles(c.input, "poles"), c.placement());
    Json& r = c.out.results;
    r["K1"] = sskit::json::of(d.K1);
    r["K2"] = sskit::json::of(d.K2);
    r["rankCheck"] = d.rankCheck;
    r["achievedPoles"] = sskit::json::of(d.achievedPoles);
}

inline void cmdDiophantine(Context& c) {
    const TransferMatrix G = sskit::json::transferMatrix(sskit::json::field(c.input, "tf", ""), "/tf");
    if (G.rows != 1 || G.cols != 1) throw SchemaError("/tf", "diophantine design is single-input single-output");
    const Polynomial ac = sskit::json::polynomial(sskit::json::field(c.input, "alphaC", ""), "/alphaC");
    const Polynomial ao = sskit::json::polynomial(sskit::json::field(c.input, "alphaO", ""), "/alphaO");
    const DiophantineProblem d = diophantineDesign(G.at(0, 0), ac, ao);
    Json& r = c.out.results;
    r["d"] = sskit::json::of(d.d);
    r["n"] = sskit::json::of(d.n);
    r["residual"] = d.residual;
    r["compensator"] = sskit::json::of(d.compensator);
}

inline LqrProblem lqrProblem(const Context& c, const StateSpace& s) {
    LqrProblem pr{s, matrixField(c.input, "Q"), matrixField(c.input, "R"), Matrix::Zero(s.n(), s.n())};
    requireShape(pr.Q, s.n(), s.n(), "/Q");
    requireShape(pr.R, s.m(), s.m(), "/R");
    pr.infinite = true;
    if (has(c.input, "horizon")) {
        const Json& h = c.input.at("horizon");
        pr.infinite = false;
        pr.t0 = sskit::json::numberOr(h, "t0", 0.0, "/horizon");
        pr.t1 = sskit::json::number(sskit::json::field(h, "t1", "/horizon"), "/horizon/t1");
        if (has(h, "M")) {
            pr.M = sskit::json::matrix(h.at("M"), "/horizon/M");
            requireShape(pr.M, s.n(), s.n(), "/horizon/M");
        }
    }
    return pr;
}

inline void cmdLqr(Context& c) {
    const StateSpace s = lti(c, model(c));
    const LqrProblem pr = lqrProblem(c, s);
    Json& r = c.out.results;
    if (pr.infinite) {
        const RiccatiSolution sol = solveAre(pr);
        r["P"] = sskit::json::of(sol.Pbar);
        r["K"] = sskit::json::of(sol.K);
        r["closedLoopPoles"] = sskit::json::of(sol.closedLoopPoles);
        r["residual"] = sol.residual;
        r["positiveDefinite"] = sol.pd && sol.pd->verdict == Definiteness::PositiveDefinite;
        for (const auto& f : sol.flags) c.out.warnings.push_back(f);
        return;
    }
    const RiccatiSolution sol = solveRde(pr);
    r["P0"] = sskit::json::of(sol.P.front());
    r["K0"] = sskit::json::of(Matrix(sol.gainAt(pr.t0)));
    r["closedLoopPolesAtT0"] = sskit::json::of(sol.closedLoopPoles);
    r["residual"] = sol.residual;
    std::vector<std::string> header{"t"};
    const Eigen::Index n = s.n();
    for (Eigen::Index i = 1; i <= n; ++i)
        for (Eigen::Index j = 1; j <= n; ++j) header.push_back("P" + std::to_string(i) + "_" + std::to_string(j));
    std::vector<std::vector<double>> rows;
    const std::size_t stride = std::max<std::size_t>(1, sol.times.size() / 1000);
    for (std::size_t k = 0; k < sol.times.size(); k += stride) {
        std::vector<double> row{sol.times[k]};
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) row.push_back(sol.P[k](i, j));
        rows.push_back(std::move(row));
    }
    if ((sol.times.size() - 1) % stride != 0) {
        std::vector<double> row{sol.times.back()};
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) row.push_back(sol.P.back()(i, j));
        rows.push_back(std::move(row));
    }
    c.out.files["riccati.csv"] = csvTable(header, rows);
}

inline void cmdSrl(Context& c) {
    const std::vector<double> rg = grid(c.input, "r", 1e-3, 1e3, 61);
    std::vector<SrlPoint> pts;
    if (has(c.input, "tf")) {
        const TransferMatrix G = sskit::json::transferMatrix(c.input.at("tf"), "/tf");
        if (G.rows != 1 || G.cols != 1) throw SchemaError("/tf", "symmetric root locus needs a scalar plant");
        pts = symmetricRootLocus(G.at(0, 0), rg);
    } else {
        const StateSpace s = lti(c, model(c));
        const Matrix W = has(c.input, "weight") ? matrixField(c.input, "weight") : s.C;
        if (W.cols() != s.n()) throw SchemaError("/weight", "weight needs n columns");
        pts = symmetricRootLocus(s, W, rg);
    }
    std::vector<std::vector<double>> rows;
    double sym = 0.0;
    for (const SrlPoint& p : pts) {
        sym = std::max(sym, p.symmetryError);
        for (const Complex& z : p.roots) rows.push_back({p.r, z.real(), z.imag(), z.real() < 0 ? 1.0 : 0.0});
    }
    c.out.files["srl.csv"] = csvTable({"r", "root_re", "root_im", "stable"}, rows);
    c.out.results["gridSize"] = pts.size();
    c.out.results["maxSymmetryError"] = sym;
}

inline void cmdMargins(Context& c) {
    const StateSpace s = lti(c, model(c));
    Matrix K, Q, R;
    if (has(c.input, "K")) {
        K = matrixField(c.input, "K");
        requireShape(K, s.m(), s.n(), "/K");
        Q = has(c.input, "Q") ? matrixField(c.input, "Q") : Matrix(Matrix::Zero(s.n(), s.n()));
        R = has(c.input, "R") ? matrixField(c.input, "R") : Matrix(Matrix::Identity(s.m(), s.m()));
    } else {
        const LqrProblem pr = lqrProblem(c, s);
        K = solveAre(pr).K;
        Q = pr.Q;
        R = pr.R;
    }
    const FrequencyReport fr = returnDifferenceReport(s, Q, R, K, grid(c.input, "omega", 1e-2, 1e3, 400));
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < fr.omega.size(); ++k) rows.push_back({fr.omega[k], fr.returnDifference[k], fr.sensitivity[k]});
    c.out.files["margins.csv"] = csvTable({"omega", "return_difference", "sensitivity"}, rows);
    Json& r = c.out.results;
    r["K"] = sskit::json::of(K);
    r["minReturnDifference"] = fr.minReturnDifference;
    r["argminOmega"] = fr.argminOmega;
    r["identityResidual"] = fr.identityResidual;
    r["kalmanInequality"] = fr.minReturnDifference >= 1.0 - 1e-6;
}

inline void cmdSimulate(Context& c) {
    const LoadedModel m = model(c);
    const double t0 = sskit::json::numberOr(c.input, "t0", 0.0, "");
    const double t1 = sskit::json::number(sskit::json::field(c.input, "t1", ""), "/t1");
    const double step = sskit::json::numberOr(c.input, "step", 1e-2, "");
    if (!(t1 > t0) || !(step > 0)) throw SchemaError("/t1", "need t1 > t0 and a positive step");
    const Vector x0 = vectorField(c.input, "x0");
    Trajectory tr;
    if (m.lti) {
        requireLength(x0, m.lti->n(), "/x0");
        tr = simulate(*m.lti, x0, inputFunction(c.input, m.lti->m()), t0, t1, step);
    } else if (m.ltv) {
        requireLength(x0, m.ltv->n, "/x0");
        tr = simulate(*m.ltv, x0, inputFunction(c.input, m.ltv->m), t0, t1, step);
    } else {
        requireLength(x0, m.nonlinear->n, "/x0");
        tr = simulate(*m.nonlinear, x0, inputFunction(c.input, m.nonlinear->m), t0, t1, step);
    }
    c.out.files["trajectory.csv"] = trajectoryCsv(tr);
    c.out.results["samples"] = tr.times.size();
    c.out.results["blewUp"] = tr.blewUp;
    c.out.results["finalState"] = sskit::json::ofVector(tr.states.back());
    if (tr.blewUp) c.out.warnings.push_back("integration stopped early on a non-finite or huge state");
}

inline void cmdSteer(Context& c) {
    const StateSpace s = lti(c, model(c));
    const Vector x0 = vectorField(c.input, "x0"), xf = vectorField(c.input, "xf");
    requireLength(x0, s.n(), "/x0");
    requireLength(xf, s.n(), "/xf");
    const double t0 = sskit::json::numberOr(c.input, "t0", 0.0, "");
    const double t1 = sskit::json::number(sskit::json::field(c.input, "t1", ""), "/t1");
    const SteeringResult st = minimumEnergySteer(s, x0, xf, t0, t1);
    c.out.files["trajectory.csv"] = trajectoryCsv(st.trajectory);
    std::vector<std::string> header{"t"};
    for (Eigen::Index i = 1; i <= s.m(); ++i) header.push_back("u" + std::to_string(i));
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < st.trajectory.times.size(); ++k) {
        std::vector<double> row{st.trajectory.times[k]};
        const Vector u = st.control(st.trajectory.times[k]);
        for (Eigen::Index i = 0; i < u.size(); ++i) row.push_back(u(i));
        rows.push_back(std::move(row));
    }
    c.out.files["control.csv"] = csvTable(header, rows);
    c.out.results["endpointError"] = st.endpointError;
    c.out.results["grammian"] = grammianJson(st.grammian);
}

inline void cmdTpbvp(Context& c) {
    const StateSpace s = lti(c, model(c));
    TpbvpProblem pr;
    pr.sys = s;
    pr.Q = matrixField(c.input, "Q");
    pr.R = matrixField(c.input, "R");
    pr.x0 = vectorField(c.input, "x0");
    requireShape(pr.Q, s.n(), s.n(), "/Q");
    requireShape(pr.R, s.m(), s.m(), "/R");
    requireLength(pr.x0, s.n(), "/x0");
    pr.t0 = sskit::json::numberOr(c.input, "t0", 0.0, "");
    pr.t1 = sskit::json::number(sskit::json::field(c.input, "t1", ""), "/t1");
    pr.steps = sskit::json::integerOr(c.input, "steps", 1000, "");
    if (has(c.input, "fixed")) {
        const Json& f = c.input.at("fixed");
        if (!f.is_array() || static_cast<Eigen::Index>(f.size()) != s.n()) throw SchemaError("/fixed", "expected n booleans");
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (!f[i].is_boolean()) throw SchemaError(child("/fixed", i), "expected a boolean");
            pr.endpointMask.push_back(f[i].get<bool>());
        }
    }
    const bool anyFixed = pr.endpointMask.empty() || std::find(pr.endpointMask.begin(), pr.endpointMask.end(), true) != pr.endpointMask.end();
    if (has(c.input, "x1")) {
        pr.x1 = vectorField(c.input, "x1");
        requireLength(pr.x1, s.n(), "/x1");
    } else if (anyFixed) {
        throw SchemaError("/x1", "required field is missing");
    }
    if (has(c.input, "M")) {
        pr.M = matrixField(c.input, "M");
        requireShape(pr.M, s.n(), s.n(), "/M");
    }
    const TpbvpSolution sol = solveLqTpbvp(pr);
    const HamiltonianResidual hr = hamiltonianResidual(sol, pr);
    c.out.files["trajectory.csv"] = trajectoryCsv(sol.trajectory);
    std::vector<std::string> header{"t"};
    for (Eigen::Index i = 1; i <= s.n(); ++i) header.push_back("lambda" + std::to_string(i));
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < sol.costate.size(); ++k) {
        std::vector<double> row{sol.trajectory.times[k]};
        for (Eigen::Index i = 0; i < s.n(); ++i) row.push_back(sol.costate[k](i));
        rows.push_back(std::move(row));
    }
    c.out.files["costate.csv"] = csvTable(header, rows);
    Json residuals{{"endpoint", sol.endpointResidual},
                   {"transversality", sol.transversalityResidual},
                   {"state", hr.stateResidual},
                   {"costate", hr.costateResidual},
                   {"stationarity", hr.stationarityResidual}};
    if (!anyFixed) {
        LqrProblem lq{s, pr.Q, pr.R, pr.M.size() ? pr.M : Matrix(Matrix::Zero(s.n(), s.n())), pr.t0, pr.t1, false};
        residuals["sweep"] = sweepMismatch(sol, solveRde(lq));
    }
    c.out.results["switchingTimes"] = Json::array();
    c.out.results["terminalTime"] = pr.t1;
    c.out.results["lambda0"] = sskit::json::ofVector(sol.lambda0);
    c.out.results["residuals"] = residuals;
}

inline void cmdMintime(Context& c) {
    const std::string problem = has(c.input, "problem") ? sskit::json::string(c.input.at("problem"), "/problem") : "double_integrator";
    const long samples = sskit::json::integerOr(c.input, "samples", 1000, "");
    if (samples < 1) throw SchemaError("/samples", "samples must be positive");
    BangBangSolution s;
    Json residuals = Json::object();
    DominanceReport dom;
    if (problem == "double_integrator") {
        const Vector x0 = vectorField(c.input, "x0");
        requireLength(x0, 2, "/x0");
        s = solveDoubleIntegratorMinTime(x0, c.tol.curve);
        residuals["terminalHamiltonian"] = s.terminalHamiltonian;
        residuals["terminalState"] = s.terminalState.norm();
        dom = minTimeDominance(x0, 100, c.config.seed);
    } else if (problem == "bilinear") {
        const double x0 = sskit::json::number(sskit::json::field(c.input, "x0", ""), "/x0");
        const double t1 = sskit::json::number(sskit::json::field(c.input, "t1", ""), "/t1");
        s = solveBilinearBangBang(x0, t1);
        const ArgminCheck ac = bilinearArgminCheck(s);
        residuals["argminViolationsAwayFromSwitch"] = ac.violationsAwayFromSwitch;
        dom = bilinearDominance(x0, t1, 100, c.config.seed);
        c.out.results["cost"] = s.cost;
    } else {
        throw SchemaError("/problem", "expected 'double_integrator' or 'bilinear'");
    }
    if (!s.switchingTimes.empty() && std::isfinite(s.numericSwitch))
        residuals["switchLocation"] = std::abs(s.numericSwitch - s.switchingTimes.front());
    for (const auto& f : s.flags) c.out.warnings.push_back(f);
    Json& r = c.out.results;
    r["switchingTimes"] = sskit::json::of(s.switchingTimes);
    r["terminalTime"] = s.terminalTime;
    r["controlPieces"] = sskit::json::of(s.controlPieces);
    r["pieceBounds"] = sskit::json::of(s.pieceBounds);
    r["trajectoryPieces"] = s.trajectoryPieces;
    r["terminalState"] = sskit::json::ofVector(s.terminalState);
    r["residuals"] = residuals;
    r["dominance"] = Json{{"draws", dom.draws}, {"violations", dom.violations}, {"optimalCost", dom.optimalCost},
                          {"bestRandomCost", sskit::json::of(dom.bestRandomCost)}};
    c.out.files["trajectory.csv"] = trajectoryCsv(s.sample(static_cast<std::size_t>(samples)));
}

inline const std::map<std::string, std::function<void(Context&)>>& commands() {
    static const std::map<std::string, std::function<void(Context&)>> table{
        {"analyze", cmdAnalyze},   {"diophantine", cmdDiophantine}, {"integral", cmdIntegral}, {"lqr", cmdLqr},
        {"margins", cmdMargins},   {"mintime", cmdMintime},         {"observer", cmdObserver}, {"place", cmdPlace},
        {"realize", cmdRealize},   {"simulate", cmdSimulate},       {"srl", cmdSrl},           {"stability", cmdStability},
        {"steer", cmdSteer},       {"structural", cmdStructural},   {"tpbvp", cmdTpbvp}};
    return table;
}

inline std::string dumpReport(const Json& report) { return report.dump(2) + "\n"; }

/// Writes every file or none: on failure the ones already written are removed.
inline bool writeAll(const std::filesystem::path& dir, const std::map<std::string, std::string>& files, std::ostream& err) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        err << "error: cannot create output directory " << dir << ": " << ec.message() << "\n";
        return false;
    }
    std::vector<std::filesystem::path> written;
    for (const auto& [name, body] : files) {
        const auto path = dir / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << body;
        out.close();
        if (!out) {
            err << "error: cannot write " << path << "\n";
            for (const auto& p : written) std::filesystem::remove(p, ec);
            std::filesystem::remove(path, ec);
            return false;
        }
        written.push_back(path);
    }
    return true;
}

}  // namespace detail

/// Runs one command. Exit codes: 0 success, 1 domain error (serialized in
/// the report), 2 usage or IO error (nothing written).
[[nodiscard]] inline int execute(const RunConfig& cfg, std::ostream& err) {
    const auto& table = detail::commands();
    const auto cmd = table.find(cfg.command);
    if (cmd == table.end()) {
        err << "error: unknown command '" << cfg.command << "'\n";
        return 2;
    }
    Tolerances tol;
    for (const auto& [k, v] : cfg.toleranceOverrides) {
        const auto& names = Tolerances::names();
        if (std::find(names.begin(), names.end(), k) == names.end()) {
            err << "error: unknown tolerance '" << k << "'\n";
            return 2;
        }
        tol.set(k, v);
    }
    std::string bytes;
    Json input;
    try {
        bytes = readTextFile(cfg.inputPath);
        input = parseJsonText(bytes, cfg.inputPath);
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    CommandOutput out;
    Json report{{"command", cfg.command}, {"inputsDigest", inputsDigest(bytes, cfg)}, {"version", kVersion}};
    int code = 0;
    try {
        Context ctx{input, cfg, tol, out};
        cmd->second(ctx);
        report["results"] = out.results;
    } catch (const SchemaError& e) {
        code = 1;
        out.files.clear();
        report["results"] = nullptr;
        report["error"] = Json{{"kind", "SchemaError"}, {"message", e.what()}, {"pointer", e.pointer()}};
    } catch (const Error& e) {
        code = 1;
        out.files.clear();
        report["results"] = nullptr;
        report["error"] = Json{{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
    } catch (const std::exception& e) {
        code = 1;
        out.files.clear();
        report["results"] = nullptr;
        report["error"] = Json{{"kind", "InternalError"}, {"message", e.what()}};
    }
    report["warnings"] = out.warnings;
    out.files["report.json"] = detail::dumpReport(report);
    if (!detail::writeAll(cfg.outputDir, out.files, err)) return 2;
    return code;
}

/// Parses argv and runs the command.
[[nodiscard]] inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
    CLI::App app{"State-space analysis and design toolkit"};
    app.set_version_flag("--version", kVersion);
    RunConfig cfg;
    std::vector<std::string> tols;
    std::vector<std::string> names;
    for (const auto& [k, v] : detail::commands()) names.push_back(k);
    app.add_option("command", cfg.command, "one of: " + CLI::detail::join(names, ", "))->required();
    app.add_option("--input", cfg.inputPath, "input JSON document")->required();
    app.add_option("--out", cfg.outputDir, "output directory")->required();
    app.add_option("--tol", tols, "tolerance override name=value (repeatable)");
    app.add_option("--seed", cfg.seed, "seed for randomized checks");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        (void)app.exit(e);
        return 2;
    }
    for (const std::string& t : tols) {
        const auto eq = t.find('=');
        if (eq == std::string::npos || eq == 0) {
            err << "error: --tol expects name=value, got '" << t << "'\n";
            return 2;
        }
        try {
            std::size_t used = 0;
            const std::string value = t.substr(eq + 1);
            const double v = std::stod(value, &used);
            if (used != value.size() || !std::isfinite(v)) throw std::invalid_argument(value);
            cfg.toleranceOverrides[t.substr(0, eq)] = v;
        } catch (const std::exception&) {
            err << "error: bad tolerance value in '" << t << "'\n";
            return 2;
        }
    }
    return execute(cfg, err);
}

}  // namespace sskit::cli

#endif  // SSKIT_CLI_HPP
