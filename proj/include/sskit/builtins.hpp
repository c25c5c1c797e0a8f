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
#ifndef SSKIT_BUILTINS_HPP
#define SSKIT_BUILTINS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "model.hpp"

namespace sskit {

using ParameterMap = std::map<std::string, double>;

struct BuiltinModel {
    std::string name;
    NonlinearModel model;
    std::optional<StateSpace> lti;  // set for models that are linear to begin with
    Vector ue;                      // nominal input
    Vector guess;                   // starting point for the equilibrium search
};

namespace detail {

inline double param(const ParameterMap& p, const std::string& key, double fallback) {
    const auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

inline void rejectUnknown(const ParameterMap& p, const std::vector<std::string>& known, const std::string& model) {
    for (const auto& [k, v] : p) {
        if (std::find(known.begin(), known.end(), k) == known.end())
            fail(ErrorKind::InvalidArgument, "unknown parameter '" + k + "' for builtin " + model);
        if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "parameter '" + k + "' is not finite");
    }
}

inline StateSpace pendubotLti() {
    Matrix A(4, 4), B(4, 1), C(1, 4), D(1, 1);
    A << 0, 1, 0, 0,
         51.9243, 0, -13.9700, 0,
         0, 0, 0, 1,
         -52.8376, 0, 68.4187, 0;
    B << 0, 15.9549, 0, -29.3596;
    C << 1, 0, 0, 0;
    D << 0;
    return {A, B, C, D};
}

inline BuiltinModel wrapLti(const std::string& name, const StateSpace& sys) {
    BuiltinModel b;
    b.name = name;
    b.lti = sys;
    b.model = NonlinearModel::fromLti(sys);
    b.ue = Vector::Zero(sys.m());
    b.guess = Vector::Zero(sys.n());
    return b;
}

}  // namespace detail

[[nodiscard]] inline std::vector<std::string> builtinNames() {
    return {"magnetic_ball", "pendubot", "pendulum", "rlc", "vanderpol"};
}

/// Registry of the worked example models.
///   magnetic_ball  xdot = (x2, g - (c/m) u^2 / x1^2), y = x1; params c, m, g, ue
///   pendulum       xdot = (x2, -g_over_l sin x1 + u), y = x1; params g_over_l
///   vanderpol      xdot = (x2, -mu (1 - x1^2) x2 - x1 + u), y = x1; params mu
///   pendubot       linearized two-link arm at the upright position (LTI)
///   rlc            x1 capacitor voltage, x2 inductor current; params R, L, C
[[nodiscard]] inline BuiltinModel builtinModel(const std::string& name, const ParameterMap& params = {}) {
    using detail::param;
    if (name == "magnetic_ball") {
        detail::rejectUnknown(params, {"c", "m", "g", "ue"}, name);
        const double c = param(params, "c", 1.0), mass = param(params, "m", 1.0), g = param(params, "g", 1.0);
        const double ue = param(params, "ue", 1.0);
        if (!(c > 0 && mass > 0 && g > 0)) detail::fail(ErrorKind::InvalidArgument, "magnetic_ball needs c, m, g > 0");
        BuiltinModel b;
        b.name = name;
        b.model.n = 2;
        b.model.m = 1;
        b.model.p = 1;
        b.model.f = [c, mass, g](const Vector& x, const Vector& u, double) {
            Vector v(2);
            v << x(1), g - (c / mass) * u(0) * u(0) / (x(0) * x(0));
            return v;
        };
        b.model.h = [](const Vector& x, const Vector&, double) { return Vector::Constant(1, x(0)); };
        b.ue = Vector::Constant(1, ue);
        b.guess = (Vector(2) << 0.5 * (1.0 + std::sqrt(c / (mass * g)) * std::abs(ue)), 0.5).finished();
        return b;
    }
    if (name == "pendulum") {
        detail::rejectUnknown(params, {"g_over_l"}, name);
        const double w2 = param(params, "g_over_l", 1.0);
        BuiltinModel b;
        b.name = name;
        b.model.n = 2;
        b.model.m = 1;
        b.model.p = 1;
        b.model.f = [w2](const Vector& x, const Vector& u, double) {
            Vector v(2);
            v << x(1), -w2 * std::sin(x(0)) + u(0);
            return v;
        };
        b.model.h = [](const Vector& x, const Vector&, double) { return Vector::Constant(1, x(0)); };
        b.ue = Vector::Zero(1);
        b.guess = (Vector(2) << 3.0, 0.0).finished();
        return b;
    }
    if (name == "vanderpol") {
        detail::rejectUnknown(params, {"mu"}, name);
        const double mu = param(params, "mu", 1.0);
        BuiltinModel b;
        b.name = name;
        b.model.n = 2;
        b.model.m = 1;
        b.model.p = 1;
        b.model.f = [mu](const Vector& x, const Vector& u, double) {
            Vector v(2);
            v << x(1), -mu * (1.0 - x(0) * x(0)) * x(1) - x(0) + u(0);
            return v;
        };
        b.model.h = [](const Vector& x, const Vector&, double) { return Vector::Constant(1, x(0)); };
        b.ue = Vector::Zero(1);
        b.guess = (Vector(2) << 0.1, 0.1).finished();
        return b;
    }
    if (name == "pendubot") {
        detail::rejectUnknown(params, {}, name);
        return detail::wrapLti(name, detail::pendubotLti());
    }
    if (name == "rlc") {
        detail::rejectUnknown(params, {"R", "L", "C"}, name);
        const double R = param(params, "R", 1.0), L = param(params, "L", 1.0), Cap = param(params, "C", 1.0);
        if (!(R > 0 && L > 0 && Cap > 0)) detail::fail(ErrorKind::InvalidArgument, "rlc needs R, L, C > 0");
        Matrix A(2, 2), B(2, 1), C(1, 2), D = Matrix::Zero(1, 1);
        A << -1.0 / (R * Cap), 1.0 / Cap, -1.0 / L, 0.0;
        B << 0.0, 1.0 / L;
        C << 1.0, 0.0;
        return detail::wrapLti(name, {A, B, C, D});
    }
    detail::fail(ErrorKind::InvalidArgument, "unknown builtin model '" + name + "'");
}

}  // namespace sskit

#endif  // SSKIT_BUILTINS_HPP
