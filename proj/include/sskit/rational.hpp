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
#ifndef SSKIT_RATIONAL_HPP
#define SSKIT_RATIONAL_HPP

#include <limits>
#include <vector>

#include "numkit.hpp"

namespace sskit {

/// b(s) / a(s) with real coefficients.
struct RationalFunction {
    Polynomial num{0.0};
    Polynomial den{1.0};
    std::vector<Complex> cancelled;  // roots removed from both num and den

    RationalFunction() = default;
    RationalFunction(Polynomial b, Polynomial a) : num(std::move(b)), den(std::move(a)) {
        if (den.isZero()) detail::fail(ErrorKind::InvalidArgument, "denominator is the zero polynomial");
    }

    [[nodiscard]] bool strictlyProper() const { return num.isZero() || num.degree() < den.degree(); }
    [[nodiscard]] bool proper() const { return num.isZero() || num.degree() <= den.degree(); }
    [[nodiscard]] bool hadCancellation() const { return !cancelled.empty(); }

    template <class T>
    [[nodiscard]] T operator()(const T& s) const {
        return num(s) / den(s);
    }
};

struct TransferMatrix {
    Eigen::Index rows = 0, cols = 0;
    std::vector<RationalFunction> entries;  // row-major

    TransferMatrix() = default;
    TransferMatrix(Eigen::Index p, Eigen::Index m) : rows(p), cols(m), entries(static_cast<std::size_t>(p * m)) {}

    [[nodiscard]] RationalFunction& at(Eigen::Index i, Eigen::Index j) {
        return entries[static_cast<std::size_t>(i * cols + j)];
    }
    [[nodiscard]] const RationalFunction& at(Eigen::Index i, Eigen::Index j) const {
        return entries[static_cast<std::size_t>(i * cols + j)];
    }
    [[nodiscard]] CMatrix operator()(Complex s) const {
        CMatrix g(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = at(i, j)(s);
        return g;
    }
};

namespace detail {

/// Relative sensitivity of root r of p: large for clustered roots.
inline double rootSensitivity(const Polynomial& p, Complex r) {
    const double d = std::abs(p.derivative()(r));
    return d == 0.0 ? std::numeric_limits<double>::infinity() : p.scale() * std::pow(1.0 + std::abs(r), p.degree()) / d;
}

}  // namespace detail

/// Cancels numerator and denominator roots that agree within
/// relTol * (1 + |root|) and returns the reduced function with a monic
/// denominator. For each matched pair the better conditioned of the two
/// root estimates is kept, and both polynomials are deflated by the
/// product of those factors, which stays accurate when one side has a
/// multiple root. Without a match the coefficients pass through untouched.
[[nodiscard]] inline RationalFunction reduceCoprime(const RationalFunction& g, double relTol = 1e-6) {
    RationalFunction out = g;
    const double lead = g.den.leading();
    if (g.num.isZero()) {
        out.num = Polynomial();
        out.den = Polynomial::constant(1.0);
        return out;
    }
    std::vector<Complex> zeros = g.num.roots();
    std::vector<Complex> poles = g.den.roots();
    std::vector<Complex> removed;
    std::vector<bool> zeroUsed(zeros.size(), false);
    for (const Complex& p : poles) {
        std::size_t best = zeros.size();
        for (std::size_t i = 0; i < zeros.size(); ++i) {
            if (zeroUsed[i] || std::abs(zeros[i] - p) > relTol * (1.0 + std::abs(p))) continue;
            if (best == zeros.size() || std::abs(zeros[i] - p) < std::abs(zeros[best] - p)) best = i;
        }
        if (best == zeros.size()) continue;
        zeroUsed[best] = true;
        const Complex z = zeros[best];
        removed.push_back(detail::rootSensitivity(g.num, z) <= detail::rootSensitivity(g.den, p) ? z : p);
    }
    if (removed.empty()) {
        out.num = (1.0 / lead) * g.num;
        out.den = g.den.monic();
        return out;
    }
    // Real roots stay real and complex ones are paired with their conjugates
    // so the common factor has real coefficients.
    std::vector<Complex> factorRoots;
    std::vector<bool> paired(removed.size(), false);
    for (std::size_t i = 0; i < removed.size(); ++i) {
        if (paired[i]) continue;
        const Complex r = removed[i];
        if (std::abs(r.imag()) <= relTol * (1.0 + std::abs(r))) {
            factorRoots.emplace_back(r.real(), 0.0);
            continue;
        }
        std::size_t mate = removed.size();
        for (std::size_t j = i + 1; j < removed.size(); ++j)
            if (!paired[j] && std::abs(removed[j] - std::conj(r)) <= relTol * (1.0 + std::abs(r))) {
                mate = j;
                break;
            }
        if (mate == removed.size()) continue;  // lone complex match: cannot form a real factor, keep it
        paired[mate] = true;
        const Complex avg = 0.5 * (r + std::conj(removed[mate]));
        factorRoots.push_back(avg);
        factorRoots.push_back(std::conj(avg));
    }
    if (factorRoots.empty()) {
        out.num = (1.0 / lead) * g.num;
        out.den = g.den.monic();
        return out;
    }
    const Polynomial factor = Polynomial::fromRoots(factorRoots);
    const Polynomial den = divmod(g.den, factor).first;
    out.num = (1.0 / den.leading()) * divmod(g.num, factor).first;
    out.den = den.monic();
    out.cancelled.insert(out.cancelled.end(), factorRoots.begin(), factorRoots.end());
    return out;
}

}  // namespace sskit

#endif  // SSKIT_RATIONAL_HPP
