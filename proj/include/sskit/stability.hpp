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
#ifndef SSKIT_STABILITY_HPP
#define SSKIT_STABILITY_HPP

#include <optional>
#include <vector>

#include "model.hpp"
#include "parallel.hpp"
#include "rational.hpp"

namespace sskit {

enum class StabilityKind { AsymptoticallyStable, StableISL, Unstable };

[[nodiscard]] constexpr std::string_view to_string(StabilityKind k) noexcept {
    switch (k) {
    case StabilityKind::AsymptoticallyStable: return "asymptoticallyStable";
    case StabilityKind::StableISL: return "stableISL";
    case StabilityKind::Unstable: return "unstable";
    }
    return "unknown";
}

struct StabilityVerdict {
    StabilityKind kind = StabilityKind::Unstable;
    std::vector<Complex> witnesses;   // eigenvalues that decide the verdict
    std::vector<int> deficits;        // per axis witness: algebraic - geometric multiplicity
    std::vector<Complex> eigenvalues; // sorted
    bool nearAxis = false;            // some eigenvalue sits within 100x the band but outside it
};

/// Width of the band around the imaginary axis treated as Re = 0.
[[nodiscard]] inline double axisBand(const Matrix& A) { return 1e-9 * (1.0 + norm2(A)); }

[[nodiscard]] inline StabilityVerdict ltiStability(const Matrix& A, double tol = -1.0) {
    requireSquare(A, "A");
    const double band = tol < 0 ? axisBand(A) : tol;
    const EigenStructure es = eigen(A);
    StabilityVerdict v;
    v.eigenvalues = es.sortedValues();
    bool anyRight = false, anyAxis = false, axisDefective = false;
    for (const EigenGroup& g : es.groups) {
        const double re = g.value.real();
        if (std::abs(re) > band && std::abs(re) <= 100.0 * band) v.nearAxis = true;
        if (re > band) {
            anyRight = true;
            v.witnesses.push_back(g.value);
        }
    }
    if (anyRight) {
        v.kind = StabilityKind::Unstable;
        return v;
    }
    for (const EigenGroup& g : es.groups) {
        if (std::abs(g.value.real()) <= band) {
            anyAxis = true;
            if (g.geometric < g.algebraic) {
                axisDefective = true;
                v.witnesses.push_back(g.value);
                v.deficits.push_back(g.algebraic - g.geometric);
            }
        }
    }
    if (!anyAxis) {
        v.kind = StabilityKind::AsymptoticallyStable;
    } else if (axisDefective) {
        v.kind = StabilityKind::Unstable;
    } else {
        v.kind = StabilityKind::StableISL;
        for (const EigenGroup& g : es.groups)
            if (std::abs(g.value.real()) <= band) v.witnesses.push_back(g.value);
    }
    return v;
}

struct LyapunovCertificate {
    Matrix P;
    Matrix Q;
    double residual = 0.0;
    DefinitenessReport pd;
};

/// Solves A'P + PA = -Q through the n(n+1)/2 symmetric unknowns. Dense
/// elimination, so the order is capped at 30.
[[nodiscard]] inline LyapunovCertificate solveLyapunov(const Matrix& A, const Matrix& Q) {
    requireSquare(A, "A");
    requireSquare(Q, "Q");
    const Eigen::Index n = A.rows();
    if (Q.rows() != n) detail::fail(ErrorKind::DimensionMismatch, "Q must match A");
    if (n > 30) detail::fail(ErrorKind::InvalidArgument, "Lyapunov solver is limited to order 30");
    requireFiniteEntries(A, "A");
    requireFiniteEntries(Q, "Q");
    if ((Q - Q.transpose()).norm() > 1e-9 * std::max(1.0, Q.norm())) detail::fail(ErrorKind::NotSymmetric, "Q is not symmetric");
    LyapunovCertificate cert;
    cert.Q = Q;
    if (n == 0) {
        cert.P = Matrix(0, 0);
        cert.pd = isPositiveDefinite(cert.P);
        return cert;
    }
    const CVector lambda = eigen(A).values;
    double minSum = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) minSum = std::min(minSum, std::abs(lambda(i) + lambda(j)));
    if (minSum <= 1e-10 * (1.0 + norm2(A)))
        detail::fail(ErrorKind::SingularLyapunovOperator, "A has eigenvalues with lambda_i + lambda_j = 0");

    // Index map for the upper triangle.
    const Eigen::Index N = n * (n + 1) / 2;
    auto idx = [n](Eigen::Index i, Eigen::Index j) {
        if (i > j) std::swap(i, j);
        return i * n - i * (i - 1) / 2 + (j - i);
    };
    Matrix L = Matrix::Zero(N, N);
    Vector rhs(N);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const Eigen::Index row = idx(i, j);
            // (A'P)_ij = sum_k A(k,i) P(k,j);  (PA)_ij = sum_k P(i,k) A(k,j)
            for (Eigen::Index k = 0; k < n; ++k) {
                L(row, idx(k, j)) += A(k, i);
                L(row, idx(i, k)) += A(k, j);
            }
            rhs(row) = -Q(i, j);
        }
    }
    Eigen::FullPivLU<Matrix> lu(L);
    if (!lu.isInvertible()) detail::fail(ErrorKind::SingularLyapunovOperator, "vectorized Lyapunov operator is singular");
    const Vector p = lu.solve(rhs);
    cert.P = Matrix(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) cert.P(i, j) = p(idx(i, j));
    cert.residual = (A.transpose() * cert.P + cert.P * A + Q).norm();
    cert.pd = isPositiveDefinite(cert.P);
    return cert;
}

struct LyapunovTestResult {
    bool asymptoticallyStable = false;
    std::optional<LyapunovCertificate> certificate;
    bool singularOperator = false;
    StabilityVerdict eigenVerdict;
};

/// Lyapunov test with Q = I, cross-checked against the eigenvalue verdict.
[[nodiscard]] inline LyapunovTestResult lyapunovStabilityTest(const Matrix& A) {
    LyapunovTestResult r;
    r.eigenVerdict = ltiStability(A);
    try {
        r.certificate = solveLyapunov(A, Matrix::Identity(A.rows(), A.cols()));
        r.asymptoticallyStable = r.certificate->pd.verdict == Definiteness::PositiveDefinite;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::SingularLyapunovOperator) throw;
        r.singularOperator = true;
        r.asymptoticallyStable = false;
    }
    const bool eigStable = r.eigenVerdict.kind == StabilityKind::AsymptoticallyStable;
    if (eigStable != r.asymptoticallyStable)
        detail::fail(ErrorKind::InternalError, "Lyapunov and eigenvalue stability verdicts disagree");
    return r;
}

struct SubspacePair {
    Matrix stableBasis;
    Matrix unstableBasis;
};

namespace detail {

/// Rotates a complex eigenvector of a real eigenvalue so it is real.
inline Vector realEigenvector(const CVector& v) {
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    const Complex phase = v(k) / std::abs(v(k));
    Vector r = (v / phase).real();
    return r / r.norm();
}

}  // namespace detail

/// Real bases of the stable and unstable eigenspaces (distinct spectrum).
/// Eigenvalues inside the axis band count as unstable.
[[nodiscard]] inline SubspacePair stabilitySubspaces(const Matrix& A) {
    requireSquare(A, "A");
    const Eigen::Index n = A.rows();
    const EigenStructure es = eigen(A);
    if (!es.distinct()) detail::fail(ErrorKind::RepeatedEigenvalues, "stability subspaces need distinct eigenvalues");
    const double band = axisBand(A);
    const double imagTol = 1e-6 * std::max(1.0, norm2(A));
    std::vector<Vector> stable, unstable;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Complex lam = es.values(i);
        auto& dest = lam.real() < -band ? stable : unstable;
        if (std::abs(lam.imag()) <= imagTol) {
            dest.push_back(detail::realEigenvector(es.rightVectors.col(i)));
        } else if (lam.imag() > 0) {
            const CVector v = es.rightVectors.col(i);
            dest.push_back(v.real());
            dest.push_back(v.imag());
        }
    }
    auto pack = [n](const std::vector<Vector>& cols) {
        Matrix m(n, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = cols[j];
        return m;
    };
    return {pack(stable), pack(unstable)};
}

struct ScanResult {
    bool certified = false;
    double worstValue = 0.0;  // max over samples of 2 x'P f(x) / |x|^2
    std::optional<Vector> counterexample;
    std::size_t samples = 0;
};

namespace detail {

inline double radicalInverse(std::size_t i, unsigned base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

inline unsigned nthPrime(std::size_t k) {
    static constexpr unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};
    if (k >= std::size(primes)) fail(ErrorKind::InvalidArgument, "scan dimension too large for the Halton sequence");
    return primes[k];
}

}  // namespace detail

/// Falsification scan of V(x) = x'Px on {V <= level}: Halton points mapped
/// into the ellipsoid, certified when 2 x'P f(x) < -margin |x|^2 at every
/// sample. Sampling only; a passing scan is evidence, not a proof.
[[nodiscard]] inline ScanResult quadraticLyapunovScan(const NonlinearModel& model, const Matrix& P, double level,
                                                      std::size_t samples = 10000, double margin = 1e-9) {
    const Eigen::Index n = model.n;
    if (P.rows() != n || P.cols() != n) detail::fail(ErrorKind::DimensionMismatch, "P must be n x n");
    if (!(level > 0)) detail::fail(ErrorKind::InvalidArgument, "level must be positive");
    Eigen::LLT<Matrix> llt(symmetrize(P));
    if (llt.info() != Eigen::Success) detail::fail(ErrorKind::InvalidArgument, "P must be positive definite");
    const Matrix Lt = llt.matrixU();  // P = Lt' Lt, so x'Px = |Lt x|^2
    const Vector u0 = Vector::Zero(model.m);

    std::vector<double> values(samples, -std::numeric_limits<double>::infinity());
    std::vector<Vector> points(samples);
    detail::parallel_for(samples, [&](std::size_t s) {
        const std::size_t i = s + 1;
        Vector d(n);
        for (Eigen::Index k = 0; k < n; ++k) d(k) = 2.0 * detail::radicalInverse(i, detail::nthPrime(static_cast<std::size_t>(k))) - 1.0;
        const double dn = d.norm();
        if (dn < 1e-12) return;
        const double rho = std::pow(detail::radicalInverse(i, detail::nthPrime(static_cast<std::size_t>(n))), 1.0 / static_cast<double>(n));
        if (rho <= 0) return;
        const Vector y = std::sqrt(level) * rho * d / dn;
        const Vector x = Lt.triangularView<Eigen::Upper>().solve(y);
        const Vector fx = model.eval(x, u0, 0.0);
        points[s] = x;
        values[s] = 2.0 * x.dot(P * fx) / x.squaredNorm();
    });
    ScanResult r;
    r.samples = samples;
    r.worstValue = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        if (values[s] > r.worstValue) {
            r.worstValue = values[s];
            arg = s;
        }
    }
    r.certified = r.worstValue < -margin;
    if (!r.certified && samples > 0) r.counterexample = points[arg];
    return r;
}

enum class LinearizationVerdict { AsymptoticallyStable, Unstable, Inconclusive };

[[nodiscard]] constexpr std::string_view to_string(LinearizationVerdict v) noexcept {
    switch (v) {
    case LinearizationVerdict::AsymptoticallyStable: return "asympStable";
    case LinearizationVerdict::Unstable: return "unstable";
    case LinearizationVerdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

struct LinearizationReport {
    LinearizationVerdict verdict = LinearizationVerdict::Inconclusive;
    StateSpace linearization;
    std::vector<Complex> eigenvalues;
};

/// Verdict from the Jacobian at the equilibrium. The band is wider than the
/// LTI one because the Jacobian itself carries finite-difference error.
[[nodiscard]] inline LinearizationReport linearizationVerdict(const NonlinearModel& model, const Equilibrium& eq) {
    LinearizationReport r;
    r.linearization = linearizeAtEquilibrium(model, eq);
    const Matrix& A = r.linearization.A;
    r.eigenvalues = eigen(A).sortedValues();
    const double band = 1e-7 * (1.0 + norm2(A));
    double maxRe = -std::numeric_limits<double>::infinity();
    for (const Complex& l : r.eigenvalues) maxRe = std::max(maxRe, l.real());
    if (r.eigenvalues.empty() || maxRe < -band) {
        r.verdict = LinearizationVerdict::AsymptoticallyStable;
    } else if (maxRe > band) {
        r.verdict = LinearizationVerdict::Unstable;
    } else {
        r.verdict = LinearizationVerdict::Inconclusive;
    }
    return r;
}

struct BiboReport {
    bool stable = true;
    std::vector<Complex> poles;         // after cancellation, every entry
    std::vector<Complex> cancelledPoles;
    std::vector<Complex> cancelledUnstablePoles;
};

[[nodiscard]] inline BiboReport biboStability(const TransferMatrix& G, double tol = 1e-9) {
    BiboReport r;
    for (const RationalFunction& g : G.entries) {
        const RationalFunction red = reduceCoprime(g);
        for (const Complex& p : red.den.roots()) {
            r.poles.push_back(p);
            if (!(p.real() < -tol)) r.stable = false;
        }
        for (const Complex& c : red.cancelled) {
            r.cancelledPoles.push_back(c);
            if (!(c.real() < -tol)) r.cancelledUnstablePoles.push_back(c);
        }
    }
    std::sort(r.poles.begin(), r.poles.end(), complexLess);
    return r;
}

}  // namespace sskit

#endif  // SSKIT_STABILITY_HPP
