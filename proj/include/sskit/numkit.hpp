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
#ifndef SSKIT_NUMKIT_HPP
#define SSKIT_NUMKIT_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace sskit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

// ============================================================================
// Small helpers shared by every module
// ============================================================================

/// Spectral norm (largest singular value). Zero for empty matrices.
template <class Derived>
[[nodiscard]] double norm2(const Eigen::MatrixBase<Derived>& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(m);
    return svd.singularValues()(0);
}

template <class Derived>
[[nodiscard]] bool allFinite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

inline void requireSquare(const Matrix& a, const char* what) {
    if (a.rows() != a.cols()) detail::fail(ErrorKind::NonSquare, std::string(what) + " must be square");
}

inline void requireFiniteEntries(const Matrix& a, const char* what) {
    if (!a.allFinite()) detail::fail(ErrorKind::InvalidArgument, std::string(what) + " has non-finite entries");
}

[[nodiscard]] inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Singular values in descending order.
template <class Derived>
[[nodiscard]] Vector singularValues(const Eigen::MatrixBase<Derived>& m) {
    if (m.size() == 0) return Vector(0);
    Eigen::JacobiSVD<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(m);
    return svd.singularValues();
}

/// Number of singular values above relTol * sigma_max. A negative tolerance
/// selects the default max(rows, cols) * machine epsilon.
template <class Derived>
[[nodiscard]] int rank(const Eigen::MatrixBase<Derived>& a, double relTol = -1.0) {
    if (a.size() == 0) return 0;
    const double tol = relTol < 0 ? static_cast<double>(std::max(a.rows(), a.cols())) * kEps : relTol;
    const Vector s = singularValues(a);
    if (s(0) == 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > tol * s(0)) ++r;
    return r;
}

/// Orthonormal basis for the null space: right singular vectors whose
/// singular value is <= absTol.
template <class Scalar>
[[nodiscard]] Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> nullSpace(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a, double absTol) {
    using M = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Eigen::Index cols = a.cols();
    if (a.rows() == 0) return M::Identity(cols, cols);
    Eigen::JacobiSVD<M> svd(a, Eigen::ComputeFullV);
    const Vector& s = svd.singularValues();
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > absTol) ++r;
    return svd.matrixV().rightCols(cols - r);
}

/// Orthonormal basis for the column space at relative tolerance.
[[nodiscard]] inline Matrix rangeBasis(const Matrix& a, double relTol = -1.0) {
    if (a.size() == 0) return Matrix(a.rows(), 0);
    const int r = rank(a, relTol);
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
    return svd.matrixU().leftCols(r);
}

/// sigma_max / sigma_min; infinity when singular.
template <class Derived>
[[nodiscard]] double conditionNumber(const Eigen::MatrixBase<Derived>& a) {
    const Vector s = singularValues(a);
    if (s.size() == 0) return 1.0;
    const double lo = s(s.size() - 1);
    return lo == 0.0 ? std::numeric_limits<double>::infinity() : s(0) / lo;
}

/// Largest distance after greedily pairing each element of `a` with its
/// nearest unused element of `b`. Infinity when sizes differ.
[[nodiscard]] inline double multisetDistance(std::vector<Complex> a, std::vector<Complex> b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    std::vector<bool> used(b.size(), false);
    for (const Complex& x : a) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(x - b[j]);
            if (d < best) {
                best = d;
                arg = j;
            }
        }
        used[arg] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

[[nodiscard]] inline std::vector<Complex> toVector(const CVector& v) {
    return {v.data(), v.data() + v.size()};
}

/// Sort key used for every eigenvalue listing: ascending real part, then
/// ascending imaginary part.
[[nodiscard]] inline bool complexLess(const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

// ============================================================================
// Polynomial
// ============================================================================

/// Real polynomial, coefficients highest degree first. The zero polynomial
/// is stored as {0}.
class Polynomial {
public:
    Polynomial() : c_{0.0} {}
    Polynomial(std::initializer_list<double> coeffs) : c_(coeffs) { normalize(); }
    explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { normalize(); }

    [[nodiscard]] static Polynomial constant(double v) { return Polynomial(std::vector<double>{v}); }

    /// gain * prod(s - r). Complex roots must come in conjugate pairs.
    [[nodiscard]] static Polynomial fromRoots(std::span<const Complex> roots, double gain = 1.0) {
        std::vector<Complex> acc{Complex(1.0)};
        for (const Complex& r : roots) {
            std::vector<Complex> next(acc.size() + 1, Complex(0.0));
            for (std::size_t i = 0; i < acc.size(); ++i) {
                next[i] += acc[i];
                next[i + 1] -= acc[i] * r;
            }
            acc = std::move(next);
        }
        std::vector<double> out(acc.size());
        for (std::size_t i = 0; i < acc.size(); ++i) out[i] = gain * acc[i].real();
        return Polynomial(std::move(out));
    }

    [[nodiscard]] const std::vector<double>& coeffs() const noexcept { return c_; }
    [[nodiscard]] int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
    [[nodiscard]] bool isZero() const noexcept { return c_.size() == 1 && c_[0] == 0.0; }
    [[nodiscard]] double leading() const noexcept { return c_.front(); }

    /// Coefficient of s^power (zero beyond the degree).
    [[nodiscard]] double coeff(int power) const noexcept {
        if (power < 0 || power > degree()) return 0.0;
        return c_[static_cast<std::size_t>(degree() - power)];
    }

    template <class T>
    [[nodiscard]] T operator()(const T& s) const {
        T acc = T(0.0);
        for (double c : c_) acc = acc * s + c;
        return acc;
    }

    [[nodiscard]] Polynomial derivative() const {
        if (degree() == 0) return Polynomial();
        std::vector<double> d(c_.size() - 1);
        for (int i = 0; i < degree(); ++i) d[static_cast<std::size_t>(i)] = c_[static_cast<std::size_t>(i)] * (degree() - i);
        return Polynomial(std::move(d));
    }

    /// p(-s)
    [[nodiscard]] Polynomial reflected() const {
        std::vector<double> r = c_;
        for (int i = 0; i <= degree(); ++i)
            if ((degree() - i) % 2 == 1) r[static_cast<std::size_t>(i)] = -r[static_cast<std::size_t>(i)];
        return Polynomial(std::move(r));
    }

    [[nodiscard]] Polynomial monic() const {
        if (isZero()) detail::fail(ErrorKind::InvalidArgument, "zero polynomial has no monic form");
        Polynomial p = *this;
        const double lead = leading();
        for (double& c : p.c_) c /= lead;
        return p;
    }

    /// Roots as eigenvalues of the companion matrix.
    [[nodiscard]] std::vector<Complex> roots() const {
        const int n = degree();
        if (n <= 0) return {};
        Matrix comp = Matrix::Zero(n, n);
        for (int j = 0; j < n; ++j) comp(0, j) = -c_[static_cast<std::size_t>(j + 1)] / c_[0];
        for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
        Eigen::EigenSolver<Matrix> es(comp, false);
        if (es.info() != Eigen::Success) detail::fail(ErrorKind::BackendFailure, "polynomial root iteration did not converge");
        std::vector<Complex> r = toVector(es.eigenvalues());
        std::sort(r.begin(), r.end(), complexLess);
        return r;
    }

    /// Max |coefficient|; used for relative comparisons.
    [[nodiscard]] double scale() const {
        double m = 0.0;
        for (double c : c_) m = std::max(m, std::abs(c));
        return m;
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        const std::size_t n = std::max(a.c_.size(), b.c_.size());
        std::vector<double> r(n, 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i) r[n - a.c_.size() + i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) r[n - b.c_.size() + i] += b.c_[i];
        return Polynomial(std::move(r));
    }
    friend Polynomial operator-(const Polynomial& a) {
        Polynomial r = a;
        for (double& c : r.c_) c = -c;
        r.normalize();
        return r;
    }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
        return Polynomial(std::move(r));
    }
    friend Polynomial operator*(double k, const Polynomial& a) {
        Polynomial r = a;
        for (double& c : r.c_) c *= k;
        r.normalize();
        return r;
    }
    friend bool operator==(const Polynomial&, const Polynomial&) = default;

    /// Quotient and remainder of num / den.
    [[nodiscard]] friend std::pair<Polynomial, Polynomial> divmod(const Polynomial& num, const Polynomial& den) {
        if (den.isZero()) detail::fail(ErrorKind::InvalidArgument, "division by the zero polynomial");
        if (num.degree() < den.degree()) return {Polynomial(), num};
        std::vector<double> rem = num.c_;
        const int qdeg = num.degree() - den.degree();
        std::vector<double> q(static_cast<std::size_t>(qdeg + 1), 0.0);
        for (int i = 0; i <= qdeg; ++i) {
            const double f = rem[static_cast<std::size_t>(i)] / den.c_[0];
            q[static_cast<std::size_t>(i)] = f;
            for (std::size_t j = 0; j < den.c_.size(); ++j) rem[static_cast<std::size_t>(i) + j] -= f * den.c_[j];
        }
        std::vector<double> r(rem.begin() + qdeg + 1, rem.end());
        if (r.empty()) r.push_back(0.0);
        return {Polynomial(std::move(q)), Polynomial(std::move(r))};
    }

private:
    void normalize() {
        if (c_.empty()) c_.push_back(0.0);
        auto first = std::find_if(c_.begin(), c_.end(), [](double c) { return c != 0.0; });
        if (first == c_.end()) {
            c_.assign(1, 0.0);
            return;
        }
        c_.erase(c_.begin(), first);
        for (double c : c_)
            if (!std::isfinite(c)) detail::fail(ErrorKind::InvalidArgument, "polynomial coefficient is not finite");
    }

    std::vector<double> c_;
};

/// Characteristic polynomial det(sI - A) from the eigenvalues.
[[nodiscard]] inline Polynomial characteristicPolynomial(const Matrix& a) {
    requireSquare(a, "A");
    if (a.rows() == 0) return Polynomial::constant(1.0);
    Eigen::EigenSolver<Matrix> es(a, false);
    if (es.info() != Eigen::Success) detail::fail(ErrorKind::BackendFailure, "eigenvalue iteration did not converge");
    const std::vector<Complex> ev = toVector(es.eigenvalues());
    return Polynomial::fromRoots(ev);
}

// ============================================================================
// Eigenstructure
// ============================================================================

struct EigenGroup {
    Complex value;      // cluster mean; accurate even when the cluster is defective
    int algebraic = 0;
    int geometric = 0;
};

struct EigenStructure {
    CVector values;                  // with algebraic multiplicity, backend order
    CMatrix rightVectors;            // columns, unit norm
    std::vector<EigenGroup> groups;  // distinct values, sorted by complexLess
    bool isDiagonalizable = true;

    [[nodiscard]] std::vector<Complex> sortedValues() const {
        std::vector<Complex> v = toVector(values);
        std::sort(v.begin(), v.end(), complexLess);
        return v;
    }
    [[nodiscard]] bool distinct() const { return groups.size() == static_cast<std::size_t>(values.size()); }
};

struct EigenOptions {
    /// Eigenvalues closer than clusterTol * max(1, ||A||) are one distinct value.
    double clusterTol = 1e-6;
    /// Singular values of (A - lambda I) below nullTol * max(1, ||A||) count
    /// toward the geometric multiplicity.
    double nullTol = 1e-8;
};

namespace detail {

/// Groups eigenvalues by proximity (single linkage).
inline std::vector<EigenGroup> clusterEigenvalues(const CVector& values, double absTol) {
    const Eigen::Index n = values.size();
    std::vector<int> label(static_cast<std::size_t>(n), -1);
    int next = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (label[static_cast<std::size_t>(i)] >= 0) continue;
        label[static_cast<std::size_t>(i)] = next;
        std::vector<Eigen::Index> stack{i};
        while (!stack.empty()) {
            const Eigen::Index k = stack.back();
            stack.pop_back();
            for (Eigen::Index j = 0; j < n; ++j) {
                if (label[static_cast<std::size_t>(j)] < 0 && std::abs(values(k) - values(j)) <= absTol) {
                    label[static_cast<std::size_t>(j)] = next;
                    stack.push_back(j);
                }
            }
        }
        ++next;
    }
    std::vector<EigenGroup> groups(static_cast<std::size_t>(next));
    for (Eigen::Index i = 0; i < n; ++i) {
        auto& g = groups[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])];
        g.value += values(i);
        g.algebraic += 1;
    }
    for (auto& g : groups) {
        g.value /= static_cast<double>(g.algebraic);
        if (std::abs(g.value.imag()) <= absTol) g.value = Complex(g.value.real(), 0.0);
    }
    std::sort(groups.begin(), groups.end(), [](const EigenGroup& a, const EigenGroup& b) { return complexLess(a.value, b.value); });
    return groups;
}

inline CMatrix shifted(const Matrix& a, Complex lambda) {
    CMatrix m = a.cast<Complex>();
    m.diagonal().array() -= lambda;
    return m;
}

}  // namespace detail

[[nodiscard]] inline EigenStructure eigen(const Matrix& a, const EigenOptions& opt = {}) {
    requireSquare(a, "A");
    requireFiniteEntries(a, "A");
    EigenStructure es;
    const Eigen::Index n = a.rows();
    if (n == 0) {
        es.values = CVector(0);
        es.rightVectors = CMatrix(0, 0);
        return es;
    }
    Eigen::EigenSolver<Matrix> solver(a, true);
    if (solver.info() != Eigen::Success) detail::fail(ErrorKind::BackendFailure, "eigenvalue iteration did not converge");
    es.values = solver.eigenvalues();
    es.rightVectors = solver.eigenvectors();
    for (Eigen::Index j = 0; j < n; ++j) {
        const double nv = es.rightVectors.col(j).norm();
        if (nv > 0) es.rightVectors.col(j) /= nv;
    }
    const double scale = std::max(1.0, norm2(a));
    es.groups = detail::clusterEigenvalues(es.values, opt.clusterTol * scale);
    for (auto& g : es.groups) {
        const CMatrix shifted = detail::shifted(a, g.value);
        const Vector s = singularValues(shifted);
        int nullity = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s(i) <= opt.nullTol * scale) ++nullity;
        g.geometric = std::clamp(nullity, 1, g.algebraic);
        if (g.geometric < g.algebraic) es.isDiagonalizable = false;
    }
    return es;
}

// ============================================================================
// Positive definiteness
// ============================================================================

enum class Definiteness { PositiveDefinite, PositiveSemidefinite, Indefinite };

struct DefinitenessReport {
    Definiteness verdict = Definiteness::Indefinite;
    std::vector<double> minors;  // leading principal minors, order 1..n
    Vector eigenvalues;          // symmetric eigenvalues, ascending
};

/// Leading-minor test for PD; semidefinite versus indefinite is settled by
/// the symmetric eigenvalues since minors cannot certify it.
[[nodiscard]] inline DefinitenessReport isPositiveDefinite(const Matrix& m, double symTol = 1e-9) {
    requireSquare(m, "M");
    requireFiniteEntries(m, "M");
    const Eigen::Index n = m.rows();
    DefinitenessReport rep;
    if (n == 0) {
        rep.verdict = Definiteness::PositiveDefinite;
        return rep;
    }
    const double scale = norm2(m);
    if ((m - m.transpose()).norm() > symTol * std::max(scale, 1e-300) && (m - m.transpose()).norm() > 0)
        detail::fail(ErrorKind::NotSymmetric, "matrix is not symmetric to tolerance");
    const Matrix s = symmetrize(m);
    bool allPositive = scale > 0;
    double scalePow = 1.0;
    for (Eigen::Index k = 1; k <= n; ++k) {
        const double minor = s.topLeftCorner(k, k).determinant();
        rep.minors.push_back(minor);
        scalePow *= scale;
        if (!(minor > 100.0 * static_cast<double>(n) * kEps * scalePow)) allPositive = false;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
    rep.eigenvalues = es.eigenvalues();
    if (allPositive) {
        rep.verdict = Definiteness::PositiveDefinite;
    } else if (rep.eigenvalues.minCoeff() >= -100.0 * static_cast<double>(n) * kEps * scale) {
        rep.verdict = Definiteness::PositiveSemidefinite;
    } else {
        rep.verdict = Definiteness::Indefinite;
    }
    return rep;
}

// ============================================================================
// Matrix exponential
// ============================================================================

/// e^{A t} by scaling and squaring of the truncated power series: scale
/// until ||A t / 2^k||_1 <= 1/2, sum the series to machine precision,
/// then square k times.
[[nodiscard]] inline Matrix expm(const Matrix& a, double t) {
    requireSquare(a, "A");
    const Eigen::Index n = a.rows();
    if (!std::isfinite(t)) detail::fail(ErrorKind::InvalidArgument, "expm time is not finite");
    requireFiniteEntries(a, "A");
    const Matrix x = a * t;
    const double norm1 = n == 0 ? 0.0 : x.cwiseAbs().colwise().sum().maxCoeff();
    if (norm1 == 0.0) return Matrix::Identity(n, n);
    int squarings = 0;
    if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    const Matrix y = x / std::ldexp(1.0, squarings);
    Matrix sum = Matrix::Identity(n, n);
    Matrix term = Matrix::Identity(n, n);
    for (int k = 1; k <= 40; ++k) {
        term = (term * y) / static_cast<double>(k);
        sum += term;
        if (term.cwiseAbs().maxCoeff() <= kEps * 1e-2 * sum.cwiseAbs().maxCoeff()) break;
    }
    for (int i = 0; i < squarings; ++i) {
        sum = sum * sum;
        if (!sum.allFinite()) detail::fail(ErrorKind::Overflow, "matrix exponential overflowed");
    }
    if (!sum.allFinite()) detail::fail(ErrorKind::Overflow, "matrix exponential overflowed");
    return sum;
}

// ============================================================================
// Bases and representations
// ============================================================================

/// Coordinates beta of x in the basis given by the columns of E (E beta = x).
[[nodiscard]] inline Vector representation(const Matrix& basis, const Vector& x) {
    if (basis.rows() != x.size()) detail::fail(ErrorKind::DimensionMismatch, "basis rows must match vector length");
    if (rank(basis) < basis.cols()) detail::fail(ErrorKind::SingularBasis, "basis columns are linearly dependent");
    Eigen::ColPivHouseholderQR<Matrix> qr(basis);
    Vector beta = qr.solve(x);
    const double resid = (basis * beta - x).norm();
    if (resid > 1e-9 * std::max(1.0, x.norm()))
        detail::fail(ErrorKind::InvalidArgument, "vector does not lie in the span of the basis");
    return beta;
}

struct GrammianAndReciprocal {
    Matrix grammian;    // G(i,j) = <v_i, v_j>
    Matrix reciprocal;  // rows r_i with r_i . v_j = delta_ij
};

[[nodiscard]] inline GrammianAndReciprocal basisGrammianAndReciprocal(const Matrix& basis) {
    requireSquare(basis, "basis");
    Eigen::FullPivLU<Matrix> lu(basis);
    if (basis.rows() > 0 && rank(basis) < basis.cols()) detail::fail(ErrorKind::SingularBasis, "basis columns are linearly dependent");
    return {basis.transpose() * basis, basis.rows() == 0 ? Matrix(0, 0) : Matrix(lu.inverse())};
}

// ============================================================================
// Jordan-like form (small matrices only)
// ============================================================================

struct JordanBlock {
    Complex eigenvalue;
    int size = 0;
};

struct JordanLikeForm {
    CMatrix transform;  // generalized modal matrix; columns are chains x_1 .. x_k
    std::vector<JordanBlock> blocks;
    CMatrix form;
};

/// Jordan structure from eigenvector chains. Restricted to order <= 8; rank
/// decisions that fall in the gray zone around `tol` raise IllConditioned
/// instead of guessing.
[[nodiscard]] inline JordanLikeForm jordanLike(const Matrix& a, double tol = 1e-8) {
    requireSquare(a, "A");
    const Eigen::Index n = a.rows();
    if (n > 8) detail::fail(ErrorKind::InvalidArgument, "jordanLike is limited to order <= 8");
    JordanLikeForm out;
    out.transform = CMatrix(n, 0);
    if (n == 0) {
        out.form = CMatrix(0, 0);
        return out;
    }
    const EigenStructure es = eigen(a);
    const double scaleA = std::max(1.0, norm2(a));

    auto rankDecision = [&](const Vector& s, double thr) {
        int small = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            if (s(i) <= thr) {
                ++small;
            } else if (s(i) <= thr * 1e4) {
                detail::fail(ErrorKind::IllConditioned, "Jordan rank decision is ambiguous at the tolerance");
            }
        }
        return small;
    };

    for (const EigenGroup& g : es.groups) {
        const CMatrix nMat = detail::shifted(a, g.value);
        const double scaleN = std::max(1.0, norm2(nMat));
        // Kernel dimensions of N^k until they reach the algebraic multiplicity.
        std::vector<CMatrix> powers{CMatrix::Identity(n, n)};
        std::vector<int> dims{0};
        while (dims.back() < g.algebraic) {
            const int k = static_cast<int>(powers.size());
            if (k > g.algebraic) detail::fail(ErrorKind::IllConditioned, "generalized eigenspace did not reach its algebraic dimension");
            powers.push_back(powers.back() * nMat);
            const int d = rankDecision(singularValues(powers.back()), tol * std::pow(scaleN, k));
            if (d > g.algebraic || d < dims.back()) detail::fail(ErrorKind::IllConditioned, "inconsistent kernel dimensions");
            dims.push_back(d);
        }
        const int top = static_cast<int>(dims.size()) - 1;
        // Chains are built top grade first; tops[k] holds chain heads of grade k.
        std::vector<std::pair<CVector, int>> heads;
        for (int k = top; k >= 1; --k) {
            const int atLeastK = dims[static_cast<std::size_t>(k)] - dims[static_cast<std::size_t>(k - 1)];
            const int atLeastK1 = k < top ? dims[static_cast<std::size_t>(k + 1)] - dims[static_cast<std::size_t>(k)] : 0;
            const int needed = atLeastK - atLeastK1;
            if (needed <= 0) continue;
            // Span to stay independent of: ker N^{k-1} plus grade-k vectors of longer chains.
            CMatrix span = nullSpace<Complex>(powers[static_cast<std::size_t>(k - 1)], tol * std::pow(scaleN, k - 1));
            if (k == 1) span = CMatrix(n, 0);
            for (const auto& [head, grade] : heads) {
                CVector v = powers[static_cast<std::size_t>(grade - k)] * head;
                span.conservativeResize(Eigen::NoChange, span.cols() + 1);
                span.col(span.cols() - 1) = v;
            }
            const CMatrix kernel = nullSpace<Complex>(powers[static_cast<std::size_t>(k)], tol * std::pow(scaleN, k));
            for (int picked = 0; picked < needed; ++picked) {
                CMatrix q;
                if (span.cols() > 0) {
                    Eigen::JacobiSVD<CMatrix> svd(span, Eigen::ComputeThinU);
                    const int r = rank(span, 1e-10);
                    q = svd.matrixU().leftCols(r);
                }
                double best = -1.0;
                CVector arg;
                for (Eigen::Index c = 0; c < kernel.cols(); ++c) {
                    CVector v = kernel.col(c);
                    if (q.cols() > 0) v -= q * (q.adjoint() * v);
                    if (v.norm() > best) {
                        best = v.norm();
                        arg = kernel.col(c);
                    }
                }
                if (best < 1e-6) detail::fail(ErrorKind::IllConditioned, "could not find an independent chain head");
                heads.emplace_back(arg, k);
                span.conservativeResize(Eigen::NoChange, span.cols() + 1);
                span.col(span.cols() - 1) = arg;
            }
        }
        for (auto& [head, grade] : heads) {
            CVector eigvec = powers[static_cast<std::size_t>(grade - 1)] * head;
            Eigen::Index idx = 0;
            eigvec.cwiseAbs().maxCoeff(&idx);
            const Complex normalizer = eigvec(idx);
            const CVector scaledHead = head / normalizer;
            const Eigen::Index base = out.transform.cols();
            out.transform.conservativeResize(Eigen::NoChange, base + grade);
            for (int j = 1; j <= grade; ++j)
                out.transform.col(base + j - 1) = powers[static_cast<std::size_t>(grade - j)] * scaledHead;
            out.blocks.push_back({g.value, grade});
        }
    }
    if (out.transform.cols() != n) detail::fail(ErrorKind::IllConditioned, "chains do not span the state space");
    if (conditionNumber(out.transform) > 1e12) detail::fail(ErrorKind::IllConditioned, "generalized modal matrix is ill-conditioned");
    out.form = CMatrix::Zero(n, n);
    Eigen::Index pos = 0;
    for (const JordanBlock& b : out.blocks) {
        for (int i = 0; i < b.size; ++i) {
            out.form(pos + i, pos + i) = b.eigenvalue;
            if (i + 1 < b.size) out.form(pos + i, pos + i + 1) = 1.0;
        }
        pos += b.size;
    }
    const CMatrix recon = out.transform * out.form * out.transform.inverse();
    if ((recon - a.cast<Complex>()).norm() > 1e-6 * scaleA)
        detail::fail(ErrorKind::IllConditioned, "Jordan reconstruction residual exceeds tolerance");
    return out;
}

}  // namespace sskit

#endif  // SSKIT_NUMKIT_HPP
