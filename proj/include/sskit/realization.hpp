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
#ifndef SSKIT_REALIZATION_HPP
#define SSKIT_REALIZATION_HPP

#include <vector>

#include "rational.hpp"
#include "structural.hpp"

namespace sskit {

namespace detail {

struct ProperSplit {
    double direct = 0.0;
    Polynomial num;  // strictly proper remainder, over a monic denominator
    Polynomial den;  // monic
};

/// One step of polynomial division, then a monic denominator.
inline ProperSplit splitProper(const RationalFunction& g) {
    if (!g.proper()) detail::fail(ErrorKind::ImproperTransferFunction, "numerator degree exceeds denominator degree");
    ProperSplit s;
    const double lead = g.den.leading();
    s.den = g.den.monic();
    Polynomial num = (1.0 / lead) * g.num;
    if (!num.isZero() && num.degree() == s.den.degree()) {
        auto [q, r] = divmod(num, s.den);
        s.direct = q.coeff(0);
        num = r;
    }
    s.num = num;
    return s;
}

}  // namespace detail

/// Controllable canonical form: ones on the superdiagonal, last row
/// -a_0 .. -a_{n-1}, B = e_n, C = (b_0 .. b_{n-1}).
[[nodiscard]] inline StateSpace ccf(const RationalFunction& g) {
    const auto sp = detail::splitProper(g);
    const int n = sp.den.degree();
    Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, 1), C = Matrix::Zero(1, n), D(1, 1);
    for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = 1.0;
    for (int j = 0; j < n; ++j) {
        A(n - 1, j) = -sp.den.coeff(j);
        C(0, j) = sp.num.coeff(j);
    }
    if (n > 0) B(n - 1, 0) = 1.0;
    D(0, 0) = sp.direct;
    return {A, B, C, D};
}

/// Observable canonical form: first column -a_{n-1} .. -a_0, ones on the
/// superdiagonal, B = (b_{n-1} .. b_0), C = e_1.
[[nodiscard]] inline StateSpace ocf(const RationalFunction& g) {
    const auto sp = detail::splitProper(g);
    const int n = sp.den.degree();
    Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, 1), C = Matrix::Zero(1, n), D(1, 1);
    for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = 1.0;
    for (int i = 0; i < n; ++i) {
        A(i, 0) = -sp.den.coeff(n - 1 - i);
        B(i, 0) = sp.num.coeff(n - 1 - i);
    }
    if (n > 0) C(0, 0) = 1.0;
    D(0, 0) = sp.direct;
    return {A, B, C, D};
}

struct ResidueExpansion {
    std::vector<Complex> poles;
    std::vector<CMatrix> residues;
    Matrix direct;
};

namespace detail {

inline bool samePole(Complex a, Complex b) { return std::abs(a - b) <= 1e-7 * (1.0 + std::abs(a)); }

/// Order used by the modal and MIMO realizations: descending real part,
/// then descending imaginary part.
inline bool modalOrder(const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
}

inline double imagTol(Complex p) { return 1e-9 * (1.0 + std::abs(p)); }

}  // namespace detail

/// Diagonal (real poles) or 2x2 [[s, w], [-w, s]] blocks (complex pairs),
/// residues in B, ones in C. Poles must be distinct.
[[nodiscard]] inline StateSpace modalForm(const RationalFunction& g) {
    const auto sp = detail::splitProper(g);
    std::vector<Complex> poles = sp.den.roots();
    for (std::size_t i = 0; i < poles.size(); ++i)
        for (std::size_t j = i + 1; j < poles.size(); ++j)
            if (detail::samePole(poles[i], poles[j])) detail::fail(ErrorKind::RepeatedPoles, "modal form needs distinct poles");
    std::sort(poles.begin(), poles.end(), detail::modalOrder);
    const Polynomial dden = sp.den.derivative();
    const int n = sp.den.degree();
    Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, 1), C = Matrix::Zero(1, n), D(1, 1);
    D(0, 0) = sp.direct;
    Eigen::Index pos = 0;
    for (const Complex& p : poles) {
        const Complex k = sp.num(p) / dden(p);
        if (std::abs(p.imag()) <= detail::imagTol(p)) {
            A(pos, pos) = p.real();
            B(pos, 0) = k.real();
            C(0, pos) = 1.0;
            ++pos;
        } else if (p.imag() > 0) {
            // k/(s-p) + conj(k)/(s-conj p) realized with C = (1, 0).
            A(pos, pos) = p.real();
            A(pos, pos + 1) = p.imag();
            A(pos + 1, pos) = -p.imag();
            A(pos + 1, pos + 1) = p.real();
            B(pos, 0) = 2.0 * k.real();
            B(pos + 1, 0) = -2.0 * k.imag();
            C(0, pos) = 1.0;
            pos += 2;
        }
    }
    if (pos != n) detail::fail(ErrorKind::ConjugacyViolation, "denominator roots are not closed under conjugation");
    return {A, B, C, D};
}

/// Leverrier-Faddeev: characteristic polynomial and adjugate of (sI - A)
/// together, so every entry is C adj(sI - A) B / det(sI - A) + D. Common
/// roots are cancelled and recorded on the entry.
[[nodiscard]] inline TransferMatrix ssToTf(const StateSpace& sys, bool cancel = true) {
    const Eigen::Index n = sys.n(), m = sys.m(), p = sys.p();
    std::vector<double> charCoeffs(static_cast<std::size_t>(n + 1));
    charCoeffs[0] = 1.0;
    std::vector<Matrix> Mk;  // M_1 .. M_n, adj(sI - A) = sum M_k s^{n-k}
    Matrix Mprev = Matrix::Zero(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        Matrix Mcur = sys.A * Mprev;
        Mcur.diagonal().array() += charCoeffs[static_cast<std::size_t>(k - 1)];
        charCoeffs[static_cast<std::size_t>(k)] = -(sys.A * Mcur).trace() / static_cast<double>(k);
        Mk.push_back(Mcur);
        Mprev = Mcur;
    }
    const Polynomial a(charCoeffs);
    TransferMatrix G(p, m);
    std::vector<Matrix> CMB;
    for (const Matrix& M : Mk) CMB.push_back(sys.C * M * sys.B);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            std::vector<double> c(static_cast<std::size_t>(n + 1), 0.0);
            for (Eigen::Index k = 1; k <= n; ++k) c[static_cast<std::size_t>(k)] = CMB[static_cast<std::size_t>(k - 1)](i, j);
            Polynomial num = Polynomial(c) + sys.D(i, j) * a;
            RationalFunction entry(num, a);
            G.at(i, j) = cancel ? reduceCoprime(entry) : entry;
        }
    }
    return G;
}

struct MinimalityReport {
    bool isMinimal = true;
    int degreeDeficit = 0;  // n minus rank of the Hankel product O * C
};

[[nodiscard]] inline MinimalityReport minimality(const StateSpace& sys, double rankTol = -1.0) {
    MinimalityReport r;
    const Eigen::Index n = sys.n();
    if (n == 0) return r;
    StructuralOptions opt;
    opt.rankTol = rankTol;
    const StructuralReport s = structuralAnalysis(sys, opt);
    r.isMinimal = s.controllable() && s.observable();
    const int hankel = rank(Matrix(s.obsv * s.ctrb), rankTol < 0 ? 1e-10 : rankTol);
    r.degreeDeficit = static_cast<int>(n) - (r.isMinimal ? static_cast<int>(n) : hankel);
    return r;
}

/// Partial fractions of every entry over the shared set of distinct poles.
[[nodiscard]] inline ResidueExpansion residueExpansion(const TransferMatrix& P) {
    ResidueExpansion out;
    out.direct = Matrix::Zero(P.rows, P.cols);
    struct EntryData {
        detail::ProperSplit split;
        std::vector<Complex> poles;
        Polynomial dden;
    };
    std::vector<EntryData> data;
    for (Eigen::Index i = 0; i < P.rows; ++i) {
        for (Eigen::Index j = 0; j < P.cols; ++j) {
            const RationalFunction red = reduceCoprime(P.at(i, j));
            EntryData e{detail::splitProper(red), {}, Polynomial()};
            out.direct(i, j) = e.split.direct;
            if (!e.split.num.isZero()) e.poles = e.split.den.roots();
            for (std::size_t a = 0; a < e.poles.size(); ++a)
                for (std::size_t b = a + 1; b < e.poles.size(); ++b)
                    if (detail::samePole(e.poles[a], e.poles[b]))
                        detail::fail(ErrorKind::RepeatedPoleUnsupported, "an entry has a repeated pole");
            e.dden = e.split.den.derivative();
            for (const Complex& p : e.poles) {
                bool known = false;
                for (const Complex& q : out.poles) known = known || detail::samePole(p, q);
                if (!known) out.poles.push_back(p);
            }
            data.push_back(std::move(e));
        }
    }
    std::sort(out.poles.begin(), out.poles.end(), detail::modalOrder);
    for (const Complex& p : out.poles) {
        CMatrix R = CMatrix::Zero(P.rows, P.cols);
        for (Eigen::Index i = 0; i < P.rows; ++i) {
            for (Eigen::Index j = 0; j < P.cols; ++j) {
                const EntryData& e = data[static_cast<std::size_t>(i * P.cols + j)];
                for (const Complex& q : e.poles)
                    if (detail::samePole(p, q)) R(i, j) = e.split.num(q) / e.dden(q);
            }
        }
        out.residues.push_back(R);
    }
    return out;
}

/// Gilbert-style minimal realization: each residue R_i = C_i B_i with inner
/// dimension rank(R_i). C_i takes the independent columns of R_i, B_i then
/// follows by least squares. Complex pairs are folded into real blocks.
[[nodiscard]] inline StateSpace mimoMinimalRealization(const TransferMatrix& P, double rankTol = 1e-9) {
    const ResidueExpansion pfe = residueExpansion(P);
    const Eigen::Index p = P.rows, m = P.cols;
    std::vector<Matrix> Ablocks, Bblocks, Cblocks;
    for (std::size_t i = 0; i < pfe.poles.size(); ++i) {
        const Complex pole = pfe.poles[i];
        const bool real = std::abs(pole.imag()) <= detail::imagTol(pole);
        if (!real && pole.imag() < 0) continue;
        const CMatrix& R = pfe.residues[i];
        const Vector sv = singularValues(R);
        if (sv.size() == 0 || sv(0) == 0.0) continue;
        int r = 0;
        for (Eigen::Index k = 0; k < sv.size(); ++k) {
            if (sv(k) > 1e3 * rankTol * sv(0)) {
                ++r;
            } else if (sv(k) > rankTol * sv(0)) {
                detail::fail(ErrorKind::RankAmbiguous, "residue singular value lies near the rank tolerance");
            }
        }
        Eigen::ColPivHouseholderQR<CMatrix> qr(R);
        std::vector<Eigen::Index> cols;
        for (int k = 0; k < r; ++k) cols.push_back(qr.colsPermutation().indices()(k));
        std::sort(cols.begin(), cols.end());
        CMatrix Ci(p, r);
        for (int k = 0; k < r; ++k) Ci.col(k) = R.col(cols[static_cast<std::size_t>(k)]);
        const CMatrix Bi = Ci.colPivHouseholderQr().solve(R);
        if (real) {
            Matrix Ab = pole.real() * Matrix::Identity(r, r);
            Ablocks.push_back(Ab);
            Bblocks.push_back(Bi.real());
            Cblocks.push_back(Ci.real());
        } else {
            Matrix Ab(2 * r, 2 * r);
            const Matrix I = Matrix::Identity(r, r);
            Ab << pole.real() * I, -pole.imag() * I, pole.imag() * I, pole.real() * I;
            Matrix Bb(2 * r, m), Cb(p, 2 * r);
            Bb << Bi.real(), Bi.imag();
            Cb << 2.0 * Ci.real(), -2.0 * Ci.imag();
            Ablocks.push_back(Ab);
            Bblocks.push_back(Bb);
            Cblocks.push_back(Cb);
        }
    }
    Eigen::Index n = 0;
    for (const auto& a : Ablocks) n += a.rows();
    Matrix A = Matrix::Zero(n, n), B(n, m), C(p, n);
    Eigen::Index pos = 0;
    for (std::size_t k = 0; k < Ablocks.size(); ++k) {
        const Eigen::Index d = Ablocks[k].rows();
        A.block(pos, pos, d, d) = Ablocks[k];
        B.middleRows(pos, d) = Bblocks[k];
        C.middleCols(pos, d) = Cblocks[k];
        pos += d;
    }
    StateSpace sys(A, B, C, pfe.direct);
    const StructuralReport s = structuralAnalysis(sys);
    if (!s.uncontrollableModes.empty() || !s.unobservableModes.empty())
        detail::fail(ErrorKind::InternalError, "residue realization is not minimal");
    return sys;
}

}  // namespace sskit

#endif  // SSKIT_REALIZATION_HPP
