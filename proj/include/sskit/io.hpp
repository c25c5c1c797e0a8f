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
#ifndef SSKIT_IO_HPP
#define SSKIT_IO_HPP

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "builtins.hpp"
#include "rational.hpp"
#include "response.hpp"

namespace sskit {

using Json = nlohmann::json;

/// Malformed input document; `pointer` locates the offending value.
class SchemaError : public Error {
public:
    SchemaError(const std::string& pointer, const std::string& what)
        : Error(ErrorKind::SchemaError, "at " + (pointer.empty() ? std::string("/") : pointer) + ": " + what),
          pointer_(pointer.empty() ? "/" : pointer) {}
    [[nodiscard]] const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

/// File could not be read or is not JSON at all.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] inline std::string readTextFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("cannot read " + path);
    return ss.str();
}

[[nodiscard]] inline Json parseJsonText(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw IoError(origin + " is not valid JSON: " + e.what());
    }
}

// ----------------------------------------------------------------------------
// Reading

namespace json {

inline std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
inline std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

inline const Json& field(const Json& obj, const std::string& key, const std::string& ptr) {
    if (!obj.is_object()) throw SchemaError(ptr, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(child(ptr, key), "required field is missing");
    return *it;
}

inline bool has(const Json& obj, const std::string& key) { return obj.is_object() && obj.contains(key); }

inline double number(const Json& j, const std::string& ptr) {
    if (!j.is_number()) throw SchemaError(ptr, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw SchemaError(ptr, "number is not finite");
    return v;
}

inline double numberOr(const Json& obj, const std::string& key, double fallback, const std::string& ptr) {
    return has(obj, key) ? number(obj.at(key), child(ptr, key)) : fallback;
}

inline long integerOr(const Json& obj, const std::string& key, long fallback, const std::string& ptr) {
    if (!has(obj, key)) return fallback;
    const Json& j = obj.at(key);
    if (!j.is_number_integer()) throw SchemaError(child(ptr, key), "expected an integer");
    return j.get<long>();
}

inline std::string string(const Json& j, const std::string& ptr) {
    if (!j.is_string()) throw SchemaError(ptr, "expected a string");
    return j.get<std::string>();
}

inline Vector vector(const Json& j, const std::string& ptr) {
    if (j.is_number()) return Vector::Constant(1, number(j, ptr));
    if (!j.is_array()) throw SchemaError(ptr, "expected an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], child(ptr, i));
    return v;
}

/// Row-major nested arrays; a bare number is a 1 x 1 matrix.
inline Matrix matrix(const Json& j, const std::string& ptr) {
    if (j.is_number()) return Matrix::Constant(1, 1, number(j, ptr));
    if (!j.is_array()) throw SchemaError(ptr, "expected a matrix as nested arrays");
    if (j.empty()) return Matrix(0, 0);
    const std::size_t rows = j.size();
    if (!j[0].is_array()) throw SchemaError(child(ptr, std::size_t{0}), "expected a row array");
    const std::size_t cols = j[0].size();
    Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::string rp = child(ptr, r);
        if (!j[r].is_array()) throw SchemaError(rp, "expected a row array");
        if (j[r].size() != cols) throw SchemaError(rp, "row length differs from the first row");
        for (std::size_t c = 0; c < cols; ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], child(rp, c));
    }
    return out;
}

/// A number, [re, im], or {"re": .., "im": ..}.
inline Complex complex(const Json& j, const std::string& ptr) {
    if (j.is_number()) return {number(j, ptr), 0.0};
    if (j.is_array()) {
        if (j.size() != 2) throw SchemaError(ptr, "complex value needs [re, im]");
        return {number(j[0], child(ptr, std::size_t{0})), number(j[1], child(ptr, std::size_t{1}))};
    }
    if (j.is_object()) return {number(field(j, "re", ptr), child(ptr, "re")), numberOr(j, "im", 0.0, ptr)};
    throw SchemaError(ptr, "expected a complex value");
}

inline std::vector<Complex> complexList(const Json& j, const std::string& ptr) {
    if (!j.is_array()) throw SchemaError(ptr, "expected an array of complex values");
    std::vector<Complex> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(complex(j[i], child(ptr, i)));
    return out;
}

/// Coefficients, highest degree first.
inline Polynomial polynomial(const Json& j, const std::string& ptr) {
    const Vector v = vector(j, ptr);
    if (v.size() == 0) throw SchemaError(ptr, "polynomial needs at least one coefficient");
    return Polynomial(std::vector<double>(v.data(), v.data() + v.size()));
}

inline RationalFunction rational(const Json& j, const std::string& ptr) {
    const Polynomial num = polynomial(field(j, "num", ptr), child(ptr, "num"));
    const Polynomial den = polynomial(field(j, "den", ptr), child(ptr, "den"));
    if (den.isZero()) throw SchemaError(child(ptr, "den"), "denominator is identically zero");
    return RationalFunction(num, den);
}

/// {"num","den"} for SISO, or a nested row-major grid of them.
inline TransferMatrix transferMatrix(const Json& j, const std::string& ptr) {
    if (j.is_object()) {
        TransferMatrix G(1, 1);
        G.at(0, 0) = rational(j, ptr);
        return G;
    }
    if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
        throw SchemaError(ptr, "expected a transfer function or a non-empty grid of them");
    const std::size_t rows = j.size(), cols = j[0].size();
    TransferMatrix G(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw SchemaError(child(ptr, r), "ragged transfer matrix row");
        for (std::size_t c = 0; c < cols; ++c)
            G.at(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rational(j[r][c], child(child(ptr, r), c));
    }
    return G;
}

}  // namespace json

struct LoadedModel {
    std::string type;  // "lti", "ltv-samples" or "nonlinear-builtin"
    std::optional<StateSpace> lti;
    std::optional<LtvModel> ltv;
    std::optional<NonlinearModel> nonlinear;
    std::optional<BuiltinModel> builtin;
};

namespace detail {

inline StateSpace ltiFromJson(const Json& j, const std::string& ptr) {
    const Matrix A = json::matrix(json::field(j, "A", ptr), json::child(ptr, "A"));
    if (A.rows() != A.cols()) throw SchemaError(json::child(ptr, "A"), "A must be square");
    const Eigen::Index n = A.rows();
    Matrix B = json::matrix(json::field(j, "B", ptr), json::child(ptr, "B"));
    if (B.size() == 0) B = Matrix(n, 0);
    if (B.rows() != n) throw SchemaError(json::child(ptr, "B"), "B must have as many rows as A");
    const Eigen::Index m = B.cols();
    Matrix C = json::has(j, "C") ? json::matrix(j.at("C"), json::child(ptr, "C")) : Matrix(Matrix::Identity(n, n));
    if (C.size() == 0) C = Matrix(0, n);
    if (C.cols() != n) throw SchemaError(json::child(ptr, "C"), "C must have as many columns as A");
    const Eigen::Index p = C.rows();
    Matrix D = json::has(j, "D") ? json::matrix(j.at("D"), json::child(ptr, "D")) : Matrix(Matrix::Zero(p, m));
    if (D.size() == 0) D = Matrix::Zero(p, m);
    if (D.rows() != p || D.cols() != m) throw SchemaError(json::child(ptr, "D"), "D must be p x m");
    return {A, B, C, D};
}

/// Piecewise-linear interpolation of sampled matrices, clamped at the ends.
inline MatrixOfTime interpolated(std::vector<double> times, std::vector<Matrix> values) {
    return [times = std::move(times), values = std::move(values)](double t) -> Matrix {
        if (t <= times.front()) return values.front();
        if (t >= times.back()) return values.back();
        const auto it = std::upper_bound(times.begin(), times.end(), t);
        const auto hi = static_cast<std::size_t>(it - times.begin());
        const double w = (t - times[hi - 1]) / (times[hi] - times[hi - 1]);
        return (1.0 - w) * values[hi - 1] + w * values[hi];
    };
}

inline std::vector<Matrix> sampledMatrices(const Json& j, const std::string& ptr, std::size_t count, Eigen::Index rows,
                                           Eigen::Index cols) {
    if (!j.is_array() || j.size() != count) throw SchemaError(ptr, "expected one matrix per sample time");
    std::vector<Matrix> out;
    for (std::size_t k = 0; k < count; ++k) {
        Matrix M = json::matrix(j[k], json::child(ptr, k));
        if (M.size() == 0) M = Matrix::Zero(rows, cols);
        if ((rows >= 0 && M.rows() != rows) || (cols >= 0 && M.cols() != cols))
            throw SchemaError(json::child(ptr, k), "sample has the wrong dimensions");
        out.push_back(M);
    }
    return out;
}

inline LtvModel ltvFromJson(const Json& j, const std::string& ptr) {
    const Vector tv = json::vector(json::field(j, "times", ptr), json::child(ptr, "times"));
    if (tv.size() < 2) throw SchemaError(json::child(ptr, "times"), "need at least two sample times");
    std::vector<double> times(tv.data(), tv.data() + tv.size());
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw SchemaError(json::child(json::child(ptr, "times"), k), "times must increase");
    const std::size_t K = times.size();
    const auto As = sampledMatrices(json::field(j, "A", ptr), json::child(ptr, "A"), K, -1, -1);
    const Eigen::Index n = As.front().rows();
    for (std::size_t k = 0; k < K; ++k)
        if (As[k].rows() != n || As[k].cols() != n) throw SchemaError(json::child(json::child(ptr, "A"), k), "A samples must be n x n");
    const auto Bs = sampledMatrices(json::field(j, "B", ptr), json::child(ptr, "B"), K, n, -1);
    const Eigen::Index m = Bs.front().cols();
    for (std::size_t k = 0; k < K; ++k)
        if (Bs[k].cols() != m) throw SchemaError(json::child(json::child(ptr, "B"), k), "B samples must share a width");
    std::vector<Matrix> Cs = json::has(j, "C") ? sampledMatrices(j.at("C"), json::child(ptr, "C"), K, -1, n)
                                               : std::vector<Matrix>(K, Matrix::Identity(n, n));
    const Eigen::Index p = Cs.front().rows();
    for (std::size_t k = 0; k < K; ++k)
        if (Cs[k].rows() != p) throw SchemaError(json::child(json::child(ptr, "C"), k), "C samples must share a height");
    std::vector<Matrix> Ds = json::has(j, "D") ? sampledMatrices(j.at("D"), json::child(ptr, "D"), K, p, m)
                                               : std::vector<Matrix>(K, Matrix::Zero(p, m));
    LtvModel out;
    out.A = interpolated(times, As);
    out.B = interpolated(times, Bs);
    out.C = interpolated(times, Cs);
    out.D = interpolated(times, Ds);
    out.n = n;
    out.m = m;
    out.p = p;
    out.breaks = times;
    return out;
}

}  // namespace detail

/// Model document: {"type": "lti", "A", "B", "C"?, "D"?},
/// {"type": "ltv-samples", "times", "A": [..], "B": [..], "C"?, "D"?} or
/// {"type": "nonlinear-builtin", "name", "params"?}.
[[nodiscard]] inline LoadedModel loadModel(const Json& j, const std::string& ptr = "") {
    if (!j.is_object()) throw SchemaError(ptr, "model must be an object");
    LoadedModel out;
    out.type = json::has(j, "type") ? json::string(j.at("type"), json::child(ptr, "type")) : "lti";
    try {
        if (out.type == "lti") {
            out.lti = detail::ltiFromJson(j, ptr);
            out.ltv = LtvModel::fromLti(*out.lti);
            out.nonlinear = NonlinearModel::fromLti(*out.lti);
        } else if (out.type == "ltv-samples") {
            out.ltv = detail::ltvFromJson(j, ptr);
        } else if (out.type == "nonlinear-builtin") {
            const std::string name = json::string(json::field(j, "name", ptr), json::child(ptr, "name"));
            const auto names = builtinNames();
            if (std::find(names.begin(), names.end(), name) == names.end())
                throw SchemaError(json::child(ptr, "name"), "unknown builtin '" + name + "'");
            ParameterMap params;
            if (json::has(j, "params")) {
                const std::string pp = json::child(ptr, "params");
                if (!j.at("params").is_object()) throw SchemaError(pp, "params must be an object");
                for (const auto& [k, v] : j.at("params").items()) params[k] = json::number(v, json::child(pp, k));
            }
            try {
                out.builtin = builtinModel(name, params);
            } catch (const Error& e) {
                throw SchemaError(json::child(ptr, "params"), e.what());
            }
            out.nonlinear = out.builtin->model;
            out.lti = out.builtin->lti;
            if (out.lti) out.ltv = LtvModel::fromLti(*out.lti);
        } else {
            throw SchemaError(json::child(ptr, "type"), "unknown model type '" + out.type + "'");
        }
    } catch (const SchemaError&) {
        throw;
    } catch (const Error& e) {
        throw SchemaError(ptr, e.what());
    }
    return out;
}

[[nodiscard]] inline LoadedModel loadModelFile(const std::string& path) {
    return loadModel(parseJsonText(readTextFile(path), path));
}

// ----------------------------------------------------------------------------
// Writing

namespace json {

inline Json of(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json of(const Complex& z) { return Json{{"re", of(z.real())}, {"im", of(z.imag())}}; }

inline Json of(const Matrix& M) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(of(M(r, c)));
        rows.push_back(row);
    }
    return rows;
}

inline Json ofVector(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(of(v(i)));
    return out;
}

inline Json of(const std::vector<Complex>& zs) {
    Json out = Json::array();
    for (const Complex& z : zs) out.push_back(of(z));
    return out;
}

inline Json of(const std::vector<double>& xs) {
    Json out = Json::array();
    for (double x : xs) out.push_back(of(x));
    return out;
}

inline Json of(const Polynomial& p) { return of(p.coeffs()); }

inline Json of(const RationalFunction& g) {
    Json out{{"num", of(g.num)}, {"den", of(g.den)}};
    if (g.hadCancellation()) out["cancelled"] = of(g.cancelled);
    return out;
}

inline Json of(const TransferMatrix& G) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < G.rows; ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < G.cols; ++c) row.push_back(of(G.at(r, c)));
        rows.push_back(row);
    }
    return rows;
}

inline Json of(const StateSpace& s) { return Json{{"A", of(s.A)}, {"B", of(s.B)}, {"C", of(s.C)}, {"D", of(s.D)}}; }

}  // namespace json

/// 17 significant digits, enough to round-trip any double.
[[nodiscard]] inline std::string formatCsvNumber(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

[[nodiscard]] inline std::string csvTable(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + formatCsvNumber(row[i]);
        out += '\n';
    }
    return out;
}

/// Header t,x1..xn,u1..um,y1..yp, one row per sample.
[[nodiscard]] inline std::string trajectoryCsv(const Trajectory& tr) {
    std::vector<std::string> header{"t"};
    const Eigen::Index n = tr.states.empty() ? 0 : tr.states.front().size();
    const Eigen::Index m = tr.inputs.empty() ? 0 : tr.inputs.front().size();
    const Eigen::Index p = tr.outputs.empty() ? 0 : tr.outputs.front().size();
    for (Eigen::Index i = 1; i <= n; ++i) header.push_back("x" + std::to_string(i));
    for (Eigen::Index i = 1; i <= m; ++i) header.push_back("u" + std::to_string(i));
    for (Eigen::Index i = 1; i <= p; ++i) header.push_back("y" + std::to_string(i));
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        std::vector<double> row{tr.times[k]};
        for (Eigen::Index i = 0; i < n; ++i) row.push_back(tr.states[k](i));
        for (Eigen::Index i = 0; i < m; ++i) row.push_back(k < tr.inputs.size() ? tr.inputs[k](i) : 0.0);
        for (Eigen::Index i = 0; i < p; ++i) row.push_back(k < tr.outputs.size() ? tr.outputs[k](i) : 0.0);
        rows.push_back(std::move(row));
    }
    return csvTable(header, rows);
}

}  // namespace sskit

#endif  // SSKIT_IO_HPP
