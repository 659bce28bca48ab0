// Sparse trigonometric series over the d-torus (R/2piZ)^d: coefficient maps
// k -> scalar or 2x2 matrix, Wiener norms |F|_h = sum ||F^(k)|| e^{|k| h},
// truncation split, convolution products, evaluation and group-valued
// helpers (adjugate inverse, exp/log series, adjoint action).
#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cantorspec/mat2.hpp"

namespace cantorspec {

using Mode = std::vector<int>;

inline int mode_abs(const Mode& k) {  // l1 magnitude
    int s = 0;
    for (int x : k) s += std::abs(x);
    return s;
}

inline Mode mode_add(const Mode& a, const Mode& b) {
    Mode r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Mode mode_neg(const Mode& a) {
    Mode r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
    return r;
}

inline double mode_dot(const Mode& k, const std::vector<double>& alpha) {
    double s = 0.0;
    for (size_t i = 0; i < k.size(); ++i) s += k[i] * alpha[i];
    return s;
}

inline double vnorm(const cplx& v) { return std::abs(v); }
inline double vnorm(const Mat2& m) { return m.norm(); }

template <class V>
struct Series {
    int dim = 1;
    std::map<Mode, V> coeffs;

    Series() = default;
    explicit Series(int d) : dim(d) {}

    static Series zero(int d) { return Series(d); }

    V mean() const {
        auto it = coeffs.find(Mode(dim, 0));
        return it == coeffs.end() ? V{} : it->second;
    }

    Series& add_mode(const Mode& k, const V& v) {
        auto [it, fresh] = coeffs.emplace(k, v);
        if (!fresh) it->second = it->second + v;
        return *this;
    }

    // drop coefficients with norm below eps (exact-zero cleanup)
    Series& prune(double eps = 0.0) {
        for (auto it = coeffs.begin(); it != coeffs.end();)
            it = (vnorm(it->second) <= eps) ? coeffs.erase(it) : std::next(it);
        return *this;
    }

    Series operator+(const Series& o) const {
        Series r = *this;
        for (const auto& [k, v] : o.coeffs) r.add_mode(k, v);
        return r;
    }
    Series operator-(const Series& o) const {
        Series r = *this;
        for (const auto& [k, v] : o.coeffs) r.add_mode(k, v * (-1.0));
        return r;
    }
    template <class S>
    Series operator*(const S& s) const {
        Series r = *this;
        for (auto& [k, v] : r.coeffs) v = v * s;
        return r;
    }

    int max_mode_abs() const {
        int m = 0;
        for (const auto& [k, v] : coeffs) m = std::max(m, mode_abs(k));
        return m;
    }
};

using ScalarSeries = Series<cplx>;
using MatSeries = Series<Mat2>;

template <class V>
double wiener_norm(const Series<V>& f, double h) {
    double s = 0.0;
    for (const auto& [k, v] : f.coeffs) s += vnorm(v) * std::exp(mode_abs(k) * h);
    return s;
}

enum class TruncPart { Low, High };  // T_N keeps |k| < N, R_N keeps |k| >= N

template <class V>
Series<V> truncate(const Series<V>& f, double n, TruncPart part) {
    Series<V> r(f.dim);
    for (const auto& [k, v] : f.coeffs) {
        const bool low = mode_abs(k) < n;
        if ((part == TruncPart::Low) == low) r.coeffs.emplace(k, v);
    }
    return r;
}

template <class V>
struct ProductResult {
    Series<V> series;
    double tail_bound = 0.0;  // Wiener mass (at width h) of dropped modes
};

template <class VA, class VB>
auto product(const Series<VA>& f, const Series<VB>& g, double max_degree,
             double h = 0.0) {
    using V = decltype(std::declval<VA>() * std::declval<VB>());
    ProductResult<V> out;
    out.series.dim = f.dim;
    for (const auto& [ka, va] : f.coeffs)
        for (const auto& [kb, vb] : g.coeffs) {
            Mode k = mode_add(ka, kb);
            const V v = va * vb;
            if (mode_abs(k) > max_degree)
                out.tail_bound += vnorm(v) * std::exp(mode_abs(k) * h);
            else
                out.series.add_mode(k, v);
        }
    out.series.prune(0.0);
    return out;
}

template <class V>
V evaluate(const Series<V>& f, const std::vector<double>& theta) {
    V s{};
    for (const auto& [k, v] : f.coeffs)
        s = s + v * std::exp(cplx(0.0, mode_dot(k, theta)));
    return s;
}

// F(. + alpha): multiply coefficient k by e^{i <k, alpha>}
template <class V>
Series<V> shift_arg(const Series<V>& f, const std::vector<double>& alpha) {
    Series<V> r(f.dim);
    for (const auto& [k, v] : f.coeffs)
        r.coeffs.emplace(k, v * std::exp(cplx(0.0, mode_dot(k, alpha))));
    return r;
}

// multiply by e^{i <m, theta>}: shift every mode by m
template <class V>
Series<V> mode_shift(const Series<V>& f, const Mode& m) {
    Series<V> r(f.dim);
    for (const auto& [k, v] : f.coeffs) r.coeffs.emplace(mode_add(k, m), v);
    return r;
}

// pointwise inverse of a det-1 matrix series: adjugate is linear in the
// entries, so it acts coefficient-wise
MatSeries adjugate_series(const MatSeries& b);

// Ad(B).W = B W B^{-1}; b must have pointwise determinant 1
struct AdjointResult {
    MatSeries series;
    double tail_bound = 0.0;
    std::optional<double> lemma_bound_margin;  // 4|B-I|_h|W|_h - |Ad W - W|_h when |B-I|_h <= 1/2
};
AdjointResult adjoint_action(const MatSeries& b, const MatSeries& w,
                             double max_degree, double h = 0.0);

// exp of a matrix series by 12-term truncated power series; tail bound from
// submultiplicativity at width h
struct ExpLogResult {
    MatSeries series;
    double tail_bound = 0.0;
};
ExpLogResult exp_series(const MatSeries& y, double max_degree, double h = 0.0);

// log(X) for X = I + E with |E|_h < 1/2 (Mercator series, 24 terms)
ExpLogResult log_series(const MatSeries& x, double max_degree, double h = 0.0);

// symmetry checks
// real-valued scalar series: F^(-k) = conj F^(k)
double real_symmetry_defect(const ScalarSeries& f);
// su(1,1)-valued series: pointwise W = [[i u, w], [conj w, -i u]] with u
// real, i.e. coefficient relations W11^(-k) = -conj W11^(k),
// W21^(k) = conj W12^(-k), W22^(k) = -W11^(k)
double su11_symmetry_defect(const MatSeries& w);

// serialization: one line per mode, "k_1 ... k_d re im" for scalars or
// "k_1 ... k_d re(a) im(a) re(b) im(b) re(c) im(c) re(d) im(d)"
std::string to_lines(const ScalarSeries& f);
std::string to_lines(const MatSeries& f);
ScalarSeries scalar_from_lines(const std::string& text, int dim);
MatSeries mat_from_lines(const std::string& text, int dim, Frame frame);

}  // namespace cantorspec
