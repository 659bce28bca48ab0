#include "cantorspec/fourier.hpp"

#include <sstream>

namespace cantorspec {

MatSeries adjugate_series(const MatSeries& b) {
    MatSeries r(b.dim);
    for (const auto& [k, v] : b.coeffs) {
        Mat2 m = v.adjugate();
        m.frame = v.frame;
        r.coeffs.emplace(k, m);
    }
    return r;
}

AdjointResult adjoint_action(const MatSeries& b, const MatSeries& w,
                             double max_degree, double h) {
    AdjointResult out;
    const MatSeries binv = adjugate_series(b);
    auto bw = product(b, w, max_degree, h);
    auto bwb = product(bw.series, binv, max_degree, h);
    out.series = std::move(bwb.series);
    out.tail_bound = bw.tail_bound * wiener_norm(binv, h) + bwb.tail_bound;

    MatSeries bmi = b;
    bmi.add_mode(Mode(b.dim, 0), Mat2::identity() * (-1.0));
    const double bn = wiener_norm(bmi, h);
    if (bn <= 0.5) {
        const double lhs = wiener_norm(out.series - w, h);
        out.lemma_bound_margin = 4.0 * bn * wiener_norm(w, h) - lhs;
    }
    return out;
}

namespace {

// drop coefficients whose Wiener mass at width h is negligible relative to
// `scale`; returns the dropped mass so callers can fold it into tail bounds
double prune_budgeted(MatSeries& f, double h, double scale) {
    const double cut = 1e-17 * (scale > 0.0 ? scale : 1.0);
    double dropped = 0.0;
    for (auto it = f.coeffs.begin(); it != f.coeffs.end();) {
        const double mass = vnorm(it->second) * std::exp(mode_abs(it->first) * h);
        if (mass <= cut) {
            dropped += mass;
            it = f.coeffs.erase(it);
        } else {
            ++it;
        }
    }
    return dropped;
}

}  // namespace

ExpLogResult exp_series(const MatSeries& y, double max_degree, double h) {
    ExpLogResult out;
    out.series.dim = y.dim;
    out.series.add_mode(Mode(y.dim, 0), Mat2::identity());
    MatSeries term = out.series;  // Y^n / n!
    const double yn = wiener_norm(y, h);
    constexpr int kTerms = 12;
    for (int n = 1; n <= kTerms; ++n) {
        auto p = product(term, y, max_degree, h);
        term = p.series * (1.0 / n);
        out.tail_bound += p.tail_bound / n;
        out.tail_bound += prune_budgeted(term, h, yn);
        out.series = out.series + term;
    }
    // series tail beyond kTerms terms: sum_{n>12} |Y|^n / n!
    double tail = 0.0, t = std::pow(yn, kTerms + 1);
    double f = 1.0;
    for (int n = 2; n <= kTerms + 1; ++n) f *= n;
    for (int n = kTerms + 1; n <= kTerms + 30; ++n) {
        tail += t / f;
        t *= yn;
        f *= (n + 1);
    }
    out.tail_bound += tail;
    out.series.prune(0.0);
    return out;
}

ExpLogResult log_series(const MatSeries& x, double max_degree, double h) {
    ExpLogResult out;
    MatSeries e = x;
    e.add_mode(Mode(x.dim, 0), Mat2::identity() * (-1.0));
    e.prune(0.0);
    const double en = wiener_norm(e, h);
    out.series.dim = x.dim;
    MatSeries pw = e;  // E^n
    out.series = e;
    constexpr int kTerms = 24;
    for (int n = 2; n <= kTerms; ++n) {
        auto p = product(pw, e, max_degree, h);
        pw = p.series;
        out.tail_bound += p.tail_bound / n;
        out.tail_bound += prune_budgeted(pw, h, en) / n;
        out.series = out.series + pw * ((n % 2 == 0 ? -1.0 : 1.0) / n);
    }
    if (en < 1.0) {
        double t = std::pow(en, kTerms + 1);
        for (int n = kTerms + 1; n <= kTerms + 200 && t > 0.0; ++n) {
            out.tail_bound += t / n;
            t *= en;
            if (t < 1e-300) break;
        }
    }
    out.series.prune(0.0);
    return out;
}

double real_symmetry_defect(const ScalarSeries& f) {
    double worst = 0.0;
    for (const auto& [k, v] : f.coeffs) {
        auto it = f.coeffs.find(mode_neg(k));
        const cplx other = it == f.coeffs.end() ? cplx(0.0) : it->second;
        worst = std::max(worst, std::abs(other - std::conj(v)));
    }
    return worst;
}

double su11_symmetry_defect(const MatSeries& w) {
    double worst = 0.0;
    for (const auto& [k, v] : w.coeffs) {
        auto it = w.coeffs.find(mode_neg(k));
        const Mat2 o = it == w.coeffs.end() ? Mat2::zero(Frame::Disc) : it->second;
        worst = std::max(worst, std::abs(o.a + std::conj(v.a)));
        worst = std::max(worst, std::abs(o.c - std::conj(v.b)));
        worst = std::max(worst, std::abs(v.d + v.a));
    }
    return worst;
}

namespace {

void put_mode(std::ostringstream& os, const Mode& k) {
    for (int x : k) os << x << ' ';
}

}  // namespace

std::string to_lines(const ScalarSeries& f) {
    std::ostringstream os;
    os.precision(17);
    for (const auto& [k, v] : f.coeffs) {
        put_mode(os, k);
        os << v.real() << ' ' << v.imag() << '\n';
    }
    return os.str();
}

std::string to_lines(const MatSeries& f) {
    std::ostringstream os;
    os.precision(17);
    for (const auto& [k, v] : f.coeffs) {
        put_mode(os, k);
        for (const cplx* e : {&v.a, &v.b, &v.c, &v.d})
            os << e->real() << ' ' << e->imag() << ' ';
        os << '\n';
    }
    return os.str();
}

ScalarSeries scalar_from_lines(const std::string& text, int dim) {
    ScalarSeries f(dim);
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        Mode k(dim);
        for (int& x : k) ls >> x;
        double re, im;
        ls >> re >> im;
        f.coeffs.emplace(std::move(k), cplx(re, im));
    }
    return f;
}

MatSeries mat_from_lines(const std::string& text, int dim, Frame frame) {
    MatSeries f(dim);
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        Mode k(dim);
        for (int& x : k) ls >> x;
        double v[8];
        for (double& x : v) ls >> x;
        f.coeffs.emplace(std::move(k),
                         Mat2(cplx(v[0], v[1]), cplx(v[2], v[3]), cplx(v[4], v[5]),
                              cplx(v[6], v[7]), frame));
    }
    return f;
}

}  // namespace cantorspec
