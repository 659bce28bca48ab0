#include "cantorspec/diophantine.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cantorspec {

namespace {
constexpr long double kPiL = 3.14159265358979323846264338327950288L;
}

ContinuedFraction cf_expand(double alpha, int depth) {
    ContinuedFraction cf;
    long double x = (long double)alpha - std::floor((long double)alpha);
    cf.alpha = static_cast<double>(x);
    cf.alpha_l = x;
    // two-back recurrence with virtual (p_{-1}, q_{-1});
    // stored sequences follow the indexing p_0 = 0, q_0 = 1, q_1 = a_1
    std::vector<std::int64_t> p = {0}, q = {1};
    std::int64_t pm1 = 1, qm1 = 0;  // p_{-1}, q_{-1}
    for (int k = 1; k <= depth; ++k) {
        if (x < 1e-14L) {
            cf.terminating = true;
            break;
        }
        const long double inv = 1.0L / x;
        const auto ak = static_cast<std::int64_t>(std::floor(inv));
        if (ak <= 0) {
            cf.terminating = true;
            break;
        }
        x = inv - ak;
        const std::int64_t pk = ak * p.back() + pm1;
        const std::int64_t qk = ak * q.back() + qm1;
        if (qk < q.back() || qk > std::numeric_limits<std::int64_t>::max() / 4)
            break;  // overflow guard
        pm1 = p.back();
        qm1 = q.back();
        p.push_back(pk);
        q.push_back(qk);
        cf.a.push_back(ak);
    }
    cf.p = std::move(p);
    cf.q = std::move(q);
    return cf;
}

double torus_dist_unit(double x) {
    return static_cast<double>(torus_dist_unit_l(x));
}

long double torus_dist_unit_l(long double x) {
    long double f = x - std::floor(x);
    if (f < 0.0L) f += 1.0L;
    if (f > 1.0L) f -= 1.0L;
    return f <= 0.5L ? f : 1.0L - f;
}

double torus_dist_2pi(double x) {
    const long double twopi = 2.0L * kPiL;
    return static_cast<double>(twopi * torus_dist_unit_l(x / twopi));
}

namespace {

// enumerate 0 < |n|_1 <= k_max over Z^d, calling fn(n)
template <class Fn>
void for_l1_ball(int d, int k_max, Fn&& fn) {
    Mode n(d, 0);
    // recursive lattice walk
    auto rec = [&](auto&& self, int i, int budget) -> void {
        if (i == d) {
            if (mode_abs(n) > 0) fn(n);
            return;
        }
        for (int x = -budget; x <= budget; ++x) {
            n[i] = x;
            self(self, i + 1, budget - std::abs(x));
        }
        n[i] = 0;
    };
    rec(rec, 0, k_max);
}

// <n, alpha> with compensated summation in long double
long double dot_l(const Mode& n, const std::vector<double>& alpha) {
    long double s = 0.0L, c = 0.0L;
    for (size_t i = 0; i < n.size(); ++i) {
        const long double term = (long double)n[i] * (long double)alpha[i];
        const long double y = term - c;
        const long double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

}  // namespace

double dc_margin(const std::vector<double>& alpha, const DCParams& dc, int k_max) {
    const int d = static_cast<int>(alpha.size());
    double margin = std::numeric_limits<double>::infinity();
    for_l1_ball(d, k_max, [&](const Mode& n) {
        const long double twopi = 2.0L * kPiL;
        const long double dist = twopi * torus_dist_unit_l(dot_l(n, alpha) / twopi);
        const double m =
            std::pow(mode_abs(n), dc.tau) * (double)dist / dc.gamma;
        margin = std::min(margin, m);
    });
    return margin;
}

std::optional<ResonanceHit> find_resonance(double rho,
                                           const std::vector<double>& alpha,
                                           double bound, double eta) {
    const int d = static_cast<int>(alpha.size());
    std::optional<ResonanceHit> best;
    int count = 0;
    for_l1_ball(d, static_cast<int>(bound), [&](const Mode& n) {
        const long double twopi = 2.0L * kPiL;
        const long double dist =
            twopi * torus_dist_unit_l((2.0L * (long double)rho - dot_l(n, alpha)) / twopi);
        if ((double)dist < eta) {
            ++count;
            if (!best || mode_abs(n) < mode_abs(best->k) ||
                (mode_abs(n) == mode_abs(best->k) && n < best->k)) {
                best = ResonanceHit{n, (double)dist, false};
            }
        }
    });
    // +k and -k witness the same resonance pair (|2 rho +- <k, alpha>|); two
    // distinct |k| magnitudes signal genuine multiplicity
    if (best && count > 2) best->multiple = true;
    return best;
}

ReturnTime best_return_time(const ContinuedFraction& cf, double n_j) {
    if (cf.terminating) throw std::runtime_error("terminating expansion");
    // locate q_{n_j} < N_j <= q_{n_j + 1}
    size_t idx = 0;
    bool found = false;
    for (size_t i = 0; i + 1 < cf.q.size(); ++i) {
        if ((double)cf.q[i] < n_j && n_j <= (double)cf.q[i + 1]) {
            idx = i;
            found = true;
            break;
        }
    }
    if (!found) throw std::runtime_error("insufficient expansion depth");
    const double lo = 21.0 * n_j / 20.0, hi = 41.0 * n_j / 20.0;
    const double small = 3.0 / (double)cf.q[idx];
    auto dist_of = [&](std::int64_t q) {
        return (double)torus_dist_unit_l((long double)q * cf.alpha_l);
    };
    ReturnTime best;
    auto consider = [&](std::int64_t q, bool is_sum) {
        if (q <= 0) return;
        const bool win = lo <= (double)q && (double)q <= hi;
        if (!win) return;
        const double dq = dist_of(q);
        if (dq >= small) return;
        if (best.q == 0 || dq < best.dist) {
            best = ReturnTime{q, is_sum, true, true, cf.q[idx], dq};
        }
    };
    // single denominators preferred; sums of consecutive ones as fallback
    for (size_t i = 0; i < cf.q.size(); ++i) consider(cf.q[i], false);
    if (best.q == 0)
        for (size_t i = 0; i + 1 < cf.q.size(); ++i)
            consider(cf.q[i] + cf.q[i + 1], true);
    if (best.q == 0) throw std::runtime_error("insufficient expansion depth");
    return best;
}

}  // namespace cantorspec
