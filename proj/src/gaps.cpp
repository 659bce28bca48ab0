#include "cantorspec/gaps.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cantorspec/diophantine.hpp"

namespace cantorspec {

namespace {

constexpr double kPi = 3.14159265358979323846;

ScalarSeries entry_series(const MatSeries& m, int which) {
    ScalarSeries r(m.dim);
    for (const auto& [k, v] : m.coeffs) {
        const cplx e = which == 0 ? v.a : which == 1 ? v.b : which == 2 ? v.c : v.d;
        if (e != 0.0) r.coeffs.emplace(k, e);
    }
    return r;
}

// zero mode of x * y without forming the full product
double avg_product(const ScalarSeries& x, const ScalarSeries& y) {
    cplx s{0.0};
    for (const auto& [k, v] : x.coeffs) {
        auto it = y.coeffs.find(mode_neg(k));
        if (it != y.coeffs.end()) s += v * it->second;
    }
    return s.real();
}

double c_tau(double tau) {
    return std::exp(8.0 * std::log(2.0) + std::lgamma(4.0 * tau + 2.0));
}

double frac(double x) { return x - std::floor(x); }

}  // namespace

MoserPoschelData mp_reduce(const MatSeries& btilde_real, double zeta, double h) {
    MoserPoschelData d;
    d.zeta = zeta;
    const ScalarSeries b11 = entry_series(btilde_real, 0);
    const ScalarSeries b12 = entry_series(btilde_real, 1);
    d.avg_b11sq = avg_product(b11, b11);
    d.avg_b11b12 = avg_product(b11, b12);
    d.avg_b12sq = avg_product(b12, b12);
    d.btilde_norm = wiener_norm(btilde_real, h);
    d.b0 = Mat2(0.0, zeta, 0.0, 0.0, Frame::Real);
    d.b1 = Mat2(d.avg_b11b12 - 0.5 * zeta * d.avg_b11sq,
                -zeta * d.avg_b11b12 + d.avg_b12sq, -d.avg_b11sq,
                -d.avg_b11b12 + 0.5 * zeta * d.avg_b11sq, Frame::Real);
    d.degenerate = d.avg_b12sq < 1e-14 * std::max(1.0, d.avg_b11sq);
    d.lower_bound_ok =
        d.avg_b11sq >= 1.0 / (4.0 * d.btilde_norm * d.btilde_norm) - 1e-12;
    return d;
}

MpDet mp_det(const MoserPoschelData& data, double delta) {
    MpDet out;
    out.d_paper = -delta * data.avg_b11sq * data.zeta +
                  delta * delta *
                      (data.avg_b11sq * data.avg_b12sq -
                       data.avg_b11b12 * data.avg_b11b12);
    const Mat2 m = data.b0 - data.b1 * delta;
    out.det_exact = m.det().real();
    const double quarter = 0.25 * delta * delta * data.zeta * data.zeta *
                           data.avg_b11sq * data.avg_b11sq;
    out.identity_defect = std::abs(out.det_exact - (out.d_paper - quarter));
    return out;
}

GapBounds mp_probe(const MoserPoschelData& data, double lambda, const Mode& k,
                   double s, const MpProbeParams& params) {
    GapBounds out;
    const double zeta = data.zeta;
    out.degenerate = data.degenerate;
    if (zeta > 0.0) {
        out.delta1 = std::pow(zeta, 16.0 / 17.0);
        out.delta2 = std::pow(zeta, 18.0 / 17.0);
        out.d_at_delta1 = mp_det(data, out.delta1).d_paper;
        out.d_at_delta2 = mp_det(data, out.delta2).d_paper;
        out.upper_ok = out.d_at_delta1 > 0.0;
        const double b2 = data.btilde_norm * data.btilde_norm;
        out.lower_ok = out.d_at_delta2 <
                       -(1.0 / 5.0) * std::pow(zeta, 35.0 / 17.0) / b2;
        const double ct = c_tau(params.tau);
        out.gate_ok = std::pow(data.btilde_norm, 14.0) *
                          std::pow(zeta, 1.0 / 17.0) <=
                      1e-11 / std::pow(ct, 4.0) * std::pow(params.gamma, 12.0);
        out.applicable =
            out.delta1 < std::pow(params.gamma, 3.0) *
                             std::pow(params.h_prime, 4.0 * params.tau + 1.0) /
                             (ct * b2);
        out.window_lower = out.delta2;
        out.window_upper = out.delta1;
    }
    const double ka = mode_abs(k);
    out.theorem_lower =
        lambda * lambda * std::exp(-(13.0 / 6.0) * std::pow(ka, 2.0 * s));
    out.theorem_upper =
        std::sqrt(std::abs(lambda)) * std::exp(-(3.0 / 20.0) * std::pow(ka, s));
    out.verdict = (!out.degenerate && out.upper_ok && out.lower_ok)
                      ? "window"
                      : "inconclusive";
    return out;
}

std::vector<GapRecord> scan_gaps(const SchrodingerCocycle& c, const KSet& ks,
                                 const ScanParams& p) {
    const int n = static_cast<int>(
        std::llround((p.e_max - p.e_min) / p.resolution));
    std::vector<double> es(n + 1), vals(n + 1), errs(n + 1);
    for (int i = 0; i <= n; ++i) es[i] = p.e_min + i * p.resolution;
    // fixed-order merge: worker t owns the indices congruent to t, so the
    // thread count never changes the table
    const int nthreads = std::max(1, std::min(p.threads, n + 1));
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t)
        pool.emplace_back([&, t] {
            SchrodingerCocycle cw = c;
            for (int i = t; i <= n; i += nthreads) {
                cw.energy = es[i];
                RotationEstimate re = rotation_number(cw, p.rot_n, p.phases);
                vals[i] = 1.0 - 2.0 * re.value;
                errs[i] = 2.0 * re.error_bar;
            }
        });
    for (std::thread& th : pool) th.join();
    SchrodingerCocycle cc = c;

    // label candidates: the construction's labels plus the small-|k| lattice
    struct Cand {
        Mode k;
        double value;
    };
    std::vector<Cand> cands;
    for (const KSetLabel& lab : ks.labels) cands.push_back({lab.k, lab.label});
    const int d = static_cast<int>(c.alpha.size());
    if (d == 1) {
        for (int k = -p.label_bound; k <= p.label_bound; ++k)
            if (k != 0)
                cands.push_back({Mode{k}, frac(k * c.alpha[0] / (2.0 * kPi))});
    } else if (d == 2) {
        for (int k1 = -p.label_bound; k1 <= p.label_bound; ++k1)
            for (int k2 = -p.label_bound + std::abs(k1);
                 k2 <= p.label_bound - std::abs(k1); ++k2)
                if (k1 != 0 || k2 != 0)
                    cands.push_back(
                        {Mode{k1, k2},
                         frac((k1 * c.alpha[0] + k2 * c.alpha[1]) /
                              (2.0 * kPi))});
    }

    // enough iterations to resolve growth at the gate's scale
    long long uh_n = 4096;
    while (uh_n < 8.0 / std::log(p.zeta_threshold) && uh_n < 65536) uh_n *= 2;
    auto is_uh = [&](double e) {
        cc.energy = e;
        return uh_test(cc, uh_n, p.zeta_threshold, p.phases).verdict ==
               HyperbolicityVerdict::V::UniformlyHyperbolic;
    };

    std::vector<GapRecord> out;
    int i = 0;
    while (i <= n) {
        int j = i;
        double err = errs[i];
        while (j + 1 <= n) {
            const double tol = 3.0 * std::max(err, errs[j + 1]);
            if (std::abs(vals[j + 1] - vals[i]) > tol) break;
            err = std::max(err, errs[j + 1]);
            ++j;
        }
        if (j == i || i == 0 || j == n) {
            i = std::max(j, i + 1);
            continue;
        }
        double vbar = 0.0;
        for (int t = i; t <= j; ++t) vbar += vals[t];
        vbar /= (j - i + 1);
        // constant-IDS runs at 0 or 1 lie outside the spectrum
        const double margin = std::max(1e-3, 3.0 * err);
        if (vbar < margin || vbar > 1.0 - margin || !is_uh(0.5 * (es[i] + es[j]))) {
            i = j + 1;
            continue;
        }

        GapRecord rec;
        rec.ids_value = vbar;
        // refine the edges: bisection between the last spectral grid point
        // and the first hyperbolic one
        auto bisect = [&](double lo, double hi, bool uh_at_hi) {
            for (int it = 0; it < 60 && hi - lo > p.resolution * 1e-2; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (is_uh(mid) == uh_at_hi)
                    hi = mid;
                else
                    lo = mid;
            }
            return 0.5 * (lo + hi);
        };
        rec.e_minus = is_uh(es[i]) ? bisect(es[i - 1], es[i], true) : es[i];
        {
            // right edge: walk from the hyperbolic side toward the spectrum
            double lo = es[j], hi = es[j + 1];
            for (int it = 0; it < 60 && hi - lo > p.resolution * 1e-2; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (is_uh(mid))
                    lo = mid;
                else
                    hi = mid;
            }
            rec.e_plus = 0.5 * (lo + hi);
        }
        rec.width = rec.e_plus - rec.e_minus;

        double best = 1e300;
        for (const Cand& cd : cands) {
            const double dist = torus_dist_unit(vbar - cd.value);
            if (dist < best) {
                best = dist;
                rec.label_k = cd.k;
                rec.label_value = cd.value;
            }
        }
        rec.labelled = best <= std::max(1e-3, 3.0 * err);
        if (!rec.labelled) {
            rec.label_k.clear();
            rec.label_value = 0.0;
            rec.hypothesis_flags.push_back("unlabelled");
        } else {
            const double ka = mode_abs(rec.label_k);
            rec.pred_lower = c.lambda * c.lambda *
                             std::exp(-(13.0 / 6.0) * std::pow(ka, 2.0 * p.s));
            rec.pred_upper = std::sqrt(std::abs(c.lambda)) *
                             std::exp(-(3.0 / 20.0) * std::pow(ka, p.s));
            rec.hypothesis_flags.push_back("toy-parameters");
            if (rec.width < rec.pred_lower)
                rec.hypothesis_flags.push_back("width-below-window");
            else if (rec.width > rec.pred_upper)
                rec.hypothesis_flags.push_back("width-above-window");
            else
                rec.hypothesis_flags.push_back("width-in-window");
        }
        out.push_back(std::move(rec));
        i = j + 1;
    }
    return out;
}

namespace {
std::string mode_str(const Mode& k) {
    std::ostringstream os;
    for (size_t i = 0; i < k.size(); ++i) os << (i ? ";" : "") << k[i];
    return os.str();
}
std::string flags_str(const std::vector<std::string>& flags) {
    std::ostringstream os;
    for (size_t i = 0; i < flags.size(); ++i) os << (i ? "|" : "") << flags[i];
    return os.str();
}
}  // namespace

std::string gap_table_csv(const std::vector<GapRecord>& records) {
    std::ostringstream os;
    os << "label_k,E_minus,E_plus,width,ids_value,pred_lower,pred_upper,"
          "hypothesis_flags\n";
    os.precision(12);
    for (const GapRecord& r : records)
        os << mode_str(r.label_k) << ',' << r.e_minus << ',' << r.e_plus << ','
           << r.width << ',' << r.ids_value << ',' << r.pred_lower << ','
           << r.pred_upper << ',' << flags_str(r.hypothesis_flags) << '\n';
    return os.str();
}

std::string gap_table_json(const std::vector<GapRecord>& records,
                           const ScanParams& p) {
    nlohmann::json j;
    j["grid"] = {{"e_min", p.e_min},
                 {"e_max", p.e_max},
                 {"resolution", p.resolution},
                 {"rot_n", p.rot_n},
                 {"phases", p.phases},
                 {"zeta_threshold", p.zeta_threshold},
                 {"label_bound", p.label_bound},
                 {"s", p.s}};
    auto& arr = j["gaps"] = nlohmann::json::array();
    for (const GapRecord& r : records)
        arr.push_back({{"label_k", r.label_k},
                       {"labelled", r.labelled},
                       {"e_minus", r.e_minus},
                       {"e_plus", r.e_plus},
                       {"width", r.width},
                       {"ids_value", r.ids_value},
                       {"label_value", r.label_value},
                       {"pred_lower", r.pred_lower},
                       {"pred_upper", r.pred_upper},
                       {"hypothesis_flags", r.hypothesis_flags}});
    return j.dump(2);
}

}  // namespace cantorspec
