#include "cantorspec/kset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace cantorspec {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

double alpha_abs(const std::vector<double>& alpha) {
    double s = 0.0;
    for (double a : alpha) s += a * a;
    return std::sqrt(s);
}
}  // namespace

NStarResult n_star(const GevreyParams& p, const std::vector<double>& alpha,
                   const DCParams& dc, std::optional<double> toy_override) {
    if (!(p.s > 0.0 && p.s < 0.5))
        throw std::invalid_argument("s outside (0, 1/2)");
    struct Term {
        const char* name;
        double log_value;
    };
    const Term terms[] = {
        {"200^(1/(1-2s))", std::log(200.0) / (1.0 - 2.0 * p.s)},
        {"e^(100/s^2)", 100.0 / (p.s * p.s)},
        {"ln(|alpha|+1)", std::log(std::log(alpha_abs(alpha) + 1.0))},
        {"gamma", std::log(dc.gamma)},
        {"tau", std::log(dc.tau)},
    };
    NStarResult out;
    out.log_value = -1e300;
    for (const Term& t : terms) {
        if (std::isfinite(t.log_value) && t.log_value > out.log_value) {
            out.log_value = t.log_value;
            out.dominant = t.name;
        }
    }
    out.value = out.log_value < 700.0 ? std::exp(out.log_value) : 0.0;
    if (toy_override) {
        out.toy_override = true;
        out.value = *toy_override;
        out.theorem_ok = std::log(*toy_override) >= out.log_value;
        out.log_value = std::log(*toy_override);
    }
    return out;
}

ScaleSequence scales(double n, double s, int count, ScaleMode mode,
                     const std::vector<double>& toy_sequence) {
    if (n < 2.0 || count < 1) throw std::invalid_argument("need n >= 2, count >= 1");
    ScaleSequence sc;
    sc.mode = mode;
    sc.base_n = n;
    sc.s = s;
    if (mode == ScaleMode::Exact) {
        const double logn = std::log(n);
        for (int j = 1; j <= count; ++j)
            sc.log_nj.push_back((12.0 / s + j - 1) * logn);
        sc.ratio_bound_ok = logn >= std::log(200.0) / s;
    } else {
        if (!toy_sequence.empty()) {
            sc.nj = toy_sequence;
        } else {
            double v = n;
            for (int j = 0; j < count; ++j, v *= 3.0) sc.nj.push_back(v);
        }
        for (size_t i = 0; i + 1 < sc.nj.size(); ++i)
            if (sc.nj[i + 1] <= sc.nj[i])
                throw std::invalid_argument("toy scale sequence not increasing");
        sc.ratio_bound_ok = false;  // toy mode never satisfies the theorem bound
    }
    return sc;
}

double width_h(const ScaleSequence& sc, size_t j) {
    // h_j = (1/10) N_{j+1}^{s-1}; j is 1-based to match N_j
    const double njp1 = sc.value(j);  // 0-based access to N_{j+1}
    return 0.1 * std::pow(njp1, sc.s - 1.0);
}

namespace {

// (covering radius, sum of squared gaps): the second component breaks greedy
// ties in favour of balanced splits
std::pair<double, double> gap_profile(std::vector<double>& labels) {
    if (labels.empty()) return {0.5, 1.0};
    for (double& x : labels) x -= std::floor(x);
    std::sort(labels.begin(), labels.end());
    double biggest = labels.front() + 1.0 - labels.back();
    double ss = biggest * biggest;
    for (size_t i = 0; i + 1 < labels.size(); ++i) {
        const double g = labels[i + 1] - labels[i];
        biggest = std::max(biggest, g);
        ss += g * g;
    }
    return {biggest / 2.0, ss};
}

}  // namespace

double covering_radius_circle(std::vector<double> labels) {
    return gap_profile(labels).first;
}

namespace {

// enumerate the l1 shell lo <= |k| < hi in Z^d (d = 1 or 2), canonical
// representatives only (k and -k give complex-conjugate labels; keep both,
// the label of -k is 1 - label(k) and may cover a different arc)
std::vector<Mode> shell_modes(int d, double lo, double hi) {
    std::vector<Mode> out;
    const int ihi = static_cast<int>(std::ceil(hi));
    if (d == 1) {
        for (int m = static_cast<int>(std::ceil(lo)); m < hi; ++m) {
            if (m < lo) continue;
            out.push_back({m});
            out.push_back({-m});
        }
    } else if (d == 2) {
        for (int a = -ihi; a <= ihi; ++a)
            for (int b = -ihi; b <= ihi; ++b) {
                const int mag = std::abs(a) + std::abs(b);
                if (mag >= lo && mag < hi) out.push_back({a, b});
            }
    } else {
        throw std::invalid_argument("label search supports d in {1, 2}");
    }
    return out;
}

}  // namespace

KSet build_kset(const std::vector<double>& alpha, const ScaleSequence& sc,
                const GevreyParams& p, double target_epsilon) {
    if (sc.mode != ScaleMode::Toy)
        throw std::invalid_argument("exact-mode magnitudes are not enumerable");
    const int d = static_cast<int>(alpha.size());
    KSet ks;
    ks.params = p;
    ks.mode = sc.mode;
    ks.scale_values = sc.nj;

    std::vector<double> labels;
    ks.covering_radius = 0.5;
    // every other annulus keeps one label per double annulus (k-2.10)
    for (size_t j = 0; j + 1 < sc.nj.size(); j += 2) {
        const double nj = sc.nj[j];
        const double cap = std::min(21.0 * nj / 10.0, sc.nj[j + 1]);
        std::vector<Mode> cand = shell_modes(d, nj, cap);
        if (cand.empty()) continue;
        double best_rad = 1e300, best_ss = 1e300;
        Mode best_k;
        double best_label = 0.0;
        for (const Mode& k : cand) {
            const double lab =
                mode_dot(k, alpha) / kTwoPi - std::floor(mode_dot(k, alpha) / kTwoPi);
            std::vector<double> trial = labels;
            trial.push_back(lab);
            const auto [r, ss] = gap_profile(trial);
            if (r < best_rad - 1e-12 ||
                (r < best_rad + 1e-12 && ss < best_ss - 1e-15)) {
                best_rad = r;
                best_ss = ss;
                best_k = k;
                best_label = lab;
            }
        }
        labels.push_back(best_label);
        KSetLabel L;
        L.j = static_cast<int>(j) + 1;
        L.k = best_k;
        L.coeff = std::exp(-std::pow(mode_abs(best_k), p.s));
        L.label = best_label;
        ks.labels.push_back(L);
        ks.covering_radius = best_rad;
        if (best_rad <= target_epsilon) {
            ks.target_reached = true;
            break;
        }
    }
    return ks;
}

KSetReport validate_kset(const KSet& ks, const ScaleSequence& sc) {
    KSetReport rep;
    const auto& nj = sc.nj;
    auto note = [&](const std::string& s) { rep.violations.push_back(s); };

    for (const KSetLabel& L : ks.labels) {
        const int mag = mode_abs(L.k);
        if (!nj.empty() && mag < nj.front()) {
            rep.floor_respected = false;
            note("label below floor: |k|=" + std::to_string(mag));
        }
        const size_t j0 = static_cast<size_t>(L.j - 1);
        if (j0 + 1 < nj.size() && !(nj[j0] <= mag && mag < nj[j0 + 1])) {
            rep.annulus_membership = false;
            note("label outside its annulus: j=" + std::to_string(L.j));
        }
    }
    for (size_t j = 0; j + 2 < nj.size(); ++j) {
        int count = 0;
        for (const KSetLabel& L : ks.labels) {
            const int mag = mode_abs(L.k);
            if (nj[j] <= mag && mag < nj[j + 2]) ++count;
        }
        if (count > 1) {
            rep.one_per_double_annulus = false;
            note("two labels within [N_j, N_{j+2}), j=" + std::to_string(j + 1));
        }
    }
    for (size_t j = 0; j + 1 < nj.size(); ++j) {
        for (const KSetLabel& L : ks.labels) {
            const int mag = mode_abs(L.k);
            if (21.0 * nj[j] / 10.0 <= mag && mag < nj[j + 1]) {
                rep.upper_vacancy = false;
                note("label in the vacant band of annulus " + std::to_string(j + 1));
            }
        }
    }
    return rep;
}

ScalarSeries potential_series(const KSet& ks, int dim) {
    ScalarSeries v(dim);
    for (const KSetLabel& L : ks.labels) {
        v.add_mode(L.k, 0.5 * L.coeff);
        v.add_mode(mode_neg(L.k), 0.5 * L.coeff);
    }
    return v;
}

std::string kset_to_json(const KSet& ks) {
    nlohmann::json j;
    j["s"] = ks.params.s;
    j["lambda"] = ks.params.lambda;
    j["mode"] = ks.mode == ScaleMode::Toy ? "toy" : "exact";
    j["scales"] = ks.scale_values;
    j["covering_radius"] = ks.covering_radius;
    j["target_reached"] = ks.target_reached;
    auto& arr = j["labels"] = nlohmann::json::array();
    for (const KSetLabel& L : ks.labels)
        arr.push_back({{"j", L.j}, {"k", L.k}, {"coeff", L.coeff}, {"label", L.label}});
    return j.dump(2);
}

KSet kset_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    KSet ks;
    ks.params.s = j.at("s").get<double>();
    ks.params.lambda = j.at("lambda").get<double>();
    ks.mode = j.at("mode").get<std::string>() == "toy" ? ScaleMode::Toy
                                                       : ScaleMode::Exact;
    ks.scale_values = j.at("scales").get<std::vector<double>>();
    ks.covering_radius = j.value("covering_radius", 0.5);
    ks.target_reached = j.value("target_reached", false);
    for (const auto& e : j.at("labels")) {
        KSetLabel L;
        L.j = e.at("j").get<int>();
        L.k = e.at("k").get<Mode>();
        L.coeff = e.at("coeff").get<double>();
        L.label = e.value("label", 0.0);
        ks.labels.push_back(std::move(L));
    }
    return ks;
}

}  // namespace cantorspec
