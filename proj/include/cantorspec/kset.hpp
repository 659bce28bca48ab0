// Scale schedule N_j, the label set over the annuli Z_j = {N_j <= |k| <
// N_{j+1}}, and the Gevrey potential built from it: coefficients e^{-|k|^s}
// with at most one label per double annulus.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cantorspec/diophantine.hpp"
#include "cantorspec/fourier.hpp"

namespace cantorspec {

struct GevreyParams {
    double s = 0.3;       // Gevrey exponent, in (0, 1/2)
    double lambda = 0.1;  // coupling, 0 < |lambda| <= 1
};

enum class ScaleMode { Exact, Toy };

struct NStarResult {
    double log_value = 0.0;   // log N_* (exact mode), or log of the override
    double value = 0.0;       // materialized value when representable / toy
    bool toy_override = false;
    bool theorem_ok = true;   // false whenever the override undercuts N_*
    std::string dominant;     // which term of the max won
};

// threshold scale: max{200^{1/(1-2s)}, e^{100/s^2}, ln(|alpha|+1), gamma, tau},
// computed in log-space; a toy override is returned verbatim and flagged
NStarResult n_star(const GevreyParams& p, const std::vector<double>& alpha,
                   const DCParams& dc,
                   std::optional<double> toy_override = std::nullopt);

struct ScaleSequence {
    ScaleMode mode = ScaleMode::Toy;
    double base_n = 3.0;
    double s = 0.3;
    std::vector<double> log_nj;  // exact mode: log N_j = (12/s + j - 1) log N
    std::vector<double> nj;      // toy mode values
    bool ratio_bound_ok = false;  // N >= 200^{1/s} (reported, exact mode)

    size_t count() const {
        return mode == ScaleMode::Exact ? log_nj.size() : nj.size();
    }
    double value(size_t j) const { return nj.at(j); }        // toy, 0-based
    double log_value(size_t j) const {
        return mode == ScaleMode::Exact ? log_nj.at(j) : std::log(nj.at(j));
    }
};

// exact mode: N_j = N^{12/s + j - 1} in log-space; toy mode: user sequence or
// the default N_j = n * 3^{j-1}; throws on a non-increasing toy sequence
ScaleSequence scales(double n, double s, int count, ScaleMode mode,
                     const std::vector<double>& toy_sequence = {});

// analyticity width h_j = (1/10) N_{j+1}^{s-1} (toy mode values)
double width_h(const ScaleSequence& sc, size_t j);

struct KSetLabel {
    int j = 0;          // annulus index (1-based, matching N_j)
    Mode k;
    double coeff = 0.0;  // e^{-|k|^s}
    double label = 0.0;  // <k, alpha> / 2 pi mod 1
};

struct KSet {
    GevreyParams params;
    ScaleMode mode = ScaleMode::Toy;
    std::vector<double> scale_values;
    std::vector<KSetLabel> labels;
    double covering_radius = 0.5;
    bool target_reached = false;
};

// greedy epsilon-net construction over IDS-label space [0,1): walk admissible
// annuli (every other one, keeping one label per double annulus), in each
// pick the k whose label best shrinks the covering radius; d in {1, 2}
KSet build_kset(const std::vector<double>& alpha, const ScaleSequence& sc,
                const GevreyParams& p, double target_epsilon);

struct KSetReport {
    bool one_per_double_annulus = true;  // #{N_j <= |k| < N_{j+2}} <= 1
    bool upper_vacancy = true;           // none with 21 N_j / 10 <= |k| < N_{j+1}
    bool floor_respected = true;         // none below N_1 (toy floor)
    bool annulus_membership = true;      // each k_j in its own Z_j
    std::vector<std::string> violations;
    bool pass() const {
        return one_per_double_annulus && upper_vacancy && floor_respected &&
               annulus_membership;
    }
};

KSetReport validate_kset(const KSet& ks, const ScaleSequence& sc);

// v(theta) = sum_j e^{-|k_j|^s} cos<k_j, theta> as a sparse series
ScalarSeries potential_series(const KSet& ks, int dim);

// covering radius of a point set on the circle [0,1): half the largest gap
double covering_radius_circle(std::vector<double> labels);

std::string kset_to_json(const KSet& ks);
KSet kset_from_json(const std::string& text);

}  // namespace cantorspec
