// Gap detection and labelling on the IDS, plus the Moser-Poschel probe at a
// gap edge: quadratic averages of the conjugator entries, the b0/b1 pencil,
// the d(delta) determinant with its exact-determinant identity, and the
// delta1/delta2 sign tests against the predicted width window.
#pragma once

#include <string>
#include <vector>

#include "cantorspec/cocycle.hpp"
#include "cantorspec/fourier.hpp"
#include "cantorspec/kset.hpp"

namespace cantorspec {

// ---------------------------------------------------------------------------
// Moser-Poschel reduction data

struct MoserPoschelData {
    double zeta = 0.0;       // corner of the parabolic normal form
    double avg_b11sq = 0.0;  // [B11^2]
    double avg_b11b12 = 0.0;
    double avg_b12sq = 0.0;
    Mat2 b0, b1;               // real frame, per the first-order pencil
    double btilde_norm = 1.0;  // |Btilde|_{h'}
    bool degenerate = false;   // [B12^2] ~ 0: the lower-bound test is void
    bool lower_bound_ok = true;  // [B11^2] >= (2 |Btilde|)^{-2}
};

// quadratic averages from the real-frame conjugator series (zero modes of
// entry products), and the pencil b0 = [[0,zeta],[0,0]], b1 per Lemma 6.1
MoserPoschelData mp_reduce(const MatSeries& btilde_real, double zeta, double h);

struct MpDet {
    double d_paper = 0.0;    // -delta [B11^2] zeta + delta^2 ([B11^2][B12^2]-[B11B12]^2)
    double det_exact = 0.0;  // det(b0 - delta b1)
    double identity_defect = 0.0;  // |det_exact - d_paper + (1/4) delta^2 zeta^2 [B11^2]^2|
};

MpDet mp_det(const MoserPoschelData& data, double delta);

// ---------------------------------------------------------------------------
// probe verdict

struct MpProbeParams {
    double tau = 2.0;
    double gamma = 0.1;
    double h_prime = 0.05;
};

struct GapBounds {
    double delta1 = 0.0, delta2 = 0.0;  // zeta^{16/17}, zeta^{18/17}
    double d_at_delta1 = 0.0, d_at_delta2 = 0.0;
    bool upper_ok = false;  // d(delta1) > 0: width <= delta1
    bool lower_ok = false;  // d(delta2) below -(1/5) zeta^{35/17} |B|^{-2}: width >= delta2
    bool gate_ok = false;   // smallness gate |B|^14 zeta^{1/17} <= 1e-11 c_tau^{-4} gamma^12
    bool applicable = false;  // delta1 within the perturbation lemma's range
    bool degenerate = false;
    std::string verdict;  // "window" or "inconclusive"
    double window_lower = 0.0, window_upper = 0.0;    // (delta2, delta1)
    double theorem_lower = 0.0, theorem_upper = 0.0;  // |lambda|^2 e^{-(13/6)|k|^{2s}} .. sqrt|lambda| e^{-(3/20)|k|^s}
};

GapBounds mp_probe(const MoserPoschelData& data, double lambda, const Mode& k,
                   double s, const MpProbeParams& params = {});

// ---------------------------------------------------------------------------
// gap scan over an energy window

struct GapRecord {
    Mode label_k;  // empty when unlabelled
    bool labelled = false;
    double e_minus = 0.0, e_plus = 0.0;
    double width = 0.0;
    double ids_value = 0.0;
    double label_value = 0.0;  // <k,alpha>/2pi mod 1
    double pred_lower = 0.0, pred_upper = 0.0;  // theorem window when labelled
    std::vector<std::string> hypothesis_flags;
};

struct ScanParams {
    double e_min = -2.5, e_max = 2.5;
    double resolution = 0.02;  // energy grid spacing
    long long rot_n = 20000;   // rotation-number iterations per grid point
    int phases = 4;
    // uniform-hyperbolicity growth gate; shallow toy gaps carry Lyapunov
    // exponents of a few 1e-3, so the gate must sit well below that
    double zeta_threshold = 1.0005;
    int label_bound = 8;            // extra label candidates with |k|_1 <= bound
    double s = 0.3;                 // Gevrey exponent for the predicted window
    int threads = 1;                // grid workers; never changes the results
};

// detect IDS plateaus near admissible labels, refine the edges by bisection
// on the hyperbolicity test, and label each gap
std::vector<GapRecord> scan_gaps(const SchrodingerCocycle& c, const KSet& ks,
                                 const ScanParams& params);

std::string gap_table_csv(const std::vector<GapRecord>& records);
std::string gap_table_json(const std::vector<GapRecord>& records,
                           const ScanParams& params);

}  // namespace cantorspec
