// Reducibility engine for quasi-periodic SL(2) cocycles: resonance
// splitting, the small-divisor homological solve in the frame diagonalizing
// the constant part, the non-resonant / resonant (diagonalize - eliminate -
// rotate) step, and the iteration driver that feeds the Gevrey potential in
// annulus blocks while tracking the accumulated conjugation and its
// half-angle degree shift.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cantorspec/fourier.hpp"
#include "cantorspec/kset.hpp"

namespace cantorspec {

// ---------------------------------------------------------------------------
// resonance splitting

struct ResonanceSplit {
    MatSeries nre;  // modes with |<k,alpha>| >= eta and |2 rho +- <k,alpha>| >= eta
    MatSeries re;   // everything else (always contains the mean)
    std::optional<Mode> resonant_site;  // unique k with |2 rho - <k,alpha>| < eta
    bool multiple_sites = false;        // several candidates within eta
    double eta = 0.0;
    double rho = 0.0;          // rotation angle of `a` when elliptic
    bool a_elliptic = false;   // when false only the first condition applies
};

// exact partition of f at divisor level eta; the rotation-number conditions
// use a's elliptic angle, sites are searched over 0 < |k|_1 <= n_bound
ResonanceSplit split_resonant(const MatSeries& f, const Mat2& a, double eta,
                              double n_bound, const std::vector<double>& alpha);

// ---------------------------------------------------------------------------
// homological equation  Y - A^{-1} Y(. + alpha) A = F

struct HomologicalSolve {
    MatSeries y;
    double residual = 0.0;     // |Y - A^{-1}Y(.+alpha)A - F|_h
    double y_norm = 0.0;       // |Y|_h
    double f_norm = 0.0;       // |F|_h
    double bound_rhs = 0.0;    // 2 eta^{-1} |F|_h
    bool bound_ok = true;      // |Y|_h <= 2 eta^{-1} |F|_h
    double min_divisor = 0.0;  // smallest |1 - e^{i(<k,alpha> + rho_q - rho_p)}|
};

// coefficient-wise solve in the eigenframe of A; entry (p,q) of the k-th
// coefficient is divided by 1 - e^{i<k,alpha>} mu_q / mu_p.  Defective
// (parabolic) A falls back to a direct 4x4 solve per mode.  A divisor below
// 1e-14 throws ("resonant mode leaked": the split failed upstream).
HomologicalSolve solve_homological(const Mat2& a, const MatSeries& f_nre,
                                   const std::vector<double>& alpha, double eta,
                                   double h);

// ---------------------------------------------------------------------------
// one KAM step

struct BoundCheck {
    std::string name;
    double bound = 0.0;
    double measured = 0.0;
    bool pass = true;
};

struct StepReport {
    enum class Case { NonResonant, Resonant, Rejected, Trivial } kind =
        Case::Trivial;
    std::vector<BoundCheck> checks;
    double conj_residual = 0.0;  // conjugation identity at random angles
    double eps_in = 0.0, eps_out = 0.0;
    double eta = 0.0;
    double trunc_n = 0.0;
    std::optional<Mode> site;
    std::string note;
    std::string to_json() const;  // one JSON line for the step trace
};

struct KamParams {
    std::vector<double> alpha;
    double h = 0.1;        // width at which the incoming tail is measured
    double h_next = 0.05;  // width of the outgoing tail
    double eta = 0.0;      // 0: eta = clamp(eps^{1/10}, eta_min, eta_max)
    double eta_min = 1e-8, eta_max = 1e-2;
    double trunc_n = 0.0;  // 0: N = 2 |ln eps| / (h - h_next)
    double gate = 0.0;     // 0: min(gate_cap, (h-h')^{4 tau}/(gate_scale ||A||^4))
    double gate_cap = 1e-4;
    double gate_scale = 1e3;
    double tau = 2.0;
    double resonance_bound = 40.0;  // l1 ball for the site search
    double max_degree = 0.0;        // product degree cap; 0: automatic
    unsigned seed = 12345;          // random angles for the conjugation check
    bool force_resonant = false;    // take the resonant branch when a site exists
};

// state of the conjugated cocycle  Btilde(.+alpha)^{-1} S Btilde(.) = A e^{F}.
// Btilde = core * Z_{-ktilde} with integer-mode core and the half-angle
// rotation Z_m(theta) = diag(e^{-i<m,theta>/2}, e^{i<m,theta>/2}); every
// series lives in the SU(1,1) frame.
struct KamState {
    int j = 0;
    Mat2 a;                 // constant part
    MatSeries f;            // tail
    MatSeries btilde_core;  // accumulated conjugation, integer modes
    Mode ktilde;            // degree shift
    double h = 0.0;         // current width
    // diagnostics of the conjugated generator W_j = Ad(Btilde).W_E
    double xi = 0.0;       // |<w_j>|
    double big_m = 0.0;    // |w_j|_h + |u_j|_h
    double small_m = 0.0;  // sup_{|k| > |ktilde|} (|w^(k)| + |u^(k)|) / 2
    double rho = 0.0;      // elliptic angle of a (0 when not elliptic)
    cplx corner_b{0.0};    // off-diagonal corner of a
    std::vector<std::string> case_history;

    Mat2 btilde_at(const std::vector<double>& theta) const;
};

KamState kam_initial_state(const Mat2& a0, int dim);

// one step: non-resonant (eliminate, push the mean into A) or resonant
// (diagonalize, eliminate, rotate by Z at the site, shift the degree)
std::pair<KamState, StepReport> kam_step(const KamState& state,
                                         const KamParams& params);

// ---------------------------------------------------------------------------
// iteration driver

struct KamIterParams {
    int max_steps = 6;
    double tail_stop = 1e-13;   // converged when tail + pending potential below
    double gate = 0.5;          // toy-scale smallness gate (see kam_step)
    double tau = 2.0;
    double eta_max = 1e-2;
    double resonance_bound = 40.0;
    unsigned seed = 2024;
    double conj_budget = 1e-8;  // per-step identity budget, times (1 + ||A||)
};

struct KamMonitor {
    std::string name;
    double bound = 0.0, measured = 0.0;
    bool pass = true;
};

struct KamRun {
    KamState state;
    std::vector<StepReport> reports;
    std::vector<std::vector<KamMonitor>> monitors;  // per accepted step
    std::string stop_reason;
    std::string trace_json() const;  // JSON lines, one per step
};

// drive the scheme for the Schrodinger cocycle at energy e: start from the
// exact nilpotent factorization S = A_E e^{lambda v Wt}, feed the annulus
// blocks v_j one step at a time through Ad(Btilde).(v_j W_E), classify the
// constant part as non-resonant / resonant, and record the scheme's
// inequalities as monitors
KamRun kam_iterate(const std::vector<double>& alpha, double energy,
                   double lambda, const KSet& kset, const ScaleSequence& sc,
                   const KamIterParams& params);

// ---------------------------------------------------------------------------
// helpers shared with the gap machinery

// Z_{-m} X Z_{m}: shifts the (1,2) modes by +m and the (2,1) modes by -m
MatSeries half_conj(const MatSeries& x, const Mode& m);

// Z_m(theta) as a matrix
Mat2 z_rotation(const Mode& m, const std::vector<double>& theta);

// constant-coefficient conjugation p f p^{-1} applied coefficient-wise
MatSeries frame_conj(const Mat2& p, const MatSeries& f);

// per-coefficient frame conversion of a matrix series
MatSeries series_convert_frame(const MatSeries& f, Frame target);

// Btilde as a real-frame series on the doubled mode lattice (modes of
// theta/2), absorbing the half-angle shift exactly
MatSeries btilde_doubled_real(const KamState& state);

}  // namespace cantorspec
