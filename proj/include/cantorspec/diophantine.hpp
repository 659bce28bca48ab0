// Small-divisor arithmetic: continued fractions and convergents, torus
// distances, Diophantine-condition margins, resonance-site search, and the
// best-return-time window used by the scale schedule.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cantorspec/fourier.hpp"

namespace cantorspec {

struct ContinuedFraction {
    double alpha = 0.0;           // fractional part actually expanded
    long double alpha_l = 0.0L;   // same, extended precision (distance checks)
    std::vector<std::int64_t> a;  // partial quotients a_1, a_2, ...
    std::vector<std::int64_t> p;  // p_0, p_1, ... (p_0 = 0, p_1 = 1)
    std::vector<std::int64_t> q;  // q_0, q_1, ... (q_0 = 1, q_1 = a_1)
    bool terminating = false;     // alpha rational to working precision
};

// expansion of frac(alpha) to `depth` partial quotients (or fewer if it
// terminates / denominators would overflow)
ContinuedFraction cf_expand(double alpha, int depth);

// distance to the nearest integer, in [0, 1/2]
double torus_dist_unit(double x);
long double torus_dist_unit_l(long double x);
// distance to the nearest multiple of 2*pi, in [0, pi]
double torus_dist_2pi(double x);

struct DCParams {
    double gamma = 0.1;
    double tau = 2.0;
};

// min over 0 < |n|_1 <= k_max of |n|^tau * dist(<n, alpha>, 2 pi Z) / gamma;
// > 1 certifies the Diophantine condition up to k_max
double dc_margin(const std::vector<double>& alpha, const DCParams& dc, int k_max);

struct ResonanceHit {
    Mode k;
    double dist = 0.0;   // |2 rho - <k, alpha>| mod 2 pi
    bool multiple = false;  // several sites within eta (non-DC regime)
};

// the unique k with 0 < |k|_1 <= bound and |2 rho - <k, alpha>| mod 2 pi
// below eta, if any; smallest |k| wins with a multiplicity flag otherwise
std::optional<ResonanceHit> find_resonance(double rho,
                                           const std::vector<double>& alpha,
                                           double bound, double eta);

struct ReturnTime {
    std::int64_t q = 0;        // the return time q*
    bool is_sum = false;       // q* = q_m + q_{m+1} rather than a single q_m
    bool window_ok = false;    // q* in [21 N_j / 20, 41 N_j / 20]
    bool small_ok = false;     // ||q* alpha|| < 3 / q_{n_j}
    std::int64_t q_nj = 0;     // q_{n_j} < N_j <= q_{n_j + 1}
    double dist = 0.0;         // ||q* alpha||
};

// return time in the window [21 N_j / 20, 41 N_j / 20] with small
// ||q* alpha||; throws std::runtime_error when the expansion depth is
// insufficient or terminates
ReturnTime best_return_time(const ContinuedFraction& cf, double n_j);

}  // namespace cantorspec
