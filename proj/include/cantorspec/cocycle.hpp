// Schrodinger cocycle dynamics: renormalized transfer products, the fibered
// rotation number (via a continuous lift through polar decomposition),
// Lyapunov exponent, three-valued uniform-hyperbolicity verdicts, the IDS,
// and an independent finite-section tridiagonal eigensolver.
#pragma once

#include <functional>
#include <vector>

#include "cantorspec/fourier.hpp"

namespace cantorspec {

struct SchrodingerCocycle {
    std::vector<double> alpha;  // frequency, radians
    double lambda = 0.0;
    ScalarSeries potential;     // real scalar series
    double energy = 0.0;
};

// one-step matrix [[E - lambda v(theta), -1], [1, 0]]
Mat2 step_matrix(const SchrodingerCocycle& c, const std::vector<double>& theta);

struct TransferResult {
    Mat2 m;               // unit-operator-norm representative
    double log_factor = 0.0;  // actual product = e^{log_factor} * m
};

// n-step product S(theta + (n-1) alpha) ... S(theta); negative n through the
// inverse-product convention
TransferResult transfer_product(const SchrodingerCocycle& c, long long n,
                                std::vector<double> theta0);

struct RotationEstimate {
    double value = 0.0;      // representative in [0, 1/2], turns
    double raw = 0.0;        // unfolded mean over phases, turns
    double error_bar = 0.0;  // max(spread over phases, 1/n)
    double spread = 0.0;
};

using MatMap = std::function<Mat2(const std::vector<double>&)>;

// rotation number of the cocycle (alpha, A) by Birkhoff-averaging the lift
// advance over `phases` equidistributed starting points
RotationEstimate rotation_number_map(const std::vector<double>& alpha,
                                     const MatMap& a, long long n, int phases);
RotationEstimate rotation_number(const SchrodingerCocycle& c, long long n,
                                 int phases);

double lyapunov_exponent(const SchrodingerCocycle& c, long long n, int phases);

struct HyperbolicityVerdict {
    enum class V { UniformlyHyperbolic, NotUH, Inconclusive } verdict =
        V::Inconclusive;
    double growth_rate = 0.0;  // min over phases at the deepest rung
    long long iterations = 0;
    bool rotation_locked = false;
};

// growth-ladder test: uniformly hyperbolic needs per-phase growth above
// log(zeta) at every rung plus a rotation number locked to a half-integer
// combination of the frequencies
HyperbolicityVerdict uh_test(const SchrodingerCocycle& c, long long n_max,
                             double zeta_threshold, int phases);

// integrated density of states N(E) = 1 - 2 rho(E)
double ids(const SchrodingerCocycle& c, long long n, int phases);

// number of eigenvalues of the n x n finite section below x (Sturm count)
int finite_section_count_below(const SchrodingerCocycle& c, int n, double theta,
                               double x);

// all eigenvalues of the n x n symmetric tridiagonal section, sorted,
// by bisection on the Sturm count
std::vector<double> finite_section_spectrum(const SchrodingerCocycle& c, int n,
                                            double theta);

// the continuous-lift advance of the doubled projective angle phi under a
// real SL(2,R) matrix: exact 2*theta_polar plus a bounded symmetric part
double lift_advance(const Mat2& a, double& phi);

}  // namespace cantorspec
