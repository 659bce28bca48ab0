#include "cantorspec/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cantorspec/diophantine.hpp"

namespace cantorspec {

namespace {
constexpr double kPi = 3.14159265358979323846;

double wrap_pm_pi(double x) {
    x = std::fmod(x, 2.0 * kPi);
    if (x <= -kPi) x += 2.0 * kPi;
    if (x > kPi) x -= 2.0 * kPi;
    return x;
}

std::vector<double> theta_step(std::vector<double> theta,
                               const std::vector<double>& alpha) {
    for (size_t i = 0; i < theta.size(); ++i) theta[i] += alpha[i];
    return theta;
}
}  // namespace

Mat2 step_matrix(const SchrodingerCocycle& c, const std::vector<double>& theta) {
    const double v = evaluate(c.potential, theta).real();
    return {c.energy - c.lambda * v, -1.0, 1.0, 0.0, Frame::Real};
}

TransferResult transfer_product(const SchrodingerCocycle& c, long long n,
                                std::vector<double> theta0) {
    TransferResult out;
    out.m = Mat2::identity();
    if (n >= 0) {
        for (long long i = 0; i < n; ++i) {
            out.m = step_matrix(c, theta0) * out.m;
            const double nm = out.m.norm();
            out.m = out.m * (1.0 / nm);
            out.log_factor += std::log(nm);
            theta0 = theta_step(theta0, c.alpha);
        }
    } else {
        // A^{(-n)}(theta) = (A^{(n)}(theta - n alpha))^{-1}
        std::vector<double> back = theta0;
        for (size_t i = 0; i < back.size(); ++i) back[i] += n * c.alpha[i];
        TransferResult fwd = transfer_product(c, -n, back);
        out.m = fwd.m.inverse();
        const double nm = out.m.norm();
        out.m = out.m * (1.0 / nm);
        out.log_factor = -fwd.log_factor + std::log(nm);
    }
    return out;
}

double lift_advance(const Mat2& a, double& phi) {
    const double ar = a.a.real(), br = a.b.real(), cr = a.c.real(),
                 dr = a.d.real();
    const double t = phi / 2.0;
    const double x = std::cos(t), y = std::sin(t);
    const double wx = ar * x + br * y, wy = cr * x + dr * y;
    const double phi_new_raw = 2.0 * std::atan2(wy, wx);
    // polar decomposition A = R(theta_p) * S with S symmetric positive
    // definite; S moves the doubled angle by strictly less than pi, so the
    // branch below is the continuous lift
    const double theta_p = std::atan2(cr - br, ar + dr);
    const double adv = 2.0 * theta_p + wrap_pm_pi(phi_new_raw - phi - 2.0 * theta_p);
    phi += adv;
    return adv;
}

RotationEstimate rotation_number_map(const std::vector<double>& alpha,
                                     const MatMap& a, long long n, int phases) {
    RotationEstimate est;
    if (phases < 1) phases = 1;
    double sum = 0.0, lo = 1e300, hi = -1e300;
    for (int p = 0; p < phases; ++p) {
        std::vector<double> theta(alpha.size(), 2.0 * kPi * p / phases);
        double phi = 0.0;
        double total = 0.0;
        for (long long i = 0; i < n; ++i) {
            total += lift_advance(a(theta), phi);
            theta = theta_step(theta, alpha);
        }
        const double r = total / (4.0 * kPi * n);  // turns
        sum += r;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    est.raw = sum / phases;
    est.spread = phases > 1 ? hi - lo : 0.0;
    est.error_bar = std::max(est.spread, 1.0 / static_cast<double>(n));
    double r = est.raw - std::floor(est.raw);
    est.value = r <= 0.5 ? r : 1.0 - r;
    return est;
}

RotationEstimate rotation_number(const SchrodingerCocycle& c, long long n,
                                 int phases) {
    return rotation_number_map(
        c.alpha, [&](const std::vector<double>& th) { return step_matrix(c, th); },
        n, phases);
}

double lyapunov_exponent(const SchrodingerCocycle& c, long long n, int phases) {
    if (phases < 1) phases = 1;
    double sum = 0.0;
    for (int p = 0; p < phases; ++p) {
        std::vector<double> theta(c.alpha.size(), 2.0 * kPi * p / phases);
        TransferResult tr = transfer_product(c, n, theta);
        sum += (tr.log_factor + std::log(tr.m.norm())) / n;
    }
    return sum / phases;
}

HyperbolicityVerdict uh_test(const SchrodingerCocycle& c, long long n_max,
                             double zeta_threshold, int phases) {
    if (zeta_threshold <= 1.0)
        throw std::invalid_argument("zeta threshold must exceed 1");
    HyperbolicityVerdict out;
    const double logz = std::log(zeta_threshold);
    bool uniform = true;
    double min_growth = 1e300, max_growth = -1e300;
    for (long long n = 16; n <= n_max; n *= 2) {
        min_growth = 1e300;
        max_growth = -1e300;
        for (int p = 0; p < phases; ++p) {
            std::vector<double> theta(c.alpha.size(), 2.0 * kPi * p / phases);
            TransferResult tr = transfer_product(c, n, theta);
            const double g = (tr.log_factor + std::log(tr.m.norm())) / n;
            min_growth = std::min(min_growth, g);
            max_growth = std::max(max_growth, g);
        }
        out.iterations = n;
        if (min_growth < logz) uniform = false;
    }
    out.growth_rate = min_growth;

    // rotation locking: 2 rho within tolerance of some <k, alpha> mod 2 pi
    RotationEstimate re =
        rotation_number(c, std::min<long long>(n_max, 20000), phases);
    const double rho_rad = 2.0 * kPi * re.value;
    const double tol = std::max(1e-3, 4.0 * kPi * re.error_bar);
    if (torus_dist_2pi(2.0 * rho_rad) < tol) {
        out.rotation_locked = true;
    } else {
        auto hit = find_resonance(rho_rad, c.alpha, 12, tol);
        out.rotation_locked = hit.has_value();
    }

    if (uniform && out.rotation_locked)
        out.verdict = HyperbolicityVerdict::V::UniformlyHyperbolic;
    else if (max_growth < 0.25 * logz)
        out.verdict = HyperbolicityVerdict::V::NotUH;
    else
        out.verdict = HyperbolicityVerdict::V::Inconclusive;
    return out;
}

double ids(const SchrodingerCocycle& c, long long n, int phases) {
    return 1.0 - 2.0 * rotation_number(c, n, phases).value;
}

int finite_section_count_below(const SchrodingerCocycle& c, int n, double theta,
                               double x) {
    int count = 0;
    double q = 1.0;
    std::vector<double> th(c.alpha.size(), theta);
    for (int i = 0; i < n; ++i) {
        const double d = c.lambda * evaluate(c.potential, th).real();
        const double piv = (i == 0) ? d - x : d - x - 1.0 / q;
        q = piv == 0.0 ? 1e-300 : piv;
        if (q < 0.0) ++count;
        th = theta_step(th, c.alpha);
    }
    return count;
}

std::vector<double> finite_section_spectrum(const SchrodingerCocycle& c, int n,
                                            double theta) {
    if (n > 10000) throw std::invalid_argument("finite section too large");
    // Gershgorin interval
    double dmin = 1e300, dmax = -1e300;
    std::vector<double> th(c.alpha.size(), theta);
    for (int i = 0; i < n; ++i) {
        const double d = c.lambda * evaluate(c.potential, th).real();
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
        th = theta_step(th, c.alpha);
    }
    const double lo0 = dmin - 2.5, hi0 = dmax + 2.5;
    std::vector<double> eig(n);
    for (int j = 0; j < n; ++j) {
        double lo = lo0, hi = hi0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (finite_section_count_below(c, n, theta, mid) >= j + 1)
                hi = mid;
            else
                lo = mid;
        }
        eig[j] = 0.5 * (lo + hi);
    }
    return eig;
}

}  // namespace cantorspec
