#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cantorspec/diophantine.hpp"

using namespace cantorspec;

namespace {
const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;
std::mt19937_64 rng(4242);
double urand(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng);
}
}  // namespace

TEST_CASE("golden mean expansion") {
    ContinuedFraction cf = cf_expand(kGolden, 20);
    CHECK(!cf.terminating);
    REQUIRE(cf.a.size() == 20);
    for (auto a : cf.a) CHECK(a == 1);
    // Fibonacci denominators: 1, 1, 2, 3, 5, 8, ...
    std::int64_t f0 = 1, f1 = 1;
    CHECK(cf.q[0] == 1);
    CHECK(cf.q[1] == 1);
    for (size_t i = 2; i < cf.q.size(); ++i) {
        std::int64_t f2 = f0 + f1;
        CHECK(cf.q[i] == f2);
        f0 = f1;
        f1 = f2;
    }
}

TEST_CASE("rational input terminates") {
    ContinuedFraction cf = cf_expand(1.0 / 3.0, 15);
    CHECK(cf.terminating);
    CHECK(cf.q.back() == 3);
}

TEST_CASE("convergent quality on random alphas") {
    for (int i = 0; i < 1000; ++i) {
        const double alpha = urand(1e-3, 1.0 - 1e-3);
        ContinuedFraction cf = cf_expand(alpha, 15);
        for (size_t n = 1; n + 1 < cf.q.size(); ++n) {
            // a double input is secretly rational; past ~1e7 the convergents
            // resolve that rational and the irrationality bounds break down
            if (cf.q[n + 1] > 10000000) break;
            const double dist =
                (double)torus_dist_unit_l((long double)cf.q[n] * cf.alpha_l);
            // two-sided convergent bound (the printed lower bound has a sign
            // typo; the standard form uses q_n + q_{n+1})
            CHECK(dist <= 1.0 / cf.q[n + 1] + 1e-15);
            CHECK(dist > 1.0 / double(cf.q[n] + cf.q[n + 1]) - 1e-12);
        }
    }
}

TEST_CASE("best approximation property") {
    ContinuedFraction cf = cf_expand(kGolden, 25);
    // ||k alpha|| >= ||q_{n-1} alpha|| for 1 <= k < q_n
    size_t n = 0;
    while (n < cf.q.size() && cf.q[n] <= 10000) ++n;
    --n;
    const double ref =
        (double)torus_dist_unit_l((long double)cf.q[n - 1] * cf.alpha_l);
    for (std::int64_t k = 1; k < cf.q[n]; ++k) {
        CHECK((double)torus_dist_unit_l((long double)k * cf.alpha_l) >=
              ref - 1e-15);
    }
}

TEST_CASE("torus distances") {
    CHECK(torus_dist_unit(0.5) == doctest::Approx(0.5));
    CHECK(torus_dist_unit(7.25) == doctest::Approx(0.25));
    for (int i = 0; i < 200; ++i) {
        const double x = urand(-20.0, 20.0);
        CHECK(torus_dist_unit(x) == doctest::Approx(torus_dist_unit(-x)).epsilon(1e-15));
        CHECK(torus_dist_unit(x) ==
              doctest::Approx(torus_dist_unit(x + 1.0)).epsilon(1e-13));
        CHECK(torus_dist_unit(x) >= 0.0);
        CHECK(torus_dist_unit(x) <= 0.5);
    }
    CHECK(torus_dist_2pi(2.0 * M_PI + 0.3) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("dc margin") {
    std::vector<double> alpha{2.0 * M_PI * kGolden};
    DCParams dc{0.1, 2.0};
    CHECK(dc_margin(alpha, dc, 100) > 1.0);
    // monotone non-increasing in k_max
    double prev = dc_margin(alpha, dc, 10);
    for (int km : {20, 40, 80}) {
        double m = dc_margin(alpha, dc, km);
        CHECK(m <= prev + 1e-15);
        prev = m;
    }
    // exact rational dependence: <n0, alpha> in 2 pi Z
    std::vector<double> bad{2.0 * M_PI / 5.0};
    CHECK(dc_margin(bad, DCParams{0.1, 2.0}, 10) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("resonance search") {
    std::vector<double> alpha{2.0 * M_PI * kGolden, 2.0 * M_PI * std::sqrt(2.0) / 2.0};
    Mode k0{3, -2};
    const double rho = 0.5 * (k0[0] * alpha[0] + k0[1] * alpha[1]);
    auto hit = find_resonance(rho, alpha, 6, 1e-8);
    REQUIRE(hit.has_value());
    CHECK(hit->k == k0);
    CHECK(hit->dist < 1e-10);

    // margin certified: no resonance when eta below the exhaustive minimum
    const double rho2 = 0.123456;
    double min_dist = 1e9;
    for (int a = -6; a <= 6; ++a)
        for (int b = -6 + std::abs(a); b <= 6 - std::abs(a); ++b) {
            if (a == 0 && b == 0) continue;
            min_dist = std::min(
                min_dist, torus_dist_2pi(2.0 * rho2 - a * alpha[0] - b * alpha[1]));
        }
    CHECK(!find_resonance(rho2, alpha, 6, min_dist * 0.99).has_value());
    auto again = find_resonance(rho2, alpha, 6, min_dist * 1.01);
    CHECK(again.has_value());

    // engineered double resonance with a rationally dependent frequency
    std::vector<double> bad{2.0 * M_PI / 8.0};
    auto multi = find_resonance(M_PI / 8.0, bad, 20, 1e-6);
    REQUIRE(multi.has_value());
    CHECK(multi->multiple);
    CHECK(mode_abs(multi->k) == 1);
}

TEST_CASE("best return time") {
    ContinuedFraction cf = cf_expand(kGolden, 30);
    ReturnTime rt = best_return_time(cf, 10.0);
    CHECK(rt.q_nj == 8);
    CHECK(rt.q == 13);
    CHECK(!rt.is_sum);
    CHECK(rt.window_ok);
    CHECK(rt.dist < 3.0 / 8.0);

    // boundary: N_j equal to a denominator
    ReturnTime rb = best_return_time(cf, 13.0);
    CHECK(rb.window_ok);
    CHECK(rb.small_ok);
    CHECK(21.0 * 13.0 / 20.0 <= (double)rb.q);
    CHECK((double)rb.q <= 41.0 * 13.0 / 20.0);

    // window coverage across many scales and alphas (sum of consecutive
    // denominators allowed)
    for (int i = 0; i < 200; ++i) {
        const double alpha = urand(0.05, 0.95);
        ContinuedFraction c2 = cf_expand(alpha, 40);
        if (c2.terminating) continue;
        const double nj = urand(5.0, 1e5);
        if ((double)c2.q.back() < 4.0 * nj) continue;
        try {
            ReturnTime r = best_return_time(c2, nj);
            CHECK(r.window_ok);
            CHECK(r.small_ok);
        } catch (const std::runtime_error&) {
            // window genuinely unreachable for this expansion; acceptable
        }
    }

    CHECK_THROWS_AS(best_return_time(cf_expand(0.25, 10), 10.0), std::runtime_error);
}
