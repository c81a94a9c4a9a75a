#include "supctl/formulas.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "fixtures/formula_cases.hpp"

using namespace supctl;

TEST_CASE("variance proxy on the worked example") {
    CHECK(theta_proxy(2.0, 0.5, 1.0, 1.0, 1.0) == doctest::Approx(25.0));
    // positivity whenever the noise levels are positive
    CHECK(theta_proxy(0.3, 0.2, 0.1, 0.2, 0.05) > 0.0);
}

TEST_CASE("criterion-1 threshold arithmetic") {
    // d_y = 1, Theta = 2, delta_c = 2/e: sqrt(4 * log(e)) = 2
    CHECK(criterion1_threshold(1, 2.0, 2.0 / std::exp(1.0)) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("identification episode length on the scalar example") {
    // sigma_r^2 = sigma_u^2 = 1, gamma = 1, N = 2, delta_c = 1/30, nu = h = 1
    const double real = t2_episode_real(1, 1, 2, 1.0 / 30.0, 1.0, 1.0, 1.0);
    CHECK(real == doctest::Approx(120.9864068168970293).epsilon(1e-12));
    CHECK(t2_episode(1, 1, 2, 1.0 / 30.0, 1.0, 1.0, 1.0) == 121);
}

TEST_CASE("horizon formulas on worked examples") {
    // N=1, delta = 72/e collapses to 72 * log(e) = 72
    const double collapsed = horizon_fixed_real(1, 72.0 / std::exp(1.0));
    CHECK(collapsed == doctest::Approx(72.0).epsilon(1e-12));

    CHECK(horizon_fixed_real(2, 0.1) == doctest::Approx(1147.0385625307188).epsilon(1e-12));
    CHECK(horizon_fixed(2, 0.1) == 1148);
    CHECK(horizon_dynamic_real(2, 0.1) == doctest::Approx(2133.9869092267145).epsilon(1e-12));
    CHECK(horizon_dynamic(2, 0.1) == 2134);
}

TEST_CASE("exploration coefficients") {
    CHECK(a_fixed(72, 1) == doctest::Approx(1.0));
    CHECK(a_fixed(144, 2) == doctest::Approx(1.0));
    // delta = pi^2/6 makes the dynamic log argument exactly 1 at N = ell = 1
    const double pi_sq_over_6 = std::numbers::pi * std::numbers::pi / 6.0;
    CHECK(a_dynamic(1, 1, pi_sq_over_6) == doctest::Approx(0.0));
    // nondecreasing in ell
    CHECK(a_dynamic(3, 10, 0.1) < a_dynamic(3, 11, 0.1));
}

TEST_CASE("T1 handles a bank with no explosive loop") {
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(t1_episode_real(2, inf, 0.5, 0.1, 3.0, 1, 1.0 / 30.0) == doctest::Approx(6.0));
    CHECK(t1_episode(2, inf, 0.5, 0.1, 3.0, 1, 1.0 / 30.0) == 6);
}

TEST_CASE("T1 and T2 are monotone in the margins") {
    double prev = std::numeric_limits<double>::infinity();
    for (double eps_a = 0.05; eps_a < 1.0; eps_a += 0.05) {
        const double t1 = t1_episode_real(2, eps_a, 0.5, 0.1, 3.0, 1, 1.0 / 30.0);
        CHECK(t1 <= prev + 1e-12);
        prev = t1;
    }
    prev = std::numeric_limits<double>::infinity();
    for (double gamma = 0.1; gamma < 2.0; gamma += 0.1) {
        const double t2 = t2_episode_real(2, 2, 3, 1.0 / 30.0, 3.0, 0.5, gamma);
        CHECK(t2 <= prev + 1e-12);
        prev = t2;
    }
}

TEST_CASE("derived-constant formulas match the mpmath recomputation on 20 tuples") {
    for (const auto& c : fixtures::kFormulaCases) {
        CAPTURE(c.t_prime);
        const double th = theta_proxy(c.zeta, c.eps_c, c.sigma_w, c.sigma_u, c.sigma_eta);
        CHECK(th == doctest::Approx(c.theta).epsilon(1e-9));

        CHECK(t1_episode_real(c.nu, c.eps_a, c.eps_c, c.sigma_w, th, c.d_y, c.delta_c) ==
              doctest::Approx(c.t1_real).epsilon(1e-9));
        CHECK(t1_episode(c.nu, c.eps_a, c.eps_c, c.sigma_w, th, c.d_y, c.delta_c) == c.t1);

        CHECK(t1_dim_free_episode_real(c.nu, c.eps_a, c.eps_c, c.sigma_w, th, c.n, c.delta_c) ==
              doctest::Approx(c.t1_free_real).epsilon(1e-9));
        CHECK(t1_dim_free_episode(c.nu, c.eps_a, c.eps_c, c.sigma_w, th, c.n, c.delta_c) ==
              c.t1_free);

        CHECK(t2_episode_real(c.nu, c.h, c.n, c.delta_c, th, c.sigma_u, c.gamma) ==
              doctest::Approx(c.t2_real).epsilon(1e-9));
        CHECK(t2_episode(c.nu, c.h, c.n, c.delta_c, th, c.sigma_u, c.gamma) == c.t2);

        CHECK(horizon_fixed_real(c.n, c.delta_alg) ==
              doctest::Approx(c.horizon_fixed_real).epsilon(1e-9));
        CHECK(horizon_fixed(c.n, c.delta_alg) == c.horizon_fixed);
        CHECK(horizon_dynamic_real(c.n, c.delta_alg) ==
              doctest::Approx(c.horizon_dynamic_real).epsilon(1e-9));
        CHECK(horizon_dynamic(c.n, c.delta_alg) == c.horizon_dynamic);

        const auto bound = c0_transient(c.kappa0, c.r1, c.r2, c.t_prime);
        // log10 agreement at 4e-10 is tighter than 1e-9 relative on the value
        CHECK(bound.log10_value ==
              doctest::Approx(c.c0_log10).epsilon(4e-10 / std::max(1.0, std::abs(c.c0_log10))));
        CHECK(bound.alternate == (c.r1 <= 1.0));
    }
}

TEST_CASE("transient bound forms") {
    // modest exponent: value representable, matches direct evaluation
    const auto small = c0_transient(2.0, 1.5, 0.8, 10);
    const double direct =
        2.0 * 2.0 *
        std::max(std::pow(1.5, 20) / 0.25, std::pow(1.5, 18) * 0.8 / 0.25);
    CHECK(small.value == doctest::Approx(direct).epsilon(1e-9));
    CHECK_FALSE(small.alternate);

    // huge exponent: linear value overflows, log form carries the information
    const auto huge = c0_transient(2.0, 2.0, 1.0, 40000);
    CHECK(std::isinf(huge.value));
    CHECK(huge.log10_value == doctest::Approx(std::log10(4.0) + 80000 * std::log10(2.0)));

    // contractive transient
    const auto contract = c0_transient(1.0, 0.5, 2.0, 100);
    CHECK(contract.alternate);
    CHECK(contract.value == doctest::Approx(2.0 * std::max(4.0, 8.0)).epsilon(1e-12));
}
