#include "supctl/formulas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "supctl/matrix.hpp"

namespace supctl {

namespace {

std::int64_t ceil_count(double x) {
    if (!std::isfinite(x)) {
        throw DegenerateInputError("episode-length formula evaluated to a non-finite value");
    }
    return static_cast<std::int64_t>(std::ceil(x));
}

}  // namespace

double theta_proxy(double zeta, double eps_c, double sigma_w, double sigma_u, double sigma_eta) {
    return (1.0 + zeta / eps_c) *
           (zeta * sigma_w * sigma_w + zeta * sigma_u * sigma_u + sigma_eta * sigma_eta);
}

double criterion1_threshold(int d_y, double theta, double delta_c) {
    return std::sqrt(2.0 * d_y * theta * std::log(2.0 * d_y / delta_c));
}

double criterion1_dim_free_threshold(double theta, int n, double delta_c) {
    return std::sqrt(2.0 * theta * std::log(2.0 * n / delta_c));
}

double t1_episode_real(int nu, double eps_a, double eps_c, double sigma_w, double theta, int d_y,
                       double delta_c) {
    const double base = 2.0 + 2.0 * nu;
    if (std::isinf(eps_a)) {
        return base;  // no explosive loop anywhere: nothing to wait for
    }
    const double thr = criterion1_threshold(d_y, theta, delta_c);
    return base + std::log(4.0 * thr / (eps_a * eps_c * sigma_w)) / std::log1p(eps_a);
}

double t1_dim_free_episode_real(int nu, double eps_a, double eps_c, double sigma_w, double theta,
                                int n, double delta_c) {
    const double base = 2.0 + 2.0 * nu;
    if (std::isinf(eps_a)) {
        return base;
    }
    const double thr = criterion1_dim_free_threshold(theta, n, delta_c);
    return base + std::log(4.0 * thr / (eps_a * eps_c * sigma_w)) / std::log1p(eps_a);
}

std::int64_t t1_episode(int nu, double eps_a, double eps_c, double sigma_w, double theta, int d_y,
                        double delta_c) {
    return ceil_count(t1_episode_real(nu, eps_a, eps_c, sigma_w, theta, d_y, delta_c));
}

std::int64_t t1_dim_free_episode(int nu, double eps_a, double eps_c, double sigma_w, double theta,
                                 int n, double delta_c) {
    return ceil_count(t1_dim_free_episode_real(nu, eps_a, eps_c, sigma_w, theta, n, delta_c));
}

double t2_episode_real(int nu, int h, int n, double delta_c, double sigma_r_sq, double sigma_u,
                       double gamma) {
    const double excitation = sigma_u * sigma_u * gamma * gamma;
    const double burn_in = 16.0 * std::log(4.0 * n / delta_c);
    const double variance_floor = 2.0 * sigma_r_sq / excitation;
    const double concentration =
        (8.0 * sigma_r_sq / excitation) * std::log(800.0 * n * n / (delta_c * delta_c));
    return nu + h + std::max({burn_in, variance_floor, concentration});
}

std::int64_t t2_episode(int nu, int h, int n, double delta_c, double sigma_r_sq, double sigma_u,
                        double gamma) {
    return ceil_count(t2_episode_real(nu, h, n, delta_c, sigma_r_sq, sigma_u, gamma));
}

double horizon_fixed_real(int n, double delta_alg) {
    return 72.0 * n * std::log(72.0 * n * n / delta_alg);
}

double horizon_dynamic_real(int n, double delta_alg) {
    return 144.0 * n *
           std::log(24.0 * std::sqrt(6.0) / std::sqrt(delta_alg) * std::numbers::pi *
                    std::pow(static_cast<double>(n), 1.5));
}

std::int64_t horizon_fixed(int n, double delta_alg) {
    return ceil_count(horizon_fixed_real(n, delta_alg));
}

std::int64_t horizon_dynamic(int n, double delta_alg) {
    return ceil_count(horizon_dynamic_real(n, delta_alg));
}

double a_fixed(std::int64_t horizon, int n) {
    return static_cast<double>(horizon) / (72.0 * n);
}

double a_dynamic(int n, std::int64_t ell, double delta_alg) {
    const double pi_sq = std::numbers::pi * std::numbers::pi;
    return 0.5 * std::log(pi_sq * n * static_cast<double>(ell) * static_cast<double>(ell) /
                          (6.0 * delta_alg));
}

TransientBound c0_transient(double kappa0, double r1, double r2, std::int64_t t_prime) {
    TransientBound out;
    double log10_max;
    if (r1 > 1.0) {
        const double denom = 2.0 * std::log10(r1 - 1.0);
        const double term_w = 2.0 * static_cast<double>(t_prime) * std::log10(r1) - denom;
        const double term_u =
            (2.0 * static_cast<double>(t_prime) - 2.0) * std::log10(r1) + std::log10(r2) - denom;
        log10_max = std::max(term_w, term_u);
    } else if (r1 < 1.0) {
        // Sum_{l=1..k} R1^{l-1} <= 1/(1-R1): the transient never amplifies.
        out.alternate = true;
        const double denom = -2.0 * std::log10(1.0 - r1);
        log10_max = std::max(denom, denom + std::log10(r2));
    } else {
        // R1 == 1 exactly: the partial sum is T' itself.
        out.alternate = true;
        const double base = 2.0 * std::log10(static_cast<double>(t_prime));
        log10_max = std::max(base, base + std::log10(r2));
    }
    out.log10_value = std::log10(2.0 * kappa0) + log10_max;
    out.value = out.log10_value < 308.0 ? std::pow(10.0, out.log10_value)
                                        : std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace supctl
