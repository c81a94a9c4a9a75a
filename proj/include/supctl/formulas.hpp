#pragma once

#include <cstdint>

namespace supctl {

// Scalar formula kernels for the derived constants. Centralized so the
// derivation code, the supervisor, and the cross-check tests all evaluate
// exactly one implementation. The *_real functions return the pre-ceiling
// value; the count versions apply the ceiling.

// Sub-Gaussian variance proxy  Theta = (1 + zeta/eps_c) (zeta sw^2 + zeta su^2 + se^2).
// Also equals sigma_r^2 (same expression, two roles).
[[nodiscard]] double theta_proxy(double zeta, double eps_c, double sigma_w, double sigma_u,
                                 double sigma_eta);

// Detection thresholds for the instability criterion.
[[nodiscard]] double criterion1_threshold(int d_y, double theta, double delta_c);
[[nodiscard]] double criterion1_dim_free_threshold(double theta, int n, double delta_c);

// Episode length required by instability detection. With no explosive loop in
// the bank (eps_a = +inf) the growth term vanishes and the floor 2 + 2 nu
// remains. The dimension-free variant replaces d_y by 1 and 2 d_y / delta_c
// by 2 N / delta_c inside the threshold.
[[nodiscard]] double t1_episode_real(int nu, double eps_a, double eps_c, double sigma_w,
                                     double theta, int d_y, double delta_c);
[[nodiscard]] double t1_dim_free_episode_real(int nu, double eps_a, double eps_c, double sigma_w,
                                              double theta, int n, double delta_c);
[[nodiscard]] std::int64_t t1_episode(int nu, double eps_a, double eps_c, double sigma_w,
                                      double theta, int d_y, double delta_c);
[[nodiscard]] std::int64_t t1_dim_free_episode(int nu, double eps_a, double eps_c, double sigma_w,
                                               double theta, int n, double delta_c);

// Episode length required by the identification criterion, with the free
// parameter mu pinned to sigma_r^2 / gamma^2.
[[nodiscard]] double t2_episode_real(int nu, int h, int n, double delta_c, double sigma_r_sq,
                                     double sigma_u, double gamma);
[[nodiscard]] std::int64_t t2_episode(int nu, int h, int n, double delta_c, double sigma_r_sq,
                                      double sigma_u, double gamma);

// Supervision horizon (total episode count), both schedule variants.
[[nodiscard]] double horizon_fixed_real(int n, double delta_alg);
[[nodiscard]] double horizon_dynamic_real(int n, double delta_alg);
[[nodiscard]] std::int64_t horizon_fixed(int n, double delta_alg);
[[nodiscard]] std::int64_t horizon_dynamic(int n, double delta_alg);

// Exploration coefficients a_ell.
[[nodiscard]] double a_fixed(std::int64_t horizon, int n);
[[nodiscard]] double a_dynamic(int n, std::int64_t ell, double delta_alg);

// Transient L2-gain constant. T' = tau * L makes the linear value overflow
// double routinely, so the log10 form is primary; `value` is +inf when the
// linear value is not representable. R1 <= 1 switches to the geometric-sum
// bound ((1-R1)^{-2}, or T'^2 at R1 == 1) and sets `alternate`.
struct TransientBound {
    double log10_value = 0.0;
    double value = 0.0;
    bool alternate = false;
};
[[nodiscard]] TransientBound c0_transient(double kappa0, double r1, double r2,
                                          std::int64_t t_prime);

}  // namespace supctl
