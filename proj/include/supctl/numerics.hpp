#pragma once

#include "supctl/matrix.hpp"

namespace supctl {

/// Largest eigenvalue modulus of a square matrix.
/// Throws DimensionError on non-square input.
[[nodiscard]] double spectral_radius(const Matrix& a);

// Smallest singular value of M viewed as an operator on its column space,
// i.e. sqrt(lambda_min(M^T M)). With fewer rows than columns the rank is
// deficient by construction and the result is exactly 0. This is the
// injectivity modulus the observability margin needs, not the min over
// min(rows, cols) SVD values.
[[nodiscard]] double min_singular_value(const Matrix& m);

struct SingularTriple {
    double sigma = 0.0;
    Vector u;  // left singular vector,  u^T M v = sigma
    Vector v;  // right singular vector
};

/// Leading singular triple (sigma_max, u, v) with a deterministic sign:
/// the first component of u larger than 1e-12 in magnitude is positive,
/// and v is flipped jointly. Throws DegenerateInputError on a zero matrix.
[[nodiscard]] SingularTriple leading_singular_triple(const Matrix& m);

// Moore-Penrose pseudo-inverse by SVD truncation: singular values below tol
// are treated as zero. The one-argument overload uses tol = 1e-10 * sigma_max.
[[nodiscard]] Matrix pseudo_inverse(const Matrix& m, double tol);
[[nodiscard]] Matrix pseudo_inverse(const Matrix& m);

// A^k by repeated squaring; k = 0 gives the identity.
[[nodiscard]] Matrix matrix_power(const Matrix& a, std::uint64_t k);

/// H-infinity norm of the discrete-time system (C, A, B):
///   sup over theta of sigma_max(C (e^{i theta} I - A)^{-1} B).
/// Evaluated on a 4096-point unit-circle grid and refined around the grid
/// maximum by golden-section search to a 1e-6 relative target.
/// Throws InstabilityError if rho(A) >= 1 (the supremum is not finite or the
/// resolvent touches the spectrum).
[[nodiscard]] double hinf_norm(const Matrix& c, const Matrix& a, const Matrix& b);

/// Discrete Lyapunov solution P = A^T P A + Q via the fixed-point sum
/// P = sum_k (A^T)^k Q A^k, truncated when the increment's Frobenius norm
/// drops below 1e-12. Throws InstabilityError if rho(A) >= 1.
[[nodiscard]] Matrix dlyap(const Matrix& a, const Matrix& q);

}  // namespace supctl
