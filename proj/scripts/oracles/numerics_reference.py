#!/usr/bin/env python3
"""Brute-force oracle values for the numerics tests, frozen into C++ sources.

Each quantity is computed by a route independent of the library
implementation: smallest singular values via eigenvalues of the Gram matrix,
the H-infinity norm via a 1e6-point frequency grid with local quadratic
refinement, the Lyapunov solution via numpy's eigen-based solve of the
vectorized linear system.
"""

import numpy as np

rng = np.random.RandomState(20260816)


def fmt(m: np.ndarray) -> str:
    rows = [", ".join(f"{x:.17g}" for x in row) for row in np.atleast_2d(m)]
    return ";\n        ".join(rows)


def main() -> None:
    # --- min_singular_value on a random 4x3 ---
    m43 = rng.uniform(-2, 2, size=(4, 3)).round(4)
    gram = m43.T @ m43
    eigs = np.linalg.eigvalsh(gram)
    print("M43 =\n", fmt(m43))
    print("min_singular_value(M43) =", f"{float(np.sqrt(eigs.min())):.17g}")

    # --- leading_singular_triple on a random 3x5 ---
    m35 = rng.uniform(-2, 2, size=(3, 5)).round(4)
    gram2 = m35 @ m35.T
    w, vecs = np.linalg.eigh(gram2)
    sigma = float(np.sqrt(w[-1]))
    u = vecs[:, -1]
    # sign convention: first component of u with |.| > 1e-12 is positive
    for comp in u:
        if abs(comp) > 1e-12:
            if comp < 0:
                u = -u
            break
    v = m35.T @ u / sigma
    print("M35 =\n", fmt(m35))
    print("sigma_max(M35) =", f"{sigma:.17g}")
    print("u =", ", ".join(f"{x:.17g}" for x in u))
    print("v =", ", ".join(f"{x:.17g}" for x in v))

    # --- hinf_norm on a random stable 3x3 system ---
    a = rng.uniform(-1, 1, size=(3, 3)).round(4)
    a = (0.8 * a / max(abs(np.linalg.eigvals(a)))).round(6)
    b = rng.uniform(-1, 1, size=(3, 2)).round(4)
    c = rng.uniform(-1, 1, size=(2, 3)).round(4)
    print("rho(A) =", max(abs(np.linalg.eigvals(a))))

    def gain(theta: float) -> float:
        z = np.exp(1j * theta)
        g = c @ np.linalg.solve(z * np.eye(3) - a, b)
        return float(np.linalg.svd(g, compute_uv=False)[0])

    thetas = np.linspace(0.0, 2.0 * np.pi, 1_000_000, endpoint=False)
    gains = np.array([gain(t) for t in thetas])
    k = int(gains.argmax())
    # local quadratic fit around the grid peak for the last digits
    t0, dt = thetas[k], thetas[1] - thetas[0]
    fm, f0, fp = gain(t0 - dt), gains[k], gain(t0 + dt)
    denom = fm - 2.0 * f0 + fp
    shift = 0.0 if abs(denom) < 1e-300 else 0.5 * dt * (fm - fp) / denom
    refined = gain(t0 + shift)
    print("A_h =\n", fmt(a))
    print("B_h =\n", fmt(b))
    print("C_h =\n", fmt(c))
    print("hinf =", f"{max(refined, f0):.17g}", " at theta ~", t0 + shift)

    # --- dlyap on a random stable 3x3, solved via the vectorized system ---
    ad = rng.uniform(-1, 1, size=(3, 3)).round(4)
    ad = (0.7 * ad / max(abs(np.linalg.eigvals(ad)))).round(6)
    q = rng.uniform(-1, 1, size=(3, 3)).round(4)
    q = (q @ q.T).round(6)  # symmetric psd
    n = 3
    lhs = np.eye(n * n) - np.kron(ad.T, ad.T)  # vec(P) - vec(A^T P A) = vec(Q)
    p = np.linalg.solve(lhs, q.reshape(-1)).reshape(n, n)
    print("A_d =\n", fmt(ad))
    print("Q_d =\n", fmt(q))
    print("P_d =\n", fmt(p))
    print("residual =", np.abs(ad.T @ p @ ad - p + q).max())


if __name__ == "__main__":
    main()
