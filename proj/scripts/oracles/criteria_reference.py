#!/usr/bin/env python3
"""Independent recomputation of criteria quantities on seeded episodes.

Regenerates the exact noise streams from the documented RNG construction,
rolls the episode with plain loops, then recomputes the initial-state
estimate (numpy lstsq), the shifted outputs, and the OLS slope along the
critical direction. Printed values are frozen into tests/test_criteria.cpp.
"""

import math

import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
STRIDE = 128


def finalize(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return (z ^ (z >> 31)) & MASK


def counter_value(seed: int, counter: int) -> int:
    return finalize((seed + (counter + 1) * GOLDEN) & MASK)


def stream_seed(seed: int, stream_id: int) -> int:
    return finalize(seed ^ (((stream_id + 1) * 0xB5297A4D3F84D5B3) & MASK))


def uniform01(seed: int, counter: int) -> float:
    return (counter_value(seed, counter) >> 11) * 2.0 ** -53


def gaussian(seed: int, counter: int) -> float:
    u1 = uniform01(seed, 2 * counter)
    u2 = uniform01(seed, 2 * counter + 1)
    return math.sqrt(-2.0 * math.log1p(-u1)) * math.cos(2.0 * math.pi * u2)


def gvec(stream: int, step: int, dim: int, sigma: float):
    return np.array([sigma * gaussian(stream, step * STRIDE + c) for c in range(dim)])


def rollout(A, B, C, x0, steps, master, sw, se, su):
    w_seed, eta_seed, u_seed = (stream_seed(master, i) for i in range(3))
    x = np.array(x0, dtype=float)
    ys, us = [], []
    for t in range(1, steps + 1):
        u = gvec(u_seed, t, B.shape[1], su)
        w = gvec(w_seed, t, A.shape[0], sw)
        eta = gvec(eta_seed, t, C.shape[0], se)
        ys.append(C @ x + eta)
        us.append(u)
        x = A @ x + B @ u + w
    return ys, us


def markov(C, A, B, h):
    return np.hstack([C @ np.linalg.matrix_power(A, p) @ B for p in range(h - 1, -1, -1)])


def main() -> None:
    # Candidate matrices of the frozen two-candidate bank.
    A0 = np.array([[0.60, 0.20], [-0.10, 0.50]])
    B0 = np.array([[1.0], [0.30]])
    C0 = np.array([[1.0, 0.20]])
    A1 = np.array([[0.90, 0.40], [0.20, 0.70]])
    B1 = np.array([[0.50], [1.0]])
    C1 = np.array([[0.30, 1.0]])
    K0, K1 = -0.10, -0.45

    M00 = A0 + B0 * K0 @ C0
    M01 = A0 + B0 * K1 @ C0
    M11 = A1 + B1 * K1 @ C1

    # --- noisy matched estimate on the episode frozen in the simulator test ---
    nu = 2
    ys, _ = rollout(M00, B0, C0, [0.3, -0.4], 10, 2024, 0.1, 0.05, 0.7)
    O00 = np.vstack([C0 @ M00, C0])
    stack = np.concatenate([ys[1], ys[0]])  # y_2 on top, y_1 below
    xhat1, *_ = np.linalg.lstsq(O00, stack, rcond=None)
    print("matched noisy xhat1 =", [repr(v) for v in xhat1])

    # --- mismatched stable episode: true model 0 under controller 1 ----------
    h = 2
    tau = 12
    ys, us = rollout(M01, B0, C0, [0.2, 0.1], tau, 777, 0.05, 0.02, 0.6)
    O11 = np.vstack([C1 @ M11, C1])
    stack = np.concatenate([ys[1], ys[0]])
    xh, *_ = np.linalg.lstsq(O11, stack, rcond=None)
    print("mismatched xhat1 =", [repr(v) for v in xh])

    G11 = markov(C1, M11, B1, h)
    G01 = markov(C0, M01, B0, h)
    print("G11 =", [repr(v) for v in G11[0]])
    print("G01 =", [repr(v) for v in G01[0]])

    ytilde, zs = [], []
    for t in range(nu + h + 1, tau + 1):  # 1-based episode time
        z = np.concatenate([us[t - h + b - 1] for b in range(h)])  # u_{t-h}..u_{t-1}
        pred = C1 @ np.linalg.matrix_power(M11, t - 1) @ xh
        ytilde.append((ys[t - 1] - pred - G11 @ z)[0])
        zs.append(z)
    print("ytilde t=5..12:")
    for v in ytilde:
        print(f"  {v!r}")

    diff = G01 - G11
    u_svd, s_svd, vt = np.linalg.svd(diff)
    u, v = u_svd[:, 0], vt[0, :]
    nz = np.nonzero(np.abs(u) > 1e-12)[0][0]
    if u[nz] < 0:
        u, v = -u, -v
    print("critical (j=1,k=0): sigma =", repr(s_svd[0]), " u =", [repr(x) for x in u],
          " v =", [repr(x) for x in v])
    proj_z = [float(v @ z) for z in zs]
    proj_y = [float(u[0] * yt) for yt in ytilde]
    slope = sum(a * b for a, b in zip(proj_y, proj_z)) / sum(a * a for a in proj_z)
    print("OLS slope along critical direction =", repr(slope))

    # --- plain scalar OLS on synthetic linear-plus-noise data ----------------
    s = stream_seed(4242, 0)
    z = [gaussian(s, i) for i in range(20)]
    noise = [0.1 * gaussian(s, 100 + i) for i in range(20)]
    y = [3.0 * zi + ni for zi, ni in zip(z, noise)]
    slope = sum(a * b for a, b in zip(y, z)) / sum(a * a for a in z)
    print("synthetic OLS slope =", repr(slope))


if __name__ == "__main__":
    main()
