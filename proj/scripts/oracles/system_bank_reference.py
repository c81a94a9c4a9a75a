#!/usr/bin/env python3
"""Independent recomputation of system-bank derived quantities.

Everything here is worked out from the raw matrices with numpy/mpmath only,
no shared code with the C++ library. Printed values are frozen into
tests/test_system_bank.cpp.
"""
import numpy as np
from mpmath import mp, mpf, log, sqrt, ceil

mp.dps = 60
np.set_printoptions(precision=17)


def fmt(x):
    return repr(float(x))


# --- frozen two-candidate static bank ---------------------------------------
A = [np.array([[0.60, 0.20], [-0.10, 0.50]]), np.array([[0.90, 0.40], [0.20, 0.70]])]
B = [np.array([[1.0], [0.30]]), np.array([[0.50], [1.0]])]
C = [np.array([[1.0, 0.20]]), np.array([[0.30, 1.0]])]
K = [np.array([[-0.10]]), np.array([[-0.45]])]

NU, H = 2, 2
DELTA_C = mpf(1) / 30
SIGMA_W, SIGMA_ETA, SIGMA_U = mpf("0.1"), mpf("0.1"), mpf(1)
N = 2


def closed_loop(i, j):
    return A[i] + B[i] @ K[j] @ C[i]


def rho(M):
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def obs_matrix(Ci, Acl, nu):
    blocks = [Ci @ np.linalg.matrix_power(Acl, p) for p in range(nu - 1, -1, -1)]
    return np.vstack(blocks)


def markov(Ci, Acl, Bi, h):
    blocks = [Ci @ np.linalg.matrix_power(Acl, p) @ Bi for p in range(h - 1, -1, -1)]
    return np.hstack(blocks)


def hinf(Ci, Acl, Bi):
    # coarse grid then golden-section refinement of sigma_max(C (e^{iw}-A)^-1 B)
    d = Acl.shape[0]

    def gain(w):
        M = np.exp(1j * w) * np.eye(d) - Acl
        return np.linalg.svd(Ci @ np.linalg.solve(M, Bi), compute_uv=False)[0]

    grid = np.linspace(0.0, 2.0 * np.pi, 1 << 16, endpoint=False)
    vals = np.array([gain(w) for w in grid])
    k = int(np.argmax(vals))
    step = grid[1] - grid[0]
    lo, hi = grid[k] - step, grid[k] + step
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c1 = b - invphi * (b - a)
    c2 = a + invphi * (b - a)
    f1, f2 = gain(c1), gain(c2)
    for _ in range(200):
        if f1 < f2:
            a, c1, f1 = c1, c2, f2
            c2 = a + invphi * (b - a)
            f2 = gain(c2)
        else:
            b, c2, f2 = c2, c1, f1
            c1 = b - invphi * (b - a)
            f1 = gain(c1)
    return max(f1, f2)


loops = [[closed_loop(i, j) for j in range(N)] for i in range(N)]
print("spectral radii:")
for i in range(N):
    for j in range(N):
        print(f"  rho(A[{i},{j}]) = {fmt(rho(loops[i][j]))}")

eps_c = min(
    np.linalg.svd(obs_matrix(C[i], loops[i][i], NU), compute_uv=False)[-1] for i in range(N)
)
for i in range(N):
    m = np.linalg.svd(obs_matrix(C[i], loops[i][i], NU), compute_uv=False)[-1]
    print(f"obs margin matched {i}: {fmt(m)}")
print("eps_c =", fmt(eps_c))

unstable = [(i, j) for i in range(N) for j in range(N) if i != j and rho(loops[i][j]) >= 1.0]
eps_a = min(rho(loops[i][j]) - 1.0 for i, j in unstable)
print("unstable pairs:", unstable, " eps_a =", fmt(eps_a))

gmats = [[markov(C[i], loops[i][j], B[i], H) for j in range(N)] for i in range(N)]
gamma = min(
    np.linalg.svd(gmats[i][j] - gmats[k][j], compute_uv=False)[0]
    for j in range(N)
    for i in range(N)
    for k in range(N)
    if i < k
)
print("gamma =", fmt(gamma))

zeta = 0.0
for i in range(N):
    zeta = max(zeta, hinf(C[i], loops[i][i], np.eye(2)), hinf(C[i], loops[i][i], B[i]))
print("zeta =", fmt(zeta))

zeta_m, eps_c_m, gamma_m = mpf(zeta), mpf(eps_c), mpf(gamma)
theta = (1 + zeta_m / eps_c_m) * (zeta_m * SIGMA_W**2 + zeta_m * SIGMA_U**2 + SIGMA_ETA**2)
print("theta =", fmt(theta))

d_y = 1
thr = sqrt(2 * d_y * theta * log(2 * d_y / DELTA_C))
t1_real = 2 + 2 * NU + log(4 * thr / (mpf(eps_a) * eps_c_m * SIGMA_W)) / log(1 + mpf(eps_a))
sigma_r_sq = theta
t2_core = max(
    16 * log(4 * N / DELTA_C),
    2 * sigma_r_sq / (SIGMA_U**2 * gamma_m**2),
    (8 * sigma_r_sq / (SIGMA_U**2 * gamma_m**2)) * log(800 * N**2 / DELTA_C**2),
)
t2_real = NU + H + t2_core
for name, val in (("T1", t1_real), ("T2", t2_real)):
    frac = val - mp.floor(val)
    assert min(frac, 1 - frac) > mpf("1e-3"), f"{name} too close to an integer: {val}"
    print(f"{name}_real = {mp.nstr(val, 25)}  ceil = {int(ceil(val))}")
tau = max(int(ceil(t1_real)), int(ceil(t2_real)))
print("tau =", tau)

r1 = max(np.linalg.svd(loops[i][j], compute_uv=False)[0] for i in range(N) for j in range(N))
r2 = max(np.linalg.svd(B[i], compute_uv=False)[0] for i in range(N) for j in range(N))
print("R1 =", fmt(r1), " R2 =", fmt(r2))

# critical directions for j = 0, k = 1
diff = gmats[1][0] - gmats[0][0]
u_svd, s_svd, vt_svd = np.linalg.svd(diff)
u0, v0, s0 = u_svd[:, 0], vt_svd[0, :], s_svd[0]
nz = np.nonzero(np.abs(u0) > 1e-12)[0][0]
if u0[nz] < 0:
    u0, v0 = -u0, -v0
print("critical (j=0,k=1): sigma =", fmt(s0), " u =", [fmt(x) for x in u0], " v =",
      [fmt(x) for x in v0])
print("bilinear check:", fmt(u0 @ diff @ v0))

# unstable direction for (i=1, j=0) at the formula tau
Au = loops[1][0]
lam = rho(Au)
P = np.linalg.matrix_power(Au / lam, tau - NU - 2)
probe = C[1] @ P
uu = np.linalg.svd(probe)[0][:, 0]
if uu[np.nonzero(np.abs(uu) > 1e-12)[0][0]] < 0:
    uu = -uu
print("unstable (i=1,j=0): u =", [fmt(x) for x in uu], " probe =", [fmt(x) for x in probe[0]])

# --- naive observability stack for a random 3-state loop --------------------
rs = np.random.RandomState(47)
A3 = rs.randn(3, 3) * 0.4
C3 = rs.randn(1, 3)
print("A3 rows:", [[fmt(x) for x in row] for row in A3])
print("C3 row:", [fmt(x) for x in C3[0]])
O3 = obs_matrix(C3, A3, 3)
print("O3 rows:", [[fmt(x) for x in row] for row in O3])
print("O3 min sv:", fmt(np.linalg.svd(O3, compute_uv=False)[-1]))
