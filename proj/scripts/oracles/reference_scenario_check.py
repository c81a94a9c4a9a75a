#!/usr/bin/env python3
"""Independent recomputation of scenarios/reference.json's derived constants.

Loads the checked-in scenario document and recomputes the margins and the
derived constants (eps_c, eps_a, gamma, zeta, Theta, T1, T2, tau, both horizon
variants) with numpy/mpmath, sharing no code with the library. Run after any
regeneration of the reference scenario and compare against `supctl validate`.
"""

import json
import pathlib
import sys

import mpmath as mp
import numpy as np

mp.mp.dps = 60

path = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else
                    pathlib.Path(__file__).resolve().parents[2] / "scenarios" / "reference.json")
doc = json.loads(path.read_text())

N = len(doc["candidates"])
NU = doc["nu"]
H = doc["h"]
SW = mp.mpf(doc["sigma_w"])
SE = mp.mpf(doc["sigma_eta"])
SU = mp.mpf(doc["sigma_u"])
DC = mp.mpf(doc["delta_c"])
DA = mp.mpf(doc["delta_alg"])

A = [np.array(c["model"]["A"]) for c in doc["candidates"]]
B = [np.array(c["model"]["B"]) for c in doc["candidates"]]
C = [np.array(c["model"]["C"]) for c in doc["candidates"]]
K = [np.array(c["controller"]["D_K"]) for c in doc["candidates"]]

loops = [[A[i] + B[i] @ K[j] @ C[i] for j in range(N)] for i in range(N)]


def rho(M):
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def obs_matrix(Ci, Acl, nu):
    return np.vstack([Ci @ np.linalg.matrix_power(Acl, p) for p in range(nu - 1, -1, -1)])


def markov(Ci, Acl, Bi, h):
    return np.hstack([Ci @ np.linalg.matrix_power(Acl, p) @ Bi for p in range(h - 1, -1, -1)])


def hinf(Ci, Acl, Bi):
    d = Acl.shape[0]

    def gain(w):
        M = np.exp(1j * w) * np.eye(d) - Acl
        return np.linalg.svd(Ci @ np.linalg.solve(M, Bi), compute_uv=False)[0]

    grid = np.linspace(0.0, 2.0 * np.pi, 1 << 16, endpoint=False)
    vals = np.array([gain(w) for w in grid])
    k = int(np.argmax(vals))
    step = grid[1] - grid[0]
    a, b = grid[k] - step, grid[k] + step
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
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


print("true_index =", doc["true_index"])
print("spectral radii by row:")
for i in range(N):
    print(f"  row {i}:", ["%.6f" % rho(loops[i][j]) for j in range(N)])

eps_c = min(np.linalg.svd(obs_matrix(C[i], loops[i][i], NU), compute_uv=False)[-1]
            for i in range(N))
unstable = [(i, j) for i in range(N) for j in range(N) if i != j and rho(loops[i][j]) >= 1.0]
eps_a = min(rho(loops[i][j]) - 1.0 for i, j in unstable)
gmats = [[markov(C[i], loops[i][j], B[i], H) for j in range(N)] for i in range(N)]
gamma = min(np.linalg.svd(gmats[i][j] - gmats[k][j], compute_uv=False)[0]
            for j in range(N) for i in range(N) for k in range(N) if i < k)
zeta = 0.0
for i in range(N):
    dx = A[i].shape[0]
    zeta = max(zeta, hinf(C[i], loops[i][i], np.eye(dx)), hinf(C[i], loops[i][i], B[i]))

print("unstable pairs:", unstable)
print("eps_c =", "%.12g" % eps_c)
print("eps_a =", "%.12g" % eps_a)
print("gamma =", "%.12g" % gamma)
print("zeta  =", "%.12g" % zeta)

zeta_m, eps_c_m, eps_a_m, gamma_m = map(mp.mpf, (zeta, eps_c, eps_a, gamma))
theta = (1 + zeta_m / eps_c_m) * (zeta_m * SW**2 + zeta_m * SU**2 + SE**2)
sigma_r_sq = theta
d_y = C[0].shape[0]
thr = mp.sqrt(2 * d_y * theta * mp.log(2 * d_y / DC))
t1_real = 2 + 2 * NU + mp.log(4 * thr / (eps_a_m * eps_c_m * SW)) / mp.log(1 + eps_a_m)
t2_real = NU + H + max(
    16 * mp.log(4 * N / DC),
    2 * sigma_r_sq / (SU**2 * gamma_m**2),
    (8 * sigma_r_sq / (SU**2 * gamma_m**2)) * mp.log(800 * N**2 / DC**2),
)
T1 = int(mp.ceil(t1_real))
T2 = int(mp.ceil(t2_real))
L_fixed = int(mp.ceil(72 * N * mp.log(72 * N**2 / DA)))
L_dyn = int(mp.ceil(144 * N * mp.log(24 * mp.sqrt(6) / mp.sqrt(DA) * mp.pi * N**mp.mpf("1.5"))))

print("theta =", "%.12g" % float(theta))
print("criterion1 threshold =", "%.12g" % float(thr))
print("T1 =", T1, " T2 =", T2, " tau =", max(T1, T2))
print("L_fixed =", L_fixed, " L_dynamic =", L_dyn)
