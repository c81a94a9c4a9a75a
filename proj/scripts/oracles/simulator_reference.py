#!/usr/bin/env python3
"""Step-by-step recomputation of a seeded noisy rollout and its energy sums.

Shares no code with the C++ simulator: the RNG is re-derived from its
documented construction and the dynamics are iterated with plain lists.
Printed values are frozen into tests/test_simulator.cpp.
"""

import math

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
STRIDE = 128  # components per global step


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
    return [sigma * gaussian(stream, step * STRIDE + c) for c in range(dim)]


def matvec(m, v):
    return [sum(m[r][c] * v[c] for c in range(len(v))) for r in range(len(m))]


def main() -> None:
    master = 2024
    w_seed = stream_seed(master, 0)
    eta_seed = stream_seed(master, 1)
    u_seed = stream_seed(master, 2)
    sigma_w, sigma_eta, sigma_u = 0.1, 0.05, 0.7

    # matched loop of the frozen two-candidate bank, model 0 under gain -0.1
    A = [[0.5, 0.18], [-0.13, 0.494]]
    B = [[1.0], [0.3]]
    C = [[1.0, 0.2]]

    x = [0.3, -0.4]
    ys, states, inputs, noises = [], [], [], []
    for t in range(1, 11):  # global steps 1..10
        u = gvec(u_seed, t, 1, sigma_u)
        w = gvec(w_seed, t, 2, sigma_w)
        eta = gvec(eta_seed, t, 1, sigma_eta)
        y = [C[0][0] * x[0] + C[0][1] * x[1] + eta[0]]
        states.append(list(x))
        ys.append(y[0])
        inputs.append(u[0])
        noises.append(list(w))
        ax = matvec(A, x)
        x = [ax[0] + B[0][0] * u[0] + w[0], ax[1] + B[1][0] * u[0] + w[1]]

    print("outputs y_1..y_10:")
    for y in ys:
        print(f"  {y!r}")
    print("final state:", [repr(v) for v in x])

    state_energy = sum(s[0] ** 2 + s[1] ** 2 for s in states)
    pre = sum(inputs[t] ** 2 + noises[t][0] ** 2 + noises[t][1] ** 2 for t in range(5))
    post = sum(inputs[t] ** 2 + noises[t][0] ** 2 + noises[t][1] ** 2 for t in range(5, 10))
    print("state_energy =", repr(state_energy))
    print("input_energy_pre (t<=5) =", repr(pre))
    print("input_energy_post (t>5) =", repr(post))


if __name__ == "__main__":
    main()
