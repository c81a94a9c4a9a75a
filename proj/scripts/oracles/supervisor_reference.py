#!/usr/bin/env python3
"""Reference bookkeeping for the UCB-style supervisor loop.

Replays the selection/record loop with synthetic deterministic score tables
and prints the full selection sequence, the per-episode scores, the final
pull counts, and the final empirical means. The replay is written directly
from the algorithm description (round-robin warm start, then
argmax_i mean_i + sqrt(a_ell / Q_i), ties to the smallest index, commit to
argmax Q), independent of the C++ structure.
"""
import math


def a_fixed(L, N):
    return L / (72.0 * N)


def a_dynamic(N, ell, delta):
    return 0.5 * math.log(math.pi * math.pi * N * ell * ell / (6.0 * delta))


def replay(N, L, a_of_ell, score_fn):
    Q = [0] * N
    hist = [[] for _ in range(N)]
    seq = []
    scores = []
    for ell in range(1, L + 1):
        if ell <= N:
            j = ell - 1
        else:
            a = a_of_ell(ell)
            best, best_val = 0, -math.inf
            for i in range(N):
                val = sum(hist[i]) / Q[i] + math.sqrt(a / Q[i])
                if val > best_val:
                    best, best_val = i, val
            j = best
        s = score_fn(j, Q[j])  # Q[j] completed pulls so far
        Q[j] += 1
        hist[j].append(s)
        seq.append(j)
        scores.append(s)
    means = [sum(h) / len(h) if h else None for h in hist]
    committed = max(range(N), key=lambda i: (Q[i], -i))
    return seq, scores, Q, means, committed


def main():
    # Case A: fixed schedule. Controller 0 always scores 1, controller 1
    # scores 1 on its first pull only, controller 2 never scores.
    N, L = 3, 12

    def score_a(i, pulls):
        if i == 0:
            return 1
        if i == 1:
            return 1 if pulls == 0 else 0
        return 0

    seq, scores, Q, means, committed = replay(N, L, lambda ell: a_fixed(L, N), score_a)
    print("case A (fixed, N=3, L=12):")
    print("  selections:", seq)
    print("  scores:   ", scores)
    print("  Q:        ", Q)
    print("  means:    ", means)
    print("  committed:", committed)

    # Case B: dynamic schedule. Controller 0 alternates 1,0,1,0...;
    # controller 1 always scores 1.
    N, L, delta = 2, 10, 0.1

    def score_b(i, pulls):
        if i == 0:
            return 1 if pulls % 2 == 0 else 0
        return 1

    seq, scores, Q, means, committed = replay(
        N, L, lambda ell: a_dynamic(N, ell, delta), score_b)
    print("case B (dynamic, N=2, L=10, delta=0.1):")
    print("  selections:", seq)
    print("  scores:   ", scores)
    print("  Q:        ", Q)
    print("  means:    ", means)
    print("  committed:", committed)

    # Pull-count bound ceil(36 * a_L) for both cases.
    print("bound A:", math.ceil(36 * a_fixed(12, 3)))
    print("bound B:", math.ceil(36 * a_dynamic(2, 10, 0.1)))


if __name__ == "__main__":
    main()
