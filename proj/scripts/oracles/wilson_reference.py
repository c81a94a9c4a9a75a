#!/usr/bin/env python3
"""Independent Wilson score interval values for the harness tests.

Computes lower/upper bounds for a handful of (successes, trials, z) triples
with the textbook formula; the C++ tests freeze these digits.
"""
import math

CASES = [
    (90, 100, 1.96),
    (0, 50, 2.3263478740408408),
    (50, 50, 2.3263478740408408),
    (190, 200, 2.3263478740408408),
]


def wilson(successes: int, trials: int, z: float):
    if trials == 0:
        return 0.0, 1.0
    n = float(trials)
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


if __name__ == "__main__":
    for s, t, z in CASES:
        lo, hi = wilson(s, t, z)
        print(f"wilson({s}, {t}, {z!r}) = ({lo!r}, {hi!r})")
