#!/usr/bin/env python3
"""Independent recomputation of the counter-based RNG, for freezing test values.

Reimplements SplitMix64-at-counter + Box-Muller in pure Python integer
arithmetic so the C++ implementation is checked against something that shares
no code with it. Prints (seed, counter) -> raw u64 and Gaussian doubles.
"""

import math

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


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
    r = math.sqrt(-2.0 * math.log1p(-u1))
    return r * math.cos(2.0 * math.pi * u2)


def main() -> None:
    print("raw counter values:")
    for seed, counter in [(0, 0), (0, 1), (42, 0), (42, 7), (0xDEADBEEF, 123456789)]:
        print(f"  counter_value({seed:#x}, {counter}) = 0x{counter_value(seed, counter):016X}ULL")

    print("stream seeds:")
    for seed, sid in [(42, 0), (42, 1), (42, 2), (42, 3)]:
        print(f"  stream_seed({seed}, {sid}) = 0x{stream_seed(seed, sid):016X}ULL")

    print("gaussians:")
    for seed, counter in [(42, 0), (42, 1), (42, 2), (7, 0), (7, 999)]:
        print(f"  gaussian({seed}, {counter}) = {gaussian(seed, counter)!r}")

    # Moment sanity on a long stream.
    n = 200000
    s = stream_seed(123, 0)
    xs = [gaussian(s, i) for i in range(n)]
    mean = sum(xs) / n
    var = sum(x * x for x in xs) / n
    print(f"moments over {n}: mean={mean:.6f} var={var:.6f}")


if __name__ == "__main__":
    main()
