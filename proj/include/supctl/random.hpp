#pragma once

#include <cstdint>

#include "supctl/matrix.hpp"

namespace supctl {

// Counter-based deterministic RNG used by every stochastic component.
//
// Generator: SplitMix64 evaluated at an arbitrary stream position. The value
// at counter c under seed s is finalize(s + (c+1) * 0x9E3779B97F4A7C15) with
// the standard 30/27/31 finalizer. Being a pure function of (seed, counter)
// it is trivially parallel-safe: workers never share mutable RNG state.
[[nodiscard]] std::uint64_t counter_value(std::uint64_t seed, std::uint64_t counter);

// Sub-seed for an independent named stream. Streams in use:
//   0 = process noise w, 1 = measurement noise eta, 2 = exploratory input u,
//   3 = initial-state sampling.
[[nodiscard]] std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream_id);

// Per-run seed expansion for Monte Carlo: run k draws its own master seed.
[[nodiscard]] std::uint64_t run_seed(std::uint64_t master_seed, std::uint64_t run_index);

// Uniform double in [0, 1) from 53 high bits of a counter draw.
[[nodiscard]] double uniform01(std::uint64_t seed, std::uint64_t counter);

// Standard normal via Box-Muller on counters (2c, 2c+1); the sine mate is
// discarded so each index maps to exactly one Gaussian.
[[nodiscard]] double gaussian(std::uint64_t seed, std::uint64_t counter);

// One Gaussian vector per (global step, component) pair. Steps are 1-based
// global time indices; components are packed at stride kComponentsPerStep so
// the stream stays aligned even if the state dimension changes mid-run.
inline constexpr std::uint64_t kComponentsPerStep = 128;

[[nodiscard]] Vector gaussian_vector(std::uint64_t stream, std::uint64_t step,
                                     Eigen::Index dim, double sigma);

}  // namespace supctl
