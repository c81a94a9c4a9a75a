#include "supctl/random.hpp"

#include <cmath>
#include <numbers>

namespace supctl {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t counter_value(std::uint64_t seed, std::uint64_t counter) {
    return finalize(seed + (counter + 1) * kGolden);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream_id) {
    // Salted so stream sub-seeds cannot collide with plain counter draws.
    return finalize(seed ^ ((stream_id + 1) * 0xB5297A4D3F84D5B3ULL));
}

std::uint64_t run_seed(std::uint64_t master_seed, std::uint64_t run_index) {
    return counter_value(master_seed, run_index);
}

double uniform01(std::uint64_t seed, std::uint64_t counter) {
    return static_cast<double>(counter_value(seed, counter) >> 11) * 0x1.0p-53;
}

double gaussian(std::uint64_t seed, std::uint64_t counter) {
    // log(1 - u1) instead of log(u1): u1 = 0 is reachable, u1 = 1 is not.
    const double u1 = uniform01(seed, 2 * counter);
    const double u2 = uniform01(seed, 2 * counter + 1);
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * std::numbers::pi * u2);
}

Vector gaussian_vector(std::uint64_t stream, std::uint64_t step, Eigen::Index dim,
                       double sigma) {
    if (static_cast<std::uint64_t>(dim) > kComponentsPerStep) {
        throw DimensionError("gaussian_vector: dimension exceeds per-step component budget");
    }
    Vector v(dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
        v[c] = sigma * gaussian(stream, step * kComponentsPerStep + static_cast<std::uint64_t>(c));
    }
    return v;
}

}  // namespace supctl
