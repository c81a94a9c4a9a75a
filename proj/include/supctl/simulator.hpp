#pragma once

#include <cstdint>
#include <vector>

#include "supctl/matrix.hpp"
#include "supctl/random.hpp"
#include "supctl/system_bank.hpp"

namespace supctl {

// Any state component crossing this magnitude aborts the rollout and records
// a divergence event; squared norms stay finite in double precision below it.
inline constexpr double kStateGuard = 1e150;

struct NoiseStreams {
    std::uint64_t master_seed = 0;
    double sigma_w = 0.0;
    double sigma_eta = 0.0;
    double sigma_u = 0.0;

    [[nodiscard]] std::uint64_t w_seed() const { return stream_seed(master_seed, 0); }
    [[nodiscard]] std::uint64_t eta_seed() const { return stream_seed(master_seed, 1); }
    [[nodiscard]] std::uint64_t u_seed() const { return stream_seed(master_seed, 2); }
    [[nodiscard]] std::uint64_t init_seed() const { return stream_seed(master_seed, 3); }

    [[nodiscard]] static NoiseStreams from_bank(const CandidateBank& bank,
                                                std::uint64_t master_seed) {
        return NoiseStreams{master_seed, bank.noise.sigma_w, bank.noise.sigma_eta,
                            bank.noise.sigma_u};
    }
};

struct Trajectory {
    std::vector<Vector> states;         // x_t, never exposed to the supervisor
    std::vector<Vector> outputs;        // y_t
    std::vector<Vector> inputs;         // exploratory u_t
    std::vector<Vector> process_noise;  // w_t
    std::uint64_t start_time = 0;       // 1-based global index of the first sample
    bool diverged = false;
    std::uint64_t divergence_step = 0;  // global index of the guarded step (0 = none)

    [[nodiscard]] std::size_t length() const { return outputs.size(); }
};

struct RolloutResult {
    Trajectory trajectory;
    Vector final_state;  // x_{tau+1}, or the offending state after a divergence
};

/// Simulates the true process under controller j for `length` steps:
///   y_t = C_[i*,j] x_t + eta_t,   x_{t+1} = A_[i*,j] x_t + B_[i*,j] u_t + w_t
/// with x_1 = initial_state. Noise components at global step g are pure
/// functions of (master_seed, stream, g), so trajectories are reproducible
/// and stream-aligned regardless of episode boundaries. global_step is the
/// number of steps consumed before this episode. forced_inputs (d_u x length)
/// replaces the exploratory stream when given; the noise streams still apply.
[[nodiscard]] RolloutResult rollout_episode(const CandidateBank& bank, int active_controller,
                                            const Vector& initial_state, std::int64_t length,
                                            const NoiseStreams& noise, std::uint64_t global_step,
                                            const Matrix* forced_inputs = nullptr);

/// Chains episodes: the plant substate persists; a dynamic controller's
/// internal state is zeroed when the controller changes and kept otherwise.
[[nodiscard]] Vector carry_over_state(const Vector& prev_final, int prev_ctrl, int next_ctrl,
                                      const CandidateBank& bank);

// Per-global-step squared norms of the whole run, for energy accounting.
struct RunTrace {
    std::vector<double> state_sq;  // |x_t|^2
    std::vector<double> input_sq;  // |u_t|^2
    std::vector<double> noise_sq;  // |w_t|^2

    void append(const Trajectory& tr);
};

struct EnergyMetrics {
    double state_energy = 0.0;      // sum over all steps of |x_t|^2
    double input_energy_pre = 0.0;  // sum over t <= exploration_steps of |u_t|^2 + |w_t|^2
    double input_energy_post = 0.0;  // same sum over t > exploration_steps
};

[[nodiscard]] EnergyMetrics energy_metrics(const RunTrace& trace,
                                           std::uint64_t exploration_steps);

}  // namespace supctl
