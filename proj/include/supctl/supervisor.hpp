#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "supctl/criteria.hpp"
#include "supctl/matrix.hpp"
#include "supctl/simulator.hpp"
#include "supctl/system_bank.hpp"

namespace supctl {

enum class ScheduleVariant { fixed, dynamic };

// Exploration schedule: total horizon L plus the per-episode coefficient
// a_ell feeding the bonus sqrt(a_ell / Q_i). The fixed variant keeps
// a = L / (72 N) constant; the dynamic variant grows a_ell with ell.
struct ExplorationSchedule {
    ScheduleVariant variant = ScheduleVariant::fixed;
    std::int64_t L = 0;
    int N = 0;
    double delta_alg = 0.1;
    bool overridden = false;  // L came from config, not from the horizon formula

    [[nodiscard]] double a(std::int64_t ell) const;

    [[nodiscard]] static ExplorationSchedule make(ScheduleVariant variant, int n,
                                                  double delta_alg,
                                                  std::optional<std::int64_t> L_override = {});
};

// Horizon formula for the requested variant (ceiling applied).
[[nodiscard]] std::int64_t horizon_length(int n, double delta_alg, ScheduleVariant variant);

// No controller that fails to match the plant is selected more than this many
// times when the selection bound holds; checked post hoc on run records.
[[nodiscard]] std::int64_t pull_count_bound(const ExplorationSchedule& sched);

struct SupervisorState {
    std::vector<std::int64_t> Q;                  // completed pulls per controller
    std::vector<std::vector<int>> score_history;  // binary scores per controller
    std::int64_t episode = 0;                     // completed episodes
    std::optional<int> committed;

    explicit SupervisorState(int n)
        : Q(static_cast<std::size_t>(n), 0), score_history(static_cast<std::size_t>(n)) {}

    [[nodiscard]] int size() const { return static_cast<int>(Q.size()); }
    // Empirical mean score of controller i over its completed pulls.
    [[nodiscard]] double mean_score(int i) const;
};

// Bonus sqrt(a_ell / q_i); q_i >= 1 is guaranteed by the warm start.
[[nodiscard]] double exploration_bonus(const ExplorationSchedule& sched, std::int64_t ell,
                                       std::int64_t q_i);

// Controller for episode state.episode + 1: round-robin during the first N
// episodes, then argmax of mean + bonus with ties to the smallest index.
[[nodiscard]] int select_controller(const SupervisorState& state,
                                    const ExplorationSchedule& sched);

void record_episode(SupervisorState& state, int controller, int score);

// Most-pulled controller, ties to the smallest index. Only valid once all L
// episodes have been recorded.
[[nodiscard]] int commit(const SupervisorState& state, const ExplorationSchedule& sched);

struct EpisodeRecord {
    std::int64_t episode = 0;  // 1-based
    int controller = -1;
    int s1 = 0;
    int s2 = 0;
    int s = 0;
    std::vector<std::int64_t> q_snapshot;  // pull counts after this episode
    double state_norm_end = 0.0;
};

struct DivergenceEvent {
    std::int64_t episode = 0;  // 1-based exploration episode, 0 = post-commit phase
    int controller = -1;
    std::uint64_t global_step = 0;
};

struct RunRecord {
    std::vector<EpisodeRecord> episodes;
    int committed = -1;  // -1: exploration aborted before commitment
    bool success = false;
    std::vector<DivergenceEvent> divergences;
    std::vector<std::int64_t> pull_counts;
    EnergyMetrics energy;
    std::uint64_t exploration_steps = 0;
    std::uint64_t post_commit_steps = 0;
    double wall_clock_seconds = 0.0;  // timing sidecars only, never artifacts
    RunTrace trace;                   // filled only when keep_trace is set
};

struct SupervisorOptions {
    std::optional<std::int64_t> post_commit_horizon;  // default 10 * cfg.tau
    bool keep_trace = false;
};

/// Runs the full supervisory loop on one noise realization: L scored
/// exploration episodes chained through carry_over_state, commitment, and an
/// unscored post-commit rollout for the energy accounting. A divergence ends
/// the run as a recorded failure, never as an exception.
[[nodiscard]] RunRecord run_supervisor(const CandidateBank& bank, const CriterionConfig& cfg,
                                       const ExplorationSchedule& sched,
                                       const NoiseStreams& noise,
                                       const SupervisorOptions& opts = {});

}  // namespace supctl
