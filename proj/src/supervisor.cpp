#include "supctl/supervisor.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "supctl/formulas.hpp"

namespace supctl {

double ExplorationSchedule::a(std::int64_t ell) const {
    if (variant == ScheduleVariant::fixed) {
        return a_fixed(L, N);
    }
    return a_dynamic(N, ell, delta_alg);
}

ExplorationSchedule ExplorationSchedule::make(ScheduleVariant variant, int n, double delta_alg,
                                              std::optional<std::int64_t> L_override) {
    if (n < 1) {
        throw ConfigError("exploration schedule needs at least one controller");
    }
    if (!(delta_alg > 0.0)) {
        throw ConfigError("delta_alg must be positive");
    }
    ExplorationSchedule sched;
    sched.variant = variant;
    sched.N = n;
    sched.delta_alg = delta_alg;
    sched.L = L_override ? *L_override : horizon_length(n, delta_alg, variant);
    sched.overridden = L_override.has_value();
    if (sched.L < n) {
        throw ConfigError("horizon shorter than the warm start");
    }
    return sched;
}

std::int64_t horizon_length(int n, double delta_alg, ScheduleVariant variant) {
    if (n < 1) {
        throw ConfigError("horizon needs at least one controller");
    }
    if (!(delta_alg > 0.0)) {
        throw ConfigError("delta_alg must be positive");
    }
    return variant == ScheduleVariant::fixed ? horizon_fixed(n, delta_alg)
                                             : horizon_dynamic(n, delta_alg);
}

std::int64_t pull_count_bound(const ExplorationSchedule& sched) {
    const double raw = 36.0 * sched.a(sched.L);
    return static_cast<std::int64_t>(std::ceil(std::max(raw, 0.0)));
}

double SupervisorState::mean_score(int i) const {
    if (i < 0 || i >= size()) {
        throw std::logic_error("controller index out of range");
    }
    const auto& hist = score_history[static_cast<std::size_t>(i)];
    if (hist.empty()) {
        throw std::logic_error("mean score requested before any pull");
    }
    double total = 0.0;
    for (int s : hist) total += s;
    return total / static_cast<double>(hist.size());
}

double exploration_bonus(const ExplorationSchedule& sched, std::int64_t ell, std::int64_t q_i) {
    if (q_i < 1) {
        throw std::logic_error("exploration bonus requires at least one completed pull");
    }
    const double a = sched.a(ell);
    if (a < 0.0) {
        throw std::logic_error("negative exploration coefficient");
    }
    return std::sqrt(a / static_cast<double>(q_i));
}

int select_controller(const SupervisorState& state, const ExplorationSchedule& sched) {
    const std::int64_t ell = state.episode + 1;
    if (ell <= state.size()) {
        return static_cast<int>(ell - 1);  // round-robin warm start
    }
    int best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < state.size(); ++i) {
        const double value = state.mean_score(i) +
                             exploration_bonus(sched, ell, state.Q[static_cast<std::size_t>(i)]);
        if (value > best_value) {  // strict: ties stay with the smallest index
            best = i;
            best_value = value;
        }
    }
    return best;
}

void record_episode(SupervisorState& state, int controller, int score) {
    if (controller < 0 || controller >= state.size()) {
        throw std::logic_error("controller index out of range");
    }
    if (score != 0 && score != 1) {
        throw std::logic_error("episode score must be binary");
    }
    state.Q[static_cast<std::size_t>(controller)] += 1;
    state.score_history[static_cast<std::size_t>(controller)].push_back(score);
    state.episode += 1;
}

int commit(const SupervisorState& state, const ExplorationSchedule& sched) {
    if (state.episode != sched.L) {
        throw std::logic_error("commitment requested before the horizon completed");
    }
    int best = 0;
    for (int i = 1; i < state.size(); ++i) {
        if (state.Q[static_cast<std::size_t>(i)] > state.Q[static_cast<std::size_t>(best)]) {
            best = i;
        }
    }
    return best;
}

RunRecord run_supervisor(const CandidateBank& bank, const CriterionConfig& cfg,
                         const ExplorationSchedule& sched, const NoiseStreams& noise,
                         const SupervisorOptions& opts) {
    if (bank.size() != sched.N) {
        throw ConfigError("schedule sized for a different candidate bank");
    }
    if (bank.true_index < 0 || bank.true_index >= bank.size()) {
        throw ConfigError("true index outside the candidate bank");
    }
    const auto t_start = std::chrono::steady_clock::now();

    RunRecord record;
    SupervisorState state(bank.size());
    RunTrace trace;
    std::uint64_t global_step = 0;
    Vector carried;
    int prev_controller = -1;
    bool aborted = false;

    for (std::int64_t ell = 1; ell <= sched.L; ++ell) {
        const int j = select_controller(state, sched);
        Vector x1;
        if (prev_controller < 0) {
            x1 = Vector::Zero(bank.true_loop(j).dim());
        } else {
            x1 = carry_over_state(carried, prev_controller, j, bank);
        }
        const RolloutResult r = rollout_episode(bank, j, x1, cfg.tau, noise, global_step);
        trace.append(r.trajectory);
        global_step += r.trajectory.length();

        const EpisodeOutputs ep = EpisodeOutputs::from_trajectory(r.trajectory, j);
        const EpisodeScore sc = score_episode(ep, bank, cfg);
        record_episode(state, j, sc.s);

        EpisodeRecord entry;
        entry.episode = ell;
        entry.controller = j;
        entry.s1 = sc.s1;
        entry.s2 = sc.s2;
        entry.s = sc.s;
        entry.q_snapshot = state.Q;
        entry.state_norm_end = r.final_state.norm();
        record.episodes.push_back(std::move(entry));

        if (r.trajectory.diverged) {
            record.divergences.push_back({ell, j, r.trajectory.divergence_step});
            aborted = true;
            break;
        }
        carried = r.final_state;
        prev_controller = j;
    }

    record.exploration_steps = global_step;
    record.pull_counts = state.Q;

    if (!aborted) {
        state.committed = commit(state, sched);
        record.committed = *state.committed;
        record.success = (record.committed == bank.true_index);

        const std::int64_t post = opts.post_commit_horizon ? *opts.post_commit_horizon
                                                           : 10 * cfg.tau;
        if (post > 0) {
            const Vector x1 =
                carry_over_state(carried, prev_controller, record.committed, bank);
            const RolloutResult r =
                rollout_episode(bank, record.committed, x1, post, noise, global_step);
            trace.append(r.trajectory);
            record.post_commit_steps = r.trajectory.length();
            global_step += r.trajectory.length();
            if (r.trajectory.diverged) {
                record.divergences.push_back({0, record.committed, r.trajectory.divergence_step});
            }
        }
    }

    record.energy = energy_metrics(trace, record.exploration_steps);
    if (opts.keep_trace) {
        record.trace = std::move(trace);
    }
    record.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return record;
}

}  // namespace supctl
