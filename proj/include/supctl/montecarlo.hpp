#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "supctl/formulas.hpp"
#include "supctl/scenario.hpp"
#include "supctl/supervisor.hpp"

namespace supctl {

// One-sided 99% normal quantile, used for the acceptance bands.
inline constexpr double kOneSided99 = 2.3263478740408408;

struct WilsonInterval {
    double lower = 0.0;
    double upper = 1.0;
};

// Score confidence interval for a binomial proportion. trials = 0 gives the
// vacuous [0, 1].
[[nodiscard]] WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials,
                                             double z);

struct RunSummary {
    int run_index = 0;
    std::uint64_t seed = 0;  // per-run noise master, derived from the scenario seed
    RunRecord record;
};

struct MonteCarloAggregate {
    std::int64_t num_runs = 0;
    std::int64_t successes = 0;
    double success_rate = 0.0;
    double success_lower_99 = 0.0;  // one-sided Wilson lower bound
    std::int64_t diverged_runs = 0;
    // Largest single suboptimal-controller pull count across successful runs,
    // to compare against pull_bound.
    std::int64_t max_suboptimal_pulls = 0;
    std::int64_t pull_bound = 0;
    std::int64_t tau = 0;
    std::int64_t L = 0;
    bool tau_overridden = false;
    bool L_overridden = false;
    std::vector<double> mean_pull_counts;
};

struct MonteCarloResult {
    ScenarioConfig config;
    std::vector<RunSummary> runs;
    MonteCarloAggregate aggregate;
    double wall_clock_seconds = 0.0;  // timing sidecar only
};

struct MonteCarloOptions {
    int jobs = 1;
    // When set, the artifact tree is written under this directory:
    //   aggregate.json, selection_curve.csv, timing.sidecar.json,
    //   runs/run_XXXXX.jsonl, runs/run_XXXXX.summary.json
    // Artifacts are byte-identical for a given (scenario, master_seed)
    // regardless of jobs; wall clock goes only to the timing sidecar.
    std::optional<std::string> out_dir;
    bool runs_csv = false;  // additionally write runs.csv
};

// Runs num_runs independent supervisory loops, run k seeded with
// run_seed(config.master_seed, k).
[[nodiscard]] MonteCarloResult run_montecarlo(const ScenarioConfig& cfg,
                                              const MonteCarloOptions& opts = {});

// Writes <basename>.jsonl (one record per episode) and <basename>.summary.json
// into dir. Wall clock never lands in these files.
void write_run_artifacts(const std::string& dir, const RunSummary& run,
                         const std::string& basename);

struct CriteriaStatsOptions {
    bool randomized_init = false;  // x_1 components uniform on [-m, m] per episode
    double init_magnitude = 1.0;
    int jobs = 1;
};

// Tallies for repeated single-episode scoring of one (true plant, controller)
// cell. Episode e draws its noise from run_seed(master_seed, e).
struct CriteriaCellStats {
    int controller = 0;
    std::int64_t episodes = 0;
    std::int64_t s1_ones = 0;
    std::int64_t s2_ones = 0;
    std::int64_t s_ones = 0;

    [[nodiscard]] double s1_rate() const;
    [[nodiscard]] double s2_rate() const;
    [[nodiscard]] double s_rate() const;
};

[[nodiscard]] CriteriaCellStats criteria_stats(const CandidateBank& bank,
                                               const CriterionConfig& cfg, int controller,
                                               std::int64_t num_episodes,
                                               std::uint64_t master_seed,
                                               const CriteriaStatsOptions& opts = {});

// Closed-loop energy bound for a finished run: with T' = tau * L exploration
// steps, checks
//   sum |x_t|^2  <=  C0 * (pre input + noise energy) + C1 * (post energy)
// where C0 carries the worst-case transient of the switching phase and C1 the
// steady-state gain of the committed loop. The comparison runs in log10 to
// survive astronomically large C0.
struct L2GainReport {
    double r1 = 0.0;
    double r2 = 0.0;
    std::int64_t t_prime = 0;
    double kappa0 = 0.0;
    double kappa1 = 0.0;
    TransientBound c0;
    double c1 = 0.0;
    EnergyMetrics energy;
    double log10_lhs = 0.0;
    double log10_rhs = 0.0;
    bool bound_satisfied = false;
    // Smallest constant that would make the transient term tight, for
    // reporting how loose the theoretical C0 is.
    double empirical_c0 = 0.0;
};

[[nodiscard]] L2GainReport l2_gain_report(const CandidateBank& bank, const DerivedConstants& k,
                                          std::int64_t tau, std::int64_t L,
                                          const EnergyMetrics& energy);

}  // namespace supctl
