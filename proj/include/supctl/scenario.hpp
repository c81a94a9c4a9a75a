#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "supctl/criteria.hpp"
#include "supctl/supervisor.hpp"
#include "supctl/system_bank.hpp"

namespace supctl {

// Every artifact this project emits carries this schema marker.
inline constexpr int kSchemaVersion = 1;

// Complete experiment description: the candidate bank plus every knob the
// runner and the Monte Carlo orchestrator need. Serialized as a single JSON
// document with row-major nested-array matrices; save/load round-trips
// byte-identically.
struct ScenarioConfig {
    std::vector<Candidate> candidates;
    int true_index = 0;
    int nu = 1;
    int h = 1;
    double sigma_w = 0.0;
    double sigma_eta = 0.0;
    double sigma_u = 0.0;
    double delta_c = 1.0 / 30.0;
    double delta_alg = 0.1;
    CriterionVariant criterion_variant = CriterionVariant::standard;
    ScheduleVariant schedule_variant = ScheduleVariant::fixed;
    std::optional<std::int64_t> tau_override;
    std::optional<std::int64_t> L_override;
    std::uint64_t master_seed = 0;
    std::int64_t num_runs = 1;
    std::optional<std::int64_t> post_commit_horizon;  // absent: 10 * tau

    [[nodiscard]] int size() const { return static_cast<int>(candidates.size()); }
};

// Parses and validates a scenario document. Distinct diagnostics: "parse
// error: ..." for malformed JSON, "dimension mismatch: ..." naming the
// offending candidate, "probability out of range: ..." for delta fields,
// "N >= 1 required" for an empty candidate list.
[[nodiscard]] ScenarioConfig load_scenario(const std::string& path);
[[nodiscard]] ScenarioConfig parse_scenario(const std::string& text);

// Canonical serialization (fixed key order, two-space indent, trailing
// newline); save writes exactly what serialize returns.
[[nodiscard]] std::string serialize_scenario(const ScenarioConfig& cfg);
void save_scenario(const ScenarioConfig& cfg, const std::string& path);

// Builds the N x N closed-loop grid. Dimension errors only; constants are
// attached separately so validation can run on invalid scenarios.
[[nodiscard]] CandidateBank make_bank(const ScenarioConfig& cfg);

// Derives and attaches the scoring constants (tau_override doubles as the
// direction horizon when the formula value is unbounded).
void attach_constants(CandidateBank& bank, const ScenarioConfig& cfg);

struct GenerationMargins {
    double eps_c_min = 0.05;
    double eps_a_min = 0.1;
    double gamma_min = 0.1;
};

struct GenerationOptions {
    NoiseLevels noise{0.05, 0.05, 1.0};
    double delta_c = 1.0 / 30.0;
    double delta_alg = 0.1;
    std::int64_t num_runs = 200;
    std::int64_t budget = 100000;      // sampling attempts before giving up
    double matched_rho_max = 0.9;      // spectral-radius cap for matched loops
    double explosive_rho_max = 1.5;    // cap so desk-scale episodes stay in range
    // Require both an explosive and a stable mismatch against the true plant
    // so single-scenario studies can exercise every score cell.
    bool mixed_mismatch_vs_true = false;
    std::optional<std::int64_t> max_tau;  // reject draws whose formula tau exceeds this
    // Output-map magnitude. Larger C raises the Markov separation faster than the
    // norm proxy, which shortens the formula episode length tau.
    double c_scale = 1.0;
};

struct GenerationStats {
    std::int64_t model_draws = 0;       // candidate draws, including rejected ones
    std::int64_t joint_rejections = 0;  // full banks rejected by the joint checks
    std::int64_t accepted_attempt = 0;  // 1-based joint attempt that passed
};

struct GenerationResult {
    ScenarioConfig config;
    GenerationStats stats;
};

/// Rejection-samples random static-output-feedback scenarios until
/// validate_scenario passes with the requested margins and at least one
/// mismatched pair is explosive. Deterministic in `seed`. Throws
/// GenerationError when the budget is exhausted.
[[nodiscard]] GenerationResult generate_scenario(int n, int d_x, int d_u, int d_y,
                                                 const GenerationMargins& margins,
                                                 std::uint64_t seed,
                                                 const GenerationOptions& opts = {});

}  // namespace supctl
