#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "supctl/criteria.hpp"
#include "supctl/montecarlo.hpp"
#include "supctl/numerics.hpp"
#include "supctl/random.hpp"
#include "supctl/scenario.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct GlobalOpts {
    std::optional<std::uint64_t> seed;  // overrides the scenario's master_seed
    std::string out;
    std::string format = "json";
    int jobs = 1;
};

std::string default_out_dir() {
    if (const char* env = std::getenv("SUPCTL_OUT"); env != nullptr && *env != '\0') {
        return env;
    }
    return "./out";
}

supctl::ScenarioConfig load_with_overrides(const std::string& path, const GlobalOpts& g) {
    supctl::ScenarioConfig cfg = supctl::load_scenario(path);
    if (g.seed) {
        cfg.master_seed = *g.seed;
    }
    return cfg;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw supctl::Error("cannot write '" + path.string() + "'");
    }
    out << text;
}

void write_timing_sidecar(const fs::path& path, int jobs, double total_seconds,
                          const std::vector<double>& per_run) {
    ojson j;
    j["schema_version"] = supctl::kSchemaVersion;
    j["jobs"] = jobs;
    j["total_wall_clock_seconds"] = total_seconds;
    j["per_run_wall_clock_seconds"] = per_run;
    write_text_file(path, j.dump(2) + "\n");
}

// "matched" / "destabilizing" / "mismatched_stable" for controller j against
// the true plant.
std::string cell_name(const supctl::CandidateBank& bank, int controller) {
    if (controller == bank.true_index) {
        return "matched";
    }
    return supctl::spectral_radius(bank.true_loop(controller).model.A) >= 1.0
               ? "destabilizing"
               : "mismatched_stable";
}

ojson tally_json(std::int64_t ones, std::int64_t episodes) {
    const supctl::WilsonInterval ci =
        supctl::wilson_interval(ones, episodes, supctl::kOneSided99);
    ojson j;
    j["ones"] = ones;
    j["rate"] = episodes > 0 ? static_cast<double>(ones) / static_cast<double>(episodes) : 0.0;
    j["wilson_lower"] = ci.lower;
    j["wilson_upper"] = ci.upper;
    return j;
}

int cmd_validate(const std::string& scenario_path, const GlobalOpts& g) {
    const supctl::ScenarioConfig cfg = load_with_overrides(scenario_path, g);
    supctl::CandidateBank bank = supctl::make_bank(cfg);
    const supctl::ValidationReport report = supctl::validate_scenario(bank);

    std::cout << "scenario: " << scenario_path << "\n";
    std::cout << "candidates: " << cfg.size() << ", d_x=" << bank.loop(0, 0).plant_dim
              << ", d_u=" << cfg.candidates[0].model.d_u()
              << ", d_y=" << cfg.candidates[0].model.d_y() << ", nu=" << cfg.nu
              << ", h=" << cfg.h << "\n";
    for (const supctl::AssumptionCheck& check : report.checks) {
        std::cout << "check " << check.name << ": " << (check.pass ? "pass" : "FAIL")
                  << " (margin " << check.margin << ") " << check.detail << "\n";
    }
    std::cout << "measured eps_c=" << report.eps_c_measured
              << " eps_a=" << report.eps_a_measured << " gamma=" << report.gamma_measured
              << "\n";
    if (!report.unstable_pairs.empty()) {
        std::cout << "unstable mismatched pairs:";
        for (const auto& [i, j] : report.unstable_pairs) {
            std::cout << " (" << i << "," << j << ")";
        }
        std::cout << "\n";
    }
    try {
        supctl::CandidateBank derived = bank;
        supctl::attach_constants(derived, cfg);
        const supctl::DerivedConstants& k = *derived.constants;
        std::cout << "derived theta=" << k.theta << " gamma=" << k.gamma << " tau=";
        if (k.tau == supctl::kUnboundedEpisodes) {
            std::cout << "unbounded";
        } else {
            std::cout << k.tau;
        }
        std::cout << " (T1=" << k.T1 << ", T2=" << k.T2 << ")\n";
        const std::int64_t horizon = supctl::horizon_length(
            cfg.size(), cfg.delta_alg, cfg.schedule_variant);
        std::cout << "schedule L=" << cfg.L_override.value_or(horizon)
                  << (cfg.L_override ? " (override)" : "") << "\n";
    } catch (const supctl::Error& e) {
        std::cout << "derived constants unavailable: " << e.what() << "\n";
    }
    std::cout << "verdict: " << (report.valid ? "VALID" : "INVALID") << "\n";
    return report.valid ? 0 : 1;
}

int cmd_run(const std::string& scenario_path, const GlobalOpts& g) {
    supctl::ScenarioConfig cfg = load_with_overrides(scenario_path, g);
    cfg.num_runs = 1;

    supctl::MonteCarloOptions opts;
    opts.jobs = 1;
    const supctl::MonteCarloResult res = supctl::run_montecarlo(cfg, opts);
    const supctl::RunSummary& run = res.runs.at(0);

    fs::create_directories(g.out);
    supctl::write_run_artifacts(g.out, run, "run");
    write_timing_sidecar(fs::path(g.out) / "timing.sidecar.json", 1, res.wall_clock_seconds,
                         {run.record.wall_clock_seconds});

    const supctl::RunRecord& rec = run.record;
    std::cout << "seed: " << run.seed << "\n";
    std::cout << "episodes: " << rec.episodes.size() << " of L=" << res.aggregate.L
              << " (tau=" << res.aggregate.tau << ")\n";
    std::cout << "committed: " << rec.committed << " (true index " << cfg.true_index << ", "
              << (rec.success ? "success" : "failure") << ")\n";
    std::cout << "pull counts:";
    for (const std::int64_t q : rec.pull_counts) {
        std::cout << " " << q;
    }
    std::cout << "\n";
    if (!rec.divergences.empty()) {
        std::cout << "divergences: " << rec.divergences.size() << "\n";
    }
    std::cout << "artifacts: " << (fs::path(g.out) / "run.summary.json").string() << "\n";
    return 0;
}

int cmd_montecarlo(const std::string& scenario_path, const GlobalOpts& g) {
    const supctl::ScenarioConfig cfg = load_with_overrides(scenario_path, g);

    supctl::MonteCarloOptions opts;
    opts.jobs = g.jobs;
    opts.out_dir = g.out;
    opts.runs_csv = g.format == "csv";
    const supctl::MonteCarloResult res = supctl::run_montecarlo(cfg, opts);

    const supctl::MonteCarloAggregate& agg = res.aggregate;
    std::cout << "runs: " << agg.num_runs << " (jobs " << g.jobs << ")\n";
    std::cout << "tau: " << agg.tau << (agg.tau_overridden ? " (override)" : "") << ", L: "
              << agg.L << (agg.L_overridden ? " (override)" : "") << "\n";
    std::cout << "successes: " << agg.successes << " (rate " << agg.success_rate
              << ", one-sided 99% lower " << agg.success_lower_99 << ")\n";
    std::cout << "diverged runs: " << agg.diverged_runs << "\n";
    std::cout << "max suboptimal pulls: " << agg.max_suboptimal_pulls << " (bound "
              << agg.pull_bound << ")\n";
    std::cout << "artifacts: " << g.out << "\n";
    return 0;
}

int cmd_criteria_stats(const std::string& scenario_path, int controller,
                       std::int64_t episodes, bool random_init, double init_magnitude,
                       const GlobalOpts& g) {
    const supctl::ScenarioConfig cfg = load_with_overrides(scenario_path, g);
    supctl::CandidateBank bank = supctl::make_bank(cfg);
    supctl::attach_constants(bank, cfg);
    const supctl::CriterionConfig ccfg =
        supctl::make_criterion_config(bank, cfg.criterion_variant, cfg.tau_override);

    supctl::CriteriaStatsOptions opts;
    opts.randomized_init = random_init;
    opts.init_magnitude = init_magnitude;
    opts.jobs = g.jobs;
    const supctl::CriteriaCellStats st =
        supctl::criteria_stats(bank, ccfg, controller, episodes, cfg.master_seed, opts);

    const std::string cell = cell_name(bank, controller);
    ojson j;
    j["schema_version"] = supctl::kSchemaVersion;
    j["controller"] = controller;
    j["cell"] = cell;
    j["episodes"] = st.episodes;
    j["tau"] = ccfg.tau;
    j["meets_length_requirements"] = ccfg.meets_length_requirements;
    j["randomized_init"] = random_init;
    j["z_one_sided_99"] = supctl::kOneSided99;
    j["s1"] = tally_json(st.s1_ones, st.episodes);
    j["s2"] = tally_json(st.s2_ones, st.episodes);
    j["s"] = tally_json(st.s_ones, st.episodes);

    fs::create_directories(g.out);
    write_text_file(fs::path(g.out) / "criteria_stats.json", j.dump(2) + "\n");
    if (g.format == "csv") {
        std::string csv = "controller,cell,episodes,s1_ones,s2_ones,s_ones\n";
        csv += std::to_string(controller) + "," + cell + "," + std::to_string(st.episodes) +
               "," + std::to_string(st.s1_ones) + "," + std::to_string(st.s2_ones) + "," +
               std::to_string(st.s_ones) + "\n";
        write_text_file(fs::path(g.out) / "criteria_stats.csv", csv);
    }

    std::cout << "controller " << controller << " (" << cell << "), " << st.episodes
              << " episodes at tau=" << ccfg.tau << "\n";
    std::cout << "s1 rate: " << st.s1_rate() << ", s2 rate: " << st.s2_rate()
              << ", s rate: " << st.s_rate() << "\n";
    std::cout << "artifacts: " << (fs::path(g.out) / "criteria_stats.json").string() << "\n";
    return 0;
}

int cmd_generate(int n, int d_x, int d_u, int d_y, const supctl::GenerationMargins& margins,
                 const supctl::GenerationOptions& gen_opts, std::uint64_t seed,
                 const std::string& out_file, const GlobalOpts& g) {
    const supctl::GenerationResult res =
        supctl::generate_scenario(n, d_x, d_u, d_y, margins, seed, gen_opts);

    fs::path path = out_file.empty() ? fs::path(g.out) / "scenario.json" : fs::path(out_file);
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    supctl::save_scenario(res.config, path.string());

    supctl::CandidateBank bank = supctl::make_bank(res.config);
    bank.declared =
        supctl::DeclaredMargins{margins.eps_c_min, margins.eps_a_min, margins.gamma_min};
    const supctl::ValidationReport report = supctl::validate_scenario(bank);

    std::cout << "scenario: " << path.string() << "\n";
    std::cout << "true index: " << res.config.true_index << "\n";
    std::cout << "model draws: " << res.stats.model_draws << ", joint rejections: "
              << res.stats.joint_rejections << ", accepted attempt: "
              << res.stats.accepted_attempt << "\n";
    std::cout << "measured eps_c=" << report.eps_c_measured << " eps_a="
              << report.eps_a_measured << " gamma=" << report.gamma_measured << "\n";
    std::cout << "verdict: " << (report.valid ? "VALID" : "INVALID") << "\n";
    return report.valid ? 0 : 1;
}

int cmd_report(const std::string& run_dir, const GlobalOpts& g) {
    (void)g;
    const fs::path dir(run_dir);
    const fs::path agg_path = dir / "aggregate.json";
    std::ifstream in(agg_path, std::ios::binary);
    if (!in) {
        throw supctl::ConfigError("cannot open '" + agg_path.string() +
                                  "'; expected a montecarlo output directory");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    ojson agg;
    try {
        agg = ojson::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw supctl::ConfigError("parse error: " + std::string(e.what()));
    }
    if (!agg.contains("scenario") || !agg.contains("effective")) {
        throw supctl::ConfigError("aggregate.json lacks the embedded scenario");
    }

    const supctl::ScenarioConfig cfg = supctl::parse_scenario(agg["scenario"].dump());
    supctl::CandidateBank bank = supctl::make_bank(cfg);
    supctl::attach_constants(bank, cfg);
    const std::int64_t tau = agg["effective"]["tau"].get<std::int64_t>();
    const std::int64_t L = agg["effective"]["L"].get<std::int64_t>();

    std::int64_t evaluated = 0;
    std::int64_t successful = 0;
    std::int64_t satisfied_successful = 0;
    double max_empirical_c0 = 0.0;
    ojson per_run = ojson::array();
    supctl::L2GainReport constants_probe;
    bool have_probe = false;

    for (std::int64_t k = 0;; ++k) {
        char name[48];
        std::snprintf(name, sizeof(name), "run_%05d.summary.json", static_cast<int>(k));
        const fs::path summary_path = dir / "runs" / name;
        std::ifstream run_in(summary_path, std::ios::binary);
        if (!run_in) {
            break;
        }
        std::ostringstream run_buf;
        run_buf << run_in.rdbuf();
        const ojson sj = ojson::parse(run_buf.str());

        supctl::EnergyMetrics energy;
        energy.state_energy = sj["energy"]["state_energy"].get<double>();
        energy.input_energy_pre = sj["energy"]["input_energy_pre"].get<double>();
        energy.input_energy_post = sj["energy"]["input_energy_post"].get<double>();
        const bool success = sj["success"].get<bool>();
        const int committed = sj["committed"].get<int>();

        ojson row;
        row["run_index"] = sj["run_index"];
        row["success"] = success;
        if (committed < 0) {
            row["evaluated"] = false;
            per_run.push_back(std::move(row));
            continue;
        }
        const supctl::L2GainReport rep =
            supctl::l2_gain_report(bank, *bank.constants, tau, L, energy);
        if (!have_probe) {
            constants_probe = rep;
            have_probe = true;
        }
        evaluated += 1;
        successful += success ? 1 : 0;
        if (success && rep.bound_satisfied) {
            satisfied_successful += 1;
        }
        max_empirical_c0 = std::max(max_empirical_c0, rep.empirical_c0);
        row["evaluated"] = true;
        row["bound_satisfied"] = rep.bound_satisfied;
        row["log10_lhs"] = rep.log10_lhs;
        row["log10_rhs"] = rep.log10_rhs;
        row["empirical_c0"] = rep.empirical_c0;
        per_run.push_back(std::move(row));
    }
    if (!have_probe) {
        throw supctl::ConfigError("no completed runs under '" + (dir / "runs").string() + "'");
    }

    const double dominance =
        successful > 0 ? static_cast<double>(satisfied_successful) /
                             static_cast<double>(successful)
                       : 0.0;

    ojson j;
    j["schema_version"] = supctl::kSchemaVersion;
    j["tau"] = tau;
    j["L"] = L;
    j["t_prime"] = constants_probe.t_prime;
    j["r1"] = constants_probe.r1;
    j["r2"] = constants_probe.r2;
    j["kappa0"] = constants_probe.kappa0;
    j["kappa1"] = constants_probe.kappa1;
    j["c0_log10"] = constants_probe.c0.log10_value;
    j["c0_alternate_form"] = constants_probe.c0.alternate;
    j["c1"] = constants_probe.c1;
    j["evaluated_runs"] = evaluated;
    j["successful_runs"] = successful;
    j["satisfied_successful_runs"] = satisfied_successful;
    j["dominance_rate"] = dominance;
    j["max_empirical_c0"] = max_empirical_c0;
    j["per_run"] = std::move(per_run);
    write_text_file(dir / "l2_report.json", j.dump(2) + "\n");

    std::cout << "theoretical constants: log10(C0)=" << constants_probe.c0.log10_value
              << (constants_probe.c0.alternate ? " (stable-family form)" : "")
              << ", C1=" << constants_probe.c1 << " (kappa0=" << constants_probe.kappa0
              << ", R1=" << constants_probe.r1 << ", R2=" << constants_probe.r2
              << ", T'=" << constants_probe.t_prime << ")\n";
    std::cout << "empirical tightest C0 across runs: " << max_empirical_c0 << "\n";
    std::cout << "bound satisfied on " << satisfied_successful << "/" << successful
              << " successful runs (rate " << dominance << ")\n";
    std::cout << "artifacts: " << (dir / "l2_report.json").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation harness for supervisory switching control of hidden linear systems"};
    app.require_subcommand(1);

    GlobalOpts g;
    g.out = default_out_dir();
    app.add_option("--seed", g.seed, "override the scenario's master seed");
    app.add_option("--out", g.out,
                   "output directory (default: $SUPCTL_OUT, falling back to ./out)");
    app.add_option("--format", g.format, "artifact format: json adds nothing, csv adds CSVs")
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--jobs", g.jobs, "worker threads for independent runs/episodes")
        ->check(CLI::PositiveNumber);

    std::string scenario_path;
    auto* validate = app.add_subcommand("validate", "check scenario assumptions and margins");
    validate->add_option("scenario", scenario_path, "scenario file")->required();
    validate->fallthrough();

    auto* run = app.add_subcommand("run", "single seeded supervisor run");
    run->add_option("scenario", scenario_path, "scenario file")->required();
    run->fallthrough();

    auto* mc = app.add_subcommand("montecarlo", "aggregate study over num_runs seeds");
    mc->add_option("scenario", scenario_path, "scenario file")->required();
    mc->fallthrough();

    int controller = 0;
    std::int64_t episodes = 1000;
    bool random_init = false;
    double init_magnitude = 1.0;
    auto* stats = app.add_subcommand("criteria-stats",
                                     "score distribution of one controller cell");
    stats->add_option("scenario", scenario_path, "scenario file")->required();
    stats->add_option("--controller", controller, "controller index to hold fixed")->required();
    stats->add_option("--episodes", episodes, "independent episodes")
        ->check(CLI::PositiveNumber);
    stats->add_flag("--random-init", random_init, "uniform initial state instead of zero");
    stats->add_option("--init-magnitude", init_magnitude,
                      "half-width of the random initial-state box");
    stats->fallthrough();

    int gen_n = 2;
    int gen_dx = 2;
    int gen_du = 1;
    int gen_dy = 1;
    supctl::GenerationMargins margins;
    supctl::GenerationOptions gen_opts;
    std::uint64_t gen_seed = 0;
    std::int64_t gen_max_tau = 0;
    std::string out_file;
    auto* gen = app.add_subcommand("generate", "rejection-sample a scenario with margins");
    gen->add_option("--n", gen_n, "candidate count")->check(CLI::Range(2, 64));
    gen->add_option("--dx", gen_dx, "plant state dimension")->check(CLI::PositiveNumber);
    gen->add_option("--du", gen_du, "input dimension")->check(CLI::PositiveNumber);
    gen->add_option("--dy", gen_dy, "output dimension")->check(CLI::PositiveNumber);
    gen->add_option("--eps-c", margins.eps_c_min, "observability margin floor");
    gen->add_option("--eps-a", margins.eps_a_min, "explosiveness margin floor");
    gen->add_option("--gamma", margins.gamma_min, "Markov separation floor");
    gen->add_option("--sigma-w", gen_opts.noise.sigma_w, "process noise level");
    gen->add_option("--sigma-eta", gen_opts.noise.sigma_eta, "measurement noise level");
    gen->add_option("--sigma-u", gen_opts.noise.sigma_u, "exploratory input level");
    gen->add_option("--delta-c", gen_opts.delta_c, "per-episode failure budget");
    gen->add_option("--delta-alg", gen_opts.delta_alg, "algorithm failure budget");
    gen->add_option("--num-runs", gen_opts.num_runs, "num_runs recorded in the scenario");
    gen->add_option("--budget", gen_opts.budget, "model-draw budget before giving up");
    gen->add_option("--max-tau", gen_max_tau,
                    "reject scenarios whose formula episode length exceeds this");
    gen->add_option("--c-scale", gen_opts.c_scale,
                    "output-map magnitude; larger values shorten the formula episode length")
        ->check(CLI::PositiveNumber);
    gen->add_option("--explosive-rho-max", gen_opts.explosive_rho_max,
                    "spectral-radius cap on explosive mismatched loops")
        ->check(CLI::PositiveNumber);
    gen->add_flag("--mixed", gen_opts.mixed_mismatch_vs_true,
                  "demand both a stable and an explosive mismatch against the true index");
    gen->add_option("--out-file", out_file, "scenario path (default <out>/scenario.json)");
    gen->fallthrough();

    std::string run_dir;
    auto* report = app.add_subcommand("report", "L2-gain bound report for a montecarlo tree");
    report->add_option("run_dir", run_dir, "montecarlo output directory")->required();
    report->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // usage problems are validation failures
    }

    try {
        if (*validate) {
            return cmd_validate(scenario_path, g);
        }
        if (*run) {
            return cmd_run(scenario_path, g);
        }
        if (*mc) {
            return cmd_montecarlo(scenario_path, g);
        }
        if (*stats) {
            return cmd_criteria_stats(scenario_path, controller, episodes, random_init,
                                      init_magnitude, g);
        }
        if (*gen) {
            if (gen_max_tau > 0) {
                gen_opts.max_tau = gen_max_tau;
            }
            const std::uint64_t seed = g.seed.value_or(gen_seed);
            return cmd_generate(gen_n, gen_dx, gen_du, gen_dy, margins, gen_opts, seed,
                                out_file, g);
        }
        if (*report) {
            return cmd_report(run_dir, g);
        }
    } catch (const supctl::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const supctl::InvalidScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
