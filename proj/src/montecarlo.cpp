#include "supctl/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "json.hpp"
#include "supctl/criteria.hpp"
#include "supctl/formulas.hpp"
#include "supctl/numerics.hpp"
#include "supctl/random.hpp"
#include "supctl/simulator.hpp"

namespace supctl {

using ojson = nlohmann::ordered_json;

WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
    if (trials < 0 || successes < 0 || successes > trials) {
        throw ConfigError("wilson_interval needs 0 <= successes <= trials");
    }
    if (!(z >= 0.0) || !std::isfinite(z)) {
        throw ConfigError("wilson_interval needs a finite z >= 0");
    }
    if (trials == 0) {
        return {0.0, 1.0};
    }
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double CriteriaCellStats::s1_rate() const {
    return episodes > 0 ? static_cast<double>(s1_ones) / static_cast<double>(episodes) : 0.0;
}
double CriteriaCellStats::s2_rate() const {
    return episodes > 0 ? static_cast<double>(s2_ones) / static_cast<double>(episodes) : 0.0;
}
double CriteriaCellStats::s_rate() const {
    return episodes > 0 ? static_cast<double>(s_ones) / static_cast<double>(episodes) : 0.0;
}

namespace {

int clamp_jobs(int jobs) {
    if (jobs < 1) {
        throw ConfigError("jobs must be >= 1");
    }
    return std::min(jobs, 256);
}

// Runs body(k) for k in [0, count) across `jobs` threads. Work items are
// independent and land in caller-indexed slots, so scheduling order never
// shows up in the results. The first stored exception (by index) rethrows.
template <typename Body>
void parallel_for(std::int64_t count, int jobs, Body&& body) {
    if (count <= 0) {
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    std::atomic<std::int64_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::int64_t k = next.fetch_add(1);
            if (k >= count) {
                break;
            }
            try {
                body(k);
            } catch (...) {
                errors[static_cast<std::size_t>(k)] = std::current_exception();
            }
        }
    };
    const int threads = static_cast<int>(
        std::min<std::int64_t>(count, clamp_jobs(jobs)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (std::thread& t : pool) {
            t.join();
        }
    }
    for (const std::exception_ptr& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

std::string run_basename(int run_index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "run_%05d", run_index);
    return buf;
}

// Shortest round-trip decimal text for CSV cells, identical across platforms
// for identical doubles.
std::string csv_number(double x) { return ojson(x).dump(); }

ojson energy_json(const EnergyMetrics& e) {
    return ojson{{"state_energy", e.state_energy},
                 {"input_energy_pre", e.input_energy_pre},
                 {"input_energy_post", e.input_energy_post}};
}

ojson divergences_json(const std::vector<DivergenceEvent>& events) {
    ojson arr = ojson::array();
    for (const DivergenceEvent& d : events) {
        arr.push_back(ojson{{"episode", d.episode},
                            {"controller", d.controller},
                            {"global_step", d.global_step}});
    }
    return arr;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write artifact '" + path.string() + "'");
    }
    out << text;
    if (!out) {
        throw Error("short write on artifact '" + path.string() + "'");
    }
}

}  // namespace

void write_run_artifacts(const std::string& dir, const RunSummary& run,
                         const std::string& basename) {
    const std::filesystem::path base = std::filesystem::path(dir) / basename;
    const RunRecord& rec = run.record;

    std::string lines;
    for (const EpisodeRecord& ep : rec.episodes) {
        ojson j{{"episode", ep.episode}, {"controller", ep.controller}, {"s1", ep.s1},
                {"s2", ep.s2},           {"s", ep.s},                   {"Q", ep.q_snapshot},
                {"state_norm_end", ep.state_norm_end}};
        lines += j.dump();
        lines += '\n';
    }
    write_text(base.string() + ".jsonl", lines);

    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["run_index"] = run.run_index;
    j["seed"] = run.seed;
    j["committed"] = rec.committed;
    j["success"] = rec.success;
    j["episodes"] = rec.episodes.size();
    j["exploration_steps"] = rec.exploration_steps;
    j["post_commit_steps"] = rec.post_commit_steps;
    j["pull_counts"] = rec.pull_counts;
    j["divergences"] = divergences_json(rec.divergences);
    j["energy"] = energy_json(rec.energy);
    write_text(base.string() + ".summary.json", j.dump(2) + "\n");
}

namespace {

void write_selection_curve(const std::filesystem::path& path, const MonteCarloResult& res) {
    const int t = res.config.true_index;
    std::string csv = "episode,active_runs,true_share_mean\n";
    for (std::int64_t ell = 1; ell <= res.aggregate.L; ++ell) {
        std::int64_t active = 0;
        std::int64_t q_sum = 0;
        for (const RunSummary& run : res.runs) {
            if (static_cast<std::int64_t>(run.record.episodes.size()) < ell) {
                continue;
            }
            active += 1;
            q_sum += run.record.episodes[static_cast<std::size_t>(ell - 1)]
                         .q_snapshot[static_cast<std::size_t>(t)];
        }
        const double share =
            active > 0 ? static_cast<double>(q_sum) /
                             (static_cast<double>(active) * static_cast<double>(ell))
                       : 0.0;
        csv += std::to_string(ell);
        csv += ',';
        csv += std::to_string(active);
        csv += ',';
        csv += csv_number(share);
        csv += '\n';
    }
    write_text(path, csv);
}

void write_runs_csv(const std::filesystem::path& path, const MonteCarloResult& res) {
    const int n = res.config.size();
    std::string csv = "run_index,seed,committed,success,episodes,exploration_steps,"
                      "post_commit_steps,diverged";
    for (int i = 0; i < n; ++i) {
        csv += ",pull_" + std::to_string(i);
    }
    csv += ",state_energy,input_energy_pre,input_energy_post\n";
    for (const RunSummary& run : res.runs) {
        const RunRecord& rec = run.record;
        csv += std::to_string(run.run_index);
        csv += ',';
        csv += std::to_string(run.seed);
        csv += ',';
        csv += std::to_string(rec.committed);
        csv += ',';
        csv += rec.success ? "1" : "0";
        csv += ',';
        csv += std::to_string(rec.episodes.size());
        csv += ',';
        csv += std::to_string(rec.exploration_steps);
        csv += ',';
        csv += std::to_string(rec.post_commit_steps);
        csv += ',';
        csv += rec.divergences.empty() ? "0" : "1";
        for (int i = 0; i < n; ++i) {
            csv += ',';
            csv += std::to_string(rec.pull_counts[static_cast<std::size_t>(i)]);
        }
        csv += ',';
        csv += csv_number(rec.energy.state_energy);
        csv += ',';
        csv += csv_number(rec.energy.input_energy_pre);
        csv += ',';
        csv += csv_number(rec.energy.input_energy_post);
        csv += '\n';
    }
    write_text(path, csv);
}

void write_aggregate(const std::filesystem::path& path, const MonteCarloResult& res) {
    const MonteCarloAggregate& agg = res.aggregate;
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["scenario"] = ojson::parse(serialize_scenario(res.config));
    ojson eff;
    eff["tau"] = agg.tau;
    eff["L"] = agg.L;
    eff["tau_overridden"] = agg.tau_overridden;
    eff["L_overridden"] = agg.L_overridden;
    eff["pull_bound"] = agg.pull_bound;
    j["effective"] = std::move(eff);
    ojson r;
    r["num_runs"] = agg.num_runs;
    r["successes"] = agg.successes;
    r["success_rate"] = agg.success_rate;
    r["success_lower_99"] = agg.success_lower_99;
    r["z_one_sided_99"] = kOneSided99;
    r["diverged_runs"] = agg.diverged_runs;
    r["max_suboptimal_pulls"] = agg.max_suboptimal_pulls;
    r["mean_pull_counts"] = agg.mean_pull_counts;
    j["results"] = std::move(r);
    write_text(path, j.dump(2) + "\n");
}

void write_timing_sidecar(const std::filesystem::path& path, const MonteCarloResult& res,
                          int jobs) {
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["jobs"] = jobs;
    j["total_wall_clock_seconds"] = res.wall_clock_seconds;
    ojson per = ojson::array();
    for (const RunSummary& run : res.runs) {
        per.push_back(run.record.wall_clock_seconds);
    }
    j["per_run_wall_clock_seconds"] = std::move(per);
    write_text(path, j.dump(2) + "\n");
}

}  // namespace

MonteCarloResult run_montecarlo(const ScenarioConfig& cfg, const MonteCarloOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    const int jobs = clamp_jobs(opts.jobs);

    CandidateBank bank = make_bank(cfg);
    attach_constants(bank, cfg);
    const CriterionConfig ccfg =
        make_criterion_config(bank, cfg.criterion_variant, cfg.tau_override);
    const ExplorationSchedule sched =
        ExplorationSchedule::make(cfg.schedule_variant, cfg.size(), cfg.delta_alg,
                                  cfg.L_override);

    MonteCarloResult res;
    res.config = cfg;
    res.runs.resize(static_cast<std::size_t>(cfg.num_runs));

    parallel_for(cfg.num_runs, jobs, [&](std::int64_t k) {
        RunSummary& slot = res.runs[static_cast<std::size_t>(k)];
        slot.run_index = static_cast<int>(k);
        slot.seed = run_seed(cfg.master_seed, static_cast<std::uint64_t>(k));
        const NoiseStreams noise = NoiseStreams::from_bank(bank, slot.seed);
        SupervisorOptions sopts;
        sopts.post_commit_horizon = cfg.post_commit_horizon;
        slot.record = run_supervisor(bank, ccfg, sched, noise, sopts);
    });

    MonteCarloAggregate& agg = res.aggregate;
    agg.num_runs = cfg.num_runs;
    agg.tau = ccfg.tau;
    agg.L = sched.L;
    agg.tau_overridden = cfg.tau_override.has_value();
    agg.L_overridden = cfg.L_override.has_value();
    agg.pull_bound = pull_count_bound(sched);
    const int n = cfg.size();
    agg.mean_pull_counts.assign(static_cast<std::size_t>(n), 0.0);
    for (const RunSummary& run : res.runs) {
        const RunRecord& rec = run.record;
        agg.successes += rec.success ? 1 : 0;
        agg.diverged_runs += rec.divergences.empty() ? 0 : 1;
        for (int i = 0; i < n; ++i) {
            agg.mean_pull_counts[static_cast<std::size_t>(i)] +=
                static_cast<double>(rec.pull_counts[static_cast<std::size_t>(i)]);
        }
        if (rec.success) {
            for (int i = 0; i < n; ++i) {
                if (i == cfg.true_index) {
                    continue;
                }
                agg.max_suboptimal_pulls = std::max(
                    agg.max_suboptimal_pulls, rec.pull_counts[static_cast<std::size_t>(i)]);
            }
        }
    }
    for (double& m : agg.mean_pull_counts) {
        m /= static_cast<double>(cfg.num_runs);
    }
    agg.success_rate = static_cast<double>(agg.successes) / static_cast<double>(cfg.num_runs);
    agg.success_lower_99 = wilson_interval(agg.successes, cfg.num_runs, kOneSided99).lower;

    res.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (opts.out_dir) {
        const std::filesystem::path dir(*opts.out_dir);
        std::filesystem::create_directories(dir / "runs");
        for (const RunSummary& run : res.runs) {
            write_run_artifacts((dir / "runs").string(), run, run_basename(run.run_index));
        }
        write_aggregate(dir / "aggregate.json", res);
        write_selection_curve(dir / "selection_curve.csv", res);
        if (opts.runs_csv) {
            write_runs_csv(dir / "runs.csv", res);
        }
        write_timing_sidecar(dir / "timing.sidecar.json", res, jobs);
    }
    return res;
}

CriteriaCellStats criteria_stats(const CandidateBank& bank, const CriterionConfig& cfg,
                                 int controller, std::int64_t num_episodes,
                                 std::uint64_t master_seed, const CriteriaStatsOptions& opts) {
    if (controller < 0 || controller >= bank.size()) {
        throw ConfigError("controller index out of range");
    }
    if (num_episodes < 1) {
        throw ConfigError("num_episodes must be >= 1");
    }
    const int dim = bank.true_loop(controller).dim();

    std::atomic<std::int64_t> s1{0};
    std::atomic<std::int64_t> s2{0};
    std::atomic<std::int64_t> s{0};
    parallel_for(num_episodes, opts.jobs, [&](std::int64_t e) {
        const NoiseStreams noise =
            NoiseStreams::from_bank(bank, run_seed(master_seed, static_cast<std::uint64_t>(e)));
        Vector x1 = Vector::Zero(dim);
        if (opts.randomized_init) {
            const std::uint64_t seed = noise.init_seed();
            for (int i = 0; i < dim; ++i) {
                x1(i) = opts.init_magnitude *
                        (2.0 * uniform01(seed, static_cast<std::uint64_t>(i)) - 1.0);
            }
        }
        const RolloutResult rr =
            rollout_episode(bank, controller, x1, cfg.tau, noise, 0);
        const EpisodeOutputs ep = EpisodeOutputs::from_trajectory(rr.trajectory, controller);
        const EpisodeScore score = score_episode(ep, bank, cfg);
        s1.fetch_add(score.s1);
        s2.fetch_add(score.s2);
        s.fetch_add(score.s);
    });

    CriteriaCellStats out;
    out.controller = controller;
    out.episodes = num_episodes;
    out.s1_ones = s1.load();
    out.s2_ones = s2.load();
    out.s_ones = s.load();
    return out;
}

namespace {

// log10(10^a + 10^b) without leaving the log domain.
double log10_sum(double a, double b) {
    if (std::isinf(a) && a < 0.0) {
        return b;
    }
    if (std::isinf(b) && b < 0.0) {
        return a;
    }
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log10(1.0 + std::pow(10.0, lo - hi));
}

}  // namespace

L2GainReport l2_gain_report(const CandidateBank& bank, const DerivedConstants& k,
                            std::int64_t tau, std::int64_t L, const EnergyMetrics& energy) {
    if (tau < 1 || L < 1) {
        throw ConfigError("l2_gain_report needs tau >= 1 and L >= 1");
    }
    const StateSpaceModel& star = bank.true_loop(bank.true_index).model;

    L2GainReport rep;
    rep.r1 = k.R1;
    rep.r2 = k.R2;
    rep.t_prime = tau * L;
    rep.energy = energy;

    const Matrix p_raw =
        dlyap(star.A, Matrix::Identity(star.A.rows(), star.A.cols()));
    const Matrix p = 0.5 * (p_raw + p_raw.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(p);
    rep.kappa0 = es.eigenvalues().maxCoeff();
    const double sig_b = star.B.jacobiSvd().singularValues()(0);
    rep.kappa1 = 2.0 * rep.kappa0 * rep.kappa0 * (1.0 + sig_b * sig_b);
    rep.c0 = c0_transient(rep.kappa0, rep.r1, rep.r2, rep.t_prime);
    rep.c1 = rep.kappa1;

    const double lhs = energy.state_energy;
    const double pre = energy.input_energy_pre;
    const double post = energy.input_energy_post;
    const double neg_inf = -std::numeric_limits<double>::infinity();
    rep.log10_lhs = lhs > 0.0 ? std::log10(lhs) : neg_inf;
    const double term1 = pre > 0.0 ? rep.c0.log10_value + std::log10(pre) : neg_inf;
    const double term2 = post > 0.0 && rep.c1 > 0.0 ? std::log10(rep.c1) + std::log10(post)
                                                    : neg_inf;
    rep.log10_rhs = log10_sum(term1, term2);
    rep.bound_satisfied = lhs == 0.0 || rep.log10_lhs <= rep.log10_rhs;
    rep.empirical_c0 = pre > 0.0 ? std::max(0.0, (lhs - rep.c1 * post) / pre) : 0.0;
    return rep;
}

}  // namespace supctl
