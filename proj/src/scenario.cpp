#include "supctl/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "supctl/random.hpp"

namespace supctl {

using ojson = nlohmann::ordered_json;

namespace {

ojson matrix_to_json(const Matrix& m) {
    ojson rows = ojson::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ojson row = ojson::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const ojson& j, const std::string& where) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError("dimension mismatch: " + where + " must be a nonempty array of rows");
    }
    const std::size_t rows = j.size();
    std::size_t cols = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        const ojson& row = j[r];
        if (!row.is_array() || row.empty()) {
            throw ConfigError("dimension mismatch: " + where + " row " + std::to_string(r) +
                              " must be a nonempty array");
        }
        if (r == 0) {
            cols = row.size();
        } else if (row.size() != cols) {
            throw ConfigError("dimension mismatch: " + where + " row " + std::to_string(r) +
                              " has " + std::to_string(row.size()) + " entries, expected " +
                              std::to_string(cols));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (!row[c].is_number()) {
                throw ConfigError("parse error: " + where + " entry (" + std::to_string(r) +
                                  ", " + std::to_string(c) + ") is not a number");
            }
        }
    }
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                j[r][c].get<double>();
        }
    }
    if (!m.allFinite()) {
        throw ConfigError("parse error: " + where + " contains non-finite entries");
    }
    return m;
}

const ojson& need(const ojson& j, const char* key, const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end()) {
        throw ConfigError("parse error: missing field '" + std::string(key) + "' in " + where);
    }
    return *it;
}

void reject_unknown(const ojson& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (const auto& item : j.items()) {
        if (allowed.find(item.key()) == allowed.end()) {
            throw ConfigError("parse error: unknown field '" + item.key() + "' in " + where);
        }
    }
}

double need_probability(const ojson& j, const char* key) {
    const ojson& v = need(j, key, "scenario");
    if (!v.is_number()) {
        throw ConfigError("parse error: " + std::string(key) + " must be a number");
    }
    const double p = v.get<double>();
    if (!(p > 0.0) || !(p < 1.0)) {
        std::ostringstream oss;
        oss << "probability out of range: " << key << " = " << p << " must lie in (0, 1)";
        throw ConfigError(oss.str());
    }
    return p;
}

double need_nonnegative(const ojson& j, const char* key) {
    const ojson& v = need(j, key, "scenario");
    if (!v.is_number()) {
        throw ConfigError("parse error: " + std::string(key) + " must be a number");
    }
    const double x = v.get<double>();
    if (!(x >= 0.0) || !std::isfinite(x)) {
        throw ConfigError("parse error: " + std::string(key) + " must be finite and >= 0");
    }
    return x;
}

std::int64_t need_count(const ojson& j, const char* key, std::int64_t min_value) {
    const ojson& v = need(j, key, "scenario");
    if (!v.is_number_integer()) {
        throw ConfigError("parse error: " + std::string(key) + " must be an integer");
    }
    const std::int64_t n = v.get<std::int64_t>();
    if (n < min_value) {
        throw ConfigError("parse error: " + std::string(key) + " must be >= " +
                          std::to_string(min_value));
    }
    return n;
}

std::optional<std::int64_t> optional_count(const ojson& j, const char* key,
                                           std::int64_t min_value) {
    const ojson& v = need(j, key, "scenario");
    if (v.is_null()) {
        return std::nullopt;
    }
    if (!v.is_number_integer()) {
        throw ConfigError("parse error: " + std::string(key) + " must be null or an integer");
    }
    const std::int64_t n = v.get<std::int64_t>();
    if (n < min_value) {
        throw ConfigError("parse error: " + std::string(key) + " must be >= " +
                          std::to_string(min_value));
    }
    return n;
}

Candidate candidate_from_json(const ojson& j, int index) {
    const std::string where = "candidate " + std::to_string(index);
    if (!j.is_object()) {
        throw ConfigError("parse error: " + where + " must be an object");
    }
    reject_unknown(j, {"model", "controller"}, where);

    const ojson& jm = need(j, "model", where);
    reject_unknown(jm, {"A", "B", "C"}, where + " model");
    Candidate cand;
    cand.model.A = matrix_from_json(need(jm, "A", where), where + " A");
    cand.model.B = matrix_from_json(need(jm, "B", where), where + " B");
    cand.model.C = matrix_from_json(need(jm, "C", where), where + " C");

    const ojson& jc = need(j, "controller", where);
    const ojson& jkind = need(jc, "kind", where + " controller");
    if (!jkind.is_string()) {
        throw ConfigError("parse error: " + where + " controller kind must be a string");
    }
    const std::string kind = jkind.get<std::string>();
    if (kind == "static") {
        reject_unknown(jc, {"kind", "D_K"}, where + " controller");
        cand.controller.kind = ControllerKind::static_output_feedback;
        cand.controller.D_K = matrix_from_json(need(jc, "D_K", where), where + " D_K");
    } else if (kind == "dynamic") {
        reject_unknown(jc, {"kind", "A_K", "B_K", "C_K", "D_K"}, where + " controller");
        cand.controller.kind = ControllerKind::dynamic;
        cand.controller.A_K = matrix_from_json(need(jc, "A_K", where), where + " A_K");
        cand.controller.B_K = matrix_from_json(need(jc, "B_K", where), where + " B_K");
        cand.controller.C_K = matrix_from_json(need(jc, "C_K", where), where + " C_K");
        cand.controller.D_K = matrix_from_json(need(jc, "D_K", where), where + " D_K");
    } else {
        throw ConfigError("parse error: " + where + " controller kind '" + kind +
                          "' is not 'static' or 'dynamic'");
    }

    try {
        cand.model.validate(where + " model");
        cand.controller.validate(where + " controller");
    } catch (const Error& e) {
        throw ConfigError("dimension mismatch: " + std::string(e.what()));
    }
    return cand;
}

ojson candidate_to_json(const Candidate& cand) {
    ojson j;
    j["model"] = ojson{{"A", matrix_to_json(cand.model.A)},
                       {"B", matrix_to_json(cand.model.B)},
                       {"C", matrix_to_json(cand.model.C)}};
    ojson jc;
    if (cand.controller.kind == ControllerKind::static_output_feedback) {
        jc["kind"] = "static";
        jc["D_K"] = matrix_to_json(cand.controller.D_K);
    } else {
        jc["kind"] = "dynamic";
        jc["A_K"] = matrix_to_json(cand.controller.A_K);
        jc["B_K"] = matrix_to_json(cand.controller.B_K);
        jc["C_K"] = matrix_to_json(cand.controller.C_K);
        jc["D_K"] = matrix_to_json(cand.controller.D_K);
    }
    j["controller"] = std::move(jc);
    return j;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("parse error: " + std::string(e.what()));
    }
    if (!j.is_object()) {
        throw ConfigError("parse error: scenario document must be a JSON object");
    }
    reject_unknown(j,
                   {"schema_version", "true_index", "nu", "h", "sigma_w", "sigma_eta",
                    "sigma_u", "delta_c", "delta_alg", "criterion_variant", "schedule_variant",
                    "tau_override", "L_override", "master_seed", "num_runs",
                    "post_commit_horizon", "candidates"},
                   "scenario");

    if (need_count(j, "schema_version", 1) != kSchemaVersion) {
        throw ConfigError("parse error: unsupported schema_version");
    }

    ScenarioConfig cfg;
    const ojson& jc = need(j, "candidates", "scenario");
    if (!jc.is_array() || jc.empty()) {
        throw ConfigError("N >= 1 required");
    }
    for (std::size_t k = 0; k < jc.size(); ++k) {
        cfg.candidates.push_back(candidate_from_json(jc[k], static_cast<int>(k)));
    }
    // The candidates share one plant interface: equal d_u and d_y throughout.
    for (std::size_t k = 1; k < cfg.candidates.size(); ++k) {
        const auto& m0 = cfg.candidates[0].model;
        const auto& mk = cfg.candidates[k].model;
        if (mk.d_u() != m0.d_u() || mk.d_y() != m0.d_y()) {
            throw ConfigError("dimension mismatch: candidate " + std::to_string(k) + " has (d_u, d_y) = (" +
                              std::to_string(mk.d_u()) + ", " + std::to_string(mk.d_y()) +
                              ") but candidate 0 has (" + std::to_string(m0.d_u()) + ", " +
                              std::to_string(m0.d_y()) + ")");
        }
    }

    cfg.true_index = static_cast<int>(need_count(j, "true_index", 0));
    if (cfg.true_index >= cfg.size()) {
        throw ConfigError("parse error: true_index " + std::to_string(cfg.true_index) +
                          " outside the candidate list of size " + std::to_string(cfg.size()));
    }
    cfg.nu = static_cast<int>(need_count(j, "nu", 1));
    cfg.h = static_cast<int>(need_count(j, "h", 1));
    cfg.sigma_w = need_nonnegative(j, "sigma_w");
    cfg.sigma_eta = need_nonnegative(j, "sigma_eta");
    cfg.sigma_u = need_nonnegative(j, "sigma_u");
    cfg.delta_c = need_probability(j, "delta_c");
    cfg.delta_alg = need_probability(j, "delta_alg");

    const ojson& jcv = need(j, "criterion_variant", "scenario");
    if (!jcv.is_string()) {
        throw ConfigError("parse error: criterion_variant must be a string");
    }
    const std::string cv = jcv.get<std::string>();
    if (cv == "standard") {
        cfg.criterion_variant = CriterionVariant::standard;
    } else if (cv == "dimension_free") {
        cfg.criterion_variant = CriterionVariant::dimension_free;
    } else {
        throw ConfigError("parse error: criterion_variant '" + cv +
                          "' is not 'standard' or 'dimension_free'");
    }
    const ojson& jsv = need(j, "schedule_variant", "scenario");
    if (!jsv.is_string()) {
        throw ConfigError("parse error: schedule_variant must be a string");
    }
    const std::string sv = jsv.get<std::string>();
    if (sv == "fixed") {
        cfg.schedule_variant = ScheduleVariant::fixed;
    } else if (sv == "dynamic") {
        cfg.schedule_variant = ScheduleVariant::dynamic;
    } else {
        throw ConfigError("parse error: schedule_variant '" + sv +
                          "' is not 'fixed' or 'dynamic'");
    }

    cfg.tau_override = optional_count(j, "tau_override", 1);
    cfg.L_override = optional_count(j, "L_override", 1);
    const ojson& jseed = need(j, "master_seed", "scenario");
    if (!jseed.is_number_unsigned() && !jseed.is_number_integer()) {
        throw ConfigError("parse error: master_seed must be an integer");
    }
    if (jseed.is_number_integer() && !jseed.is_number_unsigned() &&
        jseed.get<std::int64_t>() < 0) {
        throw ConfigError("parse error: master_seed must be >= 0");
    }
    cfg.master_seed = jseed.get<std::uint64_t>();
    cfg.num_runs = need_count(j, "num_runs", 1);
    cfg.post_commit_horizon = optional_count(j, "post_commit_horizon", 0);
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("parse error: cannot open scenario file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["true_index"] = cfg.true_index;
    j["nu"] = cfg.nu;
    j["h"] = cfg.h;
    j["sigma_w"] = cfg.sigma_w;
    j["sigma_eta"] = cfg.sigma_eta;
    j["sigma_u"] = cfg.sigma_u;
    j["delta_c"] = cfg.delta_c;
    j["delta_alg"] = cfg.delta_alg;
    j["criterion_variant"] =
        cfg.criterion_variant == CriterionVariant::standard ? "standard" : "dimension_free";
    j["schedule_variant"] =
        cfg.schedule_variant == ScheduleVariant::fixed ? "fixed" : "dynamic";
    j["tau_override"] = cfg.tau_override ? ojson(*cfg.tau_override) : ojson(nullptr);
    j["L_override"] = cfg.L_override ? ojson(*cfg.L_override) : ojson(nullptr);
    j["master_seed"] = cfg.master_seed;
    j["num_runs"] = cfg.num_runs;
    j["post_commit_horizon"] =
        cfg.post_commit_horizon ? ojson(*cfg.post_commit_horizon) : ojson(nullptr);
    ojson cands = ojson::array();
    for (const Candidate& c : cfg.candidates) {
        cands.push_back(candidate_to_json(c));
    }
    j["candidates"] = std::move(cands);
    return j.dump(2) + "\n";
}

void save_scenario(const ScenarioConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write scenario file '" + path + "'");
    }
    out << serialize_scenario(cfg);
}

CandidateBank make_bank(const ScenarioConfig& cfg) {
    if (cfg.candidates.empty()) {
        throw ConfigError("N >= 1 required");
    }
    CandidateBank bank;
    bank.candidates = cfg.candidates;
    const int n = bank.size();
    bank.closed_loops.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        bank.closed_loops[static_cast<std::size_t>(i)].reserve(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            bank.closed_loops[static_cast<std::size_t>(i)].push_back(
                build_closed_loop(bank.candidates[static_cast<std::size_t>(i)].model,
                                  bank.candidates[static_cast<std::size_t>(j)].controller));
        }
    }
    bank.true_index = cfg.true_index;
    bank.noise = NoiseLevels{cfg.sigma_w, cfg.sigma_eta, cfg.sigma_u};
    bank.nu = cfg.nu;
    bank.h = cfg.h;
    return bank;
}

void attach_constants(CandidateBank& bank, const ScenarioConfig& cfg) {
    bank.constants = derive_constants(bank, cfg.nu, cfg.h, cfg.delta_c,
                                      cfg.criterion_variant == CriterionVariant::dimension_free,
                                      false, cfg.tau_override);
}

namespace {

// Scenario sampling uses one flat counter stream per generator invocation.
struct DrawStream {
    std::uint64_t seed;
    std::uint64_t counter = 0;

    double unit() { return uniform01(seed, counter++); }
    double symmetric() { return 2.0 * unit() - 1.0; }

    Matrix matrix(Eigen::Index rows, Eigen::Index cols, double scale) {
        Matrix m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                m(r, c) = scale * symmetric();
            }
        }
        return m;
    }
};

}  // namespace

GenerationResult generate_scenario(int n, int d_x, int d_u, int d_y,
                                   const GenerationMargins& margins, std::uint64_t seed,
                                   const GenerationOptions& opts) {
    if (n < 2) {
        throw ConfigError("scenario generation needs N >= 2");
    }
    if (d_x < 1 || d_u < 1 || d_y < 1) {
        throw ConfigError("scenario generation needs positive dimensions");
    }
    if (!(opts.c_scale > 0.0) || !std::isfinite(opts.c_scale)) {
        throw ConfigError("scenario generation needs c_scale > 0");
    }

    DrawStream rng{seed};
    GenerationStats stats;
    std::int64_t joint_attempt = 0;

    const auto charge = [&]() {
        stats.model_draws += 1;
        if (stats.model_draws > opts.budget) {
            std::ostringstream oss;
            oss << "scenario generation budget exhausted after " << stats.model_draws - 1
                << " draws and " << stats.joint_rejections
                << " joint rejections; the requested margins (eps_c >= " << margins.eps_c_min
                << ", eps_a >= " << margins.eps_a_min << ", gamma >= " << margins.gamma_min
                << ") may be unsatisfiable at these dimensions";
            throw GenerationError(oss.str());
        }
    };

    while (true) {
        joint_attempt += 1;
        std::vector<Candidate> cands;
        cands.reserve(static_cast<std::size_t>(n));

        for (int i = 0; i < n; ++i) {
            // Per-candidate rejection: observable model, then a gain that
            // places its own loop strictly inside the stability margin.
            while (true) {
                charge();
                Candidate cand;
                cand.model.A = rng.matrix(d_x, d_x, 1.0);
                const double rho = spectral_radius(cand.model.A);
                if (rho < 1e-9) {
                    continue;
                }
                const double target = 0.3 + 0.55 * rng.unit();
                cand.model.A *= target / rho;
                cand.model.B = rng.matrix(d_x, d_u, 1.0);
                cand.model.C = rng.matrix(d_y, d_x, opts.c_scale);

                cand.controller.kind = ControllerKind::static_output_feedback;
                bool gained = false;
                for (int attempt = 0; attempt < 16 && !gained; ++attempt) {
                    // Keep the feedback magnitude B * K * C invariant under
                    // c_scale so the matched-stability draw stays tractable.
                    cand.controller.D_K = rng.matrix(d_u, d_y, 0.8 / opts.c_scale);
                    const ClosedLoop own =
                        build_closed_loop(cand.model, cand.controller);
                    gained = spectral_radius(own.model.A) <= opts.matched_rho_max;
                }
                if (!gained) {
                    continue;
                }
                const ClosedLoop own = build_closed_loop(cand.model, cand.controller);
                if (strict_observability_margin(own, d_x) < margins.eps_c_min) {
                    continue;
                }
                cands.push_back(std::move(cand));
                break;
            }
        }

        ScenarioConfig cfg;
        cfg.candidates = std::move(cands);
        cfg.true_index = 0;
        cfg.nu = d_x;
        cfg.h = d_x;
        cfg.sigma_w = opts.noise.sigma_w;
        cfg.sigma_eta = opts.noise.sigma_eta;
        cfg.sigma_u = opts.noise.sigma_u;
        cfg.delta_c = opts.delta_c;
        cfg.delta_alg = opts.delta_alg;
        cfg.master_seed = seed;
        cfg.num_runs = opts.num_runs;

        CandidateBank bank = make_bank(cfg);

        // Joint checks: classify every mismatched loop, demand a clean split
        // between stable and properly explosive pairs.
        bool boundary = false;
        bool too_hot = false;
        std::vector<std::vector<int>> kind(static_cast<std::size_t>(n),
                                           std::vector<int>(static_cast<std::size_t>(n), 0));
        for (int i = 0; i < n && !boundary && !too_hot; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const double rho = spectral_radius(bank.loop(i, j).model.A);
                if (rho < 1.0) {
                    kind[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
                } else if (rho >= 1.0 + margins.eps_a_min) {
                    if (rho > opts.explosive_rho_max) {
                        too_hot = true;
                        break;
                    }
                    kind[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 2;
                } else {
                    boundary = true;
                    break;
                }
            }
        }
        if (boundary || too_hot) {
            stats.joint_rejections += 1;
            continue;
        }

        int explosive_total = 0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (kind[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] == 2) {
                    explosive_total += 1;
                }
            }
        }
        if (explosive_total == 0) {
            stats.joint_rejections += 1;
            continue;
        }

        if (opts.mixed_mismatch_vs_true) {
            // Pick the smallest true index whose row has both mismatch kinds.
            int chosen = -1;
            for (int i = 0; i < n && chosen < 0; ++i) {
                bool has_stable = false, has_explosive = false;
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    if (kind[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] == 1) {
                        has_stable = true;
                    }
                    if (kind[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] == 2) {
                        has_explosive = true;
                    }
                }
                if (has_stable && has_explosive) {
                    chosen = i;
                }
            }
            if (chosen < 0) {
                stats.joint_rejections += 1;
                continue;
            }
            cfg.true_index = chosen;
            bank.true_index = chosen;
        }

        if (markov_separation(bank, cfg.h) < margins.gamma_min) {
            stats.joint_rejections += 1;
            continue;
        }

        bank.declared = DeclaredMargins{margins.eps_c_min, margins.eps_a_min, margins.gamma_min};
        const ValidationReport report = validate_scenario(bank);
        if (!report.valid) {
            stats.joint_rejections += 1;
            continue;
        }

        if (opts.max_tau) {
            try {
                // Only the episode-length formula matters here; a short
                // direction horizon keeps the probe powers cheap.
                const DerivedConstants k = derive_constants(
                    bank, cfg.nu, cfg.h, cfg.delta_c, false, false,
                    static_cast<std::int64_t>(cfg.nu) + 3);
                if (k.tau == kUnboundedEpisodes || k.tau > *opts.max_tau) {
                    stats.joint_rejections += 1;
                    continue;
                }
            } catch (const Error&) {
                stats.joint_rejections += 1;
                continue;
            }
        }

        stats.accepted_attempt = joint_attempt;
        return GenerationResult{std::move(cfg), stats};
    }
}

}  // namespace supctl
