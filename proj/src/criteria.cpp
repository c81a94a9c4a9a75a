#include "supctl/criteria.hpp"

#include <cmath>

#include "supctl/formulas.hpp"
#include "supctl/numerics.hpp"

namespace supctl {

namespace {

// Residual y_tau - C A^{tau-1} x_hat_1 through the active candidate's own
// matched loop, or nullopt when the episode cannot be scored arithmetically.
std::optional<Vector> prediction_residual(const EpisodeOutputs& ep, const CandidateBank& bank,
                                          const CriterionConfig& cfg) {
    if (ep.diverged) return std::nullopt;
    if (static_cast<std::int64_t>(ep.outputs.size()) < cfg.tau) return std::nullopt;
    const ClosedLoop& own = bank.loop(ep.active, ep.active);
    const Vector xhat1 = estimate_initial_state(ep, bank, cfg);
    const Vector y_tau = ep.outputs[static_cast<std::size_t>(cfg.tau - 1)];
    const Vector predicted =
        own.model.C * matrix_power(own.model.A, static_cast<std::uint64_t>(cfg.tau - 1)) * xhat1;
    Vector r = y_tau - predicted;
    if (!r.allFinite()) return std::nullopt;
    return r;
}

}  // namespace

CriterionConfig make_criterion_config(const CandidateBank& bank, CriterionVariant variant,
                                      std::optional<std::int64_t> tau_override) {
    if (!bank.constants.has_value()) {
        throw ConfigError("bank has no derived constants; call derive_constants first");
    }
    const DerivedConstants& c = *bank.constants;
    CriterionConfig cfg;
    cfg.variant = variant;
    cfg.delta_c = c.delta_c;
    cfg.theta = c.theta;
    cfg.gamma = c.gamma;
    cfg.nu = c.nu;
    cfg.h = c.h;
    cfg.n = bank.size();

    const std::int64_t tau = tau_override.value_or(c.tau);
    if (tau == kUnboundedEpisodes) {
        throw ConfigError(
            "episode-length formula is unbounded for this scenario; a tau_override is required");
    }
    if (tau < c.nu + c.h + 1 || tau <= c.nu + 2) {
        throw ConfigError("tau too short for the scoring windows (needs nu+h+1 and nu+3)");
    }
    cfg.tau = tau;
    cfg.meets_length_requirements = c.tau != kUnboundedEpisodes && tau >= c.tau;

    cfg.critical = c.critical;
    if (tau == c.direction_tau) {
        cfg.unstable = c.unstable;
    } else {
        cfg.unstable.resize(static_cast<std::size_t>(bank.size()));
        for (int j = 0; j < bank.size(); ++j) {
            cfg.unstable[static_cast<std::size_t>(j)] =
                unstable_mode_directions(bank, j, tau, c.nu);
        }
    }
    return cfg;
}

EpisodeOutputs EpisodeOutputs::from_trajectory(const Trajectory& tr, int active) {
    EpisodeOutputs ep;
    ep.outputs = tr.outputs;
    ep.inputs = tr.inputs;
    ep.active = active;
    ep.diverged = tr.diverged;
    return ep;
}

Vector estimate_initial_state(const EpisodeOutputs& ep, const CandidateBank& bank,
                              const CriterionConfig& cfg) {
    require(cfg.nu >= 1, "observability window must be positive");
    require(static_cast<std::int64_t>(ep.outputs.size()) >= cfg.nu,
            "episode shorter than the observability window");
    const ClosedLoop& own = bank.loop(ep.active, ep.active);
    const Matrix obs = observability_matrix(own, cfg.nu);
    const double smin = min_singular_value(obs);
    const double smax = obs.jacobiSvd().singularValues()(0);
    if (!(smin > 1e-12 * std::max(1.0, smax))) {
        throw InvalidScenarioError("matched observability matrix is rank-deficient");
    }
    const Eigen::Index d_y = own.model.d_y();
    Vector stack(static_cast<Eigen::Index>(cfg.nu) * d_y);
    for (int r = 0; r < cfg.nu; ++r) {
        // y_nu occupies the top block, y_1 the bottom.
        stack.segment(static_cast<Eigen::Index>(r) * d_y, d_y) =
            ep.outputs[static_cast<std::size_t>(cfg.nu - 1 - r)];
    }
    return pseudo_inverse(obs) * stack;
}

int criterion1(const EpisodeOutputs& ep, const CandidateBank& bank, const CriterionConfig& cfg) {
    const auto residual = prediction_residual(ep, bank, cfg);
    if (!residual.has_value()) return 0;
    const int d_y = static_cast<int>(bank.loop(ep.active, ep.active).model.d_y());
    const double threshold = criterion1_threshold(d_y, cfg.theta, cfg.delta_c);
    return residual->norm() > threshold ? 0 : 1;
}

int criterion1_dim_free(const EpisodeOutputs& ep, const CandidateBank& bank,
                        const CriterionConfig& cfg) {
    const auto residual = prediction_residual(ep, bank, cfg);
    if (!residual.has_value()) return 0;
    const double threshold = criterion1_dim_free_threshold(cfg.theta, cfg.n, cfg.delta_c);
    const auto& dirs = cfg.unstable.at(static_cast<std::size_t>(ep.active));
    for (const Vector& u : dirs) {
        if (u.size() == 0 || u.norm() == 0.0) continue;
        if (std::abs(u.dot(*residual)) > threshold) return 0;
    }
    return 1;
}

ShiftedData shifted_outputs(const EpisodeOutputs& ep, const CandidateBank& bank,
                            const CriterionConfig& cfg, const Vector& xhat1) {
    const std::int64_t first = cfg.nu + cfg.h + 1;
    require(cfg.tau >= first, "tau leaves no identification window");
    require(static_cast<std::int64_t>(ep.outputs.size()) >= cfg.tau,
            "episode shorter than tau");
    const ClosedLoop& own = bank.loop(ep.active, ep.active);
    const Matrix g = markov_parameters(own, cfg.h);
    const Eigen::Index d_u = own.model.d_u();

    ShiftedData data;
    data.first_t = first;
    const std::size_t count = static_cast<std::size_t>(cfg.tau - first + 1);
    data.ytilde.reserve(count);
    data.z.reserve(count);

    // A^{t-1}, advanced once per window step.
    Matrix power = matrix_power(own.model.A, static_cast<std::uint64_t>(first - 1));
    for (std::int64_t t = first; t <= cfg.tau; ++t) {
        Vector z(static_cast<Eigen::Index>(cfg.h) * d_u);
        for (int b = 0; b < cfg.h; ++b) {
            // top block u_{t-h}, bottom block u_{t-1}, matching G's ordering
            z.segment(static_cast<Eigen::Index>(b) * d_u, d_u) =
                ep.inputs[static_cast<std::size_t>(t - cfg.h + b - 1)];
        }
        const Vector predicted = own.model.C * power * xhat1;
        data.ytilde.push_back(ep.outputs[static_cast<std::size_t>(t - 1)] - predicted - g * z);
        data.z.push_back(std::move(z));
        if (t < cfg.tau) power = power * own.model.A;
    }
    return data;
}

double scalar_ols(const std::vector<double>& zs, const std::vector<double>& ys) {
    require(zs.size() == ys.size(), "regressor and response lengths differ");
    require(!zs.empty(), "empty regression data");
    long double num = 0.0L, den = 0.0L;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        num += static_cast<long double>(ys[i]) * zs[i];
        den += static_cast<long double>(zs[i]) * zs[i];
    }
    if (den == 0.0L) throw ExcitationError("zero excitation mass in scalar OLS");
    return static_cast<double>(num / den);
}

int criterion2(const EpisodeOutputs& ep, const CandidateBank& bank, const CriterionConfig& cfg) {
    if (ep.diverged) return 0;
    if (static_cast<std::int64_t>(ep.outputs.size()) < cfg.tau) return 0;
    const int j = ep.active;
    Vector xhat1 = estimate_initial_state(ep, bank, cfg);
    if (!xhat1.allFinite()) return 0;
    const ShiftedData data = shifted_outputs(ep, bank, cfg, xhat1);
    const auto& pairs = cfg.critical.at(static_cast<std::size_t>(j));
    for (int k = 0; k < static_cast<int>(pairs.size()); ++k) {
        if (k == j) continue;
        const DirectionPair& dir = pairs[static_cast<std::size_t>(k)];
        std::vector<double> zs, ys;
        zs.reserve(data.z.size());
        ys.reserve(data.z.size());
        for (std::size_t t = 0; t < data.z.size(); ++t) {
            zs.push_back(dir.v.dot(data.z[t]));
            ys.push_back(dir.u.dot(data.ytilde[t]));
        }
        double slope = 0.0;
        try {
            slope = scalar_ols(zs, ys);
        } catch (const ExcitationError&) {
            return 0;  // no identification evidence must never certify a match
        }
        if (!std::isfinite(slope)) return 0;
        if (std::abs(slope) > cfg.gamma) return 0;
    }
    return 1;
}

int combined_score(int s1, int s2) {
    require((s1 == 0 || s1 == 1) && (s2 == 0 || s2 == 1), "scores must be binary");
    return (s1 + s2) / 2;
}

EpisodeScore score_episode(const EpisodeOutputs& ep, const CandidateBank& bank,
                           const CriterionConfig& cfg) {
    EpisodeScore score;
    score.s1 = cfg.variant == CriterionVariant::dimension_free
                   ? criterion1_dim_free(ep, bank, cfg)
                   : criterion1(ep, bank, cfg);
    score.s2 = criterion2(ep, bank, cfg);
    score.s = combined_score(score.s1, score.s2);
    return score;
}

}  // namespace supctl
