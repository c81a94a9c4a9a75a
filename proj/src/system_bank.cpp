#include "supctl/system_bank.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "supctl/formulas.hpp"

namespace supctl {

void StateSpaceModel::validate(const std::string& label) const {
    require(A.rows() == A.cols(), label + ": A must be square");
    require(A.rows() > 0, label + ": empty state dimension");
    require(B.rows() == A.rows(), label + ": B row count must match A");
    require(B.cols() > 0, label + ": empty input dimension");
    require(C.cols() == A.rows(), label + ": C column count must match A");
    require(C.rows() > 0, label + ": empty output dimension");
    require_finite(A, label + ".A");
    require_finite(B, label + ".B");
    require_finite(C, label + ".C");
}

void Controller::validate(const std::string& label) const {
    require(D_K.rows() > 0 && D_K.cols() > 0, label + ": D_K must be set");
    require_finite(D_K, label + ".D_K");
    if (kind == ControllerKind::dynamic) {
        require(A_K.rows() == A_K.cols(), label + ": A_K must be square");
        require(A_K.rows() > 0, label + ": dynamic controller needs state");
        require(B_K.rows() == A_K.rows(), label + ": B_K row count must match A_K");
        require(B_K.cols() == D_K.cols(), label + ": B_K column count must match D_K");
        require(C_K.rows() == D_K.rows(), label + ": C_K row count must match D_K");
        require(C_K.cols() == A_K.rows(), label + ": C_K column count must match A_K");
        require_finite(A_K, label + ".A_K");
        require_finite(B_K, label + ".B_K");
        require_finite(C_K, label + ".C_K");
    }
}

ClosedLoop build_closed_loop(const StateSpaceModel& plant, const Controller& ctrl) {
    plant.validate("plant");
    ctrl.validate("controller");
    require(ctrl.D_K.rows() == plant.d_u(), "controller output dim must match plant input dim");
    require(ctrl.D_K.cols() == plant.d_y(), "controller input dim must match plant output dim");

    ClosedLoop cl;
    cl.plant_dim = plant.d_x();
    if (ctrl.kind == ControllerKind::static_output_feedback) {
        cl.controller_dim = 0;
        cl.model.A = plant.A + plant.B * ctrl.D_K * plant.C;
        cl.model.B = plant.B;
        cl.model.C = plant.C;
        return cl;
    }

    const Eigen::Index dx = plant.d_x();
    const Eigen::Index dk = ctrl.d_k();
    cl.controller_dim = dk;
    cl.model.A = Matrix::Zero(dx + dk, dx + dk);
    cl.model.A.topLeftCorner(dx, dx) = plant.A + plant.B * ctrl.D_K * plant.C;
    cl.model.A.topRightCorner(dx, dk) = plant.B * ctrl.C_K;
    cl.model.A.bottomLeftCorner(dk, dx) = ctrl.B_K * plant.C;
    cl.model.A.bottomRightCorner(dk, dk) = ctrl.A_K;
    cl.model.B = Matrix::Zero(dx + dk, plant.d_u());
    cl.model.B.topRows(dx) = plant.B;
    cl.model.C = Matrix::Zero(plant.d_y(), dx + dk);
    cl.model.C.leftCols(dx) = plant.C;
    return cl;
}

Matrix observability_matrix(const ClosedLoop& cl, int nu) {
    require(nu >= 1, "observability window must be at least 1");
    const Eigen::Index dy = cl.model.d_y();
    const Eigen::Index d = cl.model.d_x();
    Matrix obs(dy * nu, d);
    Matrix block = cl.model.C;  // C A^0, filled bottom-up
    for (int p = 0; p < nu; ++p) {
        obs.middleRows(dy * (nu - 1 - p), dy) = block;
        if (p + 1 < nu) block = block * cl.model.A;
    }
    return obs;
}

double strict_observability_margin(const ClosedLoop& cl, int nu) {
    return min_singular_value(observability_matrix(cl, nu));
}

Matrix markov_parameters(const ClosedLoop& cl, int h) {
    require(h >= 1, "Markov window must be at least 1");
    const Eigen::Index dy = cl.model.d_y();
    const Eigen::Index du = cl.model.d_u();
    Matrix G(dy, du * h);
    Matrix ap = Matrix::Identity(cl.model.d_x(), cl.model.d_x());
    for (int p = 0; p < h; ++p) {  // C A^p B, filled right-to-left
        G.middleCols(du * (h - 1 - p), du) = cl.model.C * ap * cl.model.B;
        if (p + 1 < h) ap = cl.model.A * ap;
    }
    return G;
}

double markov_separation(const CandidateBank& bank, int h) {
    const int n = bank.size();
    require(n >= 1, "empty candidate bank");
    if (n == 1) return std::numeric_limits<double>::infinity();
    double sep = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
        std::vector<Matrix> g(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = markov_parameters(bank.loop(i, j), h);
        for (int i = 0; i < n; ++i) {
            for (int k = i + 1; k < n; ++k) {
                const double s =
                    (g[static_cast<std::size_t>(i)] - g[static_cast<std::size_t>(k)])
                        .jacobiSvd()
                        .singularValues()(0);
                sep = std::min(sep, s);
            }
        }
    }
    return sep;
}

std::vector<DirectionPair> critical_directions(const CandidateBank& bank, int j, int h) {
    const int n = bank.size();
    require(j >= 0 && j < n, "controller index out of range");
    const Matrix g_jj = markov_parameters(bank.loop(j, j), h);
    std::vector<DirectionPair> dirs(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        auto& d = dirs[static_cast<std::size_t>(k)];
        if (k == j) {
            d.u = Vector::Zero(g_jj.rows());
            d.v = Vector::Zero(g_jj.cols());
            continue;
        }
        const Matrix diff = markov_parameters(bank.loop(k, j), h) - g_jj;
        const SingularTriple t = leading_singular_triple(diff);
        d.u = t.u;
        d.v = t.v;
    }
    return dirs;
}

std::vector<Vector> unstable_mode_directions(const CandidateBank& bank, int j, std::int64_t tau,
                                             int nu) {
    const int n = bank.size();
    require(j >= 0 && j < n, "controller index out of range");
    require(tau > nu + 2, "episode too short for an unstable-mode window");
    std::vector<Vector> dirs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const ClosedLoop& cl = bank.loop(i, j);
        const double rho = spectral_radius(cl.model.A);
        if (rho < 1.0) {
            dirs[static_cast<std::size_t>(i)] = Vector::Zero(cl.model.d_y());
            continue;
        }
        const Matrix scaled = cl.model.A / rho;
        const Matrix probe =
            cl.model.C * matrix_power(scaled, static_cast<std::uint64_t>(tau - nu - 2));
        const SingularTriple t = leading_singular_triple(probe);
        dirs[static_cast<std::size_t>(i)] = t.u;
    }
    return dirs;
}

DerivedConstants derive_constants(const CandidateBank& bank, int nu, int h, double delta_c,
                                  bool dim_free, bool zeta_include_mismatched_stable,
                                  std::optional<std::int64_t> direction_tau) {
    const int n = bank.size();
    require(n >= 1, "empty candidate bank");
    require(nu >= 1 && h >= 1, "window lengths must be positive");
    require(delta_c > 0.0 && delta_c < 1.0, "delta_c must lie in (0, 1)");

    DerivedConstants c;
    c.delta_c = delta_c;
    c.nu = nu;
    c.h = h;

    // Stability split and the explosiveness margin.
    double worst_matched_rho = 0.0;
    c.eps_a = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double rho = spectral_radius(bank.loop(i, j).model.A);
            if (i == j) {
                worst_matched_rho = std::max(worst_matched_rho, rho);
            } else if (rho >= 1.0) {
                c.eps_a = std::min(c.eps_a, rho - 1.0);
            }
        }
    }
    if (worst_matched_rho >= 1.0) {
        throw InvalidScenarioError("matched closed loop is not stable (rho = " +
                                   std::to_string(worst_matched_rho) + ")");
    }

    c.eps_c = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        c.eps_c = std::min(c.eps_c, strict_observability_margin(bank.loop(i, i), nu));
    }
    if (!(c.eps_c > 0.0)) {
        throw InvalidScenarioError("a matched loop is not strictly observable over the window");
    }

    // zeta bounds the matched loops' response to disturbances and to the
    // exploratory input; optionally the stable mismatched loops join the max.
    c.zeta = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j && !zeta_include_mismatched_stable) continue;
            const StateSpaceModel& m = bank.loop(i, j).model;
            if (spectral_radius(m.A) >= 1.0) continue;
            const Matrix eye = Matrix::Identity(m.d_x(), m.d_x());
            c.zeta = std::max(c.zeta, hinf_norm(m.C, m.A, eye));
            c.zeta = std::max(c.zeta, hinf_norm(m.C, m.A, m.B));
        }
    }

    c.gamma = markov_separation(bank, h);
    if (!(c.gamma > 0.0)) {
        throw InvalidScenarioError("Markov parameters of two candidates coincide (gamma = 0)");
    }

    c.theta = theta_proxy(c.zeta, c.eps_c, bank.noise.sigma_w, bank.noise.sigma_u,
                          bank.noise.sigma_eta);
    c.sigma_r_sq = c.theta;

    const int d_y = static_cast<int>(bank.loop(0, 0).model.d_y());
    const double t1_real =
        dim_free ? t1_dim_free_episode_real(nu, c.eps_a, c.eps_c, bank.noise.sigma_w, c.theta, n,
                                            delta_c)
                 : t1_episode_real(nu, c.eps_a, c.eps_c, bank.noise.sigma_w, c.theta, d_y, delta_c);
    const double t2_real = t2_episode_real(nu, h, n, delta_c, c.sigma_r_sq, bank.noise.sigma_u,
                                           c.gamma);
    if (std::isfinite(t1_real)) {
        c.T1 = dim_free ? t1_dim_free_episode(nu, c.eps_a, c.eps_c, bank.noise.sigma_w, c.theta,
                                              n, delta_c)
                        : t1_episode(nu, c.eps_a, c.eps_c, bank.noise.sigma_w, c.theta, d_y,
                                     delta_c);
    } else {
        c.T1 = kUnboundedEpisodes;
    }
    c.T2 = std::isfinite(t2_real)
               ? t2_episode(nu, h, n, delta_c, c.sigma_r_sq, bank.noise.sigma_u, c.gamma)
               : kUnboundedEpisodes;
    c.tau = std::max(c.T1, c.T2);

    c.R1 = 0.0;
    c.R2 = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const StateSpaceModel& m = bank.loop(i, j).model;
            c.R1 = std::max(c.R1, m.A.jacobiSvd().singularValues()(0));
            c.R2 = std::max(c.R2, m.B.jacobiSvd().singularValues()(0));
        }
    }

    c.direction_tau = direction_tau.value_or(c.tau);
    if (c.direction_tau == kUnboundedEpisodes) {
        throw InvalidScenarioError(
            "episode-length formula diverges (degenerate noise levels); supply a finite "
            "direction_tau / tau_override");
    }

    c.critical.resize(static_cast<std::size_t>(n));
    c.unstable.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        c.critical[static_cast<std::size_t>(j)] = critical_directions(bank, j, h);
        c.unstable[static_cast<std::size_t>(j)] =
            unstable_mode_directions(bank, j, c.direction_tau, nu);
    }
    return c;
}

ValidationReport validate_scenario(const CandidateBank& bank) {
    ValidationReport rep;
    const int n = bank.size();
    if (n < 1) {
        rep.checks.push_back({"nonempty_bank", false, 0.0, "candidate bank is empty"});
        return rep;
    }

    double worst_matched_rho = 0.0;
    double min_unstable_rho = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double rho = spectral_radius(bank.loop(i, j).model.A);
            if (i == j) {
                worst_matched_rho = std::max(worst_matched_rho, rho);
            } else if (rho >= 1.0) {
                rep.unstable_pairs.emplace_back(i, j);
                min_unstable_rho = std::min(min_unstable_rho, rho);
                if (bank.declared && rho < 1.0 + bank.declared->eps_a) {
                    rep.boundary_pairs.emplace_back(i, j);
                }
            }
        }
    }
    {
        std::ostringstream os;
        os << "max matched spectral radius " << worst_matched_rho;
        rep.checks.push_back(
            {"matched_stability", worst_matched_rho < 1.0, 1.0 - worst_matched_rho, os.str()});
    }

    rep.eps_c_measured = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        rep.eps_c_measured =
            std::min(rep.eps_c_measured, strict_observability_margin(bank.loop(i, i), bank.nu));
    }
    {
        const double floor = bank.declared ? bank.declared->eps_c : 0.0;
        std::ostringstream os;
        os << "min matched observability margin " << rep.eps_c_measured << " vs declared "
           << floor;
        rep.checks.push_back({"matched_observability",
                              bank.declared ? rep.eps_c_measured >= floor
                                            : rep.eps_c_measured > 0.0,
                              rep.eps_c_measured - floor, os.str()});
    }

    rep.eps_a_measured = std::isfinite(min_unstable_rho)
                             ? min_unstable_rho - 1.0
                             : std::numeric_limits<double>::infinity();
    {
        // Mismatched loops may be stable or explosive, but an explosive loop
        // sitting inside the declared margin breaks the detectability story.
        bool pass = true;
        std::ostringstream os;
        if (rep.unstable_pairs.empty()) {
            os << "no unstable mismatched loops";
        } else if (bank.declared) {
            pass = rep.boundary_pairs.empty();
            os << rep.unstable_pairs.size() << " unstable loops, min margin "
               << rep.eps_a_measured << " vs declared " << bank.declared->eps_a;
        } else {
            pass = rep.eps_a_measured > 0.0;
            os << rep.unstable_pairs.size() << " unstable loops, min margin "
               << rep.eps_a_measured;
        }
        rep.checks.push_back({"explosive_margin", pass,
                              bank.declared ? rep.eps_a_measured - bank.declared->eps_a
                                            : rep.eps_a_measured,
                              os.str()});
    }

    rep.gamma_measured = markov_separation(bank, bank.h);
    {
        const double floor = bank.declared ? bank.declared->gamma : 0.0;
        std::ostringstream os;
        os << "Markov separation " << rep.gamma_measured << " vs declared " << floor;
        rep.checks.push_back({"markov_separation",
                              bank.declared ? rep.gamma_measured >= floor
                                            : rep.gamma_measured > 0.0,
                              rep.gamma_measured - floor, os.str()});
    }

    rep.valid = std::all_of(rep.checks.begin(), rep.checks.end(),
                            [](const AssumptionCheck& a) { return a.pass; });
    return rep;
}

ValidationReport validate_scenario(const CandidateBank& bank, const DerivedConstants& constants) {
    CandidateBank declared_bank = bank;
    declared_bank.declared = DeclaredMargins{constants.eps_c, constants.eps_a, constants.gamma};
    declared_bank.nu = constants.nu;
    declared_bank.h = constants.h;
    return validate_scenario(declared_bank);
}

}  // namespace supctl
