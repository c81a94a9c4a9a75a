#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "supctl/matrix.hpp"
#include "supctl/numerics.hpp"

namespace supctl {

struct StateSpaceModel {
    Matrix C;  // d_y x d_x
    Matrix A;  // d_x x d_x
    Matrix B;  // d_x x d_u

    [[nodiscard]] Eigen::Index d_x() const { return A.rows(); }
    [[nodiscard]] Eigen::Index d_u() const { return B.cols(); }
    [[nodiscard]] Eigen::Index d_y() const { return C.rows(); }

    void validate(const std::string& label) const;
};

enum class ControllerKind { static_output_feedback, dynamic };

// Output feedback u_bar = u + K(y). A static controller is the D_K gain alone;
// a dynamic one adds internal state  xk_{t+1} = A_K xk + B_K y,  out = C_K xk + D_K y.
struct Controller {
    ControllerKind kind = ControllerKind::static_output_feedback;
    Matrix A_K;  // d_k x d_k (dynamic only)
    Matrix B_K;  // d_k x d_y
    Matrix C_K;  // d_u x d_k
    Matrix D_K;  // d_u x d_y

    [[nodiscard]] Eigen::Index d_k() const {
        return kind == ControllerKind::dynamic ? A_K.rows() : 0;
    }
    void validate(const std::string& label) const;
};

struct ClosedLoop {
    StateSpaceModel model;  // the augmented triple
    Eigen::Index plant_dim = 0;
    Eigen::Index controller_dim = 0;

    [[nodiscard]] Eigen::Index dim() const { return plant_dim + controller_dim; }
};

struct Candidate {
    StateSpaceModel model;
    Controller controller;
};

struct NoiseLevels {
    double sigma_w = 0.0;
    double sigma_eta = 0.0;
    double sigma_u = 0.0;
};

struct DeclaredMargins {
    double eps_c = 0.0;
    double eps_a = 0.0;
    double gamma = 0.0;
};

struct DirectionPair {
    Vector u;
    Vector v;
};

// Sentinel for episode-length formulas that diverge (e.g. sigma_u = 0 makes
// the identification length infinite). Runs then require an explicit
// tau_override.
inline constexpr std::int64_t kUnboundedEpisodes = std::numeric_limits<std::int64_t>::max();

struct DerivedConstants {
    double delta_c = 1.0 / 30.0;  // per-episode failure budget the thresholds use
    double eps_c = 0.0;      // strict-observability margin over matched loops
    double eps_a = 0.0;      // explosiveness margin (+inf when nothing explodes)
    double gamma = 0.0;      // Markov separation
    double zeta = 0.0;
    double theta = 0.0;
    double sigma_r_sq = 0.0;  // same value as theta, kept under both names
    int nu = 0;
    int h = 0;
    std::int64_t T1 = 0;
    std::int64_t T2 = 0;
    std::int64_t tau = 0;  // max(T1, T2)
    double R1 = 0.0;       // max sigma_max(A_[i,j])
    double R2 = 0.0;       // max sigma_max(B_[i,j])
    // critical[j][k]: leading directions of G_[k,j] - G_[j,j]; zero pair at k = j.
    std::vector<std::vector<DirectionPair>> critical;
    // unstable[j][i]: left direction of the normalized unstable mode of M_[i,j];
    // zero vector when that loop is stable. Computed at direction_tau.
    std::vector<std::vector<Vector>> unstable;
    std::int64_t direction_tau = 0;
};

struct CandidateBank {
    std::vector<Candidate> candidates;
    std::vector<std::vector<ClosedLoop>> closed_loops;  // [i][j]
    int true_index = 0;  // known to the harness, never read by the supervisor
    NoiseLevels noise;
    int nu = 1;
    int h = 1;
    std::optional<DeclaredMargins> declared;
    std::optional<DerivedConstants> constants;

    [[nodiscard]] int size() const { return static_cast<int>(candidates.size()); }
    [[nodiscard]] const ClosedLoop& loop(int i, int j) const { return closed_loops[i][j]; }
    // The process actually generating observations under controller j.
    [[nodiscard]] const ClosedLoop& true_loop(int j) const {
        return closed_loops[true_index][j];
    }
};

/// Connects controller output-feedback around a plant. Static case collapses
/// to (C, A + B D_K C, B); dynamic case augments the state as [x; xk] with
///   A_cl = [[A + B D_K C, B C_K], [B_K C, A_K]],  B_cl = [B; 0],  C_cl = [C, 0].
/// The exploratory input enters the plant channel only and the plant substate
/// occupies the first d_x coordinates.
[[nodiscard]] ClosedLoop build_closed_loop(const StateSpaceModel& plant, const Controller& ctrl);

// Stack [C A^{nu-1}; ...; C A; C], highest power on top.
[[nodiscard]] Matrix observability_matrix(const ClosedLoop& cl, int nu);

[[nodiscard]] double strict_observability_margin(const ClosedLoop& cl, int nu);

// Block row [C A^{h-1} B, ..., C A B, C B], highest power leftmost.
[[nodiscard]] Matrix markov_parameters(const ClosedLoop& cl, int h);

// min over controllers j and model pairs i != i' of sigma_max(G_[i,j] - G_[i',j]).
// +inf for N = 1 (empty min).
[[nodiscard]] double markov_separation(const CandidateBank& bank, int h);

// Leading singular pair of G_[k,j] - G_[j,j] for each k != j; zero pair at k = j.
[[nodiscard]] std::vector<DirectionPair> critical_directions(const CandidateBank& bank, int j,
                                                             int h);

// For each model i: if rho(A_[i,j]) >= 1, the left leading singular vector of
// C_[i,j] (A_[i,j]/lambda)^{tau-nu-2} with lambda the leading eigenvalue
// modulus; zero vector for stable loops.
[[nodiscard]] std::vector<Vector> unstable_mode_directions(const CandidateBank& bank, int j,
                                                           std::int64_t tau, int nu);

/// Computes every derived constant of the scenario. `dim_free` selects the T1
/// variant; `direction_tau` fixes the episode length the unstable-mode
/// directions are computed at (defaults to the formula tau = max(T1, T2)).
/// Throws InvalidScenarioError on an unstable matched loop, zero Markov
/// separation, or a diverging tau with no direction_tau to fall back on.
[[nodiscard]] DerivedConstants derive_constants(
    const CandidateBank& bank, int nu, int h, double delta_c, bool dim_free,
    bool zeta_include_mismatched_stable = false,
    std::optional<std::int64_t> direction_tau = std::nullopt);

struct AssumptionCheck {
    std::string name;
    bool pass = false;
    double margin = 0.0;
    std::string detail;
};

struct ValidationReport {
    bool valid = false;
    std::vector<AssumptionCheck> checks;
    double eps_c_measured = 0.0;
    double eps_a_measured = 0.0;
    double gamma_measured = 0.0;
    std::vector<std::pair<int, int>> unstable_pairs;  // (i, j) with rho >= 1
    std::vector<std::pair<int, int>> boundary_pairs;  // rho in [1, 1 + declared eps_a)
};

// Per-assumption pass/fail with measured margins. Checks against the bank's
// declared margins when present, against strict positivity otherwise. Never
// throws: failures are carried in the report.
[[nodiscard]] ValidationReport validate_scenario(const CandidateBank& bank);

// Same report with the given constants acting as the declared floors.
[[nodiscard]] ValidationReport validate_scenario(const CandidateBank& bank,
                                                 const DerivedConstants& constants);

}  // namespace supctl
