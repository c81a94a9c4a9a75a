#include <cmath>
#include <vector>

#include "doctest.h"
#include "supctl/criteria.hpp"
#include "supctl/formulas.hpp"
#include "supctl/numerics.hpp"
#include "supctl/random.hpp"

using namespace supctl;

namespace {

StateSpaceModel model2(double a11, double a12, double a21, double a22, double b1, double b2,
                       double c1, double c2) {
    StateSpaceModel m;
    m.A = (Matrix(2, 2) << a11, a12, a21, a22).finished();
    m.B = (Matrix(2, 1) << b1, b2).finished();
    m.C = (Matrix(1, 2) << c1, c2).finished();
    return m;
}

Controller static_gain(double k) {
    Controller c;
    c.kind = ControllerKind::static_output_feedback;
    c.D_K = (Matrix(1, 1) << k).finished();
    return c;
}

CandidateBank assemble(std::vector<Candidate> cands) {
    CandidateBank bank;
    bank.candidates = std::move(cands);
    const int n = bank.size();
    bank.closed_loops.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            bank.closed_loops[static_cast<std::size_t>(i)].push_back(
                build_closed_loop(bank.candidates[static_cast<std::size_t>(i)].model,
                                  bank.candidates[static_cast<std::size_t>(j)].controller));
        }
    }
    return bank;
}

CandidateBank two_candidate_bank() {
    Candidate c0{model2(0.60, 0.20, -0.10, 0.50, 1.0, 0.30, 1.0, 0.20), static_gain(-0.10)};
    Candidate c1{model2(0.90, 0.40, 0.20, 0.70, 0.50, 1.0, 0.30, 1.0), static_gain(-0.45)};
    CandidateBank bank = assemble({c0, c1});
    bank.nu = 2;
    bank.h = 2;
    bank.noise = NoiseLevels{0.1, 0.1, 1.0};
    return bank;
}

// Both models nilpotent with index 2, shared zero gain: beyond the Markov
// window every response term vanishes, making identification exact.
CandidateBank nilpotent_bank() {
    Candidate c0{model2(0.0, 0.3, 0.0, 0.0, 1.0, 0.5, 1.0, 0.2), static_gain(0.0)};
    Candidate c1{model2(0.0, -0.4, 0.0, 0.0, 0.8, 1.0, 0.5, 1.0), static_gain(0.0)};
    CandidateBank bank = assemble({c0, c1});
    bank.nu = 2;
    bank.h = 2;
    bank.noise = NoiseLevels{0.0, 0.0, 1.0};
    return bank;
}

CriterionConfig basic_config(const CandidateBank& bank, int nu, int h, std::int64_t tau,
                             double theta, double gamma, double delta_c) {
    CriterionConfig cfg;
    cfg.delta_c = delta_c;
    cfg.theta = theta;
    cfg.gamma = gamma;
    cfg.nu = nu;
    cfg.h = h;
    cfg.tau = tau;
    cfg.n = bank.size();
    cfg.critical.resize(static_cast<std::size_t>(bank.size()));
    cfg.unstable.resize(static_cast<std::size_t>(bank.size()));
    for (int j = 0; j < bank.size(); ++j) {
        cfg.critical[static_cast<std::size_t>(j)] = critical_directions(bank, j, h);
        const Eigen::Index d_y = bank.loop(j, j).model.d_y();
        cfg.unstable[static_cast<std::size_t>(j)]
            .assign(static_cast<std::size_t>(bank.size()), Vector::Zero(d_y));
    }
    return cfg;
}

EpisodeOutputs scalar_episode(std::vector<double> ys, int active) {
    EpisodeOutputs ep;
    for (double y : ys) {
        ep.outputs.push_back(Vector::Constant(1, y));
        ep.inputs.push_back(Vector::Zero(1));
    }
    ep.active = active;
    return ep;
}

}  // namespace

TEST_CASE("initial state: exact recovery on fully quiet matched episodes") {
    CandidateBank bank = two_candidate_bank();
    bank.true_index = 0;
    NoiseStreams quiet{5, 0.0, 0.0, 0.0};
    Vector x1(2);
    x1 << 0.37, -0.81;
    const RolloutResult r = rollout_episode(bank, 0, x1, 10, quiet, 0);
    const EpisodeOutputs ep = EpisodeOutputs::from_trajectory(r.trajectory, 0);
    CriterionConfig cfg = basic_config(bank, 2, 2, 10, 1.0, 1.0, 1.0 / 30.0);
    const Vector xhat = estimate_initial_state(ep, bank, cfg);
    CHECK((xhat - x1).norm() < 1e-9);

    // And the shifted outputs cancel exactly for any initial state.
    const ShiftedData data = shifted_outputs(ep, bank, cfg, xhat);
    REQUIRE(data.ytilde.size() == 6);  // t = 5..10
    CHECK(data.first_t == 5);
    for (const auto& v : data.ytilde) CHECK(v.norm() < 1e-9);
}

TEST_CASE("initial state: all-zero outputs give a zero estimate") {
    CandidateBank bank = two_candidate_bank();
    CriterionConfig cfg = basic_config(bank, 2, 2, 10, 1.0, 1.0, 1.0 / 30.0);
    EpisodeOutputs ep;
    for (int t = 0; t < 10; ++t) {
        ep.outputs.push_back(Vector::Zero(1));
        ep.inputs.push_back(Vector::Zero(1));
    }
    ep.active = 1;
    CHECK(estimate_initial_state(ep, bank, cfg).norm() == doctest::Approx(0.0));
}

TEST_CASE("initial state: noisy matched estimate matches the least-squares oracle") {
    CandidateBank bank = two_candidate_bank();
    bank.true_index = 0;
    NoiseStreams noise{2024, 0.1, 0.05, 0.7};
    Vector x1(2);
    x1 << 0.3, -0.4;
    const RolloutResult r = rollout_episode(bank, 0, x1, 10, noise, 0);
    const EpisodeOutputs ep = EpisodeOutputs::from_trajectory(r.trajectory, 0);
    CriterionConfig cfg = basic_config(bank, 2, 2, 10, 1.0, 1.0, 1.0 / 30.0);
    const Vector xhat = estimate_initial_state(ep, bank, cfg);
    CHECK(xhat(0) == doctest::Approx(-0.5663826753312139).epsilon(1e-10));
    CHECK(xhat(1) == doctest::Approx(3.733205317188498).epsilon(1e-10));
}

TEST_CASE("initial state: rank-deficient matched observability is rejected") {
    StateSpaceModel m;
    m.A = Matrix::Identity(2, 2) * 0.5;
    m.B = (Matrix(2, 1) << 1.0, 0.0).finished();
    m.C = (Matrix(1, 2) << 1.0, 0.0).finished();
    CandidateBank bank = assemble({Candidate{m, static_gain(0.0)}});
    CriterionConfig cfg = basic_config(bank, 1, 1, 5, 1.0, 1.0, 1.0 / 30.0);
    EpisodeOutputs ep = scalar_episode({0.1, 0.2, 0.3, 0.4, 0.5}, 0);
    CHECK_THROWS_AS((void)estimate_initial_state(ep, bank, cfg), InvalidScenarioError);
}

TEST_CASE("criterion 1: quiet matched episode scores 1") {
    CandidateBank bank = two_candidate_bank();
    bank.true_index = 1;
    NoiseStreams quiet{5, 0.0, 0.0, 0.0};
    Vector x1(2);
    x1 << 0.4, -0.2;
    const RolloutResult r = rollout_episode(bank, 1, x1, 10, quiet, 0);
    const EpisodeOutputs ep = EpisodeOutputs::from_trajectory(r.trajectory, 1);
    CriterionConfig cfg = basic_config(bank, 2, 2, 10, 1.0, 1.0, 1.0 / 30.0);
    CHECK(criterion1(ep, bank, cfg) == 1);
    CHECK(criterion1_dim_free(ep, bank, cfg) == 1);
}

TEST_CASE("criterion 1: threshold arithmetic and strictness at the boundary") {
    StateSpaceModel m;
    m.A = Matrix::Zero(1, 1);
    m.B = Matrix::Ones(1, 1);
    m.C = Matrix::Ones(1, 1);
    CandidateBank bank = assemble({Candidate{m, static_gain(0.0)}});
    const double delta_c = 2.0 / std::exp(1.0);
    const double threshold = criterion1_threshold(1, 2.0, delta_c);
    CHECK(threshold == doctest::Approx(2.0).epsilon(1e-12));

    CriterionConfig cfg = basic_config(bank, 1, 1, 3, 2.0, 1.0, delta_c);
    // x_hat_1 = y_1 = 0 and A = 0 kill the prediction, so the residual is y_3.
    EpisodeOutputs at = scalar_episode({0.0, 0.7, threshold}, 0);
    CHECK(criterion1(at, bank, cfg) == 1);  // equality does not fire the strict test
    EpisodeOutputs over = scalar_episode({0.0, 0.7, 3.0}, 0);
    CHECK(criterion1(over, bank, cfg) == 0);
}

TEST_CASE("criterion 1 dimension-free: projections and the all-stable convention") {
    StateSpaceModel m;
    m.A = Matrix::Zero(1, 1);
    m.B = Matrix::Ones(1, 1);
    m.C = Matrix::Ones(1, 1);
    CandidateBank bank = assemble({Candidate{m, static_gain(0.0)}});
    const double delta_c = 2.0 / std::exp(1.0);
    CriterionConfig cfg = basic_config(bank, 1, 1, 3, 2.0, 1.0, delta_c);
    cfg.variant = CriterionVariant::dimension_free;
    const double threshold = criterion1_dim_free_threshold(2.0, 1, delta_c);
    CHECK(threshold == doctest::Approx(2.0).epsilon(1e-12));

    // All-zero directions: the criterion never fires however large the residual.
    EpisodeOutputs huge = scalar_episode({0.0, 0.0, 1e9}, 0);
    CHECK(criterion1_dim_free(huge, bank, cfg) == 1);

    cfg.unstable[0][0] = Vector::Ones(1);
    CHECK(criterion1_dim_free(huge, bank, cfg) == 0);
    EpisodeOutputs at = scalar_episode({0.0, 0.0, threshold}, 0);
    CHECK(criterion1_dim_free(at, bank, cfg) == 1);
    EpisodeOutputs over = scalar_episode({0.0, 0.0, 3.0}, 0);
    CHECK(criterion1_dim_free(over, bank, cfg) == 0);
}

TEST_CASE("shifted outputs: u = 0 leaves only the free-response correction") {
    CandidateBank bank = two_candidate_bank();
    bank.true_index = 1;
    NoiseStreams noise{88, 0.1, 0.05, 0.0};  // no exploratory input
    const RolloutResult r = rollout_episode(bank, 1, Vector::Zero(2), 10, noise, 0);
    const EpisodeOutputs ep = EpisodeOutputs::from_trajectory(r.trajectory, 1);
    CriterionConfig cfg = basic_config(bank, 2, 2, 10, 1.0, 1.0, 1.0 / 30.0);
    const Vector xhat = estimate_initial_state(ep, bank, cfg);
    const ShiftedData data = shifted_outputs(ep, bank, cfg, xhat);
    const ClosedLoop& own = bank.loop(1, 1);
    for (std::size_t i = 0; i < data.ytilde.size(); ++i) {
        const std::int64_t t = data.first_t + static_cast<std::int64_t>(i);
        const Vector expected =
            ep.outputs[static_cast<std::size_t>(t - 1)] -
            own.model.C * matrix_power(own.model.A, static_cast<std::uint64_t>(t - 1)) * xhat;
        CHECK((data.ytilde[i] - expected).norm() < 1e-12);
        CHECK(data.z[i].norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("shifted outputs: mismatched stable episode matches the oracle") {
    CandidateBank bank = two_candidate_bank();
    bank.true_index = 0;  // data generated by model 0 under controller 1
    NoiseStreams noise{777, 0.05, 0.02, 0.6};
    Vector x1(2);
    x1 << 0.2, 0.1;
    const RolloutResult r = rollout_episode(bank, 1, x1, 12, noise, 0);
    const EpisodeOutputs ep = EpisodeOutputs::from_trajectory(r.trajectory, 1);
    CriterionConfig cfg =
        basic_config(bank, 2, 2, 12, 1.0, 0.3088969003162705, 1.0 / 30.0);

    const Vector xhat = estimate_initial_state(ep, bank, cfg);
    CHECK(xhat(0) == doctest::Approx(-3.3270418107840873).epsilon(1e-10));
    CHECK(xhat(1) == doctest::Approx(1.210769723955743).epsilon(1e-10));

    const ShiftedData data = shifted_outputs(ep, bank, cfg, xhat);
    const std::vector<double> expected = {0.5969663608489332,  0.539334651392399,
                                          0.42519067901903845, 0.2479024496945097,
                                          0.3034552506020724,  0.39263645332877867,
                                          0.1089821399371345,  0.23530145322950513};
    REQUIRE(data.ytilde.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(data.ytilde[i](0) == doctest::Approx(expected[i]).epsilon(1e-9));
    }

    // The window stacks u_{t-h}..u_{t-1} top to bottom.
    const Vector& z0 = data.z[0];  // t = 5
    CHECK(z0(0) == doctest::Approx(ep.inputs[2](0)));  // u_3
    CHECK(z0(1) == doctest::Approx(ep.inputs[3](0)));  // u_4

    // Critical pair and OLS slope along it, against the frozen oracle.
    const DirectionPair& dir = cfg.critical[1][0];
    CHECK(dir.u(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dir.v(0) == doctest::Approx(-0.9566136782125405).epsilon(1e-10));
    CHECK(dir.v(1) == doctest::Approx(-0.2913593496983994).epsilon(1e-10));
    std::vector<double> zs, ys;
    for (std::size_t i = 0; i < data.z.size(); ++i) {
        zs.push_back(dir.v.dot(data.z[i]));
        ys.push_back(dir.u.dot(data.ytilde[i]));
    }
    CHECK(scalar_ols(zs, ys) == doctest::Approx(-0.7913648413017694).epsilon(1e-10));

    // |slope| far exceeds gamma, so the identification criterion rejects.
    CHECK(criterion2(ep, bank, cfg) == 0);
}

TEST_CASE("scalar OLS: exact fit, zero response, oracle slope, zero excitation") {
    CHECK(scalar_ols({1.0, 2.0}, {2.0, 4.0}) == doctest::Approx(2.0));
    CHECK(scalar_ols({1.0, -3.0, 2.0}, {0.0, 0.0, 0.0}) == doctest::Approx(0.0));
    {
        std::vector<double> zs, ys;
        const std::uint64_t s = stream_seed(4242, 0);
        for (int i = 0; i < 20; ++i) {
            zs.push_back(gaussian(s, static_cast<std::uint64_t>(i)));
            ys.push_back(3.0 * zs.back() +
                         0.1 * gaussian(s, static_cast<std::uint64_t>(100 + i)));
        }
        CHECK(scalar_ols(zs, ys) == doctest::Approx(3.0031412969528217).epsilon(1e-12));
    }
    CHECK_THROWS_AS((void)scalar_ols({0.0, 0.0}, {1.0, 2.0}), ExcitationError);
    CHECK_THROWS_AS((void)scalar_ols({}, {}), DimensionError);
}

TEST_CASE("criterion 2: matched nilpotent episode identifies exactly") {
    CandidateBank bank = nilpotent_bank();
    bank.true_index = 0;
    NoiseStreams noise{31337, 0.0, 0.0, 1.0};
    const RolloutResult r = rollout_episode(bank, 0, Vector::Zero(2), 20, noise, 0);
    const EpisodeOutputs ep = EpisodeOutputs::from_trajectory(r.trajectory, 0);
    CriterionConfig cfg = basic_config(bank, 2, 2, 20, 1.0, 0.2, 1.0 / 30.0);
    const Vector xhat = estimate_initial_state(ep, bank, cfg);
    const ShiftedData data = shifted_outputs(ep, bank, cfg, xhat);
    for (const auto& v : data.ytilde) CHECK(v.norm() < 1e-12);
    CHECK(criterion2(ep, bank, cfg) == 1);
}

TEST_CASE("criterion 2: mismatched nilpotent slope equals the Markov gap exactly") {
    CandidateBank bank = nilpotent_bank();
    bank.true_index = 1;  // data from model 1 while controller/model 0 is active
    NoiseStreams noise{31337, 0.0, 0.0, 1.0};
    const RolloutResult r = rollout_episode(bank, 0, Vector::Zero(2), 20, noise, 0);
    const EpisodeOutputs ep = EpisodeOutputs::from_trajectory(r.trajectory, 0);

    const Matrix gap = markov_parameters(bank.loop(1, 0), 2) - markov_parameters(bank.loop(0, 0), 2);
    const double sigma = gap.jacobiSvd().singularValues()(0);

    CriterionConfig cfg = basic_config(bank, 2, 2, 20, 1.0, sigma * (1.0 + 1e-9), 1.0 / 30.0);
    const Vector xhat = estimate_initial_state(ep, bank, cfg);
    const ShiftedData data = shifted_outputs(ep, bank, cfg, xhat);
    const DirectionPair& dir = cfg.critical[0][1];
    std::vector<double> zs, ys;
    for (std::size_t i = 0; i < data.z.size(); ++i) {
        zs.push_back(dir.v.dot(data.z[i]));
        ys.push_back(dir.u.dot(data.ytilde[i]));
    }
    CHECK(scalar_ols(zs, ys) == doctest::Approx(sigma).epsilon(1e-12));

    // Slope sits below a barely-larger gamma and above a barely-smaller one.
    CHECK(criterion2(ep, bank, cfg) == 1);
    cfg.gamma = sigma * (1.0 - 1e-9);
    CHECK(criterion2(ep, bank, cfg) == 0);
}

TEST_CASE("criterion 2: zero excitation scores 0") {
    CandidateBank bank = two_candidate_bank();
    bank.true_index = 1;
    NoiseStreams noise{13, 0.05, 0.02, 0.0};  // sigma_u = 0
    const RolloutResult r = rollout_episode(bank, 1, Vector::Zero(2), 12, noise, 0);
    const EpisodeOutputs ep = EpisodeOutputs::from_trajectory(r.trajectory, 1);
    CriterionConfig cfg = basic_config(bank, 2, 2, 12, 1.0, 1.0, 1.0 / 30.0);
    CHECK(criterion2(ep, bank, cfg) == 0);
}

TEST_CASE("criteria: divergence and truncation score 0") {
    CandidateBank bank = two_candidate_bank();
    CriterionConfig cfg = basic_config(bank, 2, 2, 12, 1.0, 1.0, 1.0 / 30.0);
    EpisodeOutputs ep;
    for (int t = 0; t < 6; ++t) {  // shorter than tau
        ep.outputs.push_back(Vector::Zero(1));
        ep.inputs.push_back(Vector::Zero(1));
    }
    ep.active = 0;
    CHECK(criterion1(ep, bank, cfg) == 0);
    CHECK(criterion1_dim_free(ep, bank, cfg) == 0);
    CHECK(criterion2(ep, bank, cfg) == 0);

    ep.diverged = true;
    CHECK(criterion1(ep, bank, cfg) == 0);
    CHECK(criterion2(ep, bank, cfg) == 0);
}

TEST_CASE("combined score: floor of the average is logical AND") {
    CHECK(combined_score(1, 1) == 1);
    CHECK(combined_score(1, 0) == 0);
    CHECK(combined_score(0, 1) == 0);
    CHECK(combined_score(0, 0) == 0);
    CHECK_THROWS_AS((void)combined_score(2, 0), DimensionError);
}

TEST_CASE("criterion config: assembly from derived constants") {
    CandidateBank bank = two_candidate_bank();
    CHECK_THROWS_AS((void)make_criterion_config(bank, CriterionVariant::standard), ConfigError);

    bank.constants = derive_constants(bank, 2, 2, 1.0 / 30.0, false);
    const CriterionConfig full = make_criterion_config(bank, CriterionVariant::standard);
    CHECK(full.tau == 84455);
    CHECK(full.meets_length_requirements);
    CHECK(full.theta == doctest::Approx(bank.constants->theta));
    CHECK(full.gamma == doctest::Approx(bank.constants->gamma));
    CHECK(full.n == 2);

    const CriterionConfig cut =
        make_criterion_config(bank, CriterionVariant::dimension_free, 40);
    CHECK(cut.tau == 40);
    CHECK_FALSE(cut.meets_length_requirements);
    // Directions recomputed at the overridden tau: still a unit vector for the
    // one explosive loop, zero for the stable ones.
    CHECK(cut.unstable[0][1].norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cut.unstable[0][0].norm() == doctest::Approx(0.0));

    CHECK_THROWS_AS((void)make_criterion_config(bank, CriterionVariant::standard, 4),
                    ConfigError);

    bank.noise.sigma_u = 0.0;
    bank.constants = derive_constants(bank, 2, 2, 1.0 / 30.0, false, false, 50);
    CHECK_THROWS_AS((void)make_criterion_config(bank, CriterionVariant::standard), ConfigError);
    const CriterionConfig forced = make_criterion_config(bank, CriterionVariant::standard, 30);
    CHECK(forced.tau == 30);
    CHECK_FALSE(forced.meets_length_requirements);
}

TEST_CASE("full episode scoring wires both criteria through the variant") {
    CandidateBank bank = nilpotent_bank();
    bank.true_index = 0;
    NoiseStreams noise{2, 0.0, 0.0, 1.0};
    const RolloutResult r = rollout_episode(bank, 0, Vector::Zero(2), 20, noise, 0);
    const EpisodeOutputs ep = EpisodeOutputs::from_trajectory(r.trajectory, 0);
    CriterionConfig cfg = basic_config(bank, 2, 2, 20, 10.0, 0.2, 1.0 / 30.0);
    const EpisodeScore sc = score_episode(ep, bank, cfg);
    CHECK(sc.s1 == 1);
    CHECK(sc.s2 == 1);
    CHECK(sc.s == 1);
}
