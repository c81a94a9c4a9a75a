#include "supctl/simulator.hpp"

#include <cmath>

namespace supctl {

namespace {

bool within_guard(const Vector& x) {
    return x.lpNorm<Eigen::Infinity>() <= kStateGuard;
}

}  // namespace

RolloutResult rollout_episode(const CandidateBank& bank, int active_controller,
                              const Vector& initial_state, std::int64_t length,
                              const NoiseStreams& noise, std::uint64_t global_step,
                              const Matrix* forced_inputs) {
    require(active_controller >= 0 && active_controller < bank.size(),
            "controller index out of range");
    require(length >= 1, "episode length must be at least 1");
    const ClosedLoop& cl = bank.true_loop(active_controller);
    const Eigen::Index d = cl.model.d_x();
    const Eigen::Index d_u = cl.model.d_u();
    const Eigen::Index d_y = cl.model.d_y();
    require(initial_state.size() == d, "initial state does not match the closed-loop dimension");
    if (forced_inputs != nullptr) {
        require(forced_inputs->rows() == d_u && forced_inputs->cols() == length,
                "forced input block must be d_u x length");
    }

    RolloutResult res;
    Trajectory& tr = res.trajectory;
    tr.start_time = global_step + 1;
    tr.states.reserve(static_cast<std::size_t>(length));
    tr.outputs.reserve(static_cast<std::size_t>(length));
    tr.inputs.reserve(static_cast<std::size_t>(length));
    tr.process_noise.reserve(static_cast<std::size_t>(length));

    Vector x = initial_state;
    for (std::int64_t t = 0; t < length; ++t) {
        const std::uint64_t g = global_step + static_cast<std::uint64_t>(t) + 1;
        if (!within_guard(x)) {
            tr.diverged = true;
            tr.divergence_step = g;
            break;
        }
        Vector u;
        if (forced_inputs != nullptr) {
            u = forced_inputs->col(t);
        } else if (noise.sigma_u > 0.0) {
            u = gaussian_vector(noise.u_seed(), g, d_u, noise.sigma_u);
        } else {
            u = Vector::Zero(d_u);
        }
        const Vector w = noise.sigma_w > 0.0 ? gaussian_vector(noise.w_seed(), g, d, noise.sigma_w)
                                             : Vector::Zero(d);
        Vector y = cl.model.C * x;
        if (noise.sigma_eta > 0.0) y += gaussian_vector(noise.eta_seed(), g, d_y, noise.sigma_eta);

        tr.states.push_back(x);
        tr.outputs.push_back(y);
        tr.inputs.push_back(u);
        tr.process_noise.push_back(w);
        x = cl.model.A * x + cl.model.B * u + w;
    }
    res.final_state = x;
    return res;
}

Vector carry_over_state(const Vector& prev_final, int prev_ctrl, int next_ctrl,
                        const CandidateBank& bank) {
    require(prev_ctrl >= 0 && prev_ctrl < bank.size(), "controller index out of range");
    require(next_ctrl >= 0 && next_ctrl < bank.size(), "controller index out of range");
    const ClosedLoop& prev = bank.true_loop(prev_ctrl);
    const ClosedLoop& next = bank.true_loop(next_ctrl);
    require(prev_final.size() == prev.model.d_x(), "final state dimension mismatch");
    if (prev_ctrl == next_ctrl) return prev_final;

    Vector out = Vector::Zero(next.model.d_x());
    out.head(prev.plant_dim) = prev_final.head(prev.plant_dim);
    return out;
}

void RunTrace::append(const Trajectory& tr) {
    for (std::size_t t = 0; t < tr.length(); ++t) {
        state_sq.push_back(tr.states[t].squaredNorm());
        input_sq.push_back(tr.inputs[t].squaredNorm());
        noise_sq.push_back(tr.process_noise[t].squaredNorm());
    }
}

EnergyMetrics energy_metrics(const RunTrace& trace, std::uint64_t exploration_steps) {
    require(trace.state_sq.size() == trace.input_sq.size() &&
                trace.state_sq.size() == trace.noise_sq.size(),
            "trace arrays must have equal length");
    long double state = 0.0L, pre = 0.0L, post = 0.0L;
    for (std::size_t t = 0; t < trace.state_sq.size(); ++t) {
        state += trace.state_sq[t];
        const long double in = static_cast<long double>(trace.input_sq[t]) + trace.noise_sq[t];
        if (t + 1 <= exploration_steps) {
            pre += in;
        } else {
            post += in;
        }
    }
    EnergyMetrics m;
    m.state_energy = static_cast<double>(state);
    m.input_energy_pre = static_cast<double>(pre);
    m.input_energy_post = static_cast<double>(post);
    return m;
}

}  // namespace supctl
