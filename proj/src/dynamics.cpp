#include "mcpc/dynamics.hpp"

#include "mcpc/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mcpc {

namespace {

constexpr Real kUtilityIncreaseTolerance = 1e-7;

bool gate_closed(Real theta, const Eigen::Ref<const Eigen::RowVectorXd>& x_dot_row,
                 const AlgorithmParams& params) {
    return std::abs(theta) > params.eq_tol && x_dot_row.cwiseAbs().maxCoeff() < params.x_dot_eps;
}

Real gain_rhs(Real p_dot, Real p_ddot, GainRule rule) {
    return rule == GainRule::verbatim ? 2.0 * p_dot * p_ddot * p_ddot : 2.0 * p_dot * p_ddot;
}

Matrix stability_ceiling(const NetworkSpec& spec, const SystemState& state,
                         const AlgorithmParams& params) {
    const Matrix w = effective_interference_matrix(spec, state.powers);
    const auto n = static_cast<Real>(spec.channel_count);
    Matrix ceiling(w.rows(), w.cols());
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (Eigen::Index k = 0; k < w.cols(); ++k) {
            // The average-gap coupling is the rank-one block (zeta_i / N^2) 1 1^T,
            // whose nonzero eigenvalue is zeta_i / N.
            const Real stiffness = params.zeta(i) / n + w(i, k) * w(i, k);
            const Real limit = params.b_stability / (params.step * stiffness);
            ceiling(i, k) = std::max(params.b_gains(i, k), limit);
        }
    }
    return ceiling;
}

void check_state_shape(const NetworkSpec& spec, const SystemState& state) {
    const auto m = static_cast<Eigen::Index>(spec.pair_count);
    const auto n = static_cast<Eigen::Index>(spec.channel_count);
    if (state.powers.rows() != m || state.powers.cols() != n || state.targets.rows() != m ||
        state.targets.cols() != n) {
        throw InputError("state: powers and targets must be pairs x channels");
    }
}

}  // namespace

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::fm:
            return "fm";
        case Mode::theorem1:
            return "theorem1";
        case Mode::theorem2:
            return "theorem2";
    }
    return "unknown";
}

Mode parse_mode(const std::string& text) {
    if (text == "fm") return Mode::fm;
    if (text == "theorem1") return Mode::theorem1;
    if (text == "theorem2") return Mode::theorem2;
    throw InputError("unknown mode '" + text + "' (expected fm, theorem1 or theorem2)");
}

std::string to_string(GainRule rule) { return rule == GainRule::verbatim ? "verbatim" : "linear"; }

GainRule parse_gain_rule(const std::string& text) {
    if (text == "verbatim") return GainRule::verbatim;
    if (text == "linear") return GainRule::linear;
    throw InputError("unknown gain_rule '" + text + "' (expected verbatim or linear)");
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::equilibrium:
            return "equilibrium";
        case Termination::max_time:
            return "max_time";
        case Termination::divergence:
            return "divergence";
    }
    return "unknown";
}

AlgorithmParams AlgorithmParams::defaults(const NetworkSpec& spec) {
    const auto m = static_cast<Eigen::Index>(spec.pair_count);
    const auto n = static_cast<Eigen::Index>(spec.channel_count);
    AlgorithmParams p;
    p.k_gains = Vector::Ones(m);
    p.c_gains = Matrix::Ones(m, n);
    p.b_gains = Matrix::Constant(m, n, 200.0);
    p.zeta = Vector::Constant(m, 20.0);
    p.d_weights = Vector::Ones(m);
    return p;
}

void AlgorithmParams::validate(const NetworkSpec& spec) const {
    const auto m = static_cast<Eigen::Index>(spec.pair_count);
    const auto n = static_cast<Eigen::Index>(spec.channel_count);
    auto positive_vec = [m](const Vector& v, const char* name) {
        if (v.size() != m) {
            throw InputError(std::string("params.") + name + ": expected one entry per pair");
        }
        if (!(v.array() > 0.0).all()) {
            throw InputError(std::string("params.") + name + ": entries must be positive");
        }
    };
    auto positive_mat = [m, n](const Matrix& a, const char* name) {
        if (a.rows() != m || a.cols() != n) {
            throw InputError(std::string("params.") + name + ": must be pairs x channels");
        }
        if (!(a.array() > 0.0).all()) {
            throw InputError(std::string("params.") + name + ": entries must be positive");
        }
    };
    positive_vec(k_gains, "k");
    positive_mat(c_gains, "c");
    positive_mat(b_gains, "b0");
    positive_vec(zeta, "zeta");
    positive_vec(d_weights, "d");
    if (!(p_max > 0.0)) throw InputError("params.p_max: must be positive");
    if (!(step > 0.0)) throw InputError("params.step: must be positive");
    if (!(b_safety > 1.0)) throw InputError("params.b_safety: must exceed 1");
    if (!(eq_tol > 0.0)) throw InputError("params.eq_tol: must be positive");
    if (!(x_dot_eps > 0.0)) throw InputError("params.x_dot_eps: must be positive");
    if (!(b_stability > 0.0)) throw InputError("params.b_stability: must be positive");
    if (dwell_steps < 1) throw InputError("params.dwell_steps: must be at least 1");
    if (!(divergence_factor >= 1.0)) throw InputError("params.divergence_factor: must be >= 1");
}

Vector fm_derivative(const NetworkSpec& spec, const Vector& powers_column,
                     const Vector& targets_column, const Vector& k_gains, std::size_t k) {
    if (k >= spec.channel_count) {
        throw InputError("fm_derivative: channel index out of range");
    }
    const auto m = static_cast<Eigen::Index>(spec.pair_count);
    if (powers_column.size() != m || targets_column.size() != m || k_gains.size() != m) {
        throw InputError("fm_derivative: inputs need one entry per pair");
    }
    const Vector w = effective_interference_column(spec, powers_column, k);
    return k_gains.cwiseProduct(-powers_column + targets_column.cwiseProduct(w));
}

Derivatives joint_derivatives(const NetworkSpec& spec, const SystemState& state,
                              const AlgorithmParams& params, const Matrix& b) {
    check_state_shape(spec, state);
    const Matrix w = effective_interference_matrix(spec, state.powers);
    const Vector theta = average_target_gap(spec, state.targets);
    const auto n = static_cast<Real>(spec.channel_count);
    const Matrix residual = state.targets.cwiseProduct(w) - state.powers;  // x w - p

    Derivatives out;
    out.p_dot = params.c_gains.cwiseProduct(residual);
    out.x_dot.resize(residual.rows(), residual.cols());
    for (Eigen::Index i = 0; i < residual.rows(); ++i) {
        const Real pull = params.zeta(i) / n * theta(i);
        for (Eigen::Index k = 0; k < residual.cols(); ++k) {
            out.x_dot(i, k) = b(i, k) * (pull - w(i, k) * residual(i, k));
        }
    }
    return out;
}

Derivatives joint_derivatives(const NetworkSpec& spec, const SystemState& state,
                              const AlgorithmParams& params) {
    return joint_derivatives(spec, state, params, params.b_gains);
}

Matrix gated_power_derivative(const NetworkSpec& spec, const SystemState& state,
                              const MonitorState& monitor, const AlgorithmParams& params) {
    const Matrix& b = monitor.b_current.size() > 0 ? monitor.b_current : params.b_gains;
    Matrix p_dot = joint_derivatives(spec, state, params, b).p_dot;
    for (Eigen::Index i = 0; i < p_dot.rows(); ++i) {
        if (gate_closed(monitor.theta(i), monitor.x_dot.row(i), params)) {
            p_dot.row(i).setZero();
        }
    }
    return p_dot;
}

Derivatives vector_field(const NetworkSpec& spec, const SystemState& state,
                         const AlgorithmParams& params, const Matrix& b) {
    check_state_shape(spec, state);
    if (params.mode == Mode::fm) {
        Derivatives out;
        out.p_dot.resize(state.powers.rows(), state.powers.cols());
        for (std::size_t k = 0; k < spec.channel_count; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            out.p_dot.col(kk) = fm_derivative(spec, state.powers.col(kk), state.targets.col(kk),
                                              params.k_gains, k);
        }
        out.x_dot = Matrix::Zero(state.targets.rows(), state.targets.cols());
        return out;
    }
    Derivatives out = joint_derivatives(spec, state, params, b);
    if (params.mode == Mode::theorem2) {
        const Vector theta = average_target_gap(spec, state.targets);
        for (Eigen::Index i = 0; i < out.p_dot.rows(); ++i) {
            if (gate_closed(theta(i), out.x_dot.row(i), params)) {
                out.p_dot.row(i).setZero();
            }
        }
    }
    return out;
}

GainAdaptation adapt_b_gains(const NetworkSpec& spec, const SystemState& state,
                             const MonitorState& monitor, const AlgorithmParams& params) {
    GainAdaptation out;
    out.b = monitor.b_current.size() > 0 ? monitor.b_current : params.b_gains;
    const Matrix ceiling = stability_ceiling(spec, state, params);
    const Matrix& p_dot = monitor.p_dot;
    const Matrix& p_ddot = monitor.p_ddot;
    const Matrix& x_dot = monitor.x_dot;
    const Matrix bracket = x_dot.cwiseQuotient(out.b);

    for (Eigen::Index i = 0; i < p_dot.rows(); ++i) {
        bool any_active = false;
        bool stalled_positive = false;
        bool any_positive = false;
        for (Eigen::Index k = 0; k < p_dot.cols(); ++k) {
            const bool active = std::abs(x_dot(i, k)) >= params.x_dot_eps;
            any_active = any_active || active;
            any_positive = any_positive || p_dot(i, k) > 0.0;
            if (p_dot(i, k) > 0.0 && !active) {
                stalled_positive = true;
            }
            if (p_dot(i, k) > 0.0 && active) {
                const Real rhs = gain_rhs(p_dot(i, k), p_ddot(i, k), params.gain_rule);
                const Real required = params.b_safety * rhs / (bracket(i, k) * bracket(i, k));
                out.b(i, k) = std::min(ceiling(i, k), std::max(out.b(i, k), required));
            }
        }
        if (!any_active && any_positive) {
            out.stall = true;
            continue;
        }
        if (!stalled_positive || !any_active) {
            continue;
        }
        // Compensate the stalled channels through the most responsive active one.
        Eigen::Index best = -1;
        for (Eigen::Index k = 0; k < p_dot.cols(); ++k) {
            if (std::abs(x_dot(i, k)) >= params.x_dot_eps &&
                (best < 0 || std::abs(bracket(i, k)) > std::abs(bracket(i, best)))) {
                best = k;
            }
        }
        Real others = gain_rhs(p_dot(i, best), p_ddot(i, best), params.gain_rule);
        for (Eigen::Index k = 0; k < p_dot.cols(); ++k) {
            if (k != best) {
                others += -out.b(i, k) * bracket(i, k) * bracket(i, k) +
                          gain_rhs(p_dot(i, k), p_ddot(i, k), params.gain_rule);
            }
        }
        if (others > 0.0) {
            const Real br2 = bracket(i, best) * bracket(i, best);
            const Real required = params.b_safety * others / br2;
            out.b(i, best) = std::min(ceiling(i, best), std::max(out.b(i, best), required));
        }
    }
    return out;
}

bool gain_condition_satisfied(const MonitorState& monitor, const AlgorithmParams& params) {
    if (!monitor.has_history) {
        return false;
    }
    const Matrix& b = monitor.b_current;
    for (Eigen::Index i = 0; i < monitor.p_dot.rows(); ++i) {
        bool one_channel = false;
        Real pair_sum = 0.0;
        for (Eigen::Index k = 0; k < monitor.p_dot.cols(); ++k) {
            const Real rhs = gain_rhs(monitor.p_dot(i, k), monitor.p_ddot(i, k), params.gain_rule);
            const Real decay = monitor.x_dot(i, k) * monitor.x_dot(i, k) / b(i, k);
            one_channel = one_channel || decay >= rhs;
            pair_sum += -decay + rhs;
        }
        if (!one_channel || !(pair_sum < 0.0)) {
            return false;
        }
    }
    return true;
}

Real utility_value(const NetworkSpec& spec, const SystemState& state,
                   const AlgorithmParams& params) {
    check_state_shape(spec, state);
    const Matrix w = effective_interference_matrix(spec, state.powers);
    const Vector theta = average_target_gap(spec, state.targets);
    Real u = 0.0;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        Real pair = params.zeta(i) * theta(i) * theta(i);
        for (Eigen::Index k = 0; k < w.cols(); ++k) {
            const Real r =
                params.c_gains(i, k) * (state.targets(i, k) * w(i, k) - state.powers(i, k));
            pair += r * r;
        }
        u += params.d_weights(i) * pair;
    }
    return u;
}

std::optional<Real> utility_quadratic_form(const NetworkSpec& spec, const SystemState& state,
                                           const AlgorithmParams& params,
                                           const std::vector<Vector>& d_per_channel) {
    check_state_shape(spec, state);
    const Vector theta = average_target_gap(spec, state.targets);
    Real u = (params.d_weights.array() * params.zeta.array() * theta.array().square()).sum();
    for (std::size_t k = 0; k < spec.channel_count; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        EquilibriumSolution eq;
        try {
            eq = equilibrium_powers(spec, state.targets.col(kk), k);
        } catch (const InfeasibleError&) {
            return std::nullopt;
        }
        const InterferenceMatrices mats =
            derive_matrices(spec, state.targets.col(kk), params.c_gains.col(kk), k);
        const Vector e = state.powers.col(kk) - eq.p_star;
        const Vector& D = d_per_channel.empty() ? params.d_weights : d_per_channel.at(k);
        u += lyapunov_value(mats.A, D, e);
    }
    return u;
}

MonitorState make_monitor(const NetworkSpec& spec, const SystemState& state,
                          const AlgorithmParams& params, const Matrix& b,
                          const MonitorState* previous) {
    MonitorState m;
    const Derivatives d = vector_field(spec, state, params, b);
    m.p_dot = d.p_dot;
    m.x_dot = d.x_dot;
    if (previous != nullptr && previous->p_dot.size() == d.p_dot.size()) {
        m.p_ddot = (d.p_dot - previous->p_dot) / params.step;
        m.has_history = true;
    } else {
        m.p_ddot = Matrix::Zero(d.p_dot.rows(), d.p_dot.cols());
    }
    m.theta = average_target_gap(spec, state.targets);
    m.utility = utility_value(spec, state, params);
    m.b_current = b;
    const auto n = static_cast<Eigen::Index>(spec.channel_count);
    m.rho_per_channel.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Matrix C = state.targets.col(k).asDiagonal() *
                         normalized_gain_matrix(spec, static_cast<std::size_t>(k));
        m.rho_per_channel(k) = spectral_radius(C).value;
    }
    return m;
}

StepResult step(const NetworkSpec& spec, const SystemState& state, const AlgorithmParams& params,
                const MonitorState& monitor) {
    check_state_shape(spec, state);
    Matrix b = monitor.b_current.size() > 0 ? monitor.b_current : params.b_gains;
    bool stall = false;
    if (params.mode == Mode::theorem2 && monitor.has_history) {
        GainAdaptation adapted = adapt_b_gains(spec, state, monitor, params);
        b = std::move(adapted.b);
        stall = adapted.stall;
    }

    // Gain condition as it stands at the start of this step, with the adapted gains.
    MonitorState start = monitor;
    if (params.mode != Mode::fm) {
        const Derivatives d0 = vector_field(spec, state, params, b);
        start.p_dot = d0.p_dot;
        start.x_dot = d0.x_dot;
        start.b_current = b;
    }
    const bool condition_ok = params.mode == Mode::theorem2 && gain_condition_satisfied(start, params);

    const Real h = params.step;
    auto stage = [&](const Matrix& p, const Matrix& x) {
        SystemState s{p, x, state.time};
        return vector_field(spec, s, params, b);
    };
    const Derivatives k1 = stage(state.powers, state.targets);
    const Derivatives k2 =
        stage(state.powers + 0.5 * h * k1.p_dot, state.targets + 0.5 * h * k1.x_dot);
    const Derivatives k3 =
        stage(state.powers + 0.5 * h * k2.p_dot, state.targets + 0.5 * h * k2.x_dot);
    const Derivatives k4 = stage(state.powers + h * k3.p_dot, state.targets + h * k3.x_dot);

    SystemState next;
    next.powers =
        state.powers + (h / 6.0) * (k1.p_dot + 2.0 * k2.p_dot + 2.0 * k3.p_dot + k4.p_dot);
    next.targets =
        state.targets + (h / 6.0) * (k1.x_dot + 2.0 * k2.x_dot + 2.0 * k3.x_dot + k4.x_dot);
    next.time = state.time + h;

    if (!next.powers.allFinite() || !next.targets.allFinite()) {
        throw DivergenceError("non-finite state after integration step");
    }
    const Real peak = next.powers.cwiseAbs().maxCoeff();
    if (peak > params.divergence_factor * params.p_max) {
        std::ostringstream os;
        os << "power " << peak << " exceeds " << params.divergence_factor << " x p_max";
        throw DivergenceError(os.str());
    }
    next.powers = next.powers.cwiseMax(0.0).cwiseMin(params.p_max);
    next.targets = next.targets.cwiseMax(0.0);

    StepResult out;
    out.monitor = make_monitor(spec, next, params, b, &start);
    out.monitor.gain_condition_ok = condition_ok;
    out.monitor.stall = stall;
    out.state = std::move(next);
    return out;
}

Real projected_residual(const SystemState& state, const MonitorState& monitor,
                        const AlgorithmParams& params) {
    Real worst = 0.0;
    for (Eigen::Index i = 0; i < state.powers.rows(); ++i) {
        for (Eigen::Index k = 0; k < state.powers.cols(); ++k) {
            Real pd = monitor.p_dot(i, k);
            const Real p = state.powers(i, k);
            if ((p <= 0.0 && pd < 0.0) || (p >= params.p_max && pd > 0.0)) {
                pd = 0.0;
            }
            Real xd = monitor.x_dot(i, k);
            if (state.targets(i, k) <= 0.0 && xd < 0.0) {
                xd = 0.0;
            }
            worst = std::max({worst, std::abs(pd), std::abs(xd)});
        }
    }
    return worst;
}

Trajectory simulate(const NetworkSpec& spec, const SystemState& initial,
                    const AlgorithmParams& params, Real max_time, std::int64_t record_stride,
                    const StepObserver& observer) {
    spec.validate();
    params.validate(spec);
    check_state_shape(spec, initial);
    if (record_stride < 1) {
        throw InputError("run.record_stride: must be at least 1");
    }
    if (!(max_time >= 0.0)) {
        throw InputError("run.max_time: must be nonnegative");
    }

    Trajectory traj;
    traj.record_stride = record_stride;
    SystemState state = initial;
    MonitorState monitor = make_monitor(spec, state, params, params.b_gains, nullptr);
    auto record = [&] {
        traj.samples.push_back(TrajectorySample{state, derived_metrics(spec, state), monitor});
    };
    record();
    if (observer) {
        observer(0, state, monitor);
    }

    const auto total_steps = static_cast<std::int64_t>(std::llround(max_time / params.step));
    const bool track_theta = params.mode != Mode::fm;
    int dwell = 0;
    traj.terminated_by = Termination::max_time;
    for (std::int64_t n = 0; n < total_steps; ++n) {
        StepResult res;
        try {
            res = step(spec, state, params, monitor);
        } catch (const DivergenceError& e) {
            traj.terminated_by = Termination::divergence;
            traj.divergence_step = n;
            traj.divergence_reason = e.what();
            break;
        }
        const Real u_before = monitor.utility;
        res.state.time = initial.time + static_cast<Real>(n + 1) * params.step;
        state = std::move(res.state);
        monitor = std::move(res.monitor);
        traj.steps = n + 1;

        if (monitor.gain_condition_ok) {
            ++traj.gain_condition_steps;
            if (monitor.utility > u_before * (1.0 + kUtilityIncreaseTolerance)) {
                ++traj.utility_increase_violations;
            }
        }
        if (monitor.stall) {
            ++traj.stall_events;
        }
        if (params.mode == Mode::theorem2) {
            for (Eigen::Index i = 0; i < monitor.p_dot.rows(); ++i) {
                if (gate_closed(monitor.theta(i), monitor.x_dot.row(i), params) &&
                    monitor.p_dot.row(i).cwiseAbs().maxCoeff() != 0.0) {
                    ++traj.gate_violations;
                }
            }
        }
        if (observer) {
            observer(n + 1, state, monitor);
        }
        if ((n + 1) % record_stride == 0) {
            record();
        }

        Real residual = projected_residual(state, monitor, params);
        const Matrix w = effective_interference_matrix(spec, state.powers);
        residual = std::max(residual,
                            (state.powers.cwiseQuotient(w) - state.targets).cwiseAbs().maxCoeff());
        if (track_theta) {
            residual = std::max(residual, monitor.theta.cwiseAbs().maxCoeff());
        }
        dwell = residual < params.eq_tol ? dwell + 1 : 0;
        if (dwell >= params.dwell_steps) {
            traj.terminated_by = Termination::equilibrium;
            break;
        }
    }
    traj.final_state = state;
    traj.final_monitor = monitor;
    return traj;
}

}  // namespace mcpc
