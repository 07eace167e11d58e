#pragma once

#include "mcpc/core_model.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mcpc {

enum class Mode { fm, theorem1, theorem2 };

/// Reading of the right-hand side of the gain condition.
enum class GainRule {
    verbatim,  // 2 * p_dot * p_ddot^2
    linear,    // 2 * p_dot * p_ddot
};

[[nodiscard]] std::string to_string(Mode mode);
[[nodiscard]] Mode parse_mode(const std::string& text);
[[nodiscard]] std::string to_string(GainRule rule);
[[nodiscard]] GainRule parse_gain_rule(const std::string& text);

struct AlgorithmParams {
    Vector k_gains;   // M, FM proportionality constants
    Matrix c_gains;   // M x N, power update gains
    Matrix b_gains;   // M x N, initial target update gains
    Vector zeta;      // M
    Vector d_weights; // M, utility weights (monitoring only)
    Real p_max = 1e6;
    Real step = 1e-3;
    Mode mode = Mode::theorem2;
    Real b_safety = 1.1;
    Real eq_tol = 1e-9;
    Real x_dot_eps = 1e-9;
    GainRule gain_rule = GainRule::verbatim;
    /// Gains are never raised above b_stability / (step * (zeta_i / N + w^2)),
    /// keeping the explicit integrator inside its stability region.
    Real b_stability = 2.0;
    int dwell_steps = 100;
    Real divergence_factor = 10.0;

    /// Uniform defaults: k = c = d = 1, b = 200, zeta = 20.
    [[nodiscard]] static AlgorithmParams defaults(const NetworkSpec& spec);

    void validate(const NetworkSpec& spec) const;
};

struct MonitorState {
    Matrix p_dot;
    Matrix p_ddot;
    Matrix x_dot;
    Vector theta;
    Real utility = 0.0;
    Vector rho_per_channel;
    Matrix b_current;
    bool has_history = false;      // p_ddot is a real backward difference
    bool gain_condition_ok = false;
    bool stall = false;
};

struct Derivatives {
    Matrix p_dot;
    Matrix x_dot;
};

struct TrajectorySample {
    SystemState state;
    DerivedMetrics metrics;
    MonitorState monitor;
};

enum class Termination { equilibrium, max_time, divergence };

[[nodiscard]] std::string to_string(Termination t);

struct Trajectory {
    std::vector<TrajectorySample> samples;
    Termination terminated_by = Termination::max_time;
    std::int64_t steps = 0;
    std::int64_t record_stride = 1;
    std::optional<std::int64_t> divergence_step;
    std::string divergence_reason;
    SystemState final_state;
    MonitorState final_monitor;
    /// Steps where U grew by more than 1e-7 relative while the gain condition held.
    std::int64_t utility_increase_violations = 0;
    std::int64_t gain_condition_steps = 0;
    std::int64_t stall_events = 0;
    /// Steps where the theorem2-mode gate should have zeroed p_dot but did not.
    std::int64_t gate_violations = 0;
};

class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StepResult {
    SystemState state;
    MonitorState monitor;
};

/// FM vector field on one channel: k_i (-p_i + gamma_i w_i).
[[nodiscard]] Vector fm_derivative(const NetworkSpec& spec, const Vector& powers_column,
                                   const Vector& targets_column, const Vector& k_gains,
                                   std::size_t k);

/// Joint power / allotted-target field with target-update gains b.
[[nodiscard]] Derivatives joint_derivatives(const NetworkSpec& spec, const SystemState& state,
                                            const AlgorithmParams& params, const Matrix& b);

/// Convenience overload using params.b_gains.
[[nodiscard]] Derivatives joint_derivatives(const NetworkSpec& spec, const SystemState& state,
                                            const AlgorithmParams& params);

/// Power field of theorem2 mode: row i is frozen while |theta_i| > eq_tol and every
/// |x_dot_{i,k}| < x_dot_eps; otherwise the joint power field.
[[nodiscard]] Matrix gated_power_derivative(const NetworkSpec& spec, const SystemState& state,
                                            const MonitorState& monitor,
                                            const AlgorithmParams& params);

/// Full vector field for params.mode with gains b.
[[nodiscard]] Derivatives vector_field(const NetworkSpec& spec, const SystemState& state,
                                       const AlgorithmParams& params, const Matrix& b);

struct GainAdaptation {
    Matrix b;
    bool stall = false;
};

/// Raises target-update gains so the utility decrease condition holds.
///
/// Per entry with p_dot > 0 and |x_dot| >= x_dot_eps:
///   b <- max(b, b_safety * rhs / bracket^2),  bracket = x_dot / b,
/// where rhs is 2 p_dot p_ddot^2 (or 2 p_dot p_ddot for GainRule::linear).
/// When some channel of pair i has a stalled target (|x_dot| below threshold)
/// with p_dot > 0, the channel with the largest |bracket| is inflated until
/// sum_k(-x_dot^2 / b + rhs) < 0. Gains never drop below params.b_gains and
/// never exceed the integrator stability ceiling.
[[nodiscard]] GainAdaptation adapt_b_gains(const NetworkSpec& spec, const SystemState& state,
                                           const MonitorState& monitor,
                                           const AlgorithmParams& params);

/// True when every pair meets the gain inequality in at least one channel and
/// its pair-level utility derivative estimate is negative.
[[nodiscard]] bool gain_condition_satisfied(const MonitorState& monitor,
                                            const AlgorithmParams& params);

/// U = sum_i d_i [zeta_i theta_i^2 + sum_k (c_ik (x_ik w_ik - p_ik))^2].
[[nodiscard]] Real utility_value(const NetworkSpec& spec, const SystemState& state,
                                 const AlgorithmParams& params);

/// Same quantity written as U1 + sum_k e_k^T A_k^T D_k A_k e_k with
/// e_k = p_k - p*(x_k) and A_k = diag(c_k) (I - C(x_k)). D defaults to
/// diag(d) on every channel. Empty when some channel has rho >= 1.
[[nodiscard]] std::optional<Real> utility_quadratic_form(
    const NetworkSpec& spec, const SystemState& state, const AlgorithmParams& params,
    const std::vector<Vector>& d_per_channel = {});

/// Monitor quantities at a state, given the previous monitor for p_ddot.
[[nodiscard]] MonitorState make_monitor(const NetworkSpec& spec, const SystemState& state,
                                        const AlgorithmParams& params, const Matrix& b,
                                        const MonitorState* previous);

/// One fixed-step RK4 step followed by clamping and monitor refresh.
/// Throws DivergenceError on non-finite values or |p| > divergence_factor * p_max.
[[nodiscard]] StepResult step(const NetworkSpec& spec, const SystemState& state,
                              const AlgorithmParams& params, const MonitorState& monitor);

using StepObserver = std::function<void(std::int64_t step_index, const SystemState& state,
                                        const MonitorState& monitor)>;

[[nodiscard]] Trajectory simulate(const NetworkSpec& spec, const SystemState& initial,
                                  const AlgorithmParams& params, Real max_time,
                                  std::int64_t record_stride, const StepObserver& observer = {});

/// Derivative magnitudes with entries pushing against an active bound zeroed.
[[nodiscard]] Real projected_residual(const SystemState& state, const MonitorState& monitor,
                                      const AlgorithmParams& params);

}  // namespace mcpc
