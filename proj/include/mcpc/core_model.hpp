#pragma once

#include "mcpc/types.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace mcpc {

struct Point2 {
    Real x = 0.0;
    Real y = 0.0;
};

/// Node placement and path-loss law from which gain matrices are generated.
struct Geometry {
    std::vector<Point2> transmitters;
    std::vector<Point2> receivers;
    Real exponent = 4.0;
    Real reference_distance = 1.0;
};

/// Static problem instance: M transmitter/receiver pairs sharing N channels.
///
/// gains[k](i, j) is the gain from transmitter i to receiver j on channel k,
/// noise(i, k) the receiver noise of pair i on channel k (micro-watts) and
/// avg_targets(i) the SINR that pair i must meet on average over channels.
struct NetworkSpec {
    std::size_t pair_count = 0;
    std::size_t channel_count = 0;
    std::vector<Matrix> gains;
    Matrix noise;
    Vector avg_targets;
    std::optional<Geometry> geometry;

    /// Throws InputError naming the first violated invariant.
    void validate() const;

    [[nodiscard]] Real direct_gain(std::size_t i, std::size_t k) const { return gains[k](i, i); }
};

/// Per-pair, per-channel transmit powers and allotted SINR targets.
struct SystemState {
    Matrix powers;   // M x N, micro-watts
    Matrix targets;  // M x N
    Real time = 0.0;
};

/// Matrices of the single-channel linear SINR system at fixed targets.
struct InterferenceMatrices {
    Matrix G;  // g_ji / g_ii off the diagonal
    Matrix C;  // diag(targets) * G
    Matrix H;  // I - C
    Matrix A;  // diag(k_gains) * H
    Real rho = 0.0;
};

struct DerivedMetrics {
    Matrix effective_interference;  // w_{i,k}
    Matrix sinr;
    Matrix rates;  // bits/s/Hz
    Vector avg_target_gap;  // theta_i
};

/// Clipped power law g_ij = min(1, (d0 / d_ij)^exponent) between transmitter i
/// and receiver j.
[[nodiscard]] Matrix build_gains_from_geometry(const std::vector<Point2>& transmitters,
                                               const std::vector<Point2>& receivers,
                                               Real exponent,
                                               Real reference_distance);

[[nodiscard]] Matrix build_gains_from_geometry(const Geometry& geometry);

/// Interference plus noise at receiver i on channel k, normalised by the direct gain.
[[nodiscard]] Real effective_interference(const NetworkSpec& spec, const Matrix& powers,
                                          std::size_t i, std::size_t k);

/// g_ii p_ik / (sum_{j != i} g_ji p_jk + nu_ik), evaluated from raw gains.
[[nodiscard]] Real sinr(const NetworkSpec& spec, const Matrix& powers, std::size_t i,
                        std::size_t k);

/// All w_{i,k} at once; column k only depends on column k of powers.
[[nodiscard]] Matrix effective_interference_matrix(const NetworkSpec& spec, const Matrix& powers);

[[nodiscard]] Vector effective_interference_column(const NetworkSpec& spec,
                                                   const Vector& powers_column,
                                                   std::size_t k);

[[nodiscard]] Matrix normalized_gain_matrix(const NetworkSpec& spec, std::size_t k);

[[nodiscard]] InterferenceMatrices derive_matrices(const NetworkSpec& spec,
                                                   const Vector& targets_column,
                                                   const Vector& k_gains,
                                                   std::size_t k);

/// log2(1 + gamma).
[[nodiscard]] Real shannon_rate(Real gamma);

/// theta_i = gamma_i - mean_k x_{i,k}.
[[nodiscard]] Vector average_target_gap(const NetworkSpec& spec, const Matrix& targets);

[[nodiscard]] DerivedMetrics derived_metrics(const NetworkSpec& spec, const SystemState& state);

}  // namespace mcpc
