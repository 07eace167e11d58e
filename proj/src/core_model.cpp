#include "mcpc/core_model.hpp"

#include "mcpc/feasibility.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace mcpc {

namespace {

void check_index(const NetworkSpec& spec, std::size_t i, std::size_t k) {
    if (i >= spec.pair_count || k >= spec.channel_count) {
        std::ostringstream os;
        os << "index out of range: pair " << i << " of " << spec.pair_count << ", channel " << k
           << " of " << spec.channel_count;
        throw InputError(os.str());
    }
}

void check_powers_shape(const NetworkSpec& spec, const Matrix& powers) {
    if (static_cast<std::size_t>(powers.rows()) != spec.pair_count ||
        static_cast<std::size_t>(powers.cols()) != spec.channel_count) {
        throw InputError("powers must be pair_count x channel_count");
    }
}

}  // namespace

void NetworkSpec::validate() const {
    if (pair_count == 0) {
        throw InputError("network.pairs: pair_count must be positive");
    }
    if (channel_count == 0) {
        throw InputError("network.channels: channel_count must be positive");
    }
    if (gains.size() != channel_count) {
        throw InputError("network.gains: expected one gain matrix per channel");
    }
    const auto m = static_cast<Eigen::Index>(pair_count);
    const auto n = static_cast<Eigen::Index>(channel_count);
    for (std::size_t k = 0; k < channel_count; ++k) {
        const Matrix& g = gains[k];
        if (g.rows() != m || g.cols() != m) {
            throw InputError("network.gains[" + std::to_string(k) + "]: must be pairs x pairs");
        }
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j < m; ++j) {
                const Real v = g(i, j);
                if (!(v > 0.0 && v <= 1.0)) {
                    std::ostringstream os;
                    os << "network.gains[" << k << "][" << i << "][" << j
                       << "]: gain must lie in (0, 1], got " << v;
                    throw InputError(os.str());
                }
            }
        }
    }
    if (noise.rows() != m || noise.cols() != n) {
        throw InputError("network.noise: must be pairs x channels");
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
            if (!(noise(i, k) > 0.0) || !std::isfinite(noise(i, k))) {
                throw InputError("network.noise: every entry must be positive");
            }
        }
    }
    if (avg_targets.size() != m) {
        throw InputError("network.avg_targets: expected one target per pair");
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        if (!(avg_targets(i) > 0.0) || !std::isfinite(avg_targets(i))) {
            throw InputError("network.avg_targets: every target must be positive");
        }
    }
}

Matrix build_gains_from_geometry(const std::vector<Point2>& transmitters,
                                 const std::vector<Point2>& receivers,
                                 Real exponent,
                                 Real reference_distance) {
    if (transmitters.size() != receivers.size() || transmitters.empty()) {
        throw InputError("geometry: need the same positive number of transmitters and receivers");
    }
    if (!(exponent > 0.0) || !(reference_distance > 0.0)) {
        throw InputError("geometry: exponent and reference_distance must be positive");
    }
    const auto m = static_cast<Eigen::Index>(transmitters.size());
    Matrix g(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const Real dx = transmitters[i].x - receivers[j].x;
            const Real dy = transmitters[i].y - receivers[j].y;
            const Real d = std::hypot(dx, dy);
            if (!(d > 0.0)) {
                std::ostringstream os;
                os << "geometry: transmitter " << i << " coincides with receiver " << j;
                throw InputError(os.str());
            }
            g(i, j) = std::min(1.0, std::pow(reference_distance / d, exponent));
        }
    }
    return g;
}

Matrix build_gains_from_geometry(const Geometry& geometry) {
    return build_gains_from_geometry(geometry.transmitters, geometry.receivers, geometry.exponent,
                                     geometry.reference_distance);
}

Vector effective_interference_column(const NetworkSpec& spec, const Vector& powers_column,
                                     std::size_t k) {
    const Matrix& g = spec.gains[k];
    const auto m = static_cast<Eigen::Index>(spec.pair_count);
    Vector w(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        Real acc = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (j != i) {
                acc += g(j, i) * powers_column(j);
            }
        }
        w(i) = (acc + spec.noise(i, static_cast<Eigen::Index>(k))) / g(i, i);
    }
    return w;
}

Real effective_interference(const NetworkSpec& spec, const Matrix& powers, std::size_t i,
                            std::size_t k) {
    check_index(spec, i, k);
    check_powers_shape(spec, powers);
    const Matrix& g = spec.gains[k];
    const auto ii = static_cast<Eigen::Index>(i);
    const auto kk = static_cast<Eigen::Index>(k);
    Real acc = 0.0;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(spec.pair_count); ++j) {
        if (j != ii) {
            acc += g(j, ii) / g(ii, ii) * powers(j, kk);
        }
    }
    return acc + spec.noise(ii, kk) / g(ii, ii);
}

Real sinr(const NetworkSpec& spec, const Matrix& powers, std::size_t i, std::size_t k) {
    check_index(spec, i, k);
    check_powers_shape(spec, powers);
    const Matrix& g = spec.gains[k];
    const auto ii = static_cast<Eigen::Index>(i);
    const auto kk = static_cast<Eigen::Index>(k);
    Real interference = spec.noise(ii, kk);
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(spec.pair_count); ++j) {
        if (j != ii) {
            interference += g(j, ii) * powers(j, kk);
        }
    }
    return g(ii, ii) * powers(ii, kk) / interference;
}

Matrix effective_interference_matrix(const NetworkSpec& spec, const Matrix& powers) {
    check_powers_shape(spec, powers);
    Matrix w(powers.rows(), powers.cols());
    for (std::size_t k = 0; k < spec.channel_count; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        w.col(kk) = effective_interference_column(spec, powers.col(kk), k);
    }
    return w;
}

Matrix normalized_gain_matrix(const NetworkSpec& spec, std::size_t k) {
    const Matrix& g = spec.gains[k];
    const auto m = g.rows();
    Matrix out = Matrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (i != j) {
                out(i, j) = g(j, i) / g(i, i);
            }
        }
    }
    return out;
}

InterferenceMatrices derive_matrices(const NetworkSpec& spec, const Vector& targets_column,
                                     const Vector& k_gains, std::size_t k) {
    if (k >= spec.channel_count) {
        throw InputError("derive_matrices: channel index out of range");
    }
    const auto m = static_cast<Eigen::Index>(spec.pair_count);
    if (targets_column.size() != m || k_gains.size() != m) {
        throw InputError("derive_matrices: targets and k_gains need one entry per pair");
    }
    InterferenceMatrices out;
    out.G = normalized_gain_matrix(spec, k);
    out.C = targets_column.asDiagonal() * out.G;
    out.H = Matrix::Identity(m, m) - out.C;
    out.A = k_gains.asDiagonal() * out.H;
    const SpectralRadius sr = spectral_radius(out.C);
    if (!sr.converged) {
        throw NumericalError("derive_matrices: spectral radius did not converge");
    }
    out.rho = sr.value;
    return out;
}

Real shannon_rate(Real gamma) { return std::log2(1.0 + gamma); }

Vector average_target_gap(const NetworkSpec& spec, const Matrix& targets) {
    return spec.avg_targets - targets.rowwise().mean();
}

DerivedMetrics derived_metrics(const NetworkSpec& spec, const SystemState& state) {
    DerivedMetrics out;
    out.effective_interference = effective_interference_matrix(spec, state.powers);
    out.sinr = state.powers.cwiseQuotient(out.effective_interference);
    out.rates = out.sinr.unaryExpr([](Real v) { return shannon_rate(v); });
    out.avg_target_gap = average_target_gap(spec, state.targets);
    return out;
}

}  // namespace mcpc
