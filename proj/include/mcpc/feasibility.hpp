#pragma once

#include "mcpc/core_model.hpp"

#include <string>
#include <vector>

namespace mcpc {

struct SpectralRadius {
    Real value = 0.0;  // last estimate, even when not converged
    bool converged = false;
    int iterations = 0;
};

struct FeasibilityResult {
    bool feasible = false;
    Real rho = 0.0;
};

struct EquilibriumSolution {
    Vector eta;
    Vector p_star;
    Real residual = 0.0;
};

struct LyapunovCertificate {
    Vector D;
    Real min_eig = 0.0;
    bool valid = false;
    std::string diagnostics;
};

struct AllotmentReport {
    bool feasible = false;
    Vector rho_per_channel;
    Vector avg_gap;
};

inline constexpr Real kSpectralTolerance = 1e-10;
inline constexpr int kSpectralMaxIterations = 100000;

/// Perron root of a nonnegative matrix by shifted power iteration.
///
/// Iterates on C + sigma I where sigma tracks the midpoint of the
/// Collatz-Wielandt bounds min_i (Cv)_i / v_i <= rho <= max_i (Cv)_i / v_i.
/// The shift moves any eigenvalue of modulus rho other than rho itself
/// strictly inside the dominant circle, so bipartite (period-2) patterns
/// converge. Stops when the bounds agree to tol, or, for reducible inputs
/// whose lower bound is pinned at zero, when the normalised iterate settles.
[[nodiscard]] SpectralRadius spectral_radius(const Matrix& C, Real tol = kSpectralTolerance,
                                             int max_iters = kSpectralMaxIterations);

/// rho(C(targets)) < 1 - margin on channel k.
[[nodiscard]] FeasibilityResult is_feasible(const NetworkSpec& spec, const Vector& targets_column,
                                            std::size_t k, Real margin = 0.0);

/// Pareto-minimal powers p* = (I - C)^{-1} eta on channel k.
[[nodiscard]] EquilibriumSolution equilibrium_powers(const NetworkSpec& spec,
                                                     const Vector& targets_column,
                                                     std::size_t k);

/// Diagonal D with A^T D + D A positive definite, for a nonsingular M-matrix A.
///
/// D_i = v_i / u_i with A u = 1 and A^T v = 1. The result is always verified
/// by a Cholesky factorisation; valid is false when verification fails.
/// Throws InfeasibleError when A is not a nonsingular M-matrix.
[[nodiscard]] LyapunovCertificate lyapunov_certificate(const Matrix& A);

/// e^T A^T D A e.
[[nodiscard]] Real lyapunov_value(const Matrix& A, const Vector& D, const Vector& e);

/// Multi-channel feasibility of an allotment: rho < 1 on every channel and
/// every pair's channel average equal to its target within tol.
[[nodiscard]] AllotmentReport allotment_feasible(const NetworkSpec& spec, const Matrix& targets,
                                                 Real tol = 1e-6);

/// Flags zero rows/columns of C (reducible structure). Empty when none.
[[nodiscard]] std::vector<std::string> reducibility_diagnostics(const Matrix& C);

}  // namespace mcpc
