#include "mcpc/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mcpc {

namespace {

struct CollatzBounds {
    Real lo = 0.0;
    Real hi = 0.0;
};

CollatzBounds collatz_bounds(const Vector& v, const Vector& cv) {
    CollatzBounds b{std::numeric_limits<Real>::infinity(), 0.0};
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v(i) > std::numeric_limits<Real>::min()) {
            const Real r = cv(i) / v(i);
            b.lo = std::min(b.lo, r);
            b.hi = std::max(b.hi, r);
        }
    }
    if (!std::isfinite(b.lo)) {
        b.lo = 0.0;
    }
    return b;
}

}  // namespace

SpectralRadius spectral_radius(const Matrix& C, Real tol, int max_iters) {
    if (C.rows() != C.cols()) {
        throw InputError("spectral_radius: matrix must be square");
    }
    SpectralRadius out;
    const auto n = C.rows();
    if (n == 0) {
        out.converged = true;
        return out;
    }
    Vector v = Vector::Ones(n);
    for (int it = 1; it <= max_iters; ++it) {
        const Vector cv = C * v;
        const CollatzBounds b = collatz_bounds(v, cv);
        out.iterations = it;
        out.value = 0.5 * (b.lo + b.hi);
        if (b.hi - b.lo <= tol * std::max(1.0, b.hi)) {
            out.converged = true;
            return out;
        }
        const Real shift = out.value;
        Vector next = cv + shift * v;
        const Real scale = next.cwiseAbs().maxCoeff();
        if (!(scale > 0.0) || !std::isfinite(scale)) {
            return out;
        }
        next /= scale;
        if ((next - v).cwiseAbs().maxCoeff() <= tol) {
            // Settled iterate of a reducible matrix: the Perron vector has
            // vanishing entries, so the lower bound never rises.
            out.value = (C * next).cwiseAbs().maxCoeff();
            out.converged = true;
            return out;
        }
        v = std::move(next);
    }
    return out;
}

FeasibilityResult is_feasible(const NetworkSpec& spec, const Vector& targets_column, std::size_t k,
                              Real margin) {
    if ((targets_column.array() < 0.0).any()) {
        throw InputError("is_feasible: targets must be nonnegative");
    }
    const Vector ones = Vector::Ones(static_cast<Eigen::Index>(spec.pair_count));
    const InterferenceMatrices mats = derive_matrices(spec, targets_column, ones, k);
    return FeasibilityResult{mats.rho < 1.0 - margin, mats.rho};
}

EquilibriumSolution equilibrium_powers(const NetworkSpec& spec, const Vector& targets_column,
                                       std::size_t k) {
    const auto m = static_cast<Eigen::Index>(spec.pair_count);
    const Vector ones = Vector::Ones(m);
    const InterferenceMatrices mats = derive_matrices(spec, targets_column, ones, k);
    if (mats.rho >= 1.0) {
        std::ostringstream os;
        os << "channel " << k << " is infeasible: rho(C) = " << mats.rho << " >= 1";
        throw InfeasibleError(os.str());
    }
    EquilibriumSolution out;
    out.eta.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        out.eta(i) = targets_column(i) * spec.noise(i, static_cast<Eigen::Index>(k)) /
                     spec.gains[k](i, i);
    }
    const Eigen::PartialPivLU<Matrix> lu(mats.H);
    if (lu.rcond() < 1e-14) {
        throw NumericalError("equilibrium_powers: (I - C) is singular to working precision");
    }
    out.p_star = lu.solve(out.eta);
    out.residual = (mats.H * out.p_star - out.eta).cwiseAbs().maxCoeff();
    return out;
}

LyapunovCertificate lyapunov_certificate(const Matrix& A) {
    if (A.rows() != A.cols() || A.rows() == 0) {
        throw InputError("lyapunov_certificate: A must be square and non-empty");
    }
    const auto m = A.rows();
    for (Eigen::Index i = 0; i < m; ++i) {
        if (!(A(i, i) > 0.0)) {
            throw InfeasibleError("lyapunov_certificate: A has a nonpositive diagonal entry");
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            if (i != j && A(i, j) > 0.0) {
                throw InfeasibleError("lyapunov_certificate: A has a positive off-diagonal entry");
            }
        }
    }
    const Eigen::PartialPivLU<Matrix> lu(A);
    if (lu.rcond() < 1e-14) {
        throw InfeasibleError("lyapunov_certificate: A is singular");
    }
    const Vector ones = Vector::Ones(m);
    const Vector u = lu.solve(ones);
    const Vector v = lu.transpose().solve(ones);
    if ((u.array() <= 0.0).any() || (v.array() <= 0.0).any()) {
        throw InfeasibleError(
            "lyapunov_certificate: A is not a nonsingular M-matrix (A^{-1} has negative entries)");
    }

    LyapunovCertificate cert;
    cert.D = v.cwiseQuotient(u);
    const Matrix S = A.transpose() * cert.D.asDiagonal() + cert.D.asDiagonal() * A;
    const Matrix sym = 0.5 * (S + S.transpose());
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
    cert.min_eig = eig.eigenvalues().minCoeff();
    const Eigen::LLT<Matrix> llt(sym);
    cert.valid = llt.info() == Eigen::Success && cert.min_eig > 0.0;
    if (!cert.valid) {
        std::ostringstream os;
        os << "A^T D + D A is not positive definite (min eigenvalue " << cert.min_eig << ")";
        cert.diagnostics = os.str();
    }
    return cert;
}

Real lyapunov_value(const Matrix& A, const Vector& D, const Vector& e) {
    const Vector ae = A * e;
    return ae.dot(D.cwiseProduct(ae));
}

AllotmentReport allotment_feasible(const NetworkSpec& spec, const Matrix& targets, Real tol) {
    const auto m = static_cast<Eigen::Index>(spec.pair_count);
    const auto n = static_cast<Eigen::Index>(spec.channel_count);
    if (targets.rows() != m || targets.cols() != n) {
        throw InputError("allotment_feasible: targets must be pairs x channels");
    }
    if ((targets.array() < 0.0).any()) {
        throw InputError("allotment_feasible: targets must be nonnegative");
    }
    AllotmentReport out;
    out.rho_per_channel.resize(n);
    bool ok = true;
    for (Eigen::Index k = 0; k < n; ++k) {
        const FeasibilityResult f =
            is_feasible(spec, targets.col(k), static_cast<std::size_t>(k));
        out.rho_per_channel(k) = f.rho;
        ok = ok && f.feasible;
    }
    out.avg_gap = average_target_gap(spec, targets);
    ok = ok && (out.avg_gap.cwiseAbs().array() < tol).all();
    out.feasible = ok;
    return out;
}

std::vector<std::string> reducibility_diagnostics(const Matrix& C) {
    std::vector<std::string> out;
    for (Eigen::Index i = 0; i < C.rows(); ++i) {
        if (C.row(i).cwiseAbs().maxCoeff() == 0.0) {
            out.push_back("zero row " + std::to_string(i));
        }
    }
    for (Eigen::Index j = 0; j < C.cols(); ++j) {
        if (C.col(j).cwiseAbs().maxCoeff() == 0.0) {
            out.push_back("zero column " + std::to_string(j));
        }
    }
    return out;
}

}  // namespace mcpc
