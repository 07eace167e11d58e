#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mcpc {

using Real = double;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Malformed or invariant-violating input. Maps to CLI exit status 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The instance has no nonnegative solution for the requested targets (rho >= 1).
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed (singular system, non-convergence).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file could not be read or written; the message carries the path.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kToolVersion = "mcpc 0.1.0";

}  // namespace mcpc
