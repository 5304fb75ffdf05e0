#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fbflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Default tolerance for algebraic identity checks (firm nonexpansiveness,
/// cocoercivity slack, monotonicity slack).
inline constexpr double kCheckTol = 1e-10;

/// Tolerance for the subgradient identity x = prox(mu, x + mu*v).
inline constexpr double kDualTol = 1e-9;

/// Feasibility tolerance used when evaluating indicator functions at points
/// produced by floating-point projections.
inline constexpr double kFeasTol = 1e-9;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched operand dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Parameter outside its admissible range; the message names the violated
/// bound, e.g. "h=1.80 out of range: requires 0 < h < delta=1.50".
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A supplied dual vector fails the subgradient identity.
class InvalidDualError : public Error {
 public:
  using Error::Error;
};

/// An initial state violates a flow's admissibility requirement.
class InvalidInitialError : public Error {
 public:
  using Error::Error;
};

/// Malformed series or sample input to a diagnostic routine.
class InputError : public Error {
 public:
  using Error::Error;
};

/// High-accuracy reference computation failed to certify.
class OracleError : public Error {
 public:
  using Error::Error;
};

/// Bad command line or configuration file input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline void require_dim(Index expected, Index got, const char* what) {
  if (expected != got) {
    throw DimensionError(std::string(what) + ": expected dimension " +
                         std::to_string(expected) + ", got " +
                         std::to_string(got));
  }
}

inline void require_finite(const Vector& x, const char* what) {
  if (!x.allFinite()) {
    throw InputError(std::string(what) + ": entries must be finite");
  }
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace fbflow
