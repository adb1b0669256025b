#pragma once

#include <stdexcept>
#include <string>

namespace mfg {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid grid, schedule, problem or study parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A tabulated function produced NaN or Inf.
class SamplingError : public Error {
 public:
  using Error::Error;
};

/// Explicit sweeps were asked to run on a grid that violates the CFL bound.
class CflViolation : public Error {
 public:
  CflViolation(const std::string& what, double lhs) : Error(what), lhs_(lhs) {}
  double lhs() const noexcept { return lhs_; }

 private:
  double lhs_;
};

/// Discrete maximum principle breached beyond rounding slack.
class DmpBreach : public Error {
 public:
  using Error::Error;
};

/// Coupling value outside [0, C0] or non-finite.
class CouplingRangeError : public Error {
 public:
  using Error::Error;
};

/// Two grid functions compared on incompatible grids.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Reference/CSV persistence failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfg
