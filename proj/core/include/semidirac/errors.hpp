// semidirac/errors.hpp
//
// Exception types shared by every module. The CLI maps them onto exit codes:
// ConfigError and other precondition failures (InputError, DimensionError,
// UnsupportedError) -> 2, ConvergenceError -> 3, anything else -> 1.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace semidirac {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched grids, vector lengths or matrix dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument values (non-finite samples, bad potentials, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A requested variant the operation does not support.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Configuration validation failure; `field` names the offending key path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Iterative solver breakdown or non-convergence. Carries the residual history
/// so callers can print diagnostics.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, std::vector<double> history = {})
      : Error(message), history_(std::move(history)) {}
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

/// Singular pivot block met during an LDL^H factorization.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

}  // namespace semidirac
