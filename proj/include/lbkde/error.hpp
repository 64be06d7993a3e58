#pragma once

#include <stdexcept>
#include <string>

namespace lbkde {

/// Invalid argument or precondition violation (bad shape parameter, |rho| >= 1, Y_i <= 0, ...).
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Adaptive quadrature or root finding failed to reach its tolerance.
/// Carries the best estimate and its error bound so callers may degrade gracefully.
class NonConvergence : public std::runtime_error {
public:
  NonConvergence(const std::string &what, double estimate, double error_bound)
      : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound) {}

  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

private:
  double estimate_;
  double error_bound_;
};

/// Normalization attempted with sigma^2(p) == 0.
class DegenerateNormalization : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Configuration document rejected; `path()` is the offending key, e.g. "model.a".
class ConfigError : public std::invalid_argument {
public:
  ConfigError(std::string path, const std::string &message)
      : std::invalid_argument(path + ": " + message), path_(std::move(path)) {}

  const std::string &path() const noexcept { return path_; }

private:
  std::string path_;
};

} // namespace lbkde
