#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>

#include <Eigen/Core>

#include "lbkde/random.hpp"

namespace lbkde {

using RealFn = std::function<double(double)>;
using BivariateFn = std::function<double(double, double)>;

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_depth = 40;  // maximum bisection depth of any single panel
  int gh_nodes = 64;   // Gauss-Hermite nodes per axis

  /// Throws DomainError unless abs_tol > 0, rel_tol >= 0, max_depth >= 1, gh_nodes >= 16 and even.
  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  std::size_t evaluations = 0;
};

/// Globally adaptive Gauss-Kronrod (21-point) integration of `fn` over [a, b].
///
/// The interval is first split at every breakpoint strictly inside (a, b);
/// panels are then bisected worst-first until the summed error estimate is at
/// most max(abs_tol, rel_tol * |value|). Never throws on non-convergence: the
/// best estimate is returned with `converged == false`.
QuadratureResult integrate(const RealFn &fn, double a, double b, const QuadratureConfig &cfg,
                           std::span<const double> breakpoints = {});

/// As `integrate`, but throws NonConvergence (carrying the estimate) when the
/// tolerance is not met.
double integrate_adaptive(const RealFn &fn, double a, double b, const QuadratureConfig &cfg,
                          std::span<const double> breakpoints = {});

/// Nodes and weights for E[h(X)], X ~ N(0, 1): sum_i w_i h(x_i), weights sum to 1.
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Probabilists' Gauss-Hermite rule with `n` nodes (Golub-Welsch). Tables are
/// built once per n and shared read-only.
const GaussHermiteRule &gauss_hermite_rule(int n);

/// E[fn(X, Y)] for a standard bivariate normal pair with correlation rho, by a
/// tensor Gauss-Hermite rule on Y = rho X + sqrt(1 - rho^2) Z.
double gauss_hermite_expectation(const BivariateFn &fn, double rho, const QuadratureConfig &cfg);

/// Solves fn(x) = target for nondecreasing fn on [lo, hi] by bisection with
/// false-position acceleration. Returns x with |fn(x) - target| <= tol.
double invert_monotone(const RealFn &fn, double target, double lo, double hi, double tol);

/// Newton-accelerated variant; `derivative` is fn'. The bracket is always kept.
double invert_monotone(const RealFn &fn, const RealFn &derivative, double target, double lo, double hi,
                       double tol, std::optional<double> guess = std::nullopt);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

/// Sample mean and standard error of fn(draw(rng)) over n independent draws.
template <class Fn, class Draw>
McEstimate mc_mean(Fn &&fn, Draw &&draw, RandomStream &rng, std::size_t n) {
  // Welford
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = fn(draw(rng));
    const double delta = x - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (x - mean);
  }
  McEstimate out;
  out.mean = mean;
  out.count = n;
  if (n >= 2) out.std_error = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  return out;
}

} // namespace lbkde
