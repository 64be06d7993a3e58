#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "lbkde/random.hpp"
#include "lbkde/sample.hpp"

namespace lbkde {

/// True density f on (0, tau) together with its length-biased counterpart
///   g(x) = x f(x) / mu,  G(t) = mu^{-1} int_0^t x dF(x).
///
/// Only the polynomial family f(x) ~ (x/tau)^(a-1) (1 - x/tau)^(b-1) is
/// provided; for it g is the (a+1, b) member. CDF tables are built eagerly at
/// construction and shared between copies, so reads are lock-free.
class ModelSpec {
public:
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double tau() const noexcept { return tau_; }
  /// mu = int x dF
  double mean() const noexcept { return mean_; }
  /// v = 1 / mu
  double v() const noexcept { return 1.0 / mean_; }

  double density(double x) const;
  double density_deriv(double x) const;
  double cdf(double t) const;
  double biased_density(double x) const;
  double biased_cdf(double t) const;
  /// Solves G(x) = u for u in (0, 1) to tolerance 1e-12; result lies in (0, tau).
  double biased_quantile(double u) const;

  friend ModelSpec make_polynomial_density(double a, double b, double tau);

private:
  class Family;
  ModelSpec() = default;

  double a_ = 1.0;
  double b_ = 1.0;
  double tau_ = 1.0;
  double mean_ = 0.5;
  std::shared_ptr<const Family> f_;
  std::shared_ptr<const Family> g_;
};

/// Requires a >= 1, b >= 1, tau > 0; DomainError otherwise.
ModelSpec make_polynomial_density(double a, double b, double tau);

struct ModelPoint {
  double f = 0.0;
  double F = 0.0;
  double g = 0.0;
  double G = 0.0;
};

ModelPoint evaluate_model(const ModelSpec &m, double t);

/// Upper end T of the integration window [0, T]; T < tau strictly.
struct EvaluationWindow {
  double T;
};

EvaluationWindow make_window(const ModelSpec &m, double T);

/// n i.i.d. draws from G by inverse-CDF sampling. Deterministic given rng state.
Sample sample_biased(const ModelSpec &m, std::size_t n, RandomStream &rng);

/// One audited ratio, examined on geometric grids approaching 0 and tau.
/// `exponent_*` is the fitted power e in q(x) ~ d^e, d the distance to that
/// endpoint, over the innermost two decades; e < 0 means divergence.
struct AuditQuantity {
  std::string label;
  double grid_max = 0.0;
  double exponent_at_zero = 0.0;
  double exponent_at_tau = 0.0;
  bool bounded = true;
};

struct AuditReport {
  struct Verdict {
    std::string assumption;  // "C1" | "F1" | "G1"
    bool passed = true;
    std::vector<AuditQuantity> quantities;
  };

  double r_exponent = 0.0;
  std::size_t grid_size = 0;
  std::vector<Verdict> verdicts;

  bool all_passed() const;
  const Verdict &at(const std::string &assumption) const;
};

/// Numerical audit of C(1), F(1) and G(1). Requires r_exponent > 4 and
/// grid_size >= 100. Verdicts are heuristic; raw maxima are always reported.
AuditReport audit_assumptions(const ModelSpec &m, double r_exponent, std::size_t grid_size);

} // namespace lbkde
