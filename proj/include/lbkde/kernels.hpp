#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lbkde {

/// Coefficients of K(u) = sum_k c_k u^k, separately on [-s, 0] and [0, s].
struct PolynomialForm {
  std::vector<double> negative;
  std::vector<double> positive;

  int degree() const;
};

/// Smoothing kernel with compact support [-s, s]. Immutable once built.
class KernelSpec {
public:
  KernelSpec(std::string name, double support_radius, std::function<double(double)> eval,
             std::function<double(double)> deriv, std::optional<PolynomialForm> polynomial = std::nullopt);

  const std::string &name() const noexcept { return name_; }
  double support_radius() const noexcept { return support_radius_; }
  /// Cached integral of K^2.
  double l2_norm_sq() const noexcept { return l2_norm_sq_; }

  /// K(u), exactly 0 outside the support.
  double operator()(double u) const { return std::abs(u) > support_radius_ ? 0.0 : eval_(u); }
  double deriv(double u) const { return std::abs(u) > support_radius_ ? 0.0 : deriv_(u); }
  /// The function as supplied, without the support clamp.

  /// Present when K is piecewise polynomial; enables O(log n) estimator evaluation.
  const PolynomialForm *polynomial() const noexcept { return polynomial_ ? &*polynomial_ : nullptr; }

private:
  std::string name_;
  double support_radius_;
  std::function<double(double)> eval_;
  std::function<double(double)> deriv_;
  std::optional<PolynomialForm> polynomial_;
  double l2_norm_sq_ = 0.0;
};

KernelSpec epanechnikov_kernel();
KernelSpec biweight_kernel();
KernelSpec triangular_kernel();
/// Standard normal density; fails validation (no compact support).
KernelSpec gaussian_kernel();

/// "epanechnikov" | "biweight" | "triangular"; DomainError otherwise.
KernelSpec kernel_by_name(const std::string &name);
const std::vector<std::string> &builtin_kernel_names();

double eval_kernel(const KernelSpec &k, double u);

/// Integral of K^2 over the support (absolute tolerance 1e-10).
double kernel_l2(const KernelSpec &k);

/// r(t) = int K(u) K(t + u) du / int K^2; exactly 0 for |t| >= 2s.
double kernel_autocorr(const KernelSpec &k, double t);

struct KernelValidationReport {
  struct Entry {
    std::string assumption;  // "K1" .. "K4"
    bool passed = false;
    std::string detail;
  };
  std::vector<Entry> entries;

  bool all_passed() const;
  const Entry &at(const std::string &assumption) const;
};

KernelValidationReport validate_kernel(const KernelSpec &k);

} // namespace lbkde
