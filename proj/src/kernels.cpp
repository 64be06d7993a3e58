#include "lbkde/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "lbkde/error.hpp"
#include "lbkde/quadrature.hpp"

namespace lbkde {

namespace {

QuadratureConfig kernel_quadrature() {
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-10;
  cfg.rel_tol = 1e-13;
  return cfg;
}

// Range over which integrals of an unbounded-support kernel are taken.
double integration_radius(const KernelSpec &k) { return std::min(k.support_radius(), 40.0); }

} // namespace

int PolynomialForm::degree() const {
  return static_cast<int>(std::max(negative.size(), positive.size())) - 1;
}

KernelSpec::KernelSpec(std::string name, double support_radius, std::function<double(double)> eval,
                       std::function<double(double)> deriv, std::optional<PolynomialForm> polynomial)
    : name_(std::move(name)), support_radius_(support_radius), eval_(std::move(eval)), deriv_(std::move(deriv)),
      polynomial_(std::move(polynomial)) {
  if (!(support_radius_ > 0.0)) throw DomainError("kernel support radius must be positive");
  l2_norm_sq_ = kernel_l2(*this);
}

KernelSpec epanechnikov_kernel() {
  return KernelSpec(
      "epanechnikov", 1.0, [](double u) { return 0.75 * (1.0 - u * u); }, [](double u) { return -1.5 * u; },
      PolynomialForm{{0.75, 0.0, -0.75}, {0.75, 0.0, -0.75}});
}

KernelSpec biweight_kernel() {
  constexpr double c = 15.0 / 16.0;
  return KernelSpec(
      "biweight", 1.0,
      [](double u) {
        const double v = 1.0 - u * u;
        return c * v * v;
      },
      [](double u) { return -4.0 * c * u * (1.0 - u * u); },
      PolynomialForm{{c, 0.0, -2.0 * c, 0.0, c}, {c, 0.0, -2.0 * c, 0.0, c}});
}

KernelSpec triangular_kernel() {
  return KernelSpec(
      "triangular", 1.0, [](double u) { return 1.0 - std::abs(u); },
      [](double u) { return u > 0.0 ? -1.0 : (u < 0.0 ? 1.0 : 0.0); }, PolynomialForm{{1.0, 1.0}, {1.0, -1.0}});
}

KernelSpec gaussian_kernel() {
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return KernelSpec(
      "gaussian", std::numeric_limits<double>::infinity(), [norm](double u) { return norm * std::exp(-0.5 * u * u); },
      [norm](double u) { return -u * norm * std::exp(-0.5 * u * u); });
}

const std::vector<std::string> &builtin_kernel_names() {
  static const std::vector<std::string> names = {"epanechnikov", "biweight", "triangular"};
  return names;
}

KernelSpec kernel_by_name(const std::string &name) {
  if (name == "epanechnikov") return epanechnikov_kernel();
  if (name == "biweight") return biweight_kernel();
  if (name == "triangular") return triangular_kernel();
  throw DomainError("unknown kernel '" + name + "' (expected epanechnikov, biweight or triangular)");
}

double eval_kernel(const KernelSpec &k, double u) { return k(u); }

double kernel_l2(const KernelSpec &k) {
  const double s = integration_radius(k);
  const std::array<double, 1> centre = {0.0};
  return integrate_adaptive([&k](double u) { return k(u) * k(u); }, -s, s, kernel_quadrature(), centre);
}

double kernel_autocorr(const KernelSpec &k, double t) {
  const double s = integration_radius(k);
  if (std::abs(t) >= 2.0 * s || k.l2_norm_sq() == 0.0) return 0.0;
  const double lo = std::max(-s, -s - t);
  const double hi = std::min(s, s - t);
  if (!(lo < hi)) return 0.0;
  const std::array<double, 2> kinks = {0.0, -t};
  const double overlap = integrate_adaptive([&k, t](double u) { return k(u) * k(t + u); }, lo, hi,
                                            kernel_quadrature(), kinks);
  return overlap / k.l2_norm_sq();
}

bool KernelValidationReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const Entry &e) { return e.passed; });
}

const KernelValidationReport::Entry &KernelValidationReport::at(const std::string &assumption) const {
  for (const Entry &e : entries)
    if (e.assumption == assumption) return e;
  throw DomainError("no report entry for " + assumption);
}

KernelValidationReport validate_kernel(const KernelSpec &k) {
  KernelValidationReport report;
  const double s = k.support_radius();
  const bool finite_support = std::isfinite(s);
  constexpr int kGrid = 4001;

  {
    KernelValidationReport::Entry e{"K1", true, ""};
    if (!finite_support) {
      e.passed = false;
      e.detail = "support is unbounded";
    } else {
      double outside = 0.0;
      double inside = 0.0;
      for (int i = 1; i <= 400; ++i) {
        const double u = s * (1.0 + 2.0 * i / 400.0);
        outside = std::max({outside, std::abs(k(u)), std::abs(k(-u))});
      }
      for (int i = 0; i < kGrid; ++i) inside = std::max(inside, std::abs(k(-s + 2.0 * s * i / (kGrid - 1))));
      e.passed = outside == 0.0 && std::isfinite(inside);
      std::ostringstream os;
      os << "max |K| beyond support = " << outside << ", max |K| on support = " << inside;
      e.detail = os.str();
    }
    report.entries.push_back(e);
  }

  {
    KernelValidationReport::Entry e{"K2", k.l2_norm_sq() > 0.0, ""};
    e.detail = "int K^2 = " + std::to_string(k.l2_norm_sq());
    report.entries.push_back(e);
  }

  {
    // Bounded derivative: finite differences must not blow up as the step
    // shrinks, and must agree with the supplied derivative except at finitely
    // many kinks. Grid spans slightly past the support so jumps at +-s show.
    KernelValidationReport::Entry e{"K3", true, ""};
    const double span = finite_support ? 1.25 * s : 10.0;
    double fd_coarse = 0.0;
    double fd_fine = 0.0;
    double deriv_max = 0.0;
    int mismatches = 0;
    for (int i = 0; i < kGrid; ++i) {
      const double u = -span + 2.0 * span * i / (kGrid - 1);
      const double coarse = (k(u + 1e-3) - k(u - 1e-3)) / 2e-3;
      const double fine = (k(u + 1e-6) - k(u - 1e-6)) / 2e-6;
      fd_coarse = std::max(fd_coarse, std::abs(coarse));
      fd_fine = std::max(fd_fine, std::abs(fine));
      deriv_max = std::max(deriv_max, std::abs(k.deriv(u)));
      if (std::abs(fine - k.deriv(u)) > 1e-5) ++mismatches;
    }
    const bool bounded = std::isfinite(deriv_max) && fd_fine <= 2.0 * fd_coarse + 1e-9;
    const bool consistent = mismatches <= kGrid / 100;
    e.passed = bounded && consistent;
    std::ostringstream os;
    os << "max |K'| = " << deriv_max << ", max |FD| (h=1e-3) = " << fd_coarse << ", (h=1e-6) = " << fd_fine
       << ", derivative mismatches = " << mismatches << "/" << kGrid;
    e.detail = os.str();
    report.entries.push_back(e);
  }

  {
    KernelValidationReport::Entry e{"K4", false, ""};
    const double r = integration_radius(k);
    const std::array<double, 1> centre = {0.0};
    const double mass = integrate_adaptive([&k](double u) { return k(u); }, -r, r, kernel_quadrature(), centre);
    e.passed = std::abs(mass - 1.0) <= 1e-8;
    std::ostringstream os;
    os.precision(12);
    os << "int K = " << mass;
    e.detail = os.str();
    report.entries.push_back(e);
  }
  return report;
}

} // namespace lbkde
