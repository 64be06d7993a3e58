#include "lbkde/statistics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "lbkde/error.hpp"

namespace lbkde {

namespace {

inline double abs_pow(double x, double p) {
  if (p == 2.0) return x * x;
  if (p == 1.0) return std::abs(x);
  return std::pow(std::abs(x), p);
}

void require_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("L_p order must satisfy 1 <= p < infinity");
}

// E|XY|^p for |rho| <= 1 (the boundary is needed inside sigma_1^2 where r(0) = 1).
double abs_product_moment(double p, double rho) {
  rho = std::clamp(rho, -1.0, 1.0);
  const double phi = std::acos(rho);
  double second_kink = phi + 0.5 * std::numbers::pi;
  if (second_kink > std::numbers::pi) second_kink -= std::numbers::pi;
  const std::array<double, 2> kinks = {0.5 * std::numbers::pi, second_kink};
  static const QuadratureConfig cfg{1e-300, 1e-14, 60, 64};
  const QuadratureResult angular = integrate(
      [p, phi](double t) { return abs_pow(std::cos(t) * std::cos(t - phi), p); }, 0.0, std::numbers::pi, cfg, kinks);
  const double radial = std::exp(p * std::numbers::ln2 + std::lgamma(p + 1.0));
  return radial * angular.value / std::numbers::pi;
}

} // namespace

std::string to_string(ConstantsSource source) {
  return source == ConstantsSource::TrueDensity ? "true-density" : "plug-in";
}

std::string to_string(StatisticKind kind) {
  switch (kind) {
  case StatisticKind::Original:
    return "original";
  case StatisticKind::Bootstrap:
    return "bootstrap";
  case StatisticKind::GenericWeighted:
    break;
  }
  return "generic-weighted";
}

QuadratureConfig statistics_quadrature() {
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-13;
  cfg.rel_tol = 1e-10;
  cfg.max_depth = 30;
  return cfg;
}

bool within_theorem_scope(double p) { return p > 1.0 && std::isfinite(p); }

double abs_normal_moment(double p) {
  if (!(p >= 0.0)) throw DomainError("abs_normal_moment requires p >= 0");
  if (p == 1.0) return std::sqrt(2.0 / std::numbers::pi);
  return std::exp(0.5 * p * std::numbers::ln2 + std::lgamma(0.5 * (p + 1.0))) / std::sqrt(std::numbers::pi);
}

double bivariate_abs_moment(double p, double rho) {
  require_p(p);
  if (!(std::abs(rho) < 1.0)) throw DomainError("bivariate_abs_moment requires |rho| < 1");
  return abs_product_moment(p, rho);
}

double sigma1_squared(const KernelSpec &k, double p) {
  require_p(p);
  const double s = k.support_radius();
  if (!std::isfinite(s)) throw DomainError("sigma1_squared requires a compactly supported kernel");
  const double independent = std::pow(abs_normal_moment(p), 2);
  const std::array<double, 3> breaks = {0.5 * s, s, 1.5 * s};
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-12;
  cfg.rel_tol = 1e-11;
  // Integrand is even in u.
  const double half = integrate_adaptive(
      [&](double u) { return abs_product_moment(p, kernel_autocorr(k, u)) - independent; }, 0.0, 2.0 * s, cfg,
      breaks);
  return 2.0 * half;
}

AsymptoticConstants asymptotic_constants(const RealFn &f_eval, const KernelSpec &k, double p, double T,
                                         ConstantsSource source, double sigma1_sq,
                                         std::span<const double> breakpoints, const QuadratureConfig &cfg) {
  require_p(p);
  if (!(T > 0.0)) throw DomainError("asymptotic_constants requires T > 0");
  AsymptoticConstants c;
  c.p = p;
  c.source = source;
  c.sigma1_sq = sigma1_sq;
  c.abs_moment = abs_normal_moment(p);
  c.kernel_l2 = k.l2_norm_sq();
  const double centre_power = 0.5 * (p + 2.0);
  const double spread_power = p + 2.0;
  const double centre_integral =
      integrate_adaptive([&](double t) { return std::pow(std::abs(f_eval(t)), centre_power); }, 0.0, T, cfg, breakpoints);
  const double spread_integral =
      integrate_adaptive([&](double t) { return std::pow(std::abs(f_eval(t)), spread_power); }, 0.0, T, cfg, breakpoints);
  c.m_p = c.abs_moment * std::pow(c.kernel_l2, 0.5 * p) * centre_integral;
  c.sigma2_p = sigma1_sq * spread_integral * std::pow(c.kernel_l2, p);
  return c;
}

AsymptoticConstants asymptotic_constants(const RealFn &f_eval, const KernelSpec &k, double p, double T,
                                         ConstantsSource source) {
  return asymptotic_constants(f_eval, k, p, T, source, sigma1_squared(k, p));
}

AsymptoticConstants plugin_constants(const EmpiricalEstimator &e, const KernelSpec &k, double h, double p, double T,
                                     double sigma1_sq, const QuadratureConfig &cfg) {
  const std::vector<double> kinks = e.kink_points(k, h);
  return asymptotic_constants([&](double t) { return e.density(k, h, t); }, k, p, T, ConstantsSource::PlugIn,
                              sigma1_sq, kinks, cfg);
}

LpStatistic generic_weighted_lp(const RealFn &curve_a, const RealFn &curve_b, const RealFn &w, double p, double a,
                                double b, std::span<const double> breakpoints, const QuadratureConfig &cfg) {
  require_p(p);
  LpStatistic s;
  s.p = p;
  s.T = b;
  s.kind = StatisticKind::GenericWeighted;
  s.value = integrate_adaptive(
      [&](double x) {
        const double weight = w(x);
        if (weight == 0.0) return 0.0;
        return abs_pow(curve_a(x) - curve_b(x), p) * weight;
      },
      a, b, cfg, breakpoints);
  return s;
}

LpStatistic ln_statistic(const EmpiricalEstimator &e, const KernelSpec &k, double h, const ModelSpec &m, double p,
                         double T, const QuadratureConfig &cfg) {
  if (!(h > 0.0)) throw DomainError("ln_statistic requires h > 0");
  if (!(T > 0.0 && T < m.tau())) throw DomainError("ln_statistic requires 0 < T < tau");
  const std::vector<double> kinks = e.kink_points(k, h);
  const double v = m.v();
  LpStatistic s = generic_weighted_lp([&](double x) { return e.density(k, h, x); },
                                      [&](double x) { return m.density(x); },
                                      [&](double x) { return std::pow(x * v, 0.5 * p) * m.density(x); }, p, 0.0, T,
                                      kinks, cfg);
  s.n = e.size();
  s.h = h;
  s.kind = StatisticKind::Original;
  return s;
}

LpStatistic lnn_statistic(const EmpiricalEstimator &e_boot, const EmpiricalEstimator &e_orig, const KernelSpec &k,
                          double h, double p, double T, const QuadratureConfig &cfg) {
  if (!(h > 0.0)) throw DomainError("lnn_statistic requires h > 0");
  if (e_boot.size() != e_orig.size()) throw DomainError("lnn_statistic: resample and sample sizes differ");
  std::vector<double> kinks = e_orig.kink_points(k, h);
  const std::vector<double> boot_kinks = e_boot.kink_points(k, h);
  kinks.insert(kinks.end(), boot_kinks.begin(), boot_kinks.end());
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
  const double v_n = e_orig.v_n();
  LpStatistic s = generic_weighted_lp([&](double x) { return e_boot.density(k, h, x); },
                                      [&](double x) { return e_orig.density(k, h, x); },
                                      [&](double x) { return std::pow(x * v_n, 0.5 * p) * e_orig.density(k, h, x); },
                                      p, 0.0, T, kinks, cfg);
  s.n = e_orig.size();
  s.h = h;
  s.kind = StatisticKind::Bootstrap;
  return s;
}

NormalizedStatistic normalize_statistic(const LpStatistic &stat, const AsymptoticConstants &consts) {
  if (!(consts.sigma2_p > 0.0)) throw DegenerateNormalization("sigma^2(p) is zero; check the window T");
  if (!(stat.h > 0.0) || stat.n < 1) throw DomainError("normalize_statistic requires h > 0 and n >= 1");
  if (stat.kind == StatisticKind::Bootstrap && consts.source != ConstantsSource::PlugIn)
    throw DomainError("bootstrap statistics must be normalized with plug-in constants");
  NormalizedStatistic out;
  out.statistic = stat;
  out.constants_used = consts;
  const double scale = std::pow(static_cast<double>(stat.n) * stat.h, 0.5 * stat.p);
  out.z = (scale * stat.value - consts.m_p) / std::sqrt(stat.h * consts.sigma2_p);
  return out;
}

} // namespace lbkde
