#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "lbkde/estimators.hpp"
#include "lbkde/kernels.hpp"
#include "lbkde/models.hpp"
#include "lbkde/quadrature.hpp"

namespace lbkde {

enum class ConstantsSource { TrueDensity, PlugIn };
enum class StatisticKind { Original, Bootstrap, GenericWeighted };

std::string to_string(ConstantsSource source);
std::string to_string(StatisticKind kind);

/// Centering and scaling of the L_p statistic:
///
///   m(p)       = E|N|^p (int K^2)^{p/2} int_0^T f^{(p+2)/2}
///   sigma^2(p) = sigma_1^2 int_0^T f^{p+2} (int K^2)^p
///
/// With f replaced by f_n these are the plug-in constants.
struct AsymptoticConstants {
  double p = 2.0;
  double m_p = 0.0;
  double sigma2_p = 0.0;
  double sigma1_sq = 0.0;
  double abs_moment = 0.0;
  double kernel_l2 = 0.0;
  ConstantsSource source = ConstantsSource::TrueDensity;
};

struct LpStatistic {
  double p = 2.0;
  double value = 0.0;
  double T = 0.0;
  std::size_t n = 0;
  double h = 0.0;
  StatisticKind kind = StatisticKind::GenericWeighted;
};

struct NormalizedStatistic {
  double z = 0.0;
  AsymptoticConstants constants_used;
  LpStatistic statistic;
};

/// Tolerances used for the L_p and constant integrals unless overridden.
QuadratureConfig statistics_quadrature();

/// The limit theorems are stated for 1 < p < infinity; p = 1 is computed but
/// reported as outside that range.
bool within_theorem_scope(double p);

/// E|N|^p = 2^{p/2} Gamma((p+1)/2) / Gamma(1/2), p >= 0.
double abs_normal_moment(double p);

/// E|XY|^p for standard normals with correlation rho, |rho| < 1.
///
/// Computed in polar form: with (X, Z) = R (cos t, sin t) and
/// Y = rho X + sqrt(1 - rho^2) Z = R cos(t - phi), phi = acos(rho),
///   E|XY|^p = E[R^{2p}] (1/pi) int_0^pi |cos t cos(t - phi)|^p dt,  E[R^{2p}] = 2^p Gamma(p + 1),
/// and the angular integral is split at its two kinks.
double bivariate_abs_moment(double p, double rho);

/// sigma_1^2 = int_{-2s}^{2s} (E|X Y_u|^p - (E|N|^p)^2) du with corr(X, Y_u) = r(u).
double sigma1_squared(const KernelSpec &k, double p);

/// m(p) and sigma^2(p) for the density `f_eval` on [0, T]. `breakpoints`
/// seeds the quadrature panels (kinks of f_eval). `source` is set by the caller.
AsymptoticConstants asymptotic_constants(const RealFn &f_eval, const KernelSpec &k, double p, double T,
                                         ConstantsSource source, double sigma1_sq,
                                         std::span<const double> breakpoints = {},
                                         const QuadratureConfig &cfg = statistics_quadrature());

/// As above, computing sigma_1^2 from the kernel.
AsymptoticConstants asymptotic_constants(const RealFn &f_eval, const KernelSpec &k, double p, double T,
                                         ConstantsSource source = ConstantsSource::TrueDensity);

/// Plug-in constants with f replaced by f_n.
AsymptoticConstants plugin_constants(const EmpiricalEstimator &e, const KernelSpec &k, double h, double p, double T,
                                     double sigma1_sq, const QuadratureConfig &cfg = statistics_quadrature());

/// int_a^b |curve_a - curve_b|^p w. Throws NonConvergence on quadrature failure.
LpStatistic generic_weighted_lp(const RealFn &curve_a, const RealFn &curve_b, const RealFn &w, double p, double a,
                                double b, std::span<const double> breakpoints = {},
                                const QuadratureConfig &cfg = statistics_quadrature());

/// I_n(p) = int_0^T |f_n - f|^p (x / mu)^{p/2} dF(x).
LpStatistic ln_statistic(const EmpiricalEstimator &e, const KernelSpec &k, double h, const ModelSpec &m, double p,
                         double T, const QuadratureConfig &cfg = statistics_quadrature());

/// I_{n,n}(p) = int_0^T |f_{n,n} - f_n|^p (x / mu_n)^{p/2} f_n(x) dx, mu_n from the original sample.
LpStatistic lnn_statistic(const EmpiricalEstimator &e_boot, const EmpiricalEstimator &e_orig, const KernelSpec &k,
                          double h, double p, double T, const QuadratureConfig &cfg = statistics_quadrature());

/// z = (h sigma^2(p))^{-1/2} ((n h)^{p/2} I - m(p)). Bootstrap statistics
/// require plug-in constants.
NormalizedStatistic normalize_statistic(const LpStatistic &stat, const AsymptoticConstants &consts);

} // namespace lbkde
