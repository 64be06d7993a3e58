#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "lbkde/kernels.hpp"
#include "lbkde/models.hpp"
#include "lbkde/random.hpp"
#include "lbkde/sample.hpp"

namespace lbkde {

/// Harmonically reweighted empirical distribution of a length-biased sample:
///
///   G_n(t) = n^{-1} #{Y_i <= t},   v_n = n^{-1} sum 1/Y_i,   mu_n = 1 / v_n,
///   F_n(t) = mu_n int_0^t y^{-1} dG_n(y) = sum_{Y_i <= t} w_i,  w_i = Y_i^{-1} / sum_j Y_j^{-1}.
///
/// Fitted on a bootstrap resample the same object is the starred estimator.
class EmpiricalEstimator {
public:
  explicit EmpiricalEstimator(const Sample &s);

  std::size_t size() const noexcept { return static_cast<std::size_t>(sorted_.size()); }
  const Eigen::ArrayXd &sorted_values() const noexcept { return sorted_; }
  const Eigen::ArrayXd &harmonic_weights() const noexcept { return weights_; }
  double v_n() const noexcept { return v_n_; }
  double mu_n() const noexcept { return 1.0 / v_n_; }

  /// Sum of w_i over Y_i <= t; exactly 1 for t >= max Y.
  double F_n(double t) const;
  double G_n(double t) const;

  /// Kernel estimate h^{-1} sum_i w_i K((t - Y_i) / h). Piecewise-polynomial
  /// kernels use prefix moment sums (O(log n)); others sum over the window.
  double density(const KernelSpec &k, double h, double t) const;
  /// Window summation regardless of kernel form.
  double density_direct(const KernelSpec &k, double h, double t) const;

  /// Points where the estimate may fail to be smooth: Y_i and Y_i +- h s.
  std::vector<double> kink_points(const KernelSpec &k, double h) const;

private:
  static constexpr int kMaxMomentDegree = 6;
  static constexpr Eigen::Index kDirectWindow = 32;
  static constexpr double kMomentRounding = 16.0 * 1.0842021724855044e-19;  // 16 long double ulps
  static constexpr double kMomentTolerance = 1e-13;

  // Index range [first, last) of sorted values inside [lo, hi].
  std::pair<Eigen::Index, Eigen::Index> window(double lo, double hi) const;
  double polynomial_sum(std::span<const double> coeffs, double h, double t, Eigen::Index first,
                        Eigen::Index last) const;

  Eigen::ArrayXd sorted_;
  Eigen::ArrayXd weights_;
  double v_n_ = 0.0;
  std::vector<double> cumulative_;  // cumulative_[i] = sum of the first i weights
  // moments_[j][i] = sum_{l < i} w_l Y_l^j
  std::vector<std::vector<long double>> moments_;
};

EmpiricalEstimator fit_empirical(const Sample &s);

struct EmpiricalCdfValue {
  double Fn = 0.0;
  double Gn = 0.0;
};

EmpiricalCdfValue eval_Fn(const EmpiricalEstimator &e, double t);

/// f_n(t); requires h > 0.
double eval_fn(const EmpiricalEstimator &e, const KernelSpec &k, double h, double t);

/// h(n) = c n^{-gamma}, c > 0, 0 < gamma < 1.
struct BandwidthSchedule {
  double c = 0.9;
  double gamma = 0.18;

  BandwidthSchedule() = default;
  BandwidthSchedule(double c, double gamma);

  double operator()(std::size_t n) const;
};

/// n draws with replacement from the sample values (i.e. from G_n).
Sample bootstrap_resample(const Sample &s, RandomStream &rng);

/// max over a uniform grid of `grid` points on [0, T] of |f_n - f|; grid >= 100.
double sup_error(const EmpiricalEstimator &e, const KernelSpec &k, double h, const ModelSpec &m, double T,
                 std::size_t grid);
/// Same, over explicit evaluation points.
double sup_error(const EmpiricalEstimator &e, const KernelSpec &k, double h, const ModelSpec &m,
                 std::span<const double> points);

} // namespace lbkde
