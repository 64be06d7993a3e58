#include "lbkde/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "lbkde/error.hpp"

namespace lbkde {

EmpiricalEstimator::EmpiricalEstimator(const Sample &s) : sorted_(s.values()) {
  std::sort(sorted_.begin(), sorted_.end());
  const Eigen::ArrayXd inverse = sorted_.inverse();
  const double total = inverse.sum();
  v_n_ = total / static_cast<double>(sorted_.size());
  weights_ = inverse / total;

  const auto n = static_cast<std::size_t>(sorted_.size());
  cumulative_.assign(n + 1, 0.0);
  moments_.assign(kMaxMomentDegree + 1, std::vector<long double>(n + 1, 0.0L));
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    cumulative_[i + 1] = cumulative_[i] + weights_[idx];
    long double power = weights_[idx];
    for (int j = 0; j <= kMaxMomentDegree; ++j) {
      moments_[j][i + 1] = moments_[j][i] + power;
      power *= sorted_[idx];
    }
  }
}

std::pair<Eigen::Index, Eigen::Index> EmpiricalEstimator::window(double lo, double hi) const {
  const auto first = std::lower_bound(sorted_.begin(), sorted_.end(), lo) - sorted_.begin();
  const auto last = std::upper_bound(sorted_.begin(), sorted_.end(), hi) - sorted_.begin();
  return {first, last};
}

double EmpiricalEstimator::F_n(double t) const {
  const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), t) - sorted_.begin();
  if (count == sorted_.size()) return 1.0;
  return cumulative_[static_cast<std::size_t>(count)];
}

double EmpiricalEstimator::G_n(double t) const {
  const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), t) - sorted_.begin();
  return static_cast<double>(count) / static_cast<double>(sorted_.size());
}

double EmpiricalEstimator::polynomial_sum(std::span<const double> coeffs, double h, double t, Eigen::Index first,
                                          Eigen::Index last) const {
  if (first >= last) return 0.0;
  // sum_i w_i sum_k c_k ((t - Y_i)/h)^k rewritten as sum_j d_j sum_i w_i Y_i^j.
  const int degree = static_cast<int>(coeffs.size()) - 1;
  long double t_pow[kMaxMomentDegree + 1];
  long double h_inv_pow[kMaxMomentDegree + 1];
  t_pow[0] = 1.0L;
  h_inv_pow[0] = 1.0L;
  for (int k = 1; k <= degree; ++k) {
    t_pow[k] = t_pow[k - 1] * t;
    h_inv_pow[k] = h_inv_pow[k - 1] / h;
  }
  long double total = 0.0L;
  for (int j = 0; j <= degree; ++j) {
    long double d = 0.0L;
    long double binom = 1.0L;  // C(k, j), starting at k = j
    for (int k = j; k <= degree; ++k) {
      if (k > j) binom = binom * k / (k - j);
      d += coeffs[k] * binom * t_pow[k - j] * h_inv_pow[k];
    }
    if (j % 2 == 1) d = -d;
    const auto &m = moments_[j];
    total += d * (m[static_cast<std::size_t>(last)] - m[static_cast<std::size_t>(first)]);
  }
  return static_cast<double>(total);
}

double EmpiricalEstimator::density(const KernelSpec &k, double h, double t) const {
  const PolynomialForm *poly = k.polynomial();
  if (!poly || poly->degree() > kMaxMomentDegree) return density_direct(k, h, t);
  if (!(h > 0.0)) throw DomainError("bandwidth must be positive");
  const double reach = h * k.support_radius();
  const auto [first, last] = window(t - reach, t + reach);
  // Expanding (t - Y)^j in powers of Y amplifies rounding by about ((|t| + reach)/h)^degree.
  const double amplification = std::pow((std::abs(t) + reach) / h, poly->degree());
  if (last - first <= kDirectWindow || amplification * kMomentRounding > kMomentTolerance)
    return density_direct(k, h, t);
  const auto centre = std::upper_bound(sorted_.begin() + first, sorted_.begin() + last, t) - sorted_.begin();
  // Y_i <= t gives u = (t - Y_i)/h >= 0.
  const double sum = polynomial_sum(poly->positive, h, t, first, centre) + polynomial_sum(poly->negative, h, t, centre, last);
  return sum / h;
}

double EmpiricalEstimator::density_direct(const KernelSpec &k, double h, double t) const {
  if (!(h > 0.0)) throw DomainError("bandwidth must be positive");
  const double reach = h * k.support_radius();
  const auto [first, last] = std::isfinite(reach) ? window(t - reach, t + reach)
                                                  : std::pair<Eigen::Index, Eigen::Index>{0, sorted_.size()};
  double sum = 0.0;
  for (Eigen::Index i = first; i < last; ++i) sum += weights_[i] * k((t - sorted_[i]) / h);
  return sum / h;
}

std::vector<double> EmpiricalEstimator::kink_points(const KernelSpec &k, double h) const {
  const double reach = h * k.support_radius();
  std::vector<double> points;
  points.reserve(3 * sorted_.size());
  for (double y : sorted_) {
    points.push_back(y - reach);
    points.push_back(y);
    points.push_back(y + reach);
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

EmpiricalEstimator fit_empirical(const Sample &s) { return EmpiricalEstimator(s); }

EmpiricalCdfValue eval_Fn(const EmpiricalEstimator &e, double t) { return {e.F_n(t), e.G_n(t)}; }

double eval_fn(const EmpiricalEstimator &e, const KernelSpec &k, double h, double t) { return e.density(k, h, t); }

BandwidthSchedule::BandwidthSchedule(double c, double gamma) : c(c), gamma(gamma) {
  if (!(c > 0.0)) throw DomainError("bandwidth schedule requires c > 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("bandwidth schedule requires 0 < gamma < 1");
}

double BandwidthSchedule::operator()(std::size_t n) const {
  return c * std::pow(static_cast<double>(n), -gamma);
}

Sample bootstrap_resample(const Sample &s, RandomStream &rng) {
  const Eigen::ArrayXd &values = s.values();
  Eigen::ArrayXd out(values.size());
  for (auto &y : out) y = values[static_cast<Eigen::Index>(rng.index(s.size()))];
  return Sample(std::move(out));
}

double sup_error(const EmpiricalEstimator &e, const KernelSpec &k, double h, const ModelSpec &m, double T,
                 std::size_t grid) {
  if (grid < 100) throw DomainError("sup_error: grid must have at least 100 points");
  std::vector<double> points(grid);
  for (std::size_t i = 0; i < grid; ++i) points[i] = T * static_cast<double>(i) / static_cast<double>(grid - 1);
  return sup_error(e, k, h, m, points);
}

double sup_error(const EmpiricalEstimator &e, const KernelSpec &k, double h, const ModelSpec &m,
                 std::span<const double> points) {
  double worst = 0.0;
  for (double t : points) worst = std::max(worst, std::abs(e.density(k, h, t) - m.density(t)));
  return worst;
}

} // namespace lbkde
