#include "lbkde/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "lbkde/error.hpp"
#include "lbkde/quadrature.hpp"

namespace lbkde {

/// Density proportional to (x/tau)^(alpha-1) (1 - x/tau)^(beta-1) on [0, tau]
/// with its CDF tabulated on a uniform grid. CDF values between grid points
/// are the table entry plus an in-cell adaptive integral.
class ModelSpec::Family {
public:
  static constexpr int kCells = 1024;

  Family(double alpha, double beta, double tau) : alpha_(alpha), beta_(beta), tau_(tau) {
    norm_ = std::exp(std::lgamma(alpha + beta) - std::lgamma(alpha) - std::lgamma(beta)) / tau;
    cumulative_.resize(kCells + 1);
    cumulative_[0] = 0.0;
    for (int i = 0; i < kCells; ++i) cumulative_[i + 1] = cumulative_[i] + cell_integral(i, node(i + 1));
  }

  double density(double x) const {
    if (x < 0.0 || x > tau_) return 0.0;
    const double z = x / tau_;
    return norm_ * std::pow(z, alpha_ - 1.0) * std::pow(1.0 - z, beta_ - 1.0);
  }

  double derivative(double x) const {
    if (x <= 0.0 || x >= tau_) return 0.0;
    const double z = x / tau_;
    double d = 0.0;
    if (alpha_ != 1.0) d += (alpha_ - 1.0) * std::pow(z, alpha_ - 2.0) * std::pow(1.0 - z, beta_ - 1.0);
    if (beta_ != 1.0) d -= (beta_ - 1.0) * std::pow(z, alpha_ - 1.0) * std::pow(1.0 - z, beta_ - 2.0);
    return norm_ * d / tau_;
  }

  double cdf(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= tau_) return 1.0;
    const int i = std::clamp(static_cast<int>(t / tau_ * kCells), 0, kCells - 1);
    return std::clamp((cumulative_[i] + cell_integral(i, t)) / total(), 0.0, 1.0);
  }

  double quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
    const double target = u * total();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    const int i = std::clamp(static_cast<int>(it - cumulative_.begin()) - 1, 0, kCells - 1);
    const double lo = node(i);
    const double hi = node(i + 1);
    const double width = cumulative_[i + 1] - cumulative_[i];
    const double guess = width > 0.0 ? lo + (hi - lo) * (target - cumulative_[i]) / width : 0.5 * (lo + hi);
    // Tight enough that the result can never collapse onto 0 or tau.
    const double tol = std::min({1e-12 * total(), 0.5 * target, 0.5 * (total() - target)});
    return invert_monotone([&](double x) { return cumulative_[i] + cell_integral(i, x); },
                           [&](double x) { return density(x); }, target, lo, hi, tol, guess);
  }

private:
  double node(int i) const { return i == kCells ? tau_ : tau_ * i / kCells; }
  double total() const { return cumulative_[kCells]; }

  double cell_integral(int i, double x) const {
    static const QuadratureConfig cfg{1e-300, 1e-14, 60, 64};
    return integrate([this](double y) { return density(y); }, node(i), x, cfg).value;
  }

  double alpha_;
  double beta_;
  double tau_;
  double norm_ = 1.0;
  std::vector<double> cumulative_;
};

ModelSpec make_polynomial_density(double a, double b, double tau) {
  if (!(a >= 1.0) || !(b >= 1.0) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("polynomial density requires shape parameters a >= 1 and b >= 1");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("polynomial density requires 0 < tau < infinity");
  ModelSpec m;
  m.a_ = a;
  m.b_ = b;
  m.tau_ = tau;
  m.mean_ = tau * a / (a + b);
  m.f_ = std::make_shared<const ModelSpec::Family>(a, b, tau);
  m.g_ = std::make_shared<const ModelSpec::Family>(a + 1.0, b, tau);
  return m;
}

double ModelSpec::density(double x) const { return f_->density(x); }
double ModelSpec::density_deriv(double x) const { return f_->derivative(x); }
double ModelSpec::cdf(double t) const { return f_->cdf(t); }
double ModelSpec::biased_density(double x) const { return g_->density(x); }
double ModelSpec::biased_cdf(double t) const { return g_->cdf(t); }
double ModelSpec::biased_quantile(double u) const { return g_->quantile(u); }

ModelPoint evaluate_model(const ModelSpec &m, double t) {
  return {m.density(t), m.cdf(t), m.biased_density(t), m.biased_cdf(t)};
}

EvaluationWindow make_window(const ModelSpec &m, double T) {
  if (!(T > 0.0 && T < m.tau())) throw DomainError("evaluation window requires 0 < T < tau");
  return {T};
}

Sample sample_biased(const ModelSpec &m, std::size_t n, RandomStream &rng) {
  if (n == 0) throw DomainError("sample_biased: n must be at least 1");
  Eigen::ArrayXd values(static_cast<Eigen::Index>(n));
  for (auto &y : values) y = m.biased_quantile(rng.uniform());
  return Sample(std::move(values));
}

bool AuditReport::all_passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict &v) { return v.passed; });
}

const AuditReport::Verdict &AuditReport::at(const std::string &assumption) const {
  for (const Verdict &v : verdicts)
    if (v.assumption == assumption) return v;
  throw DomainError("no audit verdict for " + assumption);
}

namespace {

constexpr double kInnermostDecade = -8.0;
// A fitted power below this counts as divergence; tolerates rounding on flat ratios.
constexpr double kDivergenceExponent = -1e-2;

// Least-squares slope of log q against log d over the innermost two decades.
double endpoint_exponent(const std::vector<double> &d, const std::vector<double> &q) {
  const double cutoff = d.front() * 100.0;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < d.size() && d[i] <= cutoff; ++i) {
    if (!std::isfinite(q[i])) return -std::numeric_limits<double>::infinity();
    if (q[i] <= 0.0) continue;
    xs.push_back(std::log(d[i]));
    ys.push_back(std::log(q[i]));
  }
  if (xs.size() < 2) return std::numeric_limits<double>::infinity();  // identically zero: bounded
  Eigen::MatrixXd design(xs.size(), 2);
  Eigen::VectorXd rhs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    design(static_cast<Eigen::Index>(i), 0) = 1.0;
    design(static_cast<Eigen::Index>(i), 1) = xs[i];
    rhs[static_cast<Eigen::Index>(i)] = ys[i];
  }
  return design.colPivHouseholderQr().solve(rhs)[1];
}

template <class Ratio>
AuditQuantity audit_ratio(const std::string &label, const ModelSpec &m, std::size_t per_end, Ratio ratio) {
  AuditQuantity out;
  out.label = label;
  std::vector<double> d(per_end);
  std::vector<double> near_zero(per_end);
  std::vector<double> near_tau(per_end);
  for (std::size_t j = 0; j < per_end; ++j) {
    // d runs from 0.5e-8 tau up to tau / 2
    d[j] = 0.5 * m.tau() * std::pow(10.0, kInnermostDecade * (1.0 - static_cast<double>(j) / (per_end - 1)));
    near_zero[j] = ratio(d[j]);
    near_tau[j] = ratio(m.tau() - d[j]);
  }
  for (double q : near_zero) out.grid_max = std::max(out.grid_max, std::isnan(q) ? HUGE_VAL : q);
  for (double q : near_tau) out.grid_max = std::max(out.grid_max, std::isnan(q) ? HUGE_VAL : q);
  out.exponent_at_zero = endpoint_exponent(d, near_zero);
  out.exponent_at_tau = endpoint_exponent(d, near_tau);
  out.bounded = std::isfinite(out.grid_max) && out.exponent_at_zero >= kDivergenceExponent &&
                out.exponent_at_tau >= kDivergenceExponent;
  return out;
}

} // namespace

AuditReport audit_assumptions(const ModelSpec &m, double r_exponent, std::size_t grid_size) {
  if (!(r_exponent > 4.0)) throw DomainError("audit_assumptions: r must exceed 4");
  if (grid_size < 100) throw DomainError("audit_assumptions: grid_size must be at least 100");
  AuditReport report;
  report.r_exponent = r_exponent;
  report.grid_size = grid_size;
  const std::size_t per_end = grid_size / 2;

  {
    // Continuity of f on [0, tau]: the largest jump between neighbours of a
    // uniform grid must shrink when the grid is refined.
    AuditReport::Verdict v{"C1", true, {}};
    auto max_jump = [&](std::size_t cells) {
      double jump = 0.0;
      double prev = m.density(0.0);
      for (std::size_t i = 1; i <= cells; ++i) {
        const double cur = m.density(m.tau() * static_cast<double>(i) / cells);
        jump = std::max(jump, std::abs(cur - prev));
        prev = cur;
      }
      return jump;
    };
    AuditQuantity q;
    q.label = "max neighbour jump of f";
    const double coarse = max_jump(grid_size);
    const double fine = max_jump(16 * grid_size);
    q.grid_max = fine;
    q.bounded = std::isfinite(coarse) && std::isfinite(fine) && fine <= 0.5 * coarse + 1e-12;
    v.passed = q.bounded;
    v.quantities.push_back(q);
    report.verdicts.push_back(v);
  }

  {
    AuditReport::Verdict v{"F1", true, {}};
    v.quantities.push_back(audit_ratio("|f'(x) / (x^1/2 f^1/2(x))|", m, per_end, [&](double x) {
      const double f = m.density(x);
      const double df = m.density_deriv(x);
      if (df == 0.0) return 0.0;
      return std::abs(df / (std::sqrt(x) * std::sqrt(f)));
    }));
    v.quantities.push_back(audit_ratio("f^1/2(x) / x^3/2", m, per_end,
                                       [&](double x) { return std::sqrt(m.density(x)) / std::pow(x, 1.5); }));
    v.passed = std::all_of(v.quantities.begin(), v.quantities.end(), [](const AuditQuantity &q) { return q.bounded; });
    report.verdicts.push_back(v);
  }

  {
    AuditReport::Verdict v{"G1", true, {}};
    std::ostringstream label;
    label << "G(x)^(1/" << r_exponent << ") x^-2";
    v.quantities.push_back(audit_ratio(label.str(), m, per_end, [&](double x) {
      return std::pow(m.biased_cdf(x), 1.0 / r_exponent) / (x * x);
    }));
    v.passed = v.quantities.front().bounded;
    report.verdicts.push_back(v);
  }
  return report;
}

} // namespace lbkde
