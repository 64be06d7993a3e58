#include "lbkde/quadrature.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <queue>
#include <vector>

#include <Eigen/Eigenvalues>

#include "lbkde/error.hpp"

namespace lbkde {

namespace {

// Kronrod abscissae (descending, last is the centre) and weights; the Gauss
// 10-point rule uses the odd-indexed abscissae.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525616004, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  int depth;
};

struct WorseFirst {
  bool operator()(const Panel &x, const Panel &y) const { return x.error < y.error; }
};

Panel gauss_kronrod21(const RealFn &fn, double a, double b, int depth) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = fn(centre);
  double kronrod = fc * kWgk[10];
  double gauss = 0.0;
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    const double sum = fn(centre - dx) + fn(centre + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  Panel p{a, b, kronrod * half, std::abs((kronrod - gauss) * half), depth};
  if (!std::isfinite(p.value)) p.error = std::numeric_limits<double>::infinity();
  return p;
}

bool splittable(const Panel &p) {
  const double mid = 0.5 * (p.a + p.b);
  return mid > p.a && mid < p.b;
}

} // namespace

void QuadratureConfig::validate() const {
  if (!(abs_tol > 0.0)) throw DomainError("quadrature abs_tol must be positive");
  if (!(rel_tol >= 0.0)) throw DomainError("quadrature rel_tol must be nonnegative");
  if (max_depth < 1) throw DomainError("quadrature max_depth must be at least 1");
  if (gh_nodes < 16 || gh_nodes % 2 != 0) throw DomainError("gh_nodes must be even and at least 16");
}

QuadratureResult integrate(const RealFn &fn, double a, double b, const QuadratureConfig &cfg,
                           std::span<const double> breakpoints) {
  if (std::isnan(a) || std::isnan(b)) throw DomainError("integrate: limits must not be NaN");
  if (a > b) {
    QuadratureResult flipped = integrate(fn, b, a, cfg, breakpoints);
    flipped.value = -flipped.value;
    return flipped;
  }
  QuadratureResult out;
  if (a == b) return out;

  std::vector<double> cuts;
  cuts.reserve(breakpoints.size() + 2);
  cuts.push_back(a);
  for (double x : breakpoints)
    if (x > a && x < b) cuts.push_back(x);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<Panel> heap;
  heap.reserve(cuts.size() * 2);
  std::vector<Panel> frozen;
  double value = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    heap.push_back(gauss_kronrod21(fn, cuts[i], cuts[i + 1], 0));
    value += heap.back().value;
    error += heap.back().error;
  }
  out.evaluations = 21 * heap.size();
  std::make_heap(heap.begin(), heap.end(), WorseFirst{});

  const std::size_t max_panels = std::max<std::size_t>(200000, 4 * heap.size());
  auto tolerance = [&](double v) { return std::max(cfg.abs_tol, cfg.rel_tol * std::abs(v)); };

  while (!heap.empty() && error > tolerance(value)) {
    std::pop_heap(heap.begin(), heap.end(), WorseFirst{});
    Panel worst = heap.back();
    heap.pop_back();
    if (worst.depth >= cfg.max_depth || !splittable(worst) || heap.size() + frozen.size() >= max_panels) {
      frozen.push_back(worst);
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = gauss_kronrod21(fn, worst.a, mid, worst.depth + 1);
    const Panel right = gauss_kronrod21(fn, mid, worst.b, worst.depth + 1);
    out.evaluations += 42;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), WorseFirst{});
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), WorseFirst{});
  }

  // Re-sum to shed the drift of the running totals.
  value = 0.0;
  error = 0.0;
  for (const auto *set : {&heap, &frozen}) {
    for (const Panel &p : *set) {
      value += p.value;
      error += p.error;
    }
  }
  out.value = value;
  out.error = error;
  out.converged = std::isfinite(value) && error <= tolerance(value);
  return out;
}

double integrate_adaptive(const RealFn &fn, double a, double b, const QuadratureConfig &cfg,
                          std::span<const double> breakpoints) {
  const QuadratureResult r = integrate(fn, a, b, cfg, breakpoints);
  if (!r.converged) throw NonConvergence("adaptive quadrature did not reach tolerance", r.value, r.error);
  return r.value;
}

const GaussHermiteRule &gauss_hermite_rule(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard lock(mutex);
  auto &slot = cache[n];
  if (!slot) {
    if (n < 1) throw DomainError("gauss_hermite_rule: node count must be positive");
    // Jacobi matrix of the probabilists' Hermite recurrence x He_k = He_{k+1} + k He_{k-1}.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
      jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
      jacobi(k - 1, k) = jacobi(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    auto rule = std::make_unique<GaussHermiteRule>();
    rule->nodes = solver.eigenvalues();
    rule->weights = solver.eigenvectors().row(0).transpose().array().square();
    rule->weights /= rule->weights.sum();
    slot = std::move(rule);
  }
  return *slot;
}

double gauss_hermite_expectation(const BivariateFn &fn, double rho, const QuadratureConfig &cfg) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("gauss_hermite_expectation: |rho| must be < 1");
  const GaussHermiteRule &rule = gauss_hermite_rule(cfg.gh_nodes);
  const double s = std::sqrt(1.0 - rho * rho);
  double total = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i];
    double inner = 0.0;
    for (Eigen::Index j = 0; j < rule.nodes.size(); ++j)
      inner += rule.weights[j] * fn(x, rho * x + s * rule.nodes[j]);
    total += rule.weights[i] * inner;
  }
  return total;
}

namespace {

void check_bracket(double flo, double fhi, double target) {
  if (!(flo <= target && target <= fhi))
    throw DomainError("invert_monotone: target outside [fn(lo), fn(hi)]");
}

} // namespace

double invert_monotone(const RealFn &fn, double target, double lo, double hi, double tol) {
  double flo = fn(lo) - target;
  double fhi = fn(hi) - target;
  check_bracket(flo + target, fhi + target, target);
  if (std::abs(flo) <= tol) return lo;
  if (std::abs(fhi) <= tol) return hi;
  // Illinois false position; fall back to bisection whenever a side stalls.
  int stalled_side = 0;
  for (int iter = 0; iter < 400; ++iter) {
    double x = (flo != fhi) ? lo - flo * (hi - lo) / (fhi - flo) : 0.5 * (lo + hi);
    if (!(x > lo && x < hi) || iter % 8 == 7) x = 0.5 * (lo + hi);
    const double fx = fn(x) - target;
    if (std::abs(fx) <= tol) return x;
    if (fx < 0.0) {
      lo = x;
      flo = fx;
      if (stalled_side == -1) fhi *= 0.5;
      stalled_side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (stalled_side == 1) flo *= 0.5;
      stalled_side = 1;
    }
    if (!(0.5 * (lo + hi) > lo && 0.5 * (lo + hi) < hi)) {
      throw NonConvergence("invert_monotone: bracket collapsed before reaching tolerance", x, std::abs(fx));
    }
  }
  throw NonConvergence("invert_monotone: iteration limit", 0.5 * (lo + hi), hi - lo);
}

double invert_monotone(const RealFn &fn, const RealFn &derivative, double target, double lo, double hi,
                       double tol, std::optional<double> guess) {
  const double flo = fn(lo);
  const double fhi = fn(hi);
  check_bracket(flo, fhi, target);
  if (std::abs(flo - target) <= tol) return lo;
  if (std::abs(fhi - target) <= tol) return hi;
  double x = guess.value_or(0.5 * (lo + hi));
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double fx = fn(x) - target;
    if (std::abs(fx) <= tol) return x;
    if (fx < 0.0)
      lo = x;
    else
      hi = x;
    const double d = derivative(x);
    double next = (d > 0.0 && std::isfinite(d)) ? x - fx / d : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || !(0.5 * (lo + hi) > lo && 0.5 * (lo + hi) < hi)) {
      throw NonConvergence("invert_monotone: bracket collapsed before reaching tolerance", x, std::abs(fx));
    }
    x = next;
  }
  throw NonConvergence("invert_monotone: iteration limit", x, hi - lo);
}

} // namespace lbkde
