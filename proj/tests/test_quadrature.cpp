#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "lbkde/error.hpp"
#include "lbkde/models.hpp"
#include "lbkde/quadrature.hpp"
#include "lbkde/random.hpp"

using namespace lbkde;
using Catch::Approx;

namespace {

std::pair<double, double> correlated_pair(RandomStream &rng, double rho) {
  const double x = rng.normal();
  const double z = rng.normal();
  return {x, rho * x + std::sqrt(1.0 - rho * rho) * z};
}

} // namespace

TEST_CASE("integrate_adaptive on closed-form integrals", "[quadrature]") {
  const QuadratureConfig cfg;
  CHECK(integrate_adaptive([](double x) { return x * x; }, 0.0, 1.0, cfg) == Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(integrate_adaptive([](double u) { return 0.75 * (1.0 - u * u); }, -1.0, 1.0, cfg) ==
        Approx(1.0).epsilon(1e-14));
  CHECK(integrate_adaptive([](double x) { return std::pow(x, 9) * (1 - x) * (1 - x); }, 0.0, 1.0, cfg) ==
        Approx(1.0 / 660.0).epsilon(1e-12));
}

TEST_CASE("integrate handles reversed and empty intervals", "[quadrature]") {
  const QuadratureConfig cfg;
  CHECK(integrate_adaptive([](double x) { return x; }, 1.0, 0.0, cfg) == Approx(-0.5));
  CHECK(integrate_adaptive([](double x) { return x; }, 2.0, 2.0, cfg) == 0.0);
}

TEST_CASE("single panels are exact on polynomials up to degree 31", "[quadrature][property]") {
  QuadratureConfig cfg;
  cfg.abs_tol = 1.0;  // accept the first panel
  RandomStream rng(11);
  for (int deg = 0; deg <= 31; ++deg) {
    std::vector<double> c(deg + 1);
    for (auto &ci : c) ci = 2.0 * rng.uniform() - 1.0;
    const double a = -0.7, b = 1.3;
    auto poly = [&](double x) {
      double acc = 0.0;
      for (int j = deg; j >= 0; --j) acc = acc * x + c[j];
      return acc;
    };
    double exact = 0.0;
    for (int j = 0; j <= deg; ++j) exact += c[j] * (std::pow(b, j + 1) - std::pow(a, j + 1)) / (j + 1);
    const QuadratureResult r = integrate(poly, a, b, cfg);
    CHECK(r.evaluations == 21);
    CHECK(std::abs(r.value - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("breakpoints let the rule resolve kinks", "[quadrature]") {
  const QuadratureConfig cfg;
  const double brk[] = {0.3};
  const double v = integrate_adaptive([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, cfg, brk);
  CHECK(v == Approx(0.5 * (0.09 + 0.49)).epsilon(1e-14));
}

TEST_CASE("non-convergence carries the best estimate", "[quadrature][errors]") {
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-15;
  cfg.rel_tol = 1e-15;
  cfg.max_depth = 2;
  auto fn = [](double x) { return 1.0 / std::sqrt(x); };
  const QuadratureResult r = integrate(fn, 0.0, 1.0, cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.value == Approx(2.0).epsilon(0.05));
  try {
    integrate_adaptive(fn, 0.0, 1.0, cfg);
    FAIL("expected NonConvergence");
  } catch (const NonConvergence &e) {
    CHECK(e.estimate() == r.value);
    CHECK(e.error_bound() > 0.0);
  }
}

TEST_CASE("QuadratureConfig validation", "[quadrature][errors]") {
  QuadratureConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.abs_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = QuadratureConfig{};
  cfg.gh_nodes = 15;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.gh_nodes = 18;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("Gauss-Hermite rule integrates normal moments", "[quadrature]") {
  const GaussHermiteRule &rule = gauss_hermite_rule(64);
  REQUIRE(rule.nodes.size() == 64);
  CHECK(rule.weights.sum() == Approx(1.0).epsilon(1e-14));
  CHECK((rule.weights.array() * rule.nodes.array().square()).sum() == Approx(1.0).epsilon(1e-12));
  CHECK((rule.weights.array() * rule.nodes.array().pow(4)).sum() == Approx(3.0).epsilon(1e-12));
  CHECK((rule.weights.array() * rule.nodes.array().pow(3)).sum() == Approx(0.0).margin(1e-12));
}

TEST_CASE("gauss_hermite_expectation examples", "[quadrature]") {
  const QuadratureConfig cfg;
  CHECK(gauss_hermite_expectation([](double x, double y) { return x * y; }, 0.3, cfg) == Approx(0.3).epsilon(1e-12));
  CHECK(gauss_hermite_expectation([](double x, double y) { return x * x * y * y; }, 0.5, cfg) ==
        Approx(1.5).epsilon(1e-12));
  CHECK_THROWS_AS(gauss_hermite_expectation([](double, double) { return 1.0; }, 1.0, cfg), DomainError);
  CHECK_THROWS_AS(gauss_hermite_expectation([](double, double) { return 1.0; }, -1.5, cfg), DomainError);
}

TEST_CASE("Gauss-Hermite |xy| at 128 nodes agrees with Monte Carlo", "[quadrature][mc]") {
  QuadratureConfig cfg;
  cfg.gh_nodes = 128;
  const double rho = 0.7;
  const double gh = gauss_hermite_expectation([](double x, double y) { return std::abs(x * y); }, rho, cfg);
  RandomStream rng(2024);
  const McEstimate mc = mc_mean([](std::pair<double, double> xy) { return std::abs(xy.first * xy.second); },
                                [rho](RandomStream &r) { return correlated_pair(r, rho); }, rng, 10'000'000);
  // The kink at the axes leaves a few 1e-3 of rule error at 128 nodes.
  CHECK(std::abs(gh - mc.mean) <= 3.0 * mc.std_error + 5e-3);
  CHECK(std::abs(mc.mean - 0.800180818506543314) <= 3.0 * mc.std_error);
}

TEST_CASE("Gauss-Hermite factorizes at rho = 0", "[quadrature][property]") {
  const QuadratureConfig cfg;
  auto h1 = [](double x) { return std::exp(0.3 * x) + x * x; };
  auto h2 = [](double y) { return std::cos(y) + y * y * y * y; };
  const double joint = gauss_hermite_expectation([&](double x, double y) { return h1(x) * h2(y); }, 0.0, cfg);
  const double e1 = gauss_hermite_expectation([&](double x, double) { return h1(x); }, 0.0, cfg);
  const double e2 = gauss_hermite_expectation([&](double, double y) { return h2(y); }, 0.0, cfg);
  CHECK(std::abs(joint - e1 * e2) <= 1e-8);
  CHECK(e1 == Approx(std::exp(0.045) + 1.0).epsilon(1e-12));
  CHECK(e2 == Approx(std::exp(-0.5) + 3.0).epsilon(1e-12));
}

TEST_CASE("invert_monotone examples", "[quadrature]") {
  CHECK(invert_monotone([](double x) { return x; }, 0.3, 0.0, 1.0, 1e-14) == Approx(0.3).epsilon(1e-13));
  CHECK(invert_monotone([](double x) { return x * x; }, 0.25, 0.0, 1.0, 1e-14) == Approx(0.5).epsilon(1e-13));
  CHECK_THROWS_AS(invert_monotone([](double x) { return x; }, 1.5, 0.0, 1.0, 1e-12), DomainError);
  CHECK_THROWS_AS(invert_monotone([](double x) { return x; }, -0.1, 0.0, 1.0, 1e-12), DomainError);
}

TEST_CASE("invert_monotone recovers the median of G", "[quadrature]") {
  const ModelSpec m = make_polynomial_density(10, 3, 1);
  const double x = invert_monotone([&](double t) { return m.biased_cdf(t); }, 0.5, 0.0, 1.0, 1e-14);
  CHECK(std::abs(x - 0.799551404702015108723) <= 1e-10);
  CHECK(std::abs(m.biased_quantile(0.5) - 0.799551404702015108723) <= 1e-10);
}

TEST_CASE("invert_monotone round-trips on random monotone functions", "[quadrature][property]") {
  RandomStream rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const double c0 = 0.1 + rng.uniform();
    const double c1 = 3.0 * rng.uniform();
    const double k = 0.2 + 4.0 * rng.uniform();
    const double s = 2.0 * rng.uniform() - 1.0;
    auto fn = [=](double x) { return s + c0 * x + c1 * std::pow(x, k) + 0.3 * std::tanh(5.0 * (x - 0.5)); };
    const double x = rng.uniform();
    const double back = invert_monotone(fn, fn(x), 0.0, 1.0, 1e-12);
    REQUIRE(std::abs(back - x) <= 1e-9);
  }
}

TEST_CASE("Newton inversion with derivative", "[quadrature]") {
  auto fn = [](double x) { return x * x * x; };
  auto df = [](double x) { return 3.0 * x * x; };
  CHECK(invert_monotone(fn, df, 0.125, 0.0, 1.0, 1e-15) == Approx(0.5).epsilon(1e-13));
  CHECK(invert_monotone(fn, df, 0.125, 0.0, 1.0, 1e-15, 0.9) == Approx(0.5).epsilon(1e-13));
  CHECK_THROWS_AS(invert_monotone(fn, df, 2.0, 0.0, 1.0, 1e-12), DomainError);
}

TEST_CASE("mc_mean examples", "[quadrature][mc]") {
  RandomStream rng(5);
  const McEstimate one = mc_mean([](double) { return 1.0; }, [](RandomStream &r) { return r.uniform(); }, rng, 1000);
  CHECK(one.mean == 1.0);
  CHECK(one.std_error == 0.0);
  CHECK(one.count == 1000);

  const McEstimate absn =
      mc_mean([](double x) { return std::abs(x); }, [](RandomStream &r) { return r.normal(); }, rng, 10'000'000);
  CHECK(std::abs(absn.mean - std::sqrt(2.0 / std::numbers::pi)) <= 3.0 * absn.std_error);

  const McEstimate indep = mc_mean([](std::pair<double, double> xy) { return std::abs(xy.first * xy.second); },
                                   [](RandomStream &r) { return correlated_pair(r, 0.0); }, rng, 10'000'000);
  CHECK(std::abs(indep.mean - 2.0 / std::numbers::pi) <= 3.0 * indep.std_error);
}

TEST_CASE("RandomStream is reproducible and seeds do not collide", "[random]") {
  RandomStream a(99), b(99);
  for (int i = 0; i < 100; ++i) REQUIRE(a.uniform() == b.uniform());
  CHECK(derive_trial_seed(1, 0) != derive_trial_seed(1, 1));
  CHECK(derive_trial_seed(1, 0) != derive_trial_seed(2, 0));
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
}
