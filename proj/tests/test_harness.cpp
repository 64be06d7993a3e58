#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lbkde/error.hpp"
#include "lbkde/harness.hpp"

using namespace lbkde;
using Catch::Approx;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.n = 300;
  cfg.trials = 6;
  cfg.master_seed = 17;
  return cfg;
}

} // namespace

TEST_CASE("bandwidth rate conditions", "[harness]") {
  const ConditionReport ok = check_bandwidth_schedule(BandwidthSchedule(0.9, 0.18), 5.0);
  CHECK(ok.all_passed);
  REQUIRE(ok.conditions.size() == 4);
  CHECK(ok.binding.find("1/r") != std::string::npos);

  const ConditionReport r_fail = check_bandwidth_schedule(BandwidthSchedule(0.9, 0.3), 5.0);
  CHECK_FALSE(r_fail.all_passed);
  std::vector<std::string> failed;
  for (const auto &c : r_fail.conditions)
    if (!c.passed) failed.push_back(c.name);
  CHECK(failed == std::vector<std::string>{"n^(-1/r) / h -> 0"});

  const ConditionReport two = check_bandwidth_schedule(BandwidthSchedule(0.9, 0.4), 5.0);
  failed.clear();
  for (const auto &c : two.conditions)
    if (!c.passed) failed.push_back(c.name);
  CHECK(failed == std::vector<std::string>{"log log n / (n h^3) -> 0", "n^(-1/r) / h -> 0"});

  CHECK_THROWS_AS(check_bandwidth_schedule(BandwidthSchedule(0.9, 0.18), 4.0), DomainError);
}

TEST_CASE("KS normality diagnostics", "[harness]") {
  CHECK(ks_normality({0.0}).ks_distance == Approx(0.5).epsilon(1e-15));
  CHECK(ks_normality(std::vector<double>(100, 0.0)).ks_distance == Approx(0.5).epsilon(1e-15));

  for (double z : {-1.3, 0.4, 2.2}) {
    const double phi = standard_normal_cdf(z);
    CHECK(ks_normality({z}).ks_distance == Approx(std::max(phi, 1.0 - phi)).epsilon(1e-14));
  }

  std::vector<double> ideal;
  const int m = 1000;
  for (int i = 1; i <= m; ++i) ideal.push_back(standard_normal_quantile((i - 0.5) / m));
  const NormalityReport r = ks_normality(ideal);
  CHECK(r.ks_distance <= 0.0005 + 1.0 / (2.0 * m));
  CHECK(r.count == 1000);
  CHECK(r.sample_mean == Approx(0.0).margin(1e-12));
  REQUIRE(r.qq_pairs.size() == 99);
  for (std::size_t i = 1; i < r.qq_pairs.size(); ++i) CHECK(r.qq_pairs[i].first > r.qq_pairs[i - 1].first);
  CHECK(r.qq_pairs[49].first == Approx(0.0).margin(1e-15));

  std::vector<double> injected;
  for (int i = 1; i <= 400; ++i) injected.push_back(standard_normal_quantile((i - 0.5) / 400));
  std::reverse(injected.begin(), injected.end());
  CHECK(ks_normality(injected).ks_distance < 0.01);
  CHECK(ks_normality({1.0, 2.0, 3.0}).sample_variance == Approx(1.0));
}

TEST_CASE("normal cdf and quantile", "[harness]") {
  CHECK(standard_normal_cdf(0.0) == 0.5);
  CHECK(standard_normal_cdf(1.959963984540054) == Approx(0.975).epsilon(1e-14));
  CHECK(standard_normal_quantile(0.975) == Approx(1.959963984540054).epsilon(1e-14));
  for (double q : {1e-6, 0.01, 0.3, 0.5, 0.77, 0.999})
    CHECK(standard_normal_cdf(standard_normal_quantile(q)) == Approx(q).epsilon(1e-12));
}

TEST_CASE("trial seeds are collision-free", "[harness][property]") {
  std::vector<std::uint64_t> seeds(1'000'000);
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = derive_trial_seed(20251015, i);
  std::sort(seeds.begin(), seeds.end());
  CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
}

TEST_CASE("trials are reproducible", "[harness]") {
  const ExperimentConfig cfg = small_config();
  const TrialResult a = run_trial(cfg, 3);
  const TrialResult b = run_trial(cfg, 3);
  CHECK(a.seed_used == derive_trial_seed(cfg.master_seed, 3));
  CHECK(a.seed_used == b.seed_used);
  CHECK(a.z_values == b.z_values);
  CHECK(a.i_values == b.i_values);
  CHECK(a.plugin_constants.m_p == b.plugin_constants.m_p);
  CHECK(a.plugin_constants.sigma2_p == b.plugin_constants.sigma2_p);
  CHECK(run_trial(cfg, 4).z_values != a.z_values);
}

TEST_CASE("identity resample gives the centred offset", "[harness]") {
  ExperimentConfig cfg = small_config();
  cfg.force_identity_resample = true;
  const TrialResult t = run_trial(cfg, 0);
  REQUIRE(t.z_values.size() == 1);
  CHECK(t.i_values.front() == 0.0);
  const double expected = -t.plugin_constants.m_p / std::sqrt(t.h * t.plugin_constants.sigma2_p);
  CHECK(t.z_values.front() == Approx(expected).epsilon(1e-14));
}

TEST_CASE("default configuration smoke trial", "[harness]") {
  const ExperimentConfig cfg;
  const TrialResult t = run_trial(cfg, 0);
  REQUIRE(t.z_values.size() == 1);
  CHECK(std::isfinite(t.z_values.front()));
  CHECK(t.warnings.empty());
  CHECK_FALSE(t.degraded);
  CHECK(t.h == Approx(0.9 * std::pow(2000.0, -0.18)));
}

TEST_CASE("original mode uses one statistic per trial", "[harness]") {
  ExperimentConfig cfg = small_config();
  cfg.mode = ExperimentMode::OriginalClt;
  const ExperimentResult r = run_experiment(cfg);
  REQUIRE(r.trials.size() == cfg.trials);
  for (const auto &t : r.trials) {
    CHECK(t.z_values.size() == 1);
    CHECK(t.i_values.size() == 1);
  }
  CHECK(r.true_constants.source == ConstantsSource::TrueDensity);
}

TEST_CASE("several bootstraps per trial are pooled", "[harness]") {
  ExperimentConfig cfg = small_config();
  cfg.bootstraps = 3;
  const ExperimentResult r = run_experiment(cfg);
  for (const auto &t : r.trials) CHECK(t.z_values.size() == 3);
  CHECK(r.pooled_z.size() == 3 * cfg.trials);
  CHECK(r.normality.count == r.pooled_z.size());
  CHECK(r.normality.ks_distance >= 0.0);
  CHECK(r.normality.ks_distance <= 1.0);
}

TEST_CASE("single-trial experiment", "[harness]") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 1;
  const ExperimentResult r = run_experiment(cfg);
  REQUIRE(r.pooled_z.size() == 1);
  const double phi = standard_normal_cdf(r.pooled_z.front());
  CHECK(r.normality.count == 1);
  CHECK(r.normality.ks_distance == Approx(std::max(phi, 1.0 - phi)).epsilon(1e-14));
}

TEST_CASE("results do not depend on the worker count", "[harness][property]") {
  const ExperimentConfig cfg = small_config();
  const ExperimentResult one = run_experiment(cfg, 1);
  const ExperimentResult three = run_experiment(cfg, 3);
  CHECK(one.pooled_z == three.pooled_z);
  for (std::size_t i = 0; i < cfg.trials; ++i) CHECK(one.trials[i].seed_used == three.trials[i].seed_used);
}

TEST_CASE("experiment reports surface audit and scope warnings", "[harness]") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 2;
  cfg.p = 1.0;
  cfg.r_exponent = 6.0;
  const ExperimentResult r = run_experiment(cfg);
  CHECK_FALSE(r.p_within_theorem_scope);
  CHECK_FALSE(r.audit.all_passed());
  CHECK(r.warnings.size() >= 2);
  CHECK(r.pooled_z.size() == 2);
}

TEST_CASE("configuration validation", "[harness][errors]") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.T = 1.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = ExperimentConfig{};
  cfg.trials = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = ExperimentConfig{};
  cfg.bootstraps = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = ExperimentConfig{};
  cfg.r_exponent = 3.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = ExperimentConfig{};
  cfg.kernel = "gaussian";
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  CHECK(parse_mode("bootstrap-clt") == ExperimentMode::BootstrapClt);
  CHECK(to_string(ExperimentMode::OriginalClt) == "original-clt");
  CHECK_THROWS_AS(parse_mode("clt"), DomainError);
}

TEST_CASE("convergence sweep is deterministic", "[harness]") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 3;
  const std::vector<std::size_t> grid = {100, 200, 400};
  const SweepResult a = convergence_sweep(cfg, grid);
  const SweepResult b = convergence_sweep(cfg, grid, 2);
  REQUIRE(a.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.rows[i].n == grid[i]);
    CHECK(a.rows[i].seeds == 3);
    CHECK(a.rows[i].median_sup_error == b.rows[i].median_sup_error);
    CHECK(a.rows[i].median_m_rel_error == b.rows[i].median_m_rel_error);
    CHECK(a.rows[i].ks_distance == b.rows[i].ks_distance);
  }
  CHECK_THROWS_AS(convergence_sweep(cfg, {100, 200}), DomainError);
  CHECK_THROWS_AS(convergence_sweep(cfg, {100, 300, 200}), DomainError);
}
