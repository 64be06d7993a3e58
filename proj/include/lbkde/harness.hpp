#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lbkde/estimators.hpp"
#include "lbkde/kernels.hpp"
#include "lbkde/models.hpp"
#include "lbkde/quadrature.hpp"
#include "lbkde/statistics.hpp"

namespace lbkde {

enum class ExperimentMode { OriginalClt, BootstrapClt, Sweep };

std::string to_string(ExperimentMode mode);
/// "original-clt" | "bootstrap-clt" | "sweep"
ExperimentMode parse_mode(const std::string &text);

struct ModelParams {
  std::string family = "polynomial";
  double a = 10.0;
  double b = 3.0;
  double tau = 1.0;
};

struct ExperimentConfig {
  ModelParams model;
  double T = 0.9;
  double r_exponent = 5.0;
  std::string kernel = "epanechnikov";
  BandwidthSchedule schedule;
  double p = 2.0;
  std::size_t n = 2000;
  std::size_t trials = 400;
  std::size_t bootstraps = 1;
  std::uint64_t master_seed = 1;
  ExperimentMode mode = ExperimentMode::BootstrapClt;
  QuadratureConfig quadrature = statistics_quadrature();
  std::vector<std::size_t> n_grid = {500, 2000, 8000};
  std::size_t sup_grid = 512;
  /// Test hook: every bootstrap resample equals the original sample.
  bool force_identity_resample = false;

  /// Throws DomainError naming the offending field.
  void validate() const;
};

struct ConditionReport {
  struct Condition {
    std::string name;         // the rate condition, e.g. "n^(-1/r) / h -> 0"
    std::string requirement;  // the equivalent exponent inequality
    bool passed = false;
  };
  double gamma = 0.0;
  double r_exponent = 0.0;
  std::vector<Condition> conditions;
  std::string binding;  // tightest upper bound on gamma
  bool all_passed = false;
};

/// For h(n) = c n^{-gamma}, each bandwidth condition reduces to an exponent
/// inequality: gamma > 0, gamma < 1/3, gamma < 1/r, gamma < 1/2.
ConditionReport check_bandwidth_schedule(const BandwidthSchedule &s, double r_exponent);

struct NormalityReport {
  double ks_distance = 0.0;
  double sample_mean = 0.0;
  double sample_variance = 0.0;
  std::vector<std::pair<double, double>> qq_pairs;  // (theoretical, empirical), 99 rows
  std::size_t count = 0;
};

double standard_normal_cdf(double z);
double standard_normal_quantile(double q);

/// One-sample Kolmogorov-Smirnov distance to N(0, 1) plus moments and QQ data.
NormalityReport ks_normality(std::vector<double> values);

struct TrialResult {
  std::size_t trial_index = 0;
  std::uint64_t seed_used = 0;
  double h = 0.0;
  std::vector<double> z_values;
  std::vector<double> i_values;
  AsymptoticConstants plugin_constants;
  std::vector<std::string> warnings;
  bool degraded = false;
};

struct ExperimentResult {
  ExperimentConfig config;
  double h = 0.0;
  AsymptoticConstants true_constants;
  ConditionReport bandwidth;
  AuditReport audit;
  bool p_within_theorem_scope = true;
  std::vector<TrialResult> trials;
  std::vector<double> pooled_z;
  NormalityReport normality;
  std::vector<std::string> warnings;
  std::size_t degraded_trials = 0;
};

/// Immutable per-experiment state (model tables, kernel, sigma_1^2, true
/// constants) shared read-only by every trial.
class Experiment {
public:
  explicit Experiment(ExperimentConfig cfg);

  const ExperimentConfig &config() const noexcept { return cfg_; }
  const ModelSpec &model() const noexcept { return model_; }
  const KernelSpec &kernel() const noexcept { return kernel_; }
  double sigma1_sq() const noexcept { return sigma1_sq_; }
  const AsymptoticConstants &true_constants() const noexcept { return true_constants_; }

  /// Seed is derive_trial_seed(master_seed, trial_index).
  TrialResult run_trial(std::size_t trial_index) const;
  /// Same computation with an explicit seed and sample size.
  TrialResult run_trial_seeded(std::size_t trial_index, std::uint64_t seed, std::size_t n) const;

  /// Runs all trials on `workers` threads; output does not depend on `workers`.
  ExperimentResult run(std::size_t workers = 1) const;

private:
  ExperimentConfig cfg_;
  ModelSpec model_;
  KernelSpec kernel_;
  double sigma1_sq_ = 0.0;
  AsymptoticConstants true_constants_;
};

TrialResult run_trial(const ExperimentConfig &cfg, std::size_t trial_index);
ExperimentResult run_experiment(const ExperimentConfig &cfg, std::size_t workers = 1);

/// Pools z values of finished trials (in index order) and attaches diagnostics.
void summarize_trials(ExperimentResult &result);

struct SweepRow {
  std::size_t n = 0;
  double h = 0.0;
  std::size_t seeds = 0;
  double median_sup_error = 0.0;
  double median_m_rel_error = 0.0;
  double median_sigma2_rel_error = 0.0;
  double ks_distance = 0.0;  // of bootstrap z over seeds
};

struct SweepResult {
  ExperimentConfig config;
  AsymptoticConstants true_constants;
  std::vector<SweepRow> rows;
  std::vector<std::string> warnings;
};

/// For each n in n_grid (strictly increasing, length >= 3) and cfg.trials
/// seeds: medians of sup |f_n - f|, |m^ - m|/m, |sigma^2^ - sigma^2|/sigma^2
/// and the KS distance of the bootstrap z values. Seed of (n, s) is
/// derive_trial_seed(derive_trial_seed(master_seed, n), s).
SweepResult convergence_sweep(const ExperimentConfig &cfg, const std::vector<std::size_t> &n_grid,
                              std::size_t workers = 1);

/// Worker count from LBKDE_WORKERS (if set and positive), else hardware concurrency.
std::size_t default_worker_count();

} // namespace lbkde
