#include "lbkde/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "lbkde/error.hpp"
#include "lbkde/random.hpp"

namespace lbkde {

namespace {

template <class Body>
void parallel_for(std::size_t count, std::size_t workers, Body body) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto &t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::string trial_prefix(std::size_t index) { return "trial " + std::to_string(index) + ": "; }

QuadratureConfig relaxed(QuadratureConfig cfg) {
  cfg.rel_tol *= 1e3;
  cfg.abs_tol *= 1e3;
  cfg.max_depth += 10;
  return cfg;
}

// Plug-in constants; on non-convergence retry once with looser tolerances.
std::optional<AsymptoticConstants> tolerant_plugin(const EmpiricalEstimator &e, const KernelSpec &k, double h,
                                                   double p, double T, double sigma1_sq, const QuadratureConfig &cfg,
                                                   TrialResult &trial) {
  try {
    return plugin_constants(e, k, h, p, T, sigma1_sq, cfg);
  } catch (const NonConvergence &) {
    trial.warnings.push_back(trial_prefix(trial.trial_index) +
                             "plug-in constants missed tolerance; retried with relaxed quadrature");
    trial.degraded = true;
  }
  try {
    return plugin_constants(e, k, h, p, T, sigma1_sq, relaxed(cfg));
  } catch (const NonConvergence &) {
    trial.warnings.push_back(trial_prefix(trial.trial_index) + "plug-in constants failed; trial skipped");
  }
  return std::nullopt;
}

template <class Compute>
LpStatistic tolerant_statistic(Compute compute, LpStatistic fallback, TrialResult &trial) {
  try {
    return compute();
  } catch (const NonConvergence &err) {
    std::ostringstream os;
    os << trial_prefix(trial.trial_index) << "L_p quadrature missed tolerance (estimate " << err.estimate()
       << ", bound " << err.error_bound() << ")";
    trial.warnings.push_back(os.str());
    trial.degraded = true;
    fallback.value = err.estimate();
    return fallback;
  }
}

void record_z(const LpStatistic &stat, const AsymptoticConstants &consts, TrialResult &trial) {
  trial.i_values.push_back(stat.value);
  try {
    trial.z_values.push_back(normalize_statistic(stat, consts).z);
  } catch (const DegenerateNormalization &err) {
    trial.warnings.push_back(trial_prefix(trial.trial_index) + err.what());
    trial.degraded = true;
    trial.z_values.push_back(std::nan(""));
  }
}

} // namespace

std::string to_string(ExperimentMode mode) {
  switch (mode) {
  case ExperimentMode::OriginalClt:
    return "original-clt";
  case ExperimentMode::BootstrapClt:
    return "bootstrap-clt";
  case ExperimentMode::Sweep:
    break;
  }
  return "sweep";
}

ExperimentMode parse_mode(const std::string &text) {
  if (text == "original-clt") return ExperimentMode::OriginalClt;
  if (text == "bootstrap-clt") return ExperimentMode::BootstrapClt;
  if (text == "sweep") return ExperimentMode::Sweep;
  throw DomainError("unknown mode '" + text + "' (expected original-clt, bootstrap-clt or sweep)");
}

void ExperimentConfig::validate() const {
  if (model.family != "polynomial") throw DomainError("model.family: only 'polynomial' is supported");
  const ModelSpec m = make_polynomial_density(model.a, model.b, model.tau);
  make_window(m, T);
  if (!(r_exponent > 4.0)) throw DomainError("r_exponent must exceed 4");
  kernel_by_name(kernel);
  BandwidthSchedule(schedule.c, schedule.gamma);
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("p must satisfy 1 <= p < infinity");
  if (n < 1) throw DomainError("n must be at least 1");
  if (trials < 1) throw DomainError("trials must be at least 1");
  if (mode == ExperimentMode::BootstrapClt && bootstraps < 1) throw DomainError("bootstraps must be at least 1");
  quadrature.validate();
  if (mode == ExperimentMode::Sweep) {
    if (n_grid.size() < 3) throw DomainError("n_grid needs at least three sizes");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
      if (n_grid[i] <= n_grid[i - 1]) throw DomainError("n_grid must be strictly increasing");
  }
  if (sup_grid < 100) throw DomainError("sup_grid must be at least 100");
}

ConditionReport check_bandwidth_schedule(const BandwidthSchedule &s, double r_exponent) {
  if (!(r_exponent > 4.0)) throw DomainError("check_bandwidth_schedule: r must exceed 4");
  ConditionReport report;
  report.gamma = s.gamma;
  report.r_exponent = r_exponent;
  const double g = s.gamma;
  std::ostringstream r_bound;
  r_bound << "gamma < 1/r = " << 1.0 / r_exponent;
  report.conditions = {
      {"h -> 0", "gamma > 0", g > 0.0},
      {"log log n / (n h^3) -> 0", "gamma < 1/3", g < 1.0 / 3.0},
      {"n^(-1/r) / h -> 0", r_bound.str(), g < 1.0 / r_exponent},
      {"log n / (n h^2) -> 0", "gamma < 1/2", g < 0.5},
  };
  // Tightest of the three upper bounds on gamma.
  const double bounds[] = {1.0 / 3.0, 1.0 / r_exponent, 0.5};
  const std::size_t tightest = static_cast<std::size_t>(std::min_element(std::begin(bounds), std::end(bounds)) - bounds);
  report.binding = report.conditions[tightest + 1].name + " (" + report.conditions[tightest + 1].requirement + ")";
  report.all_passed = std::all_of(report.conditions.begin(), report.conditions.end(),
                                  [](const ConditionReport::Condition &c) { return c.passed; });
  return report;
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double standard_normal_quantile(double q) { return boost::math::quantile(boost::math::normal_distribution<double>(), q); }

NormalityReport ks_normality(std::vector<double> values) {
  if (values.empty()) throw DomainError("ks_normality: empty input");
  std::sort(values.begin(), values.end());
  NormalityReport report;
  const auto m = values.size();
  const double count = static_cast<double>(m);
  report.count = m;
  double distance = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double cdf = standard_normal_cdf(values[i]);
    distance = std::max({distance, static_cast<double>(i + 1) / count - cdf, cdf - static_cast<double>(i) / count});
  }
  report.ks_distance = std::clamp(distance, 0.0, 1.0);

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= count;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  report.sample_mean = mean;
  report.sample_variance = m > 1 ? ss / (count - 1.0) : 0.0;

  report.qq_pairs.reserve(99);
  for (int i = 1; i <= 99; ++i) {
    const double q = i / 100.0;
    // type-7 empirical quantile
    const double pos = q * (count - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, m - 1);
    const double empirical = values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
    report.qq_pairs.emplace_back(standard_normal_quantile(q), empirical);
  }
  return report;
}

Experiment::Experiment(ExperimentConfig cfg)
    : cfg_(std::move(cfg)), model_((cfg_.validate(), make_polynomial_density(cfg_.model.a, cfg_.model.b, cfg_.model.tau))),
      kernel_(kernel_by_name(cfg_.kernel)) {
  sigma1_sq_ = sigma1_squared(kernel_, cfg_.p);
  true_constants_ = asymptotic_constants([this](double t) { return model_.density(t); }, kernel_, cfg_.p, cfg_.T,
                                         ConstantsSource::TrueDensity, sigma1_sq_, {}, cfg_.quadrature);
}

TrialResult Experiment::run_trial(std::size_t trial_index) const {
  return run_trial_seeded(trial_index, derive_trial_seed(cfg_.master_seed, trial_index), cfg_.n);
}

TrialResult Experiment::run_trial_seeded(std::size_t trial_index, std::uint64_t seed, std::size_t n) const {
  TrialResult trial;
  trial.trial_index = trial_index;
  trial.seed_used = seed;
  RandomStream rng(seed);
  const Sample sample = sample_biased(model_, n, rng);
  const EmpiricalEstimator estimator(sample);
  const double h = cfg_.schedule(n);
  trial.h = h;

  const auto plugin = tolerant_plugin(estimator, kernel_, h, cfg_.p, cfg_.T, sigma1_sq_, cfg_.quadrature, trial);
  if (plugin) trial.plugin_constants = *plugin;

  if (cfg_.mode == ExperimentMode::OriginalClt) {
    LpStatistic fallback;
    fallback.p = cfg_.p;
    fallback.T = cfg_.T;
    fallback.n = n;
    fallback.h = h;
    fallback.kind = StatisticKind::Original;
    const LpStatistic stat = tolerant_statistic(
        [&] { return ln_statistic(estimator, kernel_, h, model_, cfg_.p, cfg_.T, cfg_.quadrature); }, fallback, trial);
    record_z(stat, true_constants_, trial);
    return trial;
  }

  if (!plugin) return trial;
  const std::size_t resamples = std::max<std::size_t>(cfg_.bootstraps, 1);
  for (std::size_t b = 0; b < resamples; ++b) {
    const Sample resample = cfg_.force_identity_resample ? sample : bootstrap_resample(sample, rng);
    const EmpiricalEstimator boot(resample);
    LpStatistic fallback;
    fallback.p = cfg_.p;
    fallback.T = cfg_.T;
    fallback.n = n;
    fallback.h = h;
    fallback.kind = StatisticKind::Bootstrap;
    const LpStatistic stat = tolerant_statistic(
        [&] { return lnn_statistic(boot, estimator, kernel_, h, cfg_.p, cfg_.T, cfg_.quadrature); }, fallback, trial);
    record_z(stat, *plugin, trial);
  }
  return trial;
}

void summarize_trials(ExperimentResult &result) {
  result.pooled_z.clear();
  result.degraded_trials = 0;
  std::vector<std::string> warnings;
  for (const TrialResult &t : result.trials) {
    if (t.degraded) ++result.degraded_trials;
    for (double z : t.z_values)
      if (std::isfinite(z)) result.pooled_z.push_back(z);
    warnings.insert(warnings.end(), t.warnings.begin(), t.warnings.end());
  }
  result.warnings.insert(result.warnings.end(), warnings.begin(), warnings.end());
  if (!result.pooled_z.empty()) result.normality = ks_normality(result.pooled_z);
}

ExperimentResult Experiment::run(std::size_t workers) const {
  ExperimentResult result;
  result.config = cfg_;
  result.h = cfg_.schedule(cfg_.n);
  result.true_constants = true_constants_;
  result.bandwidth = check_bandwidth_schedule(cfg_.schedule, cfg_.r_exponent);
  result.audit = audit_assumptions(model_, cfg_.r_exponent, 200);
  result.p_within_theorem_scope = within_theorem_scope(cfg_.p);
  if (!result.bandwidth.all_passed) result.warnings.push_back("bandwidth schedule violates a rate condition");
  if (!result.audit.all_passed()) result.warnings.push_back("model fails the assumption audit");
  if (!result.p_within_theorem_scope) result.warnings.push_back("p outside theorem scope (1 < p < infinity)");

  result.trials.resize(cfg_.trials);
  parallel_for(cfg_.trials, workers, [&](std::size_t i) { result.trials[i] = run_trial(i); });
  summarize_trials(result);
  return result;
}

TrialResult run_trial(const ExperimentConfig &cfg, std::size_t trial_index) {
  return Experiment(cfg).run_trial(trial_index);
}

ExperimentResult run_experiment(const ExperimentConfig &cfg, std::size_t workers) {
  return Experiment(cfg).run(workers);
}

SweepResult convergence_sweep(const ExperimentConfig &cfg, const std::vector<std::size_t> &n_grid,
                              std::size_t workers) {
  if (n_grid.size() < 3) throw DomainError("convergence_sweep: n_grid needs at least three sizes");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1]) throw DomainError("convergence_sweep: n_grid must be strictly increasing");

  ExperimentConfig boot_cfg = cfg;
  boot_cfg.mode = ExperimentMode::BootstrapClt;
  boot_cfg.bootstraps = 1;
  boot_cfg.n_grid = n_grid;
  const Experiment experiment(boot_cfg);
  const AsymptoticConstants &truth = experiment.true_constants();

  SweepResult result;
  result.config = cfg;
  result.true_constants = truth;
  for (std::size_t n : n_grid) {
    const std::size_t seeds = cfg.trials;
    std::vector<double> sup(seeds), m_err(seeds), s_err(seeds), z(seeds);
    std::vector<std::vector<std::string>> warnings(seeds);
    parallel_for(seeds, workers, [&](std::size_t s) {
      const std::uint64_t seed = derive_trial_seed(derive_trial_seed(cfg.master_seed, n), s);
      // sup error uses the trial's own sample: same stream prefix as run_trial_seeded.
      RandomStream rng(seed);
      const EmpiricalEstimator e(sample_biased(experiment.model(), n, rng));
      sup[s] = sup_error(e, experiment.kernel(), cfg.schedule(n), experiment.model(), cfg.T, cfg.sup_grid);
      const TrialResult trial = experiment.run_trial_seeded(s, seed, n);
      m_err[s] = std::abs(trial.plugin_constants.m_p - truth.m_p) / truth.m_p;
      s_err[s] = std::abs(trial.plugin_constants.sigma2_p - truth.sigma2_p) / truth.sigma2_p;
      z[s] = trial.z_values.empty() ? std::nan("") : trial.z_values.front();
      warnings[s] = trial.warnings;
    });
    SweepRow row;
    row.n = n;
    row.h = cfg.schedule(n);
    row.seeds = seeds;
    row.median_sup_error = median(sup);
    row.median_m_rel_error = median(m_err);
    row.median_sigma2_rel_error = median(s_err);
    std::vector<double> finite_z;
    for (double v : z)
      if (std::isfinite(v)) finite_z.push_back(v);
    row.ks_distance = finite_z.empty() ? 1.0 : ks_normality(finite_z).ks_distance;
    result.rows.push_back(row);
    for (auto &w : warnings) result.warnings.insert(result.warnings.end(), w.begin(), w.end());
  }
  return result;
}

std::size_t default_worker_count() {
  if (const char *env = std::getenv("LBKDE_WORKERS")) {
    const long value = std::strtol(env, nullptr, 10);
    if (value > 0) return static_cast<std::size_t>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace lbkde
