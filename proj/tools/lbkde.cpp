// lbkde: command-line front end for the length-biased kernel density tools.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lbkde/config.hpp"
#include "lbkde/error.hpp"
#include "lbkde/estimators.hpp"
#include "lbkde/harness.hpp"
#include "lbkde/models.hpp"
#include "lbkde/report.hpp"
#include "lbkde/statistics.hpp"

namespace {

using namespace lbkde;
using nlohmann::json;

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

// Options shared by the model-level subcommands. Explicit flags override the config file.
struct ModelOptions {
  std::string config_path;
  std::optional<double> a, b, tau, T, r, p, c, gamma;
  std::optional<std::string> kernel;

  void attach(CLI::App *app) {
    app->add_option("--config", config_path, "Run configuration file (JSON)");
    app->add_option("--a", a, "First shape parameter of the polynomial model");
    app->add_option("--b", b, "Second shape parameter");
    app->add_option("--tau", tau, "Right end of the model support");
    app->add_option("--T", T, "Upper end of the evaluation window [0, T]");
    app->add_option("--r", r, "Exponent r of the G(1) assumption (> 4)");
    app->add_option("--p", p, "Order p of the L_p statistic");
    app->add_option("--kernel", kernel, "epanechnikov | biweight | triangular");
    app->add_option("--c", c, "Bandwidth constant c in h = c n^-gamma");
    app->add_option("--gamma", gamma, "Bandwidth exponent gamma");
  }

  RunConfig resolve() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    json doc = to_json(cfg);
    if (a) doc["model"]["a"] = *a;
    if (b) doc["model"]["b"] = *b;
    if (tau) doc["model"]["tau"] = *tau;
    if (T) doc["model"]["T"] = *T;
    if (r) doc["model"]["r_exponent"] = *r;
    if (p) doc["statistic"]["p"] = *p;
    if (kernel) doc["kernel"]["name"] = *kernel;
    if (c) doc["schedule"]["c"] = *c;
    if (gamma) doc["schedule"]["gamma"] = *gamma;
    return parse_run_config(doc);
  }
};

ModelSpec build_model(const ExperimentConfig &e) { return make_polynomial_density(e.model.a, e.model.b, e.model.tau); }

std::size_t resolve_workers(std::size_t requested) {
  std::size_t workers = requested > 0 ? requested : default_worker_count();
  if (const char *env = std::getenv("LBKDE_WORKERS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) workers = std::min(workers, static_cast<std::size_t>(cap));
  }
  return workers;
}

void print_json(const json &doc) { std::cout << canonical_json(doc); }

int cmd_audit(const ModelOptions &opts, std::size_t grid) {
  const RunConfig cfg = opts.resolve();
  const AuditReport report = audit_assumptions(build_model(cfg.experiment), cfg.experiment.r_exponent, grid);
  print_json(to_json(report));
  return 0;
}

int cmd_constants(const ModelOptions &opts) {
  const RunConfig cfg = opts.resolve();
  const ExperimentConfig &e = cfg.experiment;
  const ModelSpec model = build_model(e);
  const KernelSpec kernel = kernel_by_name(e.kernel);
  const AsymptoticConstants c =
      asymptotic_constants([&](double t) { return model.density(t); }, kernel, e.p, e.T);
  json doc = to_json(c);
  doc["T"] = e.T;
  doc["kernel"] = e.kernel;
  doc["p_within_theorem_scope"] = within_theorem_scope(e.p);
  print_json(doc);
  return 0;
}

struct EstimateOptions {
  std::string data;
  std::size_t generate = 0;
  std::uint64_t seed = 1;
  std::string sample_out;
  std::optional<double> h;
  std::size_t grid = 201;
  std::string out;
};

int cmd_estimate(const ModelOptions &opts, const EstimateOptions &est) {
  const RunConfig cfg = opts.resolve();
  const ExperimentConfig &e = cfg.experiment;
  if (est.data.empty() == (est.generate == 0))
    throw DomainError("estimate: give exactly one of --data or --generate");
  if (est.grid < 2) throw DomainError("estimate: --grid must be at least 2");
  const KernelSpec kernel = kernel_by_name(e.kernel);

  std::optional<Sample> sample;
  if (!est.data.empty()) {
    sample = read_sample_file(est.data);
  } else {
    RandomStream rng(est.seed);
    sample = sample_biased(build_model(e), est.generate, rng);
  }
  if (!est.sample_out.empty()) write_sample_file(est.sample_out, *sample);

  const EmpiricalEstimator fit(*sample);
  const double h = est.h.value_or(e.schedule(sample->size()));
  if (!(h > 0.0)) throw DomainError("estimate: bandwidth must be positive");
  const double hi = fit.sorted_values().maxCoeff() + h * kernel.support_radius();

  std::ostringstream csv;
  csv << "t,fn,Fn,Gn\n";
  for (std::size_t i = 0; i < est.grid; ++i) {
    const double t = hi * static_cast<double>(i) / static_cast<double>(est.grid - 1);
    const EmpiricalCdfValue cdf = eval_Fn(fit, t);
    csv << format_number(t) << ',' << format_number(fit.density(kernel, h, t)) << ',' << format_number(cdf.Fn) << ','
        << format_number(cdf.Gn) << '\n';
  }
  if (est.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream file(est.out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open '" + est.out + "' for writing");
    file << csv.str();
  }
  std::cerr << "n = " << sample->size() << ", h = " << format_number(h) << ", v_n = " << format_number(fit.v_n())
            << ", mu_n = " << format_number(fit.mu_n()) << '\n';
  return 0;
}

struct StatisticOptions {
  std::string data;
  std::string resample;
  std::optional<std::uint64_t> bootstrap_seed;
  std::optional<double> h;
};

int cmd_statistic(const ModelOptions &opts, const StatisticOptions &so) {
  const RunConfig cfg = opts.resolve();
  const ExperimentConfig &e = cfg.experiment;
  if (!so.resample.empty() && so.bootstrap_seed) throw DomainError("statistic: --resample and --bootstrap-seed are exclusive");
  const ModelSpec model = build_model(e);
  const KernelSpec kernel = kernel_by_name(e.kernel);
  const Sample sample = read_sample_file(so.data);
  const EmpiricalEstimator fit(sample);
  const double h = so.h.value_or(e.schedule(sample.size()));
  const double s1 = sigma1_squared(kernel, e.p);

  json doc;
  doc["n"] = sample.size();
  doc["h"] = h;
  doc["p"] = e.p;
  doc["T"] = e.T;
  doc["p_within_theorem_scope"] = within_theorem_scope(e.p);

  const AsymptoticConstants truth = asymptotic_constants([&](double t) { return model.density(t); }, kernel, e.p,
                                                         e.T, ConstantsSource::TrueDensity, s1);
  const LpStatistic original = ln_statistic(fit, kernel, h, model, e.p, e.T, e.quadrature);
  doc["original"] = {{"I", original.value}, {"z", normalize_statistic(original, truth).z},
                     {"constants", to_json(truth)}};

  std::optional<Sample> resample;
  if (!so.resample.empty()) {
    resample = read_sample_file(so.resample);
  } else if (so.bootstrap_seed) {
    RandomStream rng(*so.bootstrap_seed);
    resample = bootstrap_resample(sample, rng);
  }
  if (resample) {
    const EmpiricalEstimator boot(*resample);
    const AsymptoticConstants plug = plugin_constants(fit, kernel, h, e.p, e.T, s1, e.quadrature);
    const LpStatistic bs = lnn_statistic(boot, fit, kernel, h, e.p, e.T, e.quadrature);
    doc["bootstrap"] = {{"I", bs.value}, {"z", normalize_statistic(bs, plug).z}, {"constants", to_json(plug)}};
  }
  print_json(doc);
  return 0;
}

int cmd_simulate(const std::string &config_path, std::size_t workers) {
  const RunConfig cfg = load_run_config(config_path);
  if (cfg.experiment.mode == ExperimentMode::Sweep)
    throw ConfigError("experiment.mode", "simulate needs original-clt or bootstrap-clt; use the sweep subcommand");
  const ExperimentResult result = run_experiment(cfg.experiment, resolve_workers(workers));
  const auto files = emit_report(result, cfg.output);
  std::cout << to_string(cfg.experiment.mode) << ": " << result.pooled_z.size() << " z values, KS = "
            << format_number(result.normality.ks_distance) << ", mean = " << format_number(result.normality.sample_mean)
            << ", variance = " << format_number(result.normality.sample_variance) << ", warnings = "
            << result.warnings.size() << '\n';
  for (const auto &f : files) std::cout << "wrote " << f.string() << '\n';
  return 0;
}

int cmd_sweep(const std::string &config_path, std::size_t workers) {
  const RunConfig cfg = load_run_config(config_path);
  const SweepResult result = convergence_sweep(cfg.experiment, cfg.experiment.n_grid, resolve_workers(workers));
  const auto files = emit_sweep_report(result, cfg.output);
  for (const auto &row : result.rows)
    std::cout << "n = " << row.n << ": sup error " << format_number(row.median_sup_error) << ", |m^-m|/m "
              << format_number(row.median_m_rel_error) << ", |s^-s|/s " << format_number(row.median_sigma2_rel_error)
              << ", KS " << format_number(row.ks_distance) << '\n';
  for (const auto &f : files) std::cout << "wrote " << f.string() << '\n';
  return 0;
}

int cmd_check_bandwidth(double c, double gamma, double r) {
  const ConditionReport report = check_bandwidth_schedule(BandwidthSchedule(c, gamma), r);
  print_json(to_json(report));
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Length-biased kernel density estimation and L_p statistics"};
  app.require_subcommand(1);

  ModelOptions audit_opts, constants_opts, estimate_opts, statistic_opts;
  std::size_t audit_grid = 400;
  auto *audit = app.add_subcommand("audit", "Numerical audit of the model assumptions C(1), F(1), G(1)");
  audit_opts.attach(audit);
  audit->add_option("--grid", audit_grid, "Grid points (>= 100)");

  auto *constants = app.add_subcommand("constants", "Print m(p), sigma^2(p), sigma_1^2, E|N|^p and int K^2 as JSON");
  constants_opts.attach(constants);

  EstimateOptions est;
  auto *estimate = app.add_subcommand("estimate", "Fit f_n on a data file (or a generated sample) and emit curve samples");
  estimate_opts.attach(estimate);
  estimate->add_option("--data", est.data, "Input sample: one positive real per line");
  estimate->add_option("--generate", est.generate, "Draw this many observations from the model instead");
  estimate->add_option("--seed", est.seed, "Seed for --generate");
  estimate->add_option("--sample-out", est.sample_out, "Write the sample used to this file");
  estimate->add_option("--bandwidth", est.h, "Bandwidth (default: schedule at n)");
  estimate->add_option("--grid", est.grid, "Number of curve points");
  estimate->add_option("--out", est.out, "CSV output file (default stdout)");

  StatisticOptions so;
  auto *statistic = app.add_subcommand("statistic", "Compute I_n(p) and, with a resample, I_{n,n}(p)");
  statistic_opts.attach(statistic);
  statistic->add_option("--data", so.data, "Input sample file")->required();
  statistic->add_option("--resample", so.resample, "Bootstrap resample file");
  statistic->add_option("--bootstrap-seed", so.bootstrap_seed, "Draw the resample with this seed");
  statistic->add_option("--bandwidth", so.h, "Bandwidth (default: schedule at n)");

  std::string simulate_config, sweep_config;
  std::size_t simulate_workers = 0, sweep_workers = 0;
  auto *simulate = app.add_subcommand("simulate", "Run a Monte Carlo CLT experiment and write its report");
  simulate->add_option("--config", simulate_config, "Run configuration file")->required();
  simulate->add_option("--workers", simulate_workers, "Worker threads (default: all cores, capped by LBKDE_WORKERS)");
  auto *sweep = app.add_subcommand("sweep", "Convergence sweep over experiment.n_grid");
  sweep->add_option("--config", sweep_config, "Run configuration file")->required();
  sweep->add_option("--workers", sweep_workers, "Worker threads");

  double bw_c = 0.9, bw_gamma = 0.18, bw_r = 5.0;
  auto *check = app.add_subcommand("check-bandwidth", "Check h = c n^-gamma against the bandwidth rate conditions");
  check->add_option("--c", bw_c, "Bandwidth constant");
  check->add_option("--gamma", bw_gamma, "Bandwidth exponent");
  check->add_option("--r", bw_r, "Exponent r (> 4)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*audit) return cmd_audit(audit_opts, audit_grid);
    if (*constants) return cmd_constants(constants_opts);
    if (*estimate) return cmd_estimate(estimate_opts, est);
    if (*statistic) return cmd_statistic(statistic_opts, so);
    if (*simulate) return cmd_simulate(simulate_config, simulate_workers);
    if (*sweep) return cmd_sweep(sweep_config, sweep_workers);
    if (*check) return cmd_check_bandwidth(bw_c, bw_gamma, bw_r);
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError &e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}
