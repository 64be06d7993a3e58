#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lbkde/config.hpp"
#include "lbkde/error.hpp"
#include "lbkde/report.hpp"

using namespace lbkde;
using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::size_t line_count(const std::string &text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

std::filesystem::path scratch_dir(const std::string &name) {
  const auto dir = std::filesystem::temp_directory_path() / ("lbkde_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string error_path(const std::string &text) {
  try {
    parse_run_config_text(text);
  } catch (const ConfigError &e) {
    return e.path();
  }
  return "<none>";
}

} // namespace

TEST_CASE("defaults survive a round trip", "[config]") {
  const RunConfig defaults;
  const RunConfig back = parse_run_config(to_json(defaults));
  CHECK(canonical_json(to_json(back)) == canonical_json(to_json(defaults)));
  CHECK(back.experiment.n == 2000);
  CHECK(back.experiment.kernel == "epanechnikov");
  CHECK(back.experiment.mode == ExperimentMode::BootstrapClt);
}

TEST_CASE("parsing a full document", "[config]") {
  const RunConfig cfg = parse_run_config_text(R"({
    "model": {"family": "polynomial", "a": 4, "b": 2.5, "tau": 2.0, "T": 1.5, "r_exponent": 4.5},
    "kernel": {"name": "biweight"},
    "schedule": {"c": 1.1, "gamma": 0.15},
    "statistic": {"p": 3},
    "experiment": {"n": 500, "trials": 20, "bootstraps": 2, "master_seed": 99, "mode": "original-clt",
                   "n_grid": [100, 200, 400], "sup_grid": 256},
    "quadrature": {"abs_tol": 1e-9, "rel_tol": 1e-8, "max_depth": 25, "gh_nodes": 32},
    "output": {"directory": "out", "formats": ["json"]}
  })");
  const ExperimentConfig &e = cfg.experiment;
  CHECK(e.model.a == 4.0);
  CHECK(e.model.tau == 2.0);
  CHECK(e.T == 1.5);
  CHECK(e.r_exponent == 4.5);
  CHECK(e.kernel == "biweight");
  CHECK(e.schedule.gamma == 0.15);
  CHECK(e.p == 3.0);
  CHECK(e.trials == 20);
  CHECK(e.master_seed == 99);
  CHECK(e.mode == ExperimentMode::OriginalClt);
  CHECK(e.n_grid == std::vector<std::size_t>{100, 200, 400});
  CHECK(e.quadrature.gh_nodes == 32);
  CHECK(cfg.output.directory == "out");
  CHECK(cfg.output.formats == std::set<std::string>{"json"});
  CHECK(canonical_json(to_json(parse_run_config(to_json(cfg)))) == canonical_json(to_json(cfg)));
}

TEST_CASE("invalid documents name the offending key", "[config][errors]") {
  CHECK(error_path(R"({"model": {"a": 10, "colour": 1}})") == "model.colour");
  CHECK(error_path(R"({"modle": {}})") == "modle");
  CHECK(error_path(R"({"model": {"a": 0.5}})") == "model.a");
  CHECK(error_path(R"({"model": {"T": 1.2}})") == "model.T");
  CHECK(error_path(R"({"model": {"r_exponent": 4}})") == "model.r_exponent");
  CHECK(error_path(R"({"kernel": {"name": "gaussian"}})") == "kernel.name");
  CHECK(error_path(R"({"schedule": {"gamma": 1.5}})") == "schedule.gamma");
  CHECK(error_path(R"({"statistic": {"p": 0.5}})") == "statistic.p");
  CHECK(error_path(R"({"experiment": {"n": -3}})") == "experiment.n");
  CHECK(error_path(R"({"experiment": {"trials": 2.5}})") == "experiment.trials");
  CHECK(error_path(R"({"experiment": {"mode": "fast"}})") == "experiment.mode");
  CHECK(error_path(R"({"experiment": {"n_grid": [100, 50, 400]}})") == "experiment.n_grid");
  CHECK(error_path(R"({"experiment": {"n_grid": [100, "x", 400]}})") == "experiment.n_grid[1]");
  CHECK(error_path(R"({"quadrature": {"gh_nodes": 15}})") == "quadrature.gh_nodes");
  CHECK(error_path(R"({"output": {"formats": ["json", "xml"]}})") == "output.formats[1]");
  CHECK(error_path(R"({"model": 3})") == "model");
  CHECK(error_path(R"({"model": )") == "<root>");
  CHECK_THROWS_AS(load_run_config("/nonexistent/run.json"), std::runtime_error);
}

TEST_CASE("canonical JSON is stable", "[report]") {
  const json doc = json::parse(R"({"b": 0.1, "a": [1, 2.5, {"z": null, "y": true}], "c": "text"})");
  const std::string text = canonical_json(doc);
  CHECK(text.rfind("{\n  \"a\"", 0) == 0);
  CHECK(text.back() == '\n');
  CHECK(canonical_json(json::parse(text)) == text);
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(2.0) == "2");
  CHECK(canonical_json(json(std::nan(""))) == "null\n");
}

TEST_CASE("experiment reports", "[report]") {
  ExperimentConfig cfg;
  cfg.n = 200;
  cfg.trials = 2;
  cfg.master_seed = 5;
  const ExperimentResult result = run_experiment(cfg);
  OutputConfig out;
  out.directory = scratch_dir("report").string();
  const auto files = emit_report(result, out);
  REQUIRE(files.size() == 3);
  CHECK(files[0].filename() == "bootstrap-clt_seed5.json");
  CHECK(files[1].filename() == "bootstrap-clt_seed5_trials.csv");
  CHECK(files[2].filename() == "bootstrap-clt_seed5_qq.csv");

  const std::string csv = read_file(files[1]);
  CHECK(line_count(csv) == 3);
  CHECK(csv.rfind("trial_index,replicate,seed,z,I,m_hat,sigma2_hat\n", 0) == 0);
  const std::string qq = read_file(files[2]);
  CHECK(line_count(qq) == 100);

  const std::string text = read_file(files[0]);
  CHECK(canonical_json(json::parse(text)) == text);
  const json doc = json::parse(text);
  for (const char *key : {"config", "true_constants", "bandwidth_conditions", "assumption_audit", "normality", "z_values", "warnings",
                          "trial_count", "degraded_trials", "p_within_theorem_scope"})
    CHECK(doc.contains(key));

  // Same mode, same key set.
  cfg.master_seed = 6;
  const json other = to_json(run_experiment(cfg), out);
  std::vector<std::string> k1, k2;
  for (const auto &[k, v] : doc.items()) k1.push_back(k);
  for (const auto &[k, v] : other.items()) k2.push_back(k);
  CHECK(k1 == k2);

  OutputConfig json_only = out;
  json_only.formats = {"json"};
  CHECK(emit_report(result, json_only).size() == 1);
  std::filesystem::remove_all(out.directory);
}

TEST_CASE("sample files", "[report]") {
  const auto dir = scratch_dir("samples");
  std::filesystem::create_directories(dir);
  const Sample s(std::vector<double>{0.25, 1.0 / 3.0, 7.5});
  write_sample_file(dir / "s.txt", s);
  const Sample back = read_sample_file(dir / "s.txt");
  CHECK((back.values() == s.values()).all());

  {
    std::ofstream f(dir / "comments.txt");
    f << "# header\n0.5\n\n  1.5  \n";
  }
  CHECK(read_sample_file(dir / "comments.txt").size() == 2);
  {
    std::ofstream f(dir / "bad.txt");
    f << "0.5\n-1\n";
  }
  CHECK_THROWS_AS(read_sample_file(dir / "bad.txt"), DomainError);
  {
    std::ofstream f(dir / "junk.txt");
    f << "0.5\nabc\n";
  }
  CHECK_THROWS_AS(read_sample_file(dir / "junk.txt"), DomainError);
  CHECK_THROWS_AS(read_sample_file(dir / "missing.txt"), std::runtime_error);
  std::filesystem::remove_all(dir);
}
