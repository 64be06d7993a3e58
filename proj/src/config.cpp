#include "lbkde/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "lbkde/error.hpp"

namespace lbkde {

namespace {

using nlohmann::json;

std::string join(const std::string &prefix, const std::string &key) {
  return prefix.empty() ? key : prefix + "." + key;
}

double as_number(const json &v, const std::string &path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

std::uint64_t as_count(const json &v, const std::string &path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw ConfigError(path, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::string as_string(const json &v, const std::string &path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

// Visits every key of `block`, rejecting any without a handler.
void visit_block(const json &doc, const std::string &block,
                 const std::map<std::string, std::function<void(const json &, const std::string &)>> &handlers) {
  if (!doc.contains(block)) return;
  const json &obj = doc.at(block);
  if (!obj.is_object()) throw ConfigError(block, "expected a block of key/value pairs");
  for (const auto &[key, value] : obj.items()) {
    const std::string path = join(block, key);
    const auto it = handlers.find(key);
    if (it == handlers.end()) throw ConfigError(path, "unknown key");
    it->second(value, path);
  }
}

void require(bool ok, const std::string &path, const std::string &message) {
  if (!ok) throw ConfigError(path, message);
}

} // namespace

RunConfig parse_run_config(const json &doc) {
  if (!doc.is_object()) throw ConfigError("<root>", "expected a document of blocks");
  static const std::set<std::string> blocks = {"model", "kernel", "schedule", "statistic",
                                               "experiment", "quadrature", "output"};
  for (const auto &[key, value] : doc.items())
    if (!blocks.count(key)) throw ConfigError(key, "unknown block");

  RunConfig cfg;
  ExperimentConfig &e = cfg.experiment;

  visit_block(doc, "model", {
      {"family", [&](const json &v, const std::string &p) {
         e.model.family = as_string(v, p);
         require(e.model.family == "polynomial", p, "only 'polynomial' is supported");
       }},
      {"a", [&](const json &v, const std::string &p) { e.model.a = as_number(v, p); require(e.model.a >= 1.0, p, "must be >= 1"); }},
      {"b", [&](const json &v, const std::string &p) { e.model.b = as_number(v, p); require(e.model.b >= 1.0, p, "must be >= 1"); }},
      {"tau", [&](const json &v, const std::string &p) { e.model.tau = as_number(v, p); require(e.model.tau > 0.0, p, "must be positive"); }},
      {"T", [&](const json &v, const std::string &p) { e.T = as_number(v, p); require(e.T > 0.0, p, "must be positive"); }},
      {"r_exponent", [&](const json &v, const std::string &p) { e.r_exponent = as_number(v, p); require(e.r_exponent > 4.0, p, "must exceed 4"); }},
  });
  require(e.T < e.model.tau, "model.T", "must be smaller than model.tau");

  visit_block(doc, "kernel", {
      {"name", [&](const json &v, const std::string &p) {
         e.kernel = as_string(v, p);
         try {
           kernel_by_name(e.kernel);
         } catch (const DomainError &err) {
           throw ConfigError(p, err.what());
         }
       }},
  });

  visit_block(doc, "schedule", {
      {"c", [&](const json &v, const std::string &p) { e.schedule.c = as_number(v, p); require(e.schedule.c > 0.0, p, "must be positive"); }},
      {"gamma", [&](const json &v, const std::string &p) {
         e.schedule.gamma = as_number(v, p);
         require(e.schedule.gamma > 0.0 && e.schedule.gamma < 1.0, p, "must lie in (0, 1)");
       }},
  });

  visit_block(doc, "statistic", {
      {"p", [&](const json &v, const std::string &p) { e.p = as_number(v, p); require(e.p >= 1.0 && std::isfinite(e.p), p, "must satisfy 1 <= p < infinity"); }},
  });

  visit_block(doc, "experiment", {
      {"n", [&](const json &v, const std::string &p) { e.n = as_count(v, p); require(e.n >= 1, p, "must be at least 1"); }},
      {"trials", [&](const json &v, const std::string &p) { e.trials = as_count(v, p); require(e.trials >= 1, p, "must be at least 1"); }},
      {"bootstraps", [&](const json &v, const std::string &p) { e.bootstraps = as_count(v, p); require(e.bootstraps >= 1, p, "must be at least 1"); }},
      {"master_seed", [&](const json &v, const std::string &p) { e.master_seed = as_count(v, p); }},
      {"mode", [&](const json &v, const std::string &p) {
         try {
           e.mode = parse_mode(as_string(v, p));
         } catch (const DomainError &err) {
           throw ConfigError(p, err.what());
         }
       }},
      {"n_grid", [&](const json &v, const std::string &p) {
         if (!v.is_array()) throw ConfigError(p, "expected a list of sample sizes");
         e.n_grid.clear();
         for (std::size_t i = 0; i < v.size(); ++i) e.n_grid.push_back(as_count(v[i], p + "[" + std::to_string(i) + "]"));
         require(e.n_grid.size() >= 3, p, "needs at least three sizes");
         for (std::size_t i = 1; i < e.n_grid.size(); ++i)
           require(e.n_grid[i] > e.n_grid[i - 1], p, "must be strictly increasing");
       }},
      {"sup_grid", [&](const json &v, const std::string &p) { e.sup_grid = as_count(v, p); require(e.sup_grid >= 100, p, "must be at least 100"); }},
  });

  visit_block(doc, "quadrature", {
      {"abs_tol", [&](const json &v, const std::string &p) { e.quadrature.abs_tol = as_number(v, p); require(e.quadrature.abs_tol > 0.0, p, "must be positive"); }},
      {"rel_tol", [&](const json &v, const std::string &p) { e.quadrature.rel_tol = as_number(v, p); require(e.quadrature.rel_tol >= 0.0, p, "must be nonnegative"); }},
      {"max_depth", [&](const json &v, const std::string &p) { e.quadrature.max_depth = static_cast<int>(as_count(v, p)); require(e.quadrature.max_depth >= 1, p, "must be at least 1"); }},
      {"gh_nodes", [&](const json &v, const std::string &p) {
         e.quadrature.gh_nodes = static_cast<int>(as_count(v, p));
         require(e.quadrature.gh_nodes >= 16 && e.quadrature.gh_nodes % 2 == 0, p, "must be even and at least 16");
       }},
  });

  visit_block(doc, "output", {
      {"directory", [&](const json &v, const std::string &p) { cfg.output.directory = as_string(v, p); require(!cfg.output.directory.empty(), p, "must not be empty"); }},
      {"formats", [&](const json &v, const std::string &p) {
         if (!v.is_array()) throw ConfigError(p, "expected a list of formats");
         cfg.output.formats.clear();
         for (std::size_t i = 0; i < v.size(); ++i) {
           const std::string item_path = p + "[" + std::to_string(i) + "]";
           const std::string f = as_string(v[i], item_path);
           require(f == "json" || f == "csv" || f == "qq", item_path, "expected json, csv or qq");
           cfg.output.formats.insert(f);
         }
       }},
  });

  // Cross-field constraints owned by the modules.
  try {
    e.validate();
  } catch (const DomainError &err) {
    throw ConfigError("<root>", err.what());
  }
  return cfg;
}

RunConfig parse_run_config_text(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &err) {
    throw ConfigError("<root>", std::string("malformed document: ") + err.what());
  }
  return parse_run_config(doc);
}

RunConfig load_run_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config_text(text.str());
}

json to_json(const RunConfig &cfg) {
  const ExperimentConfig &e = cfg.experiment;
  json doc;
  doc["model"] = {{"family", e.model.family}, {"a", e.model.a}, {"b", e.model.b}, {"tau", e.model.tau},
                  {"T", e.T}, {"r_exponent", e.r_exponent}};
  doc["kernel"] = {{"name", e.kernel}};
  doc["schedule"] = {{"c", e.schedule.c}, {"gamma", e.schedule.gamma}};
  doc["statistic"] = {{"p", e.p}};
  doc["experiment"] = {{"n", e.n},
                       {"trials", e.trials},
                       {"bootstraps", e.bootstraps},
                       {"master_seed", e.master_seed},
                       {"mode", to_string(e.mode)},
                       {"n_grid", e.n_grid},
                       {"sup_grid", e.sup_grid}};
  doc["quadrature"] = {{"abs_tol", e.quadrature.abs_tol},
                       {"rel_tol", e.quadrature.rel_tol},
                       {"max_depth", e.quadrature.max_depth},
                       {"gh_nodes", e.quadrature.gh_nodes}};
  doc["output"] = {{"directory", cfg.output.directory}, {"formats", cfg.output.formats}};
  return doc;
}

} // namespace lbkde
