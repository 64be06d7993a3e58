#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "lbkde/harness.hpp"

namespace lbkde {

struct OutputConfig {
  std::string directory = "results";
  std::set<std::string> formats = {"json", "csv", "qq"};
};

/// Parsed run configuration file. The on-disk form is a JSON document with
/// the blocks model, kernel, schedule, statistic, experiment, quadrature and
/// output; every key is optional and defaults to the values below.
struct RunConfig {
  ExperimentConfig experiment;
  OutputConfig output;
};

/// Throws ConfigError with the dotted key path ("model.a", "experiment.mode")
/// on unknown keys, wrong types, or values violating a module constraint.
RunConfig parse_run_config(const nlohmann::json &doc);
RunConfig parse_run_config_text(const std::string &text);
/// Throws std::runtime_error when the file cannot be read.
RunConfig load_run_config(const std::string &path);

nlohmann::json to_json(const RunConfig &cfg);

} // namespace lbkde
