#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lbkde/config.hpp"
#include "lbkde/harness.hpp"
#include "lbkde/sample.hpp"

namespace lbkde {

/// Pretty-printed JSON with sorted keys and every floating-point number
/// written with 17 significant digits; non-finite numbers become null.
/// Parsing the output and dumping it again reproduces it byte for byte.
std::string canonical_json(const nlohmann::json &doc);

/// "%.17g"
std::string format_number(double x);

nlohmann::json to_json(const AsymptoticConstants &c);
nlohmann::json to_json(const ConditionReport &r);
nlohmann::json to_json(const AuditReport &r);
nlohmann::json to_json(const NormalityReport &r);
nlohmann::json to_json(const ExperimentResult &r, const OutputConfig &output);
nlohmann::json to_json(const SweepResult &r, const OutputConfig &output);

/// Base name shared by all files of one run: "<mode>_seed<master_seed>".
std::string report_stem(const ExperimentConfig &cfg);

/// Writes under `output.directory` (created if needed), for each requested format:
///   json -> <stem>.json         config echo, pooled z, normality report, warnings
///   csv  -> <stem>_trials.csv   trial_index,replicate,seed,z,I,m_hat,sigma2_hat
///   qq   -> <stem>_qq.csv       theoretical,empirical (99 rows)
/// Returns the written paths. Throws std::runtime_error on I/O failure.
std::vector<std::filesystem::path> emit_report(const ExperimentResult &result, const OutputConfig &output);

/// json -> <stem>.json, csv -> <stem>_rows.csv.
std::vector<std::filesystem::path> emit_sweep_report(const SweepResult &result, const OutputConfig &output);

/// One positive real per line; blank lines and lines starting with '#' are skipped.
/// Missing file -> std::runtime_error; bad values -> DomainError.
Sample read_sample_file(const std::filesystem::path &path);
void write_sample_file(const std::filesystem::path &path, const Sample &sample);

} // namespace lbkde
