#include "lbkde/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lbkde/error.hpp"

namespace lbkde {

namespace {

using nlohmann::json;

void dump(const json &value, int indent, std::string &out) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent), ' ');
  switch (value.type()) {
  case json::value_t::object: {
    if (value.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (const auto &[key, item] : value.items()) {
      if (!first) out += ",\n";
      first = false;
      out += pad + json(key).dump() + ": ";
      dump(item, indent + 2, out);
    }
    out += "\n" + close_pad + "}";
    return;
  }
  case json::value_t::array: {
    if (value.empty()) {
      out += "[]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (i) out += ",\n";
      out += pad;
      dump(value[i], indent + 2, out);
    }
    out += "\n" + close_pad + "]";
    return;
  }
  case json::value_t::number_float: {
    const double x = value.get<double>();
    out += std::isfinite(x) ? format_number(x) : "null";
    return;
  }
  default:
    out += value.dump();
  }
}

void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

} // namespace

std::string format_number(double x) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

std::string canonical_json(const json &doc) {
  std::string out;
  dump(doc, 0, out);
  out += "\n";
  return out;
}

json to_json(const AsymptoticConstants &c) {
  return {{"p", c.p},
          {"m_p", c.m_p},
          {"sigma2_p", c.sigma2_p},
          {"sigma1_sq", c.sigma1_sq},
          {"abs_moment", c.abs_moment},
          {"kernel_l2", c.kernel_l2},
          {"source", to_string(c.source)}};
}

json to_json(const ConditionReport &r) {
  json conditions = json::array();
  for (const auto &c : r.conditions)
    conditions.push_back({{"condition", c.name}, {"requirement", c.requirement}, {"passed", c.passed}});
  return {{"gamma", r.gamma}, {"r_exponent", r.r_exponent}, {"conditions", conditions},
          {"binding", r.binding}, {"all_passed", r.all_passed}};
}

json to_json(const AuditReport &r) {
  json verdicts = json::array();
  for (const auto &v : r.verdicts) {
    json quantities = json::array();
    for (const auto &q : v.quantities)
      quantities.push_back({{"label", q.label},
                            {"grid_max", finite_or_null(q.grid_max)},
                            {"exponent_at_zero", finite_or_null(q.exponent_at_zero)},
                            {"exponent_at_tau", finite_or_null(q.exponent_at_tau)},
                            {"bounded", q.bounded}});
    verdicts.push_back({{"assumption", v.assumption}, {"passed", v.passed}, {"quantities", quantities}});
  }
  return {{"r_exponent", r.r_exponent}, {"grid_size", r.grid_size}, {"verdicts", verdicts},
          {"all_passed", r.all_passed()}};
}

json to_json(const NormalityReport &r) {
  json qq = json::array();
  for (const auto &[theoretical, empirical] : r.qq_pairs) qq.push_back({theoretical, empirical});
  return {{"ks_distance", r.ks_distance}, {"sample_mean", r.sample_mean}, {"sample_variance", r.sample_variance},
          {"count", r.count}, {"qq_pairs", qq}};
}

json to_json(const ExperimentResult &r, const OutputConfig &output) {
  RunConfig echo{r.config, output};
  json doc;
  doc["config"] = to_json(echo);
  doc["mode"] = to_string(r.config.mode);
  doc["h"] = r.h;
  doc["true_constants"] = to_json(r.true_constants);
  doc["bandwidth_conditions"] = to_json(r.bandwidth);
  doc["assumption_audit"] = to_json(r.audit);
  doc["p_within_theorem_scope"] = r.p_within_theorem_scope;
  doc["z_values"] = r.pooled_z;
  doc["normality"] = to_json(r.normality);
  doc["warnings"] = r.warnings;
  doc["degraded_trials"] = r.degraded_trials;
  doc["trial_count"] = r.trials.size();
  return doc;
}

json to_json(const SweepResult &r, const OutputConfig &output) {
  RunConfig echo{r.config, output};
  json rows = json::array();
  for (const auto &row : r.rows)
    rows.push_back({{"n", row.n},
                    {"h", row.h},
                    {"seeds", row.seeds},
                    {"median_sup_error", row.median_sup_error},
                    {"median_m_rel_error", row.median_m_rel_error},
                    {"median_sigma2_rel_error", row.median_sigma2_rel_error},
                    {"ks_distance", row.ks_distance}});
  return {{"config", to_json(echo)}, {"mode", "sweep"}, {"true_constants", to_json(r.true_constants)},
          {"rows", rows}, {"warnings", r.warnings}};
}

std::string report_stem(const ExperimentConfig &cfg) {
  return to_string(cfg.mode) + "_seed" + std::to_string(cfg.master_seed);
}

std::vector<std::filesystem::path> emit_report(const ExperimentResult &result, const OutputConfig &output) {
  const std::filesystem::path dir(output.directory);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  const std::string stem = report_stem(result.config);
  std::vector<std::filesystem::path> written;

  if (output.formats.count("json")) {
    written.push_back(dir / (stem + ".json"));
    write_text(written.back(), canonical_json(to_json(result, output)));
  }
  if (output.formats.count("csv")) {
    std::ostringstream csv;
    csv << "trial_index,replicate,seed,z,I,m_hat,sigma2_hat\n";
    for (const TrialResult &t : result.trials) {
      for (std::size_t b = 0; b < t.z_values.size(); ++b) {
        csv << t.trial_index << ',' << b << ',' << t.seed_used << ',' << format_number(t.z_values[b]) << ','
            << format_number(t.i_values[b]) << ',' << format_number(t.plugin_constants.m_p) << ','
            << format_number(t.plugin_constants.sigma2_p) << '\n';
      }
    }
    written.push_back(dir / (stem + "_trials.csv"));
    write_text(written.back(), csv.str());
  }
  if (output.formats.count("qq")) {
    std::ostringstream csv;
    csv << "theoretical,empirical\n";
    for (const auto &[theoretical, empirical] : result.normality.qq_pairs)
      csv << format_number(theoretical) << ',' << format_number(empirical) << '\n';
    written.push_back(dir / (stem + "_qq.csv"));
    write_text(written.back(), csv.str());
  }
  return written;
}

std::vector<std::filesystem::path> emit_sweep_report(const SweepResult &result, const OutputConfig &output) {
  const std::filesystem::path dir(output.directory);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  const std::string stem = "sweep_seed" + std::to_string(result.config.master_seed);
  std::vector<std::filesystem::path> written;
  if (output.formats.count("json")) {
    written.push_back(dir / (stem + ".json"));
    write_text(written.back(), canonical_json(to_json(result, output)));
  }
  if (output.formats.count("csv")) {
    std::ostringstream csv;
    csv << "n,h,seeds,median_sup_error,median_m_rel_error,median_sigma2_rel_error,ks_distance\n";
    for (const auto &row : result.rows)
      csv << row.n << ',' << format_number(row.h) << ',' << row.seeds << ',' << format_number(row.median_sup_error)
          << ',' << format_number(row.median_m_rel_error) << ',' << format_number(row.median_sigma2_rel_error) << ','
          << format_number(row.ks_distance) << '\n';
    written.push_back(dir / (stem + "_rows.csv"));
    write_text(written.back(), csv.str());
  }
  return written;
}

Sample read_sample_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read data file '" + path.string() + "'");
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream is(line.substr(start));
    double y = 0.0;
    std::string rest;
    if (!(is >> y) || (is >> rest))
      throw DomainError(path.string() + ":" + std::to_string(line_no) + ": expected one real number");
    values.push_back(y);
  }
  return Sample(values);
}

void write_sample_file(const std::filesystem::path &path, const Sample &sample) {
  std::ostringstream out;
  for (double y : sample.values()) out << format_number(y) << '\n';
  write_text(path, out.str());
}

} // namespace lbkde
