#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cfsec/config.hpp"
#include "cfsec/experiments.hpp"
#include "cfsec/sca.hpp"
#include "json.hpp"

namespace cfsec {

inline constexpr const char* kResultsHeader =
    "realization_id,scheme,min_secrecy_bits,min_user_rate_bits,iterations,converged,wall_ms";

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// One row per realization and scheme. Failed realizations carry "nan" rates.
inline std::string results_csv(const std::vector<SchemeOutcome>& outcomes) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& o : outcomes) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out += std::to_string(o.realization) + "," + std::string(to_string(o.scheme)) + "," +
           format_double(o.failed ? nan : o.min_secrecy) + "," + format_double(o.failed ? nan : o.min_user_rate) +
           "," + std::to_string(o.iterations) + "," + (o.converged ? "1" : "0") + "," + format_double(o.wall_ms) +
           "\n";
  }
  return out;
}

inline std::vector<SchemeOutcome> parse_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) throw ConfigError("results.csv: unexpected header");
  std::vector<SchemeOutcome> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 7) throw ConfigError("results.csv line " + std::to_string(line_no) + ": expected 7 fields");
    try {
      SchemeOutcome o;
      o.realization = std::stoi(cells[0]);
      o.scheme = parse_scheme(cells[1]);
      o.min_secrecy = std::stod(cells[2]);
      o.min_user_rate = std::stod(cells[3]);
      o.iterations = std::stoi(cells[4]);
      o.converged = cells[5] == "1";
      o.wall_ms = std::stod(cells[6]);
      o.failed = std::isnan(o.min_secrecy);
      out.push_back(o);
    } catch (const std::logic_error& e) {
      throw ConfigError("results.csv line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<SchemeOutcome> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return parse_results_csv(in);
}

inline nlohmann::json to_json(const SchemeSummary& s) {
  nlohmann::json cdf = nlohmann::json::array();
  for (const auto& p : s.cdf) cdf.push_back({p.rate, p.probability});
  return {{"scheme", std::string(to_string(s.scheme))},
          {"samples", s.samples},
          {"failures", s.failures},
          {"outage", s.outage},
          {"cdf", cdf}};
}

/// Per-scheme summaries rebuilt from stored outcomes, in first-seen scheme order.
inline std::vector<SchemeSummary> summaries_from_outcomes(const std::vector<SchemeOutcome>& outcomes) {
  std::vector<Scheme> order;
  for (const auto& o : outcomes)
    if (std::find(order.begin(), order.end(), o.scheme) == order.end()) order.push_back(o.scheme);
  std::vector<SchemeSummary> out;
  for (Scheme s : order) out.push_back(summarize(s, outcomes));
  return out;
}

inline nlohmann::json summary_json(const RunConfig& cfg, const ExperimentSpec& spec, const ExperimentResult& result) {
  nlohmann::json schemes = nlohmann::json::array();
  for (const auto& s : result.summaries) schemes.push_back(to_json(s));
  nlohmann::json j;
  j["config"] = to_json(cfg);
  j["derived"] = {{"p_t_normalized", spec.p_t},
                  {"p_p_normalized", spec.pilots.p_p},
                  {"tau_p", spec.pilots.tau_p},
                  {"tau_d", cfg.tau_d()},
                  {"prelog", spec.prelog}};
  j["schemes"] = schemes;
  j["runtime_s"] = spec.record_timing ? result.runtime_s : 0.0;
  return j;
}

inline nlohmann::json to_json(const PowerAllocation& a) {
  nlohmann::json p = nlohmann::json::array();
  for (Eigen::Index m = 0; m < a.p.rows(); ++m) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < a.p.cols(); ++k) row.push_back(a.p(m, k));
    p.push_back(row);
  }
  nlohmann::json pv = nlohmann::json::array();
  for (Eigen::Index m = 0; m < a.p_v.size(); ++m) pv.push_back(a.p_v(m));
  return {{"p", p}, {"p_v", pv}};
}

inline nlohmann::json to_json(const ScaTrace& trace, bool include_allocations = false) {
  nlohmann::json iters = nlohmann::json::array();
  for (const auto& it : trace.iterates) {
    nlohmann::json x = {{"index", it.index},
                        {"t", it.t},
                        {"true_min_gap", it.true_min_gap},
                        {"newton_steps", it.newton_steps},
                        {"status", std::string(to_string(it.status))},
                        {"solve_ms", it.solve_ms}};
    if (include_allocations) x["allocation"] = to_json(it.alloc);
    iters.push_back(x);
  }
  const RateReport& r = trace.final_report;
  nlohmann::json user_rate = nlohmann::json::array();
  for (Eigen::Index k = 0; k < r.user_rate.size(); ++k) user_rate.push_back(r.user_rate(k));
  return {{"converged", trace.converged},
          {"solver_failed", trace.solver_failed},
          {"iterations", trace.iterations_used},
          {"diagnostic", trace.diagnostic},
          {"t", trace.t_values()},
          {"iterates", iters},
          {"final",
           {{"min_secrecy_bits", r.min_secrecy},
            {"min_gap_bits", r.min_gap},
            {"min_user_rate_bits", r.min_user_rate},
            {"user_rate_bits", user_rate},
            {"allocation", to_json(trace.final_alloc)}}}};
}

/// Writes to a sibling temporary file and renames it into place, so readers
/// never see a half-written file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace cfsec
