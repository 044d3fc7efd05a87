#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cfsec/experiments.hpp"
#include "json.hpp"

namespace cfsec {

/// Flat run configuration in physical units. Defaults follow the simulation
/// table: 100 mW per AP, 200 mW pilots, -94 dBm noise, tau_c = 200, tau_p = K.
struct RunConfig {
  // deployment
  int num_aps = 100;
  int num_users = 2;
  int num_eves = 1;
  double area_side_m = 1000.0;
  double carrier_freq_mhz = 1900.0;
  double ap_height_m = 15.0;
  double user_height_m = 1.65;
  double d0_m = 10.0;
  double d1_m = 50.0;
  bool shadowing_enabled = false;
  double shadowing_sigma_db = 8.0;
  // powers and coherence interval
  double p_t_mw = 100.0;
  double p_p_mw = 200.0;
  double noise_dbm = -94.0;
  int tau_c = 200;
  int tau_p = 0;  // 0 means tau_p = K
  bool apply_prelog = false;
  // optimizer
  double epsilon = 0.01;
  int max_iters = 50;
  double solver_tol = 1e-8;
  bool enable_an = true;
  std::string leakage_model = "convex_bound";
  // experiment
  std::vector<std::string> schemes{"an_sca", "no_an_sca", "maxmin_rate"};
  int realizations = 100;
  std::uint64_t seed = 1;
  int threads = 1;
  bool record_timing = true;
  double max_failure_fraction = 0.05;
  std::string out_dir = "out";

  int resolved_tau_p() const { return tau_p > 0 ? tau_p : num_users; }
  int tau_d() const { return tau_c - resolved_tau_p(); }

  void validate() const {
    if (!(p_t_mw > 0.0) || !(p_p_mw > 0.0)) throw ConfigError("powers must be positive");
    if (!std::isfinite(noise_dbm)) throw ConfigError("noise_dbm must be finite");
    if (tau_p < 0) throw ConfigError("tau_p must be >= 0 (0 selects tau_p = K)");
    if (tau_c < 1) throw ConfigError("tau_c must be >= 1");
    if (tau_d() < 1) throw ConfigError("tau_p + tau_d must fit in tau_c with tau_d >= 1");
    if (!(carrier_freq_mhz > 0.0)) throw ConfigError("carrier_freq_mhz must be positive");
    if (leakage_model != "convex_bound" && leakage_model != "taylor")
      throw ConfigError("leakage_model must be convex_bound or taylor");
    for (const auto& s : schemes) parse_scheme(s);
    if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
  }
};

/// Power in mW over the noise power, both converted to watts.
inline double normalize_power(double p_mw, double noise_dbm) {
  const double noise_w = std::pow(10.0, (noise_dbm - 30.0) / 10.0);
  return (p_mw / 1000.0) / noise_w;
}

struct NormalizedPowers {
  double p_t = 0.0;
  double p_p = 0.0;
};

inline NormalizedPowers normalize_powers(const RunConfig& cfg) {
  return {normalize_power(cfg.p_t_mw, cfg.noise_dbm), normalize_power(cfg.p_p_mw, cfg.noise_dbm)};
}

inline ExperimentSpec to_experiment_spec(const RunConfig& cfg) {
  cfg.validate();
  ExperimentSpec spec;
  auto& d = spec.deployment;
  d.num_aps = cfg.num_aps;
  d.num_users = cfg.num_users;
  d.num_eves = cfg.num_eves;
  d.area_side_m = cfg.area_side_m;
  d.carrier_freq_hz = cfg.carrier_freq_mhz * 1e6;
  d.ap_height_m = cfg.ap_height_m;
  d.user_height_m = cfg.user_height_m;
  d.ref_dist_d0_m = cfg.d0_m;
  d.ref_dist_d1_m = cfg.d1_m;
  d.shadowing_enabled = cfg.shadowing_enabled;
  d.shadowing_sigma_db = cfg.shadowing_sigma_db;
  d.seed = cfg.seed;

  const NormalizedPowers pw = normalize_powers(cfg);
  spec.p_t = pw.p_t;
  spec.pilots.tau_p = cfg.resolved_tau_p();
  spec.pilots.p_p = pw.p_p;

  spec.sca.epsilon = cfg.epsilon;
  spec.sca.max_iters = cfg.max_iters;
  spec.sca.solver_tol = cfg.solver_tol;
  spec.sca.enable_an = cfg.enable_an;
  spec.sca.leakage_model = cfg.leakage_model == "taylor" ? LeakageModel::taylor : LeakageModel::convex_bound;

  spec.schemes.clear();
  for (const auto& s : cfg.schemes) {
    Scheme sc = parse_scheme(s);
    // --no-an turns the proposed scheme into its AN-free variant
    if (!cfg.enable_an && sc == Scheme::an_sca) sc = Scheme::no_an_sca;
    if (std::find(spec.schemes.begin(), spec.schemes.end(), sc) == spec.schemes.end()) spec.schemes.push_back(sc);
  }
  spec.num_realizations = cfg.realizations;
  spec.master_seed = cfg.seed;
  spec.threads = cfg.threads;
  spec.record_timing = cfg.record_timing;
  spec.prelog = cfg.apply_prelog ? static_cast<double>(cfg.tau_d()) / cfg.tau_c : 1.0;
  spec.max_failure_fraction = cfg.max_failure_fraction;
  spec.validate();
  return spec;
}

#define CFSEC_CONFIG_FIELDS(X)                                                                               \
  X(num_aps) X(num_users) X(num_eves) X(area_side_m) X(carrier_freq_mhz) X(ap_height_m) X(user_height_m)     \
  X(d0_m) X(d1_m) X(shadowing_enabled) X(shadowing_sigma_db) X(p_t_mw) X(p_p_mw) X(noise_dbm) X(tau_c)       \
  X(tau_p) X(apply_prelog) X(epsilon) X(max_iters) X(solver_tol) X(enable_an) X(leakage_model) X(schemes)    \
  X(realizations) X(seed) X(threads) X(record_timing) X(max_failure_fraction) X(out_dir)

inline nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
#define X(name) j[#name] = cfg.name;
  CFSEC_CONFIG_FIELDS(X)
#undef X
  return j;
}

/// Missing keys keep their defaults; unknown keys and type mismatches are
/// configuration errors.
inline RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig cfg;
  std::set<std::string> known;
#define X(name) known.insert(#name);
  CFSEC_CONFIG_FIELDS(X)
#undef X
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config key: " + key);
  try {
#define X(name) \
  if (j.contains(#name)) j.at(#name).get_to(cfg.name);
    CFSEC_CONFIG_FIELDS(X)
#undef X
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return cfg;
}

#undef CFSEC_CONFIG_FIELDS

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse config file " + path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace cfsec
