#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cfsec/rates.hpp"
#include "cfsec/sca.hpp"

namespace cfsec {

/// Distance-aware heuristic split of each AP's budget between data and AN:
/// AP m weights user k by sqrt(gamma_mk) and reserves the Eve share
/// sum_j sqrt(beta^e_mj) for AN. With include_eves = false the Eve terms are
/// dropped and the whole budget goes to data. Every AP budget is saturated.
inline PowerAllocation heuristic_init(const ChannelStats& stats, const NetworkRealization& net, double p_t,
                                      bool include_eves = true) {
  if (!(p_t > 0.0)) throw ConfigError("power budget must be positive");
  const Eigen::Index M = stats.gamma.rows();
  const Eigen::Index K = stats.gamma.cols();
  if ((stats.gamma.array() <= 0.0).any()) throw DomainError("heuristic_init needs gamma > 0 on every link");

  PowerAllocation alloc = PowerAllocation::zeros(M, K);
  for (Eigen::Index m = 0; m < M; ++m) {
    const double users = stats.gamma.row(m).cwiseSqrt().sum();
    const double eves = include_eves && net.beta_eve.cols() > 0 ? net.beta_eve.row(m).cwiseSqrt().sum() : 0.0;
    const double denom = users + eves;
    for (Eigen::Index k = 0; k < K; ++k) alloc.p(m, k) = p_t / (std::sqrt(stats.gamma(m, k)) * denom);
    alloc.p_v(m) = p_t * eves / denom;
  }
  return alloc;
}

enum class Scheme { an_sca, no_an_sca, maxmin_rate, heuristic_only };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::an_sca: return "an_sca";
    case Scheme::no_an_sca: return "no_an_sca";
    case Scheme::maxmin_rate: return "maxmin_rate";
    case Scheme::heuristic_only: return "heuristic_only";
  }
  return "unknown";
}

inline Scheme parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::an_sca, Scheme::no_an_sca, Scheme::maxmin_rate, Scheme::heuristic_only})
    if (to_string(s) == name) return s;
  throw ConfigError("unknown scheme: " + std::string(name));
}

/// Proposed scheme: heuristic AN-aware start, SCA over data and AN powers.
inline ScaTrace run_an_sca(const ChannelStats& stats, const NetworkRealization& net, double p_t, ScaConfig cfg) {
  cfg.enable_an = true;
  return run_sca(heuristic_init(stats, net, p_t, true), stats, net, p_t, cfg);
}

/// Proposed scheme restricted to p_v = 0.
inline ScaTrace run_no_an(const ChannelStats& stats, const NetworkRealization& net, double p_t, ScaConfig cfg) {
  cfg.enable_an = false;
  return run_sca(heuristic_init(stats, net, p_t, false), stats, net, p_t, cfg);
}

/// Security-oblivious max-min user rate. The optimization ignores the Eves;
/// the final report is then evaluated against the real deployment.
inline ScaTrace run_maxmin_rate(const ChannelStats& stats, const NetworkRealization& net, double p_t,
                                ScaConfig cfg) {
  cfg.enable_an = false;
  const NetworkRealization blind = without_eves(net);
  ScaTrace trace = run_sca(heuristic_init(stats, blind, p_t, false), stats, blind, p_t, cfg);
  trace.final_report = secrecy_report(trace.final_alloc, stats, net);
  return trace;
}

/// Heuristic allocation alone, wrapped as a zero-iteration trace.
inline ScaTrace run_heuristic_only(const ChannelStats& stats, const NetworkRealization& net, double p_t) {
  ScaTrace trace;
  ScaIterate it;
  it.alloc = heuristic_init(stats, net, p_t, true);
  it.true_min_gap = secrecy_report(it.alloc, stats, net).min_gap;
  it.t = it.true_min_gap;
  trace.iterates.push_back(it);
  trace.converged = true;
  trace.final_alloc = it.alloc;
  trace.final_t = it.t;
  trace.final_report = secrecy_report(it.alloc, stats, net);
  return trace;
}

inline ScaTrace run_scheme(Scheme scheme, const ChannelStats& stats, const NetworkRealization& net, double p_t,
                           const ScaConfig& cfg) {
  switch (scheme) {
    case Scheme::an_sca: return run_an_sca(stats, net, p_t, cfg);
    case Scheme::no_an_sca: return run_no_an(stats, net, p_t, cfg);
    case Scheme::maxmin_rate: return run_maxmin_rate(stats, net, p_t, cfg);
    case Scheme::heuristic_only: return run_heuristic_only(stats, net, p_t);
  }
  throw ConfigError("unknown scheme");
}

}  // namespace cfsec
