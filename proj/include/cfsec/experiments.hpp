#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "cfsec/baselines.hpp"
#include "cfsec/channel.hpp"
#include "cfsec/network.hpp"

namespace cfsec {

// More than the allowed fraction of realizations failed in the solver.
class ExcessiveFailures : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentSpec {
  DeploymentConfig deployment;
  PilotConfig pilots;  // tau_p <= 0 means tau_p = K
  double p_t = 1.0;    // noise-normalized per-AP budget
  ScaConfig sca;
  std::vector<Scheme> schemes{Scheme::an_sca, Scheme::no_an_sca, Scheme::maxmin_rate};
  int num_realizations = 1;
  std::uint64_t master_seed = 1;
  int threads = 1;
  bool record_timing = true;
  double prelog = 1.0;  // multiplies every reported rate
  double max_failure_fraction = 0.05;

  void validate() const {
    deployment.validate();
    sca.validate();
    if (num_realizations < 1) throw ConfigError("num_realizations must be >= 1");
    if (schemes.empty()) throw ConfigError("scheme list must not be empty");
    if (!(p_t > 0.0)) throw ConfigError("p_t must be positive");
    if (!(pilots.p_p > 0.0)) throw ConfigError("pilot power must be positive");
    if (pilots.tau_p > 0 && pilots.tau_p < deployment.num_users) throw ConfigError("tau_p must be >= K");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (!(prelog > 0.0) || prelog > 1.0) throw ConfigError("prelog must be in (0, 1]");
    if (!(max_failure_fraction >= 0.0) || max_failure_fraction > 1.0)
      throw ConfigError("max_failure_fraction must be in [0, 1]");
  }

  PilotConfig resolved_pilots() const {
    PilotConfig p = pilots;
    if (p.tau_p <= 0) p.tau_p = deployment.num_users;
    return p;
  }
};

struct SchemeOutcome {
  int realization = 0;
  Scheme scheme = Scheme::an_sca;
  double min_secrecy = 0.0;
  double min_gap = 0.0;
  double min_user_rate = 0.0;
  int iterations = 0;
  bool converged = false;
  bool failed = false;
  double wall_ms = 0.0;
};

struct CdfPoint {
  double rate = 0.0;
  double probability = 0.0;
};

/// Right-continuous empirical CDF: one point per distinct sample value,
/// probability = fraction of samples <= rate.
inline std::vector<CdfPoint> empirical_cdf(std::vector<double> samples) {
  if (samples.empty()) throw ConfigError("empirical_cdf needs at least one sample");
  std::sort(samples.begin(), samples.end());
  std::vector<CdfPoint> out;
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
    out.push_back({samples[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

inline double cdf_at(const std::vector<CdfPoint>& cdf, double rate) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), rate,
                             [](double r, const CdfPoint& p) { return r < p.rate; });
  if (it == cdf.begin()) return 0.0;
  return std::prev(it)->probability;
}

struct DominanceReport {
  bool holds = true;
  double max_violation = 0.0;  // max_r F_a(r) - F_b(r), floored at 0
  double worst_rate = 0.0;
};

/// Checks F_a(r) <= F_b(r) + slack on the merged support, i.e. that a is
/// stochastically larger than b up to slack.
inline DominanceReport stochastic_dominance_check(const std::vector<CdfPoint>& a, const std::vector<CdfPoint>& b,
                                                  double slack) {
  DominanceReport rep;
  std::vector<double> grid;
  for (const auto& p : a) grid.push_back(p.rate);
  for (const auto& p : b) grid.push_back(p.rate);
  for (double r : grid) {
    const double diff = cdf_at(a, r) - cdf_at(b, r);
    if (diff > rep.max_violation) {
      rep.max_violation = diff;
      rep.worst_rate = r;
    }
  }
  rep.holds = rep.max_violation <= slack;
  return rep;
}

struct SchemeSummary {
  Scheme scheme = Scheme::an_sca;
  int samples = 0;
  int failures = 0;
  double outage = 0.0;  // fraction of samples with zero minimum secrecy rate
  std::vector<CdfPoint> cdf;
};

inline SchemeSummary summarize(Scheme scheme, const std::vector<SchemeOutcome>& outcomes) {
  SchemeSummary s;
  s.scheme = scheme;
  std::vector<double> rates;
  for (const auto& o : outcomes) {
    if (o.scheme != scheme) continue;
    if (o.failed) {
      ++s.failures;
      continue;
    }
    rates.push_back(o.min_secrecy);
  }
  s.samples = static_cast<int>(rates.size());
  if (!rates.empty()) {
    s.cdf = empirical_cdf(rates);
    s.outage = s.cdf.front().rate == 0.0 ? s.cdf.front().probability : 0.0;
  }
  return s;
}

struct ExperimentResult {
  std::vector<SchemeOutcome> outcomes;  // realization-major, schemes in spec order
  std::vector<SchemeSummary> summaries;
  double runtime_s = 0.0;

  const SchemeSummary& summary(Scheme s) const {
    for (const auto& x : summaries)
      if (x.scheme == s) return x;
    throw ConfigError("scheme not part of this experiment: " + std::string(to_string(s)));
  }
};

/// Everything needed to replay one realization.
struct RealizationSetup {
  NetworkRealization net;
  ChannelStats stats;
};

inline RealizationSetup make_realization(const ExperimentSpec& spec, int index) {
  DeploymentConfig dep = spec.deployment;
  dep.seed = derive_seed(spec.master_seed, static_cast<std::uint64_t>(index));
  RealizationSetup r;
  r.net = deploy(dep);
  r.stats = lmmse_stats(r.net, spec.resolved_pilots());
  return r;
}

inline SchemeOutcome evaluate_scheme(const ExperimentSpec& spec, const RealizationSetup& setup, int index,
                                     Scheme scheme) {
  SchemeOutcome o;
  o.realization = index;
  o.scheme = scheme;
  const auto start = std::chrono::steady_clock::now();
  try {
    const ScaTrace trace = run_scheme(scheme, setup.stats, setup.net, spec.p_t, spec.sca);
    o.failed = trace.solver_failed;
    o.iterations = trace.iterations_used;
    o.converged = trace.converged;
    o.min_secrecy = spec.prelog * trace.final_report.min_secrecy;
    o.min_gap = spec.prelog * trace.final_report.min_gap;
    o.min_user_rate = spec.prelog * trace.final_report.min_user_rate;
  } catch (const SolverError&) {
    o.failed = true;
  }
  if (spec.record_timing)
    o.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return o;
}

/// Runs every scheme on num_realizations independent drops. Realization i is
/// seeded with derive_seed(master_seed, i), so results do not depend on the
/// number of worker threads or on scheduling. Failed realizations are counted
/// but the failure rate is not checked; see run_experiment.
inline ExperimentResult run_experiment_unchecked(const ExperimentSpec& spec) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t S = spec.schemes.size();
  std::vector<SchemeOutcome> outcomes(static_cast<std::size_t>(spec.num_realizations) * S);

  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (int i = next++; i < spec.num_realizations; i = next++) {
      try {
        const RealizationSetup setup = make_realization(spec, i);
        for (std::size_t s = 0; s < S; ++s)
          outcomes[static_cast<std::size_t>(i) * S + s] = evaluate_scheme(spec, setup, i, spec.schemes[s]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n_threads = std::min(spec.threads, spec.num_realizations);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  ExperimentResult result;
  result.outcomes = std::move(outcomes);
  for (Scheme s : spec.schemes) result.summaries.push_back(summarize(s, result.outcomes));
  result.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

/// Empty when every scheme stays within the allowed failure fraction.
inline std::string failure_breach(const ExperimentSpec& spec, const ExperimentResult& result) {
  std::string msg;
  for (const auto& sum : result.summaries) {
    if (sum.failures <= spec.max_failure_fraction * spec.num_realizations) continue;
    if (!msg.empty()) msg += "; ";
    msg += std::string(to_string(sum.scheme)) + ": " + std::to_string(sum.failures) + " of " +
           std::to_string(spec.num_realizations) + " realizations failed";
  }
  return msg;
}

/// Like run_experiment_unchecked, but throws ExcessiveFailures when a scheme
/// fails on more than max_failure_fraction of the realizations.
inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  ExperimentResult result = run_experiment_unchecked(spec);
  if (const std::string breach = failure_breach(spec, result); !breach.empty()) throw ExcessiveFailures(breach);
  return result;
}

}  // namespace cfsec
