#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "cfsec/conic_solver.hpp"
#include "cfsec/rates.hpp"
#include "cfsec/subproblem.hpp"

namespace cfsec {

struct ScaIterate {
  int index = 0;
  double t = 0.0;              // subproblem optimum (index 0: true objective of the initializer)
  double true_min_gap = 0.0;   // unclamped min_{j,k} R_k - R^e_jk at this allocation
  PowerAllocation alloc;
  double solve_ms = 0.0;
  int newton_steps = 0;
  SolveStatus status = SolveStatus::optimal;
};

struct ScaTrace {
  std::vector<ScaIterate> iterates;
  bool converged = false;
  bool solver_failed = false;
  int iterations_used = 0;
  PowerAllocation final_alloc;
  RateReport final_report;
  double final_t = 0.0;
  std::string diagnostic;

  std::vector<double> t_values() const {
    std::vector<double> out;
    out.reserve(iterates.size());
    for (const auto& it : iterates) out.push_back(it.t);
    return out;
  }
};

/// Successive convex approximation of the max-min secrecy problem.
///
/// Iterate 0 holds the initial allocation with t set to its true objective;
/// that value is attainable in the first subproblem, so the sequence of
/// subproblem optima starts from it. The loop stops once two consecutive
/// optima differ by at most cfg.epsilon, or after cfg.max_iters solves.
/// On a solver failure the trace keeps the last good iterate.
inline ScaTrace run_sca(const PowerAllocation& initial, const ChannelStats& stats, const NetworkRealization& net,
                        double p_t, const ScaConfig& cfg) {
  cfg.validate();
  check_allocation_shape(initial, stats);

  ScaTrace trace;
  PowerAllocation current = initial;
  if (!cfg.enable_an) current.p_v.setZero();

  ScaIterate first;
  first.alloc = current;
  first.true_min_gap = secrecy_report(current, stats, net).min_gap;
  first.t = first.true_min_gap;
  trace.iterates.push_back(first);

  double previous_t = first.t;
  for (int n = 1; n <= cfg.max_iters; ++n) {
    const auto start = std::chrono::steady_clock::now();
    const ConicSubproblem sp = build_subproblem(current, stats, net, p_t, cfg);
    const SubproblemSolution sol = solve_subproblem(sp, cfg);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    if (sol.status == SolveStatus::failed) {
      trace.solver_failed = true;
      trace.diagnostic = "iteration " + std::to_string(n) + ": " + sol.message;
      break;
    }
    current = from_scaled(sol.point.x, stats, p_t);
    if (!cfg.enable_an) current.p_v.setZero();

    ScaIterate it;
    it.index = n;
    it.t = sol.t;
    it.alloc = current;
    it.true_min_gap = secrecy_report(current, stats, net).min_gap;
    it.solve_ms = ms;
    it.newton_steps = sol.newton_steps;
    it.status = sol.status;
    trace.iterates.push_back(it);
    trace.iterations_used = n;

    if (std::abs(sol.t - previous_t) <= cfg.epsilon) {
      trace.converged = true;
      break;
    }
    previous_t = sol.t;
  }

  const ScaIterate& last = trace.iterates.back();
  trace.final_alloc = last.alloc;
  trace.final_t = last.t;
  trace.final_report = secrecy_report(trace.final_alloc, stats, net);
  return trace;
}

}  // namespace cfsec
