// cfsec: secure power control experiments for cell-free massive MIMO.
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "cfsec/config.hpp"
#include "cfsec/experiments.hpp"
#include "cfsec/io.hpp"
#include "cfsec/montecarlo.hpp"

namespace fs = std::filesystem;
using namespace cfsec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;

struct Overrides {
  std::string config_path;
  std::optional<int> M, K, J, realizations, threads;
  std::optional<std::string> scheme, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
  bool no_an = false;
  bool no_timing = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "flat JSON config file");
    app->add_option("--M", M, "number of APs");
    app->add_option("--K", K, "number of users");
    app->add_option("--J", J, "number of eavesdroppers");
    app->add_option("--realizations", realizations, "number of random deployments");
    app->add_option("--scheme", scheme, "scheme or comma-separated list (an_sca, no_an_sca, maxmin_rate, heuristic_only)");
    app->add_option("--seed", seed, "master seed");
    app->add_option("--out-dir", out_dir, "output directory");
    app->add_option("--epsilon", epsilon, "SCA stopping threshold in bits");
    app->add_option("--threads", threads, "worker threads");
    app->add_flag("--no-an", no_an, "disable artificial noise");
    app->add_flag("--no-timing", no_timing, "write wall_ms = 0 for byte-reproducible output");
  }

  RunConfig resolve() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (M) cfg.num_aps = *M;
    if (K) cfg.num_users = *K;
    if (J) cfg.num_eves = *J;
    if (realizations) cfg.realizations = *realizations;
    if (threads) cfg.threads = *threads;
    if (seed) cfg.seed = *seed;
    if (epsilon) cfg.epsilon = *epsilon;
    if (out_dir) cfg.out_dir = *out_dir;
    if (scheme) {
      cfg.schemes.clear();
      std::stringstream ss(*scheme);
      for (std::string s; std::getline(ss, s, ',');)
        if (!s.empty()) cfg.schemes.push_back(s);
    }
    if (no_an) cfg.enable_an = false;
    if (no_timing) cfg.record_timing = false;
    cfg.validate();
    return cfg;
  }
};

int cmd_run(const Overrides& ov) {
  const RunConfig cfg = ov.resolve();
  const ExperimentSpec spec = to_experiment_spec(cfg);
  const ExperimentResult result = run_experiment_unchecked(spec);

  fs::create_directories(cfg.out_dir);
  write_file_atomic(fs::path(cfg.out_dir) / "results.csv", results_csv(result.outcomes));
  write_file_atomic(fs::path(cfg.out_dir) / "summary.json", summary_json(cfg, spec, result).dump(2) + "\n");

  for (const auto& s : result.summaries)
    std::cerr << to_string(s.scheme) << ": samples=" << s.samples << " failures=" << s.failures
              << " outage=" << s.outage << "\n";
  if (const std::string breach = failure_breach(spec, result); !breach.empty()) {
    std::cerr << "error: excessive solver failures: " << breach << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

int cmd_single(const Overrides& ov, int index, bool with_allocations) {
  RunConfig cfg = ov.resolve();
  if (!ov.scheme) cfg.schemes = {cfg.enable_an ? "an_sca" : "no_an_sca"};
  const ExperimentSpec spec = to_experiment_spec(cfg);
  if (index < 0) throw ConfigError("--index must be >= 0");
  const RealizationSetup setup = make_realization(spec, index);

  nlohmann::json out;
  out["realization"] = index;
  out["config"] = to_json(cfg);
  out["traces"] = nlohmann::json::object();
  bool failed = false;
  for (Scheme s : spec.schemes) {
    const ScaTrace trace = run_scheme(s, setup.stats, setup.net, spec.p_t, spec.sca);
    failed = failed || trace.solver_failed;
    out["traces"][std::string(to_string(s))] = to_json(trace, with_allocations);
  }
  const std::string text = out.dump(2) + "\n";
  std::cout << text;
  if (ov.out_dir) {
    fs::create_directories(cfg.out_dir);
    write_file_atomic(fs::path(cfg.out_dir) / "trace.json", text);
  }
  return failed ? kExitSolver : kExitOk;
}

int cmd_validate(const Overrides& ov, int draws, int instances) {
  const RunConfig cfg = ov.resolve();
  const ExperimentSpec spec = to_experiment_spec(cfg);
  if (draws < 1 || instances < 1) throw ConfigError("--draws and --instances must be >= 1");
  const PilotConfig pilots = spec.resolved_pilots();

  nlohmann::json rows = nlohmann::json::array();
  int bound_violations = 0;
  for (int i = 0; i < instances; ++i) {
    const RealizationSetup setup = make_realization(spec, i);
    Rng rng(derive_seed(spec.master_seed ^ 0x5a5a5a5aULL, static_cast<std::uint64_t>(i)));
    const PowerAllocation alloc = random_feasible_allocation(setup.stats, spec.p_t, rng, cfg.enable_an);
    const RateReport rep = secrecy_report(alloc, setup.stats, setup.net);
    const UserRateMc mc = mc_validate_user_rate(alloc, setup.stats, setup.net, pilots, draws, rng);
    const LeakageMc lk = mc_validate_leakage(alloc, setup.stats, setup.net, pilots, draws, rng);
    for (Eigen::Index k = 0; k < rep.user_rate.size(); ++k) {
      const bool ok = rep.user_rate(k) <= mc.ergodic_rate(k) + 2.0 * mc.ergodic_se(k);
      bound_violations += ok ? 0 : 1;
      nlohmann::json row = {{"instance", i},
                            {"user", k},
                            {"closed_form_rate", rep.user_rate(k)},
                            {"mc_ergodic_rate", mc.ergodic_rate(k)},
                            {"mc_ergodic_se", mc.ergodic_se(k)},
                            {"bound_holds", ok}};
      nlohmann::json leak = nlohmann::json::array();
      for (Eigen::Index j = 0; j < rep.leakage.rows(); ++j)
        leak.push_back({{"eve", j}, {"closed_form", rep.leakage(j, k)}, {"mc", lk.rate(j, k)}, {"mc_se", lk.rate_se(j, k)}});
      row["leakage"] = leak;
      rows.push_back(row);
    }
  }
  const nlohmann::json out = {{"draws", draws}, {"instances", instances}, {"bound_violations", bound_violations},
                              {"rows", rows}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_cdf(const std::string& results, const std::string& against, double slack) {
  const auto outcomes = read_results_csv(results);
  const auto summaries = summaries_from_outcomes(outcomes);
  nlohmann::json out;
  out["schemes"] = nlohmann::json::array();
  for (const auto& s : summaries) out["schemes"].push_back(to_json(s));

  // consecutive schemes in file order: does each dominate the next one
  nlohmann::json dom = nlohmann::json::array();
  for (std::size_t i = 0; i + 1 < summaries.size(); ++i) {
    if (summaries[i].cdf.empty() || summaries[i + 1].cdf.empty()) continue;
    const auto rep = stochastic_dominance_check(summaries[i].cdf, summaries[i + 1].cdf, slack);
    dom.push_back({{"better", std::string(to_string(summaries[i].scheme))},
                   {"worse", std::string(to_string(summaries[i + 1].scheme))},
                   {"holds", rep.holds},
                   {"max_violation", rep.max_violation}});
  }
  out["dominance"] = dom;

  if (!against.empty()) {
    // this file is expected to dominate the other one, scheme by scheme
    const auto other = summaries_from_outcomes(read_results_csv(against));
    nlohmann::json cmp = nlohmann::json::array();
    for (const auto& s : summaries)
      for (const auto& o : other)
        if (o.scheme == s.scheme && !s.cdf.empty() && !o.cdf.empty()) {
          const auto rep = stochastic_dominance_check(s.cdf, o.cdf, slack);
          cmp.push_back({{"scheme", std::string(to_string(s.scheme))},
                         {"holds", rep.holds},
                         {"max_violation", rep.max_violation}});
        }
    out["against"] = cmp;
  }
  out["slack"] = slack;
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure max-min power control for cell-free massive MIMO with artificial noise"};
  app.require_subcommand(1);

  Overrides run_ov, single_ov, validate_ov;
  auto* run = app.add_subcommand("run", "run a full Monte-Carlo experiment");
  run_ov.attach(run);

  auto* single = app.add_subcommand("single", "optimize one realization and print the SCA trace as JSON");
  single_ov.attach(single);
  int index = 0;
  bool with_allocations = false;
  single->add_option("--index", index, "realization index under the master seed");
  single->add_flag("--allocations", with_allocations, "include per-iterate power allocations");

  auto* validate = app.add_subcommand("validate", "Monte-Carlo check of the closed-form rate bounds");
  validate_ov.attach(validate);
  int draws = 10000;
  int instances = 5;
  validate->add_option("--draws", draws, "channel draws per instance");
  validate->add_option("--instances", instances, "random deployments");

  auto* cdf = app.add_subcommand("cdf", "recompute CDFs and dominance reports from a results.csv");
  std::string results_path;
  std::string against_path;
  double slack = 0.05;
  cdf->add_option("--results", results_path, "results.csv to read")->required();
  cdf->add_option("--against", against_path, "second results.csv expected to be dominated");
  cdf->add_option("--slack", slack, "dominance slack");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_ov);
    if (*single) return cmd_single(single_ov, index, with_allocations);
    if (*validate) return cmd_validate(validate_ov, draws, instances);
    if (*cdf) return cmd_cdf(results_path, against_path, slack);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ExcessiveFailures& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitConfig;
}
