#include <gtest/gtest.h>

#include "cfsec/experiments.hpp"
#include "cfsec/io.hpp"
#include "test_helpers.hpp"

using namespace cfsec;

TEST(Cdf, ReferenceSamples) {
  const auto cdf = empirical_cdf({0.0, 0.0, 1.0, 2.0});
  ASSERT_EQ(cdf.size(), 3u);
  EXPECT_DOUBLE_EQ(cdf_at(cdf, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(cdf_at(cdf, 1.0), 0.75);
  EXPECT_DOUBLE_EQ(cdf_at(cdf, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(cdf_at(cdf, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(cdf_at(cdf, -1e-9), 0.0);
  EXPECT_DOUBLE_EQ(cdf_at(cdf, 7.0), 1.0);
}

TEST(Cdf, AllEqualIsSingleStep) {
  const auto cdf = empirical_cdf({1.5, 1.5, 1.5});
  ASSERT_EQ(cdf.size(), 1u);
  EXPECT_DOUBLE_EQ(cdf[0].rate, 1.5);
  EXPECT_DOUBLE_EQ(cdf[0].probability, 1.0);
}

TEST(Cdf, MonotoneOnRandomInput) {
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<double> s;
  for (int i = 0; i < 500; ++i) s.push_back(i % 7 == 0 ? 0.0 : u(rng));
  const auto cdf = empirical_cdf(s);
  for (std::size_t i = 1; i < cdf.size(); ++i) {
    EXPECT_GT(cdf[i].rate, cdf[i - 1].rate);
    EXPECT_GT(cdf[i].probability, cdf[i - 1].probability);
  }
  EXPECT_DOUBLE_EQ(cdf.back().probability, 1.0);
}

TEST(Cdf, EmptyRejected) { EXPECT_THROW(empirical_cdf({}), ConfigError); }

TEST(Dominance, IdenticalHoldsWithZeroSlack) {
  const auto a = empirical_cdf({0.1, 0.4, 0.4, 2.0});
  const auto rep = stochastic_dominance_check(a, a, 0.0);
  EXPECT_TRUE(rep.holds);
  EXPECT_EQ(rep.max_violation, 0.0);
}

TEST(Dominance, ShiftedDistribution) {
  const auto low = empirical_cdf({0.0, 1.0, 2.0, 3.0});
  const auto high = empirical_cdf({0.5, 1.5, 2.5, 3.5});
  EXPECT_TRUE(stochastic_dominance_check(high, low, 0.0).holds);
  const auto rep = stochastic_dominance_check(low, high, 0.1);
  EXPECT_FALSE(rep.holds);
  EXPECT_DOUBLE_EQ(rep.max_violation, 0.25);
  EXPECT_TRUE(stochastic_dominance_check(low, high, 0.25).holds);
}

TEST(Summary, OutageIsAtomAtZero) {
  std::vector<SchemeOutcome> out;
  const double vals[] = {0.0, 0.0, 0.3, 0.0, 1.2};
  for (int i = 0; i < 5; ++i) out.push_back({i, Scheme::maxmin_rate, vals[i], vals[i], 1.0, 3, true, false, 0.0});
  out.push_back({5, Scheme::maxmin_rate, 0.0, 0.0, 0.0, 0, false, true, 0.0});
  const auto s = summarize(Scheme::maxmin_rate, out);
  EXPECT_EQ(s.samples, 5);
  EXPECT_EQ(s.failures, 1);
  EXPECT_DOUBLE_EQ(s.outage, 0.6);
  EXPECT_DOUBLE_EQ(s.outage, cdf_at(s.cdf, 0.0));
}

namespace {

ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.deployment.num_aps = 8;
  spec.deployment.num_users = 2;
  spec.deployment.num_eves = 1;
  spec.p_t = test::kPt;
  spec.pilots = {0, test::kPp};
  spec.num_realizations = 5;
  spec.master_seed = 99;
  spec.record_timing = false;
  return spec;
}

}  // namespace

TEST(Experiment, DeterministicAcrossThreadCounts) {
  auto spec = small_spec();
  spec.threads = 1;
  const auto a = run_experiment(spec);
  spec.threads = 3;
  const auto b = run_experiment(spec);
  EXPECT_EQ(results_csv(a.outcomes), results_csv(b.outcomes));
  ASSERT_EQ(a.outcomes.size(), 15u);
  for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
    EXPECT_EQ(a.outcomes[i].realization, static_cast<int>(i / 3));
    EXPECT_EQ(a.outcomes[i].scheme, spec.schemes[i % 3]);
  }
}

TEST(Experiment, SingleRealizationRerunIdentical) {
  auto spec = small_spec();
  spec.num_realizations = 1;
  const auto a = run_experiment(spec);
  const auto b = run_experiment(spec);
  EXPECT_EQ(a.outcomes[0].min_secrecy, b.outcomes[0].min_secrecy);
  EXPECT_EQ(a.outcomes[0].iterations, b.outcomes[0].iterations);
}

TEST(Experiment, NoEavesNoOutage) {
  auto spec = small_spec();
  spec.deployment.num_eves = 0;
  spec.schemes = {Scheme::maxmin_rate};
  const auto r = run_experiment(spec);
  for (const auto& o : r.outcomes) ASSERT_GT(o.min_user_rate, 0.0);
  EXPECT_EQ(r.summary(Scheme::maxmin_rate).outage, 0.0);
}

TEST(Experiment, PrelogScalesRates) {
  auto spec = small_spec();
  spec.num_realizations = 2;
  const auto a = run_experiment(spec);
  spec.prelog = 0.5;
  const auto b = run_experiment(spec);
  for (std::size_t i = 0; i < a.outcomes.size(); ++i)
    EXPECT_DOUBLE_EQ(b.outcomes[i].min_secrecy, 0.5 * a.outcomes[i].min_secrecy);
}

TEST(Experiment, FailureBreachReported) {
  auto spec = small_spec();
  spec.num_realizations = 20;
  ExperimentResult r;
  for (int i = 0; i < 20; ++i) r.outcomes.push_back({i, Scheme::an_sca, 1.0, 1.0, 1.0, 1, true, i < 2, 0.0});
  r.summaries.push_back(summarize(Scheme::an_sca, r.outcomes));
  EXPECT_FALSE(failure_breach(spec, r).empty());  // 2 of 20 > 5%
  r.outcomes[1].failed = false;
  r.summaries[0] = summarize(Scheme::an_sca, r.outcomes);
  EXPECT_TRUE(failure_breach(spec, r).empty());  // 1 of 20 = 5%
}

TEST(Experiment, SpecValidation) {
  auto spec = small_spec();
  spec.num_realizations = 0;
  EXPECT_THROW(run_experiment(spec), ConfigError);
  spec = small_spec();
  spec.schemes.clear();
  EXPECT_THROW(run_experiment(spec), ConfigError);
  spec = small_spec();
  spec.pilots.tau_p = 1;
  EXPECT_THROW(run_experiment(spec), ConfigError);
}
