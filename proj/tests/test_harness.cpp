#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mbol/harness/config.hpp"
#include "mbol/harness/experiment.hpp"
#include "mbol/harness/slope.hpp"
#include "mbol/oracles.hpp"

namespace {

using namespace mbol;
using namespace mbol::harness;

std::vector<double> powers_of_two(int lo, int hi) {
  std::vector<double> x;
  for (int k = lo; k <= hi; ++k) x.push_back(std::ldexp(1.0, k));
  return x;
}

TEST(Slope, PurePowerLaws) {
  const auto x = powers_of_two(10, 16);
  std::vector<double> half, three_quarters;
  for (double t : x) {
    half.push_back(std::sqrt(t));
    three_quarters.push_back(std::pow(t, 0.75));
  }
  EXPECT_NEAR(fit_loglog(x, half).slope, 0.5, 1e-12);
  EXPECT_NEAR(fit_loglog(x, three_quarters).slope, 0.75, 1e-12);
  EXPECT_NEAR(fit_loglog(x, half).r2, 1.0, 1e-12);
}

TEST(Slope, LogFactorSteepensTheFit) {
  const auto x = powers_of_two(12, 18);
  std::vector<double> y;
  for (double t : x) y.push_back(10.0 * std::pow(t, 2.0 / 3.0) * std::log(t));
  EXPECT_NEAR(fit_loglog(x, y).slope, 0.76387, 1e-5);
  std::vector<double> y2;
  for (double t : x) y2.push_back(10.0 * std::pow(t, 2.0 / 3.0) * std::log2(t));
  EXPECT_NEAR(fit_loglog(x, y2).slope, 0.76387, 1e-5);
}

TEST(Slope, NeedsThreePoints) {
  EXPECT_THROW(fit_loglog({1.0, 2.0}, {1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(fit_slope({}), std::invalid_argument);
}

TEST(Slope, FitsMeanPerHorizon) {
  std::vector<CellRow> rows;
  for (Day T : {1024u, 4096u, 16384u})
    for (double jitter : {-1.0, 1.0}) {
      CellRow r;
      r.T = T;
      r.cumulative_regret = std::sqrt(static_cast<double>(T)) * (1.0 + 0.1 * jitter);
      rows.push_back(r);
    }
  CellRow failed;
  failed.T = 16384;
  failed.errors = "boom";
  rows.push_back(failed);
  EXPECT_NEAR(fit_slope(rows).slope, 0.5, 1e-12);
}

TEST(Config, UnknownPolicyAndKeyAreRejected) {
  ExperimentConfig cfg;
  EXPECT_THROW(apply_setting(cfg, "colour", "blue"), ConfigError);
  cfg.policy = "nope";
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(Config, ParsesTextAndPowers) {
  ExperimentConfig cfg;
  std::istringstream in("# comment\npolicy = two_query\nT = 2^10, 2048\nseeds = 3\ndepth = 1\n");
  load_config_text(cfg, in);
  EXPECT_EQ(cfg.policy, "two_query");
  EXPECT_EQ(cfg.horizons, (std::vector<Day>{1024, 2048}));
  EXPECT_EQ(cfg.seed_values(), (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_EQ(cfg.depth, 1u);
}

TEST(Config, ModelStrings) {
  EXPECT_TRUE(std::holds_alternative<HiddenBest>(make_model("hidden_best:gap=0.1,best=2", 4, 64)));
  const auto tp = std::get<TwoPhase>(make_model("two_phase:first=1,second=3", 4, 64));
  EXPECT_EQ(tp.switch_day, 32u);
  EXPECT_DOUBLE_EQ(tp.first[1], 0.25);
  EXPECT_DOUBLE_EQ(tp.second[3], 0.25);
  EXPECT_EQ(std::get<ExplicitTable>(make_model("explicit:rows=0 1;1 0", 2, 2)).rows.size(), 2u);
  EXPECT_THROW(make_model("hidden_best:width=3", 4, 64), ConfigError);
  EXPECT_THROW(make_model("spiral", 4, 64), ConfigError);
}

TEST(Config, RejectsUnusedOverrides) {
  ExperimentConfig cfg;
  cfg.policy = "random_order";
  cfg.gamma = 0.1;
  EXPECT_THROW(make_policy(cfg, 4, 64, policy_streams(0)), ConfigError);
}

TEST(Experiment, ZeroSeedsGivesHeaderOnly) {
  ExperimentConfig cfg;
  cfg.seeds = 0;
  const auto res = run_experiment(cfg);
  EXPECT_TRUE(res.rows.empty());
  const std::string csv = to_csv(res.rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
  EXPECT_EQ(csv.rfind("policy,n,T,W,seed,", 0), 0u);
}

TEST(Experiment, RerunIsByteIdentical) {
  for (const char* policy : {"exp3", "two_query", "sliding"}) {
    ExperimentConfig cfg;
    cfg.policy = policy;
    cfg.n = 6;
    cfg.horizons = {1024, 2048};
    cfg.windows = {64, 256};
    cfg.seeds = 2;
    cfg.threads = 2;
    const std::string a = to_csv(run_experiment(cfg).rows);
    cfg.threads = 1;
    const std::string b = to_csv(run_experiment(cfg).rows);
    EXPECT_EQ(a, b) << policy;
  }
}

TEST(Experiment, CsvRoundTrip) {
  ExperimentConfig cfg;
  cfg.n = 4;
  cfg.horizons = {256};
  cfg.windows = {16};
  cfg.seeds = 2;
  cfg.interval = true;
  const auto rows = run_experiment(cfg).rows;
  std::istringstream in(to_csv(rows));
  EXPECT_EQ(to_csv(read_csv(in)), to_csv(rows));
}

TEST(Experiment, ExplicitTableMatchesOracle) {
  ExperimentConfig cfg;
  cfg.policy = "exp3";
  cfg.model = "explicit:rows=0 1;1 0;0 0";
  cfg.n = 2;
  cfg.horizons = {3};
  cfg.seed_list = {4};
  cfg.interval = true;
  const auto rows = run_experiment(cfg).rows;
  ASSERT_EQ(rows.size(), 1u);
  const Instance inst(make_instance_config(cfg, 3, 4));
  auto policy = make_policy(cfg, 2, 3, policy_streams(4));
  const Trace tr = run(*policy, inst);
  EXPECT_EQ(*rows[0].cumulative_regret, oracles::cumulative_regret(tr, inst));
  EXPECT_EQ(*rows[0].interval_regret, oracles::interval_regret(tr, inst).regret);
  EXPECT_EQ(rows[0].T, 3u);
}

TEST(Experiment, CellErrorsAreRecorded) {
  ExperimentConfig cfg;
  cfg.n = 4;
  cfg.horizons = {8192};
  cfg.interval = true;
  const auto rows = run_experiment(cfg).rows;
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_TRUE(rows[0].cumulative_regret.has_value());
  EXPECT_NE(rows[0].errors.find("interval"), std::string::npos);
}

TEST(Experiment, TimingColumnOnlyWhenAsked) {
  ExperimentConfig cfg;
  cfg.horizons = {128};
  EXPECT_FALSE(run_experiment(cfg).rows[0].wall_ms.has_value());
  cfg.timing = true;
  EXPECT_TRUE(run_experiment(cfg).rows[0].wall_ms.has_value());
}

}  // namespace
