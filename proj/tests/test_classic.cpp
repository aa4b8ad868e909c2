#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mbol/classic.hpp"
#include "mbol/oracles.hpp"

namespace {

using namespace mbol;
using namespace mbol::classic;

TEST(Exp3, ImportanceWeightedLossOnFirstDay) {
  // n = 2, P = 1/2 on day 0, gamma = 0.1, loss 1: logw drops by 0.1 * 2.
  const Instance inst = explicit_instance({{1, 1}});
  Exp3 p(2, 0.1, RandomStreams(1));
  const Trace tr = run(p, inst);
  const Arm a = tr.records[0].played;
  EXPECT_NEAR(p.log_weights()[a], -0.2, 1e-15);
  EXPECT_EQ(p.log_weights()[1 - a], 0.0);
  EXPECT_DOUBLE_EQ(Exp3::importance_weighted(1.0, 0.5), 2.0);
}

TEST(Exp3, DistributionRespectsFloor) {
  const Instance inst = explicit_instance(std::vector<std::vector<double>>(200, {1, 0, 1}));
  Exp3 p(3, 0.3, RandomStreams(2));
  run(p, inst);
  for (double x : p.distribution()) EXPECT_GE(x, 0.1 - 1e-12);
}

TEST(Exp3, RejectsBadGamma) {
  EXPECT_THROW(Exp3(2, 0.0, RandomStreams(1)), ConfigError);
  EXPECT_THROW(Exp3(2, 1.5, RandomStreams(1)), ConfigError);
  EXPECT_THROW(Exp3(0, 0.5, RandomStreams(1)), ConfigError);
}

TEST(Exp3, RegretWithinBound) {
  InstanceConfig c;
  c.n = 4;
  c.horizon = 4096;
  c.model = HiddenBest{0.25, 1};
  const Instance inst(c);
  double total = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    Exp3 p(4, exp3_default_gamma(4, 4096), RandomStreams(s));
    total += oracles::cumulative_regret(run(p, inst), inst);
  }
  EXPECT_LE(total / 5.0, 2.0 * std::sqrt((std::numbers::e - 1.0) * 4 * 4096 * std::log(4.0)));
}

TEST(Exp3Explore, CreditOnExplorationDay) {
  EXPECT_DOUBLE_EQ(Exp3Explore::credit(1.0, 3, 0.25), 12.0);
  EXPECT_EQ(Exp3Explore::credit(0.0, 3, 0.25), 0.0);
}

TEST(Exp3Explore, EstimatesOnlyMoveOnExploration) {
  const Instance inst = explicit_instance(std::vector<std::vector<double>>(500, {1, 1, 1}));
  Exp3Explore p(3, 0.25, RandomStreams(3));
  run(p, inst);
  double s = 0.0;
  for (double e : p.estimates()) s += e;
  EXPECT_DOUBLE_EQ(s, 12.0 * static_cast<double>(p.exploration_days()));
  EXPECT_NEAR(static_cast<double>(p.exploration_days()) / 500.0, 0.25, 0.06);
}

TEST(Exp3TwoQuery, ProbeCredit) {
  EXPECT_DOUBLE_EQ(Exp3TwoQuery::credit(1.0, 4), 4.0);
  const Instance inst = explicit_instance(std::vector<std::vector<double>>(50, {1, 1, 1, 1}));
  Exp3TwoQuery p(4, 0.05, RandomStreams(4));
  const Trace tr = run(p, inst);
  double s = 0.0;
  for (double e : p.estimates()) s += e;
  EXPECT_DOUBLE_EQ(s, 4.0 * 50.0);
  for (const auto& r : tr.records) EXPECT_TRUE(r.probe.has_value());
}

TEST(Hedge, LowerCumulativeLossGetsMoreWeight) {
  Hedge h(3, 0.5);
  h.update(std::vector<double>{0.0, 1.0, 2.0});
  const auto p = h.distribution();
  EXPECT_GT(p[0], p[1]);
  EXPECT_GT(p[1], p[2]);
  EXPECT_NEAR(p[0] / p[1], std::exp(0.5), 1e-12);
}

TEST(Hedge, RejectsNegativeLoss) {
  Hedge h(2, 1.0);
  EXPECT_THROW(h.update(std::vector<double>{-1.0, 0.0}), std::invalid_argument);
}

TEST(Squint, StartsUniform) {
  Squint s(5);
  for (double x : s.distribution()) EXPECT_NEAR(x, 0.2, 1e-12);
  double z = 0.0;
  for (double w : s.prior()) z += w;
  EXPECT_NEAR(z, 1.0, 1e-12);
}

TEST(Squint, TrackedStatistics) {
  Squint s(2);
  s.update(std::vector<double>{1.0, 0.0});
  // p = (1/2, 1/2), mix = 1/2: v = (-1/2, 1/2).
  EXPECT_DOUBLE_EQ(s.sum_v()[0], -0.5);
  EXPECT_DOUBLE_EQ(s.sum_v()[1], 0.5);
  EXPECT_DOUBLE_EQ(s.sum_v2()[0], 0.25);
}

TEST(Squint, RegretWithinBound) {
  InstanceConfig c;
  c.n = 8;
  c.horizon = 4000;
  c.model = HiddenBest{0.1, 5};
  c.seed = 7;
  const Instance inst(c);
  Squint s(8);
  const auto r = run_full_information(s, inst, Stream(1));
  double alg = 0.0;
  for (double x : r.expected) alg += x;
  double best = 0.0;
  for (Day t = 0; t < inst.horizon(); ++t) best += inst.loss(t, 5);
  const double T = 4000.0;
  EXPECT_LE(alg - best, 4.0 * std::sqrt(T * (std::log(8.0) + std::log(std::log(T)))));
}

}  // namespace
