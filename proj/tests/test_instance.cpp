#include <gtest/gtest.h>

#include <cmath>

#include "mbol/classic.hpp"
#include "mbol/core/instance.hpp"
#include "mbol/core/policy.hpp"
#include "mbol/two_query.hpp"

namespace {

using namespace mbol;

TEST(Instance, DegenerateHiddenBest) {
  InstanceConfig c;
  c.n = 2;
  c.horizon = 4;
  c.model = HiddenBest{0.5, 0};
  const Instance inst(c);
  for (Day t = 0; t < 4; ++t) {
    EXPECT_EQ(inst.loss(t, 0), 0.0);
    EXPECT_EQ(inst.loss(t, 1), 1.0);
  }
}

TEST(Instance, LossesAreBinaryAndPure) {
  InstanceConfig c;
  c.n = 5;
  c.horizon = 200;
  c.model = HotStreak{};
  c.seed = 3;
  const Instance a(c), b(c);
  for (Day t = 0; t < 200; ++t)
    for (Arm i = 0; i < 5; ++i) {
      const double l = a.loss(t, i);
      EXPECT_TRUE(l == 0.0 || l == 1.0);
      EXPECT_EQ(l, b.loss(t, i));
      EXPECT_EQ(l, a.loss(t, i));
    }
}

TEST(Instance, RandomOrderBestHasExactOnes) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    InstanceConfig c;
    c.n = 8;
    c.horizon = 1024;
    c.model = RandomOrderBest{1.5, 2, HotStreak{}};
    c.seed = seed;
    const Instance inst(c);
    double s = 0.0;
    for (Day t = 0; t < c.horizon; ++t) s += inst.loss(t, 2);
    EXPECT_EQ(s, std::floor(1.5 * std::sqrt(8.0 * 1024.0)));
  }
}

TEST(Instance, ExplicitTableBestLoss) {
  const Instance inst = explicit_instance({{0, 1}, {1, 0}, {0, 0}});
  double best = 1e9;
  for (Arm i = 0; i < 2; ++i) {
    double s = 0.0;
    for (Day t = 0; t < 3; ++t) s += inst.loss(t, i);
    best = std::min(best, s);
  }
  EXPECT_EQ(best, 1.0);
  EXPECT_EQ(inst.best_arm(), 0u);
}

TEST(Instance, RejectsBadConfig) {
  InstanceConfig c;
  c.n = 0;
  EXPECT_THROW(Instance{c}, ConfigError);
  c.n = 2;
  c.horizon = 4;
  c.model = HiddenBest{0.7, 0};
  EXPECT_THROW(Instance{c}, ConfigError);
  c.model = TwoPhase{2, {0.1}, {0.1, 0.2}};
  EXPECT_THROW(Instance{c}, ConfigError);
}

TEST(Step, SingleArmAlwaysPlayed) {
  InstanceConfig c;
  c.n = 1;
  c.horizon = 64;
  c.model = HiddenBest{0.25, 0};
  const Instance inst(c);
  classic::Exp3 policy(1, 0.1, RandomStreams(1));
  const Trace tr = run(policy, inst);
  for (const auto& r : tr.records) EXPECT_EQ(r.played, 0u);
}

TEST(Step, ReplayIsIdentical) {
  const Instance inst = explicit_instance({{0, 1}, {1, 0}});
  classic::Exp3 a(2, 0.2, RandomStreams(4)), b(2, 0.2, RandomStreams(4));
  const Trace ta = run(a, inst), tb = run(b, inst);
  ASSERT_EQ(ta.size(), tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    EXPECT_EQ(ta.records[i].played, tb.records[i].played);
    EXPECT_EQ(ta.records[i].incurred, tb.records[i].incurred);
  }
}

TEST(Step, TwoQueryObservesAtMostTwo) {
  InstanceConfig c;
  c.n = 6;
  c.horizon = 512;
  c.model = HotStreak{};
  const Instance inst(c);
  two_query::TreeConfig tc;
  tc.n = 6;
  tc.horizon = 512;
  tc.depth = 1;
  two_query::TwoQueryPolicy policy(tc, RandomStreams(2));
  for (const auto& r : run(policy, inst).records) EXPECT_LE(r.observed().size(), 2u);
}

class GreedyTwice final : public Policy {
 public:
  std::string name() const override { return "greedy"; }
  unsigned query_budget() const override { return 1; }
  Action act(Day) override { return {0, Arm{1}}; }
  void observe(Day, const Feedback&) override {}
  std::size_t tracked_words() const override { return 0; }
};

TEST(Step, BudgetIsEnforced) {
  const Instance inst = explicit_instance({{0, 1}});
  GreedyTwice p;
  EXPECT_THROW(step(p, inst, 0), ProtocolViolation);
}

}  // namespace
