#include <gtest/gtest.h>

#include <cmath>

#include "mbol/oracles.hpp"
#include "mbol/sliding.hpp"

namespace {

using namespace mbol;
using namespace mbol::sliding;

SlidingConfig config(std::size_t n, Day T, std::size_t depth = 0) {
  SlidingConfig c;
  c.n = n;
  c.horizon = T;
  c.depth = depth;
  return c;
}

TEST(Sliding, AlgorithmCountAndRates) {
  SlidingPolicy p(config(8, 1024), RandomStreams(1));
  EXPECT_EQ(p.algorithms(), 13u);
  for (std::size_t i = 0; i < p.algorithms(); ++i) {
    EXPECT_EQ(p.grid(i), Day{1} << (i + 1));
    EXPECT_DOUBLE_EQ(p.eta(i), 1.0 / std::sqrt(8.0 * std::ldexp(1.0, static_cast<int>(i) + 1)));
    EXPECT_DOUBLE_EQ(p.weight(i), p.eta(i));
  }
}

TEST(Sliding, WeightsStayPositiveAndResetOnGrid) {
  InstanceConfig ic;
  ic.n = 4;
  ic.horizon = 512;
  ic.model = HotStreak{16, 0.1, 0.9};
  const Instance inst(ic);
  SlidingPolicy p(config(4, 512), RandomStreams(2));
  for (Day t = 0; t < 512; ++t) {
    step(p, inst, t);
    for (std::size_t i = 0; i < p.algorithms(); ++i) {
      EXPECT_GT(p.weight(i), 0.0);
      if ((t + 1) % p.grid(i) == 0) {
        EXPECT_EQ(p.weight(i), p.eta(i));
      }
    }
  }
}

TEST(Sliding, MixtureAndPlayDistributionSumToOne) {
  InstanceConfig ic;
  ic.n = 5;
  ic.horizon = 300;
  ic.model = HiddenBest{0.25, 2};
  const Instance inst(ic);
  SlidingPolicy p(config(5, 300, 1), RandomStreams(3));
  for (Day t = 0; t < 300; ++t) {
    step(p, inst, t);
    const auto q = p.mixture_weights();
    double z = 0.0, w = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      z += q[i];
      w += p.weight(i);
    }
    EXPECT_NEAR(z, 1.0, 1e-12);
    EXPECT_NEAR(q[0], p.weight(0) / w, 1e-15);
    double s = 0.0;
    for (double x : p.play_distribution()) s += x;
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(Sliding, ZeroLossesLeaveWeightsUnchanged) {
  const Instance inst = explicit_instance(std::vector<std::vector<double>>(64, {0, 0, 0}));
  SlidingPolicy p(config(3, 64), RandomStreams(4));
  const Trace tr = run(p, inst);
  for (std::size_t i = 0; i < p.algorithms(); ++i) EXPECT_EQ(p.weight(i), p.eta(i));
  EXPECT_EQ(oracles::cumulative_regret(tr, inst), 0.0);
}

TEST(Sliding, ProbeProbabilityIncludesFanout) {
  // One tree of N chosen uniformly: p = 1 / (2 N |U|) or 1 / (2 N M).
  InstanceConfig ic;
  ic.n = 6;
  ic.horizon = 1024;
  ic.model = HiddenBest{0.25, 0};
  const Instance inst(ic);
  SlidingPolicy p(config(6, 1024, 1), RandomStreams(5));
  const double N = static_cast<double>(p.algorithms());
  for (Day t = 0; t < 1024; ++t) {
    step(p, inst, t);
    const double inv = 1.0 / p.last_exploration().probability;
    const double per_tree = inv / (2.0 * N);
    EXPECT_NEAR(per_tree, std::round(per_tree), 1e-9);
    EXPECT_GE(std::round(per_tree), 1.0);
  }
}

TEST(Tree, MetaProbeWithFanoutThree) {
  // M = 2 meta-experts and fanout 3: scale 2 * 3 * 2 = 12, probability 1/12.
  two_query::TreeConfig c;
  c.n = 4;
  c.horizon = 4096;
  c.depth = 1;
  two_query::Tree tree(c, RandomStreams(6));
  Stream s(7);
  bool saw_meta = false;
  for (int i = 0; i < 64; ++i) {
    tree.begin_day();
    const auto plan = tree.plan_probe(s, 3.0);
    if (plan.kind == two_query::ProbePlan::Kind::meta) {
      EXPECT_DOUBLE_EQ(plan.scale, 12.0);
      EXPECT_DOUBLE_EQ(plan.probability, 1.0 / 12.0);
      saw_meta = true;
    }
    tree.end_day();
  }
  EXPECT_TRUE(saw_meta);
}

TEST(Sliding, ExploitationSeedDoesNotChangeLedgers) {
  InstanceConfig ic;
  ic.n = 4;
  ic.horizon = 1024;
  ic.model = HotStreak{};
  const Instance inst(ic);
  SlidingPolicy a(config(4, 1024, 1), RandomStreams(8)), b(config(4, 1024, 1), RandomStreams(8, 99));
  run(a, inst);
  run(b, inst);
  EXPECT_EQ(a.dump(), b.dump());
}

}  // namespace
