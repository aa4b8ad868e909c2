#include <gtest/gtest.h>

#include <algorithm>
#include <limits>

#include "mbol/classic.hpp"
#include "mbol/oracles.hpp"
#include "mbol/pool.hpp"

namespace {

using namespace mbol;

Trace replay(const Instance& inst, const std::vector<Arm>& plays) {
  Trace tr;
  for (Day t = 0; t < plays.size(); ++t) {
    PlayRecord r;
    r.day = t;
    r.played = plays[t];
    r.incurred = inst.loss(t, plays[t]);
    tr.records.push_back(r);
  }
  return tr;
}

double brute(const Trace& tr, const Instance& inst, Day a, Day b) {
  double alg = 0.0;
  for (Day t = a; t <= b; ++t) alg += tr.records[t].incurred;
  double best = std::numeric_limits<double>::infinity();
  for (Arm i = 0; i < inst.n(); ++i) {
    double s = 0.0;
    for (Day t = a; t <= b; ++t) s += inst.loss(t, i);
    best = std::min(best, s);
  }
  return alg - best;
}

std::vector<std::vector<double>> random_table(std::size_t T, std::size_t n, std::uint64_t seed) {
  Stream s(seed);
  std::vector<std::vector<double>> rows(T, std::vector<double>(n));
  for (auto& r : rows)
    for (auto& x : r) x = s.bernoulli(0.5) ? 1.0 : 0.0;
  return rows;
}

TEST(CumulativeRegret, ZeroLosses) {
  const Instance inst = explicit_instance({{0, 0}, {0, 0}});
  EXPECT_EQ(oracles::cumulative_regret(replay(inst, {0, 1}), inst), 0.0);
}

TEST(CumulativeRegret, OptimalPlay) {
  const Instance inst = explicit_instance({{0, 1}, {0, 1}, {1, 1}});
  EXPECT_EQ(oracles::cumulative_regret(replay(inst, {0, 0, 0}), inst), 0.0);
}

TEST(CumulativeRegret, HandEnumeratedTable) {
  const Instance inst = explicit_instance({{0, 1}, {1, 0}, {0, 0}});
  // Algorithm loss 1 + 0 + 0, best arm loss 1.
  EXPECT_EQ(oracles::cumulative_regret(replay(inst, {1, 1, 0}), inst), 0.0);
}

TEST(SlidingWindowRegret, FullWindowIsCumulative) {
  const Instance inst = explicit_instance(random_table(12, 3, 1));
  const Trace tr = replay(inst, {0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2});
  EXPECT_EQ(oracles::sliding_window_regret(tr, inst, 12), oracles::cumulative_regret(tr, inst));
}

TEST(SlidingWindowRegret, UnitWindowIsWorstDay) {
  const Instance inst = explicit_instance(random_table(10, 3, 2));
  const Trace tr = replay(inst, {2, 2, 1, 0, 0, 1, 2, 1, 0, 2});
  double worst = -1.0;
  for (Day t = 0; t < 10; ++t) {
    double m = 1.0;
    for (Arm i = 0; i < 3; ++i) m = std::min(m, inst.loss(t, i));
    worst = std::max(worst, tr.records[t].incurred - m);
  }
  EXPECT_EQ(oracles::sliding_window_regret(tr, inst, 1), worst);
}

TEST(SlidingWindowRegret, FourByThreeWindowTwoMatchesBruteForce) {
  const Instance inst = explicit_instance(random_table(4, 3, 3));
  const Trace tr = replay(inst, {0, 2, 1, 1});
  double best = -1e9;
  for (Day e = 1; e < 4; ++e) best = std::max(best, brute(tr, inst, e - 1, e));
  EXPECT_EQ(oracles::sliding_window_regret(tr, inst, 2), best);
}

TEST(SlidingWindowRegret, RangeRestrictsWindows) {
  const Instance inst = explicit_instance(random_table(16, 2, 4));
  std::vector<Arm> plays(16, 1);
  const Trace tr = replay(inst, plays);
  double best = -1e9;
  for (Day e = 8 + 3; e < 16; ++e) best = std::max(best, brute(tr, inst, e - 3, e));
  EXPECT_EQ(oracles::sliding_window_regret(tr, inst, 4, 8, 16), best);
  EXPECT_THROW(oracles::sliding_window_regret(tr, inst, 9, 8, 16), std::invalid_argument);
}

TEST(IntervalRegret, ZeroLossesSingleDay) {
  const Instance inst = explicit_instance({{0, 0}});
  EXPECT_EQ(oracles::interval_regret(replay(inst, {1}), inst).regret, 0.0);
}

TEST(IntervalRegret, MatchesExhaustiveLoop) {
  const Instance inst = explicit_instance(random_table(16, 3, 5));
  classic::Exp3 p(3, 0.3, RandomStreams(6));
  const Trace tr = run(p, inst);
  double best = -1e9;
  for (Day a = 0; a < 16; ++a)
    for (Day b = a; b < 16; ++b) best = std::max(best, brute(tr, inst, a, b));
  EXPECT_EQ(oracles::interval_regret(tr, inst).regret, best);
}

TEST(IntervalRegret, DominatesEveryWindowAndEqualsTheirMax) {
  const Instance inst = explicit_instance(random_table(20, 4, 7));
  classic::Exp3 p(4, 0.3, RandomStreams(8));
  const Trace tr = run(p, inst);
  const double interval = oracles::interval_regret(tr, inst).regret;
  double max_w = -1e9;
  for (Day W = 1; W <= 20; ++W) {
    const double w = oracles::sliding_window_regret(tr, inst, W);
    EXPECT_GE(interval, w);
    max_w = std::max(max_w, w);
  }
  EXPECT_EQ(interval, max_w);
  EXPECT_EQ(oracles::cumulative_regret(tr, inst), brute(tr, inst, 0, 19));
}

TEST(IntervalRegret, RefusesLargeHorizon) {
  InstanceConfig c;
  c.n = 2;
  c.horizon = 5000;
  const Instance inst(c);
  classic::Exp3 p(2, 0.1, RandomStreams(1));
  const Trace tr = run(p, inst);
  EXPECT_THROW(oracles::interval_regret(tr, inst), std::invalid_argument);
}

TEST(ExactBenchmark, SingleFilterArm) {
  const Instance inst = explicit_instance({{1, 0, 1}, {0, 1, 1}, {1, 1, 0}, {0, 0, 1}});
  const double bm = oracles::exact_benchmark(inst, 2, 0, 4, 0, {{1, 0}});
  EXPECT_EQ(bm, 0 + 1 + 1 + 0);
}

TEST(ExactBenchmark, SingleSegmentIsMinOverFilter) {
  const Instance inst = explicit_instance({{1, 0, 1}, {0, 1, 1}, {1, 1, 0}, {0, 0, 1}});
  const double bm = oracles::exact_benchmark(inst, 2, 0, 4, 0, {{1, 0}, {2, 0}});
  EXPECT_EQ(bm, 2.0);  // arm 1 totals 2, arm 2 totals 3
}

TEST(ExactBenchmark, StaggeredEntryComposesPerSegment) {
  // Two epochs of two days. Filter arm 1 is present from epoch 0, arm 2 joins
  // at epoch 1. Epoch 0: only arm 1 counts (loss 1). Epoch 1: min(arm 1 = 2,
  // arm 2 = 0) = 0. Total 1.
  const Instance inst = explicit_instance({{1, 1, 0}, {1, 0, 1}, {1, 1, 0}, {1, 1, 0}});
  EXPECT_EQ(oracles::exact_benchmark(inst, 2, 0, 4, 0, {{1, 0}, {2, 1}}), 1.0);
}

TEST(ExactBenchmark, MatchesPoolDynamicBenchmark) {
  const Instance inst = explicit_instance({{1, 1, 0}, {1, 0, 1}, {1, 1, 0}, {1, 1, 0}});
  pool::PoolState::Params p;
  p.n = 3;
  p.horizon = 4;
  p.epoch_len = 2;
  p.log_n = 3;
  p.log_horizon = 4;
  pool::PoolState st(p, pool::CoverRule::with_coefficient(0.0, 0.5));
  st.add(0, 0);
  st.add(1, 0);
  for (Day t = 0; t < 2; ++t) {
    st.ledger_update(0, inst.loss(t, 0));
    st.ledger_update(1, inst.loss(t, 1));
  }
  st.add(2, 1);
  for (Day t = 2; t < 4; ++t)
    for (Arm a = 0; a < 3; ++a) st.ledger_update(a, inst.loss(t, a));
  const double pool_bm = st.dynamic_benchmark(0, 2, {1, 2});
  EXPECT_EQ(pool_bm, oracles::exact_benchmark(inst, 2, 0, 4, 0, {{1, 0}, {2, 1}}));
}

TEST(RegretReport, CollectsMetrics) {
  const Instance inst = explicit_instance(random_table(32, 2, 9));
  classic::Exp3 p(2, 0.2, RandomStreams(10));
  const Trace tr = run(p, inst);
  const auto rep = oracles::regret_report(tr, inst, 8, true);
  EXPECT_EQ(rep.cumulative, oracles::cumulative_regret(tr, inst));
  EXPECT_EQ(rep.window_regret, oracles::sliding_window_regret(tr, inst, 8));
  EXPECT_EQ(*rep.interval, oracles::interval_regret(tr, inst).regret);
  EXPECT_EQ(rep.per_day.size(), 32u);
}

}  // namespace
