#include <gtest/gtest.h>

#include <cmath>

#include "mbol/pool.hpp"

namespace {

using namespace mbol;
using namespace mbol::pool;

PoolState::Params params(std::size_t n, Day T, Day B) {
  PoolState::Params p;
  p.n = n;
  p.horizon = T;
  p.epoch_len = B;
  p.log_n = n;
  p.log_horizon = T;
  p.profile = ConstantsProfile::desk();
  return p;
}

TEST(CoverRule, SlackWithCoefficient) {
  const auto r = CoverRule::with_coefficient(4.0, 0.5);
  EXPECT_DOUBLE_EQ(r.slack(16.0), 16.0);
  EXPECT_EQ(r.slack(0.0), 0.0);
}

TEST(CoverRule, Kinds) {
  EXPECT_DOUBLE_EQ(CoverRule::approximate(0.5, 0.25, 1.0, 2.0).slack(64.0), 0.25 * 2.0 * 8.0);
  EXPECT_DOUBLE_EQ(CoverRule::relaxed(0.25, 1.0, 3.0).slack(16.0), 3.0 * 8.0);
  EXPECT_DOUBLE_EQ(CoverRule::two_query(2.0, 1.5).slack(9.0), 9.0);
  EXPECT_THROW(CoverRule::approximate(1.0, 1.0, 1.0, 1.0), ConfigError);
  EXPECT_THROW(CoverRule::relaxed(0.75, 1.0, 1.0), ConfigError);
}

TEST(CoverRule, CoveredMeansNotClearlyBetter) {
  const auto r = CoverRule::with_coefficient(4.0, 0.5);
  EXPECT_TRUE(is_covered(10.0, 10.0, 16.0, r));
  EXPECT_TRUE(is_covered(-6.0, 10.0, 16.0, r));
  EXPECT_FALSE(is_covered(-6.5, 10.0, 16.0, r));
}

TEST(TwoAdicValuation, Values) {
  EXPECT_EQ(two_adic_valuation(1), 0u);
  EXPECT_EQ(two_adic_valuation(4), 2u);
  EXPECT_EQ(two_adic_valuation(6), 1u);
  EXPECT_EQ(two_adic_valuation(96), 5u);
  EXPECT_THROW(two_adic_valuation(0), std::invalid_argument);
}

TEST(Profile, DeskAndPaperThresholds) {
  const auto d = ConstantsProfile::desk();
  EXPECT_DOUBLE_EQ(d.merge_target(2.0), 8.0);
  EXPECT_DOUBLE_EQ(d.small_threshold(2.0), 4.0);
  EXPECT_DOUBLE_EQ(d.mark_rate(4.0), 0.25);
  EXPECT_EQ(d.merge_rounds(2.0), 32u);
  EXPECT_EQ(d.round_epoch(1.0, "x"), 4u);
  const auto p = ConstantsProfile::paper();
  EXPECT_DOUBLE_EQ(p.merge_target(2.0), 1024.0);
  EXPECT_DOUBLE_EQ(p.small_threshold(2.0), 32.0);
  EXPECT_DOUBLE_EQ(p.mark_rate(2.0), 1.0 / 16.0);
  EXPECT_THROW(p.round_epoch(1.2, "x"), ConfigError);
  EXPECT_EQ(p.round_epoch(2.4, "x"), 2u);
}

TEST(PoolState, LedgerIsAdditive) {
  PoolState st(params(8, 64, 4), CoverRule::with_coefficient(1.0, 0.5));
  st.add(3, 0);
  st.ledger_update(3, 3.0);
  st.ledger_update(3, 5.0);
  EXPECT_DOUBLE_EQ(st.find(3)->total(), 8.0);
  EXPECT_EQ(st.find(3)->credits, 2u);
  EXPECT_THROW(st.ledger_update(4, 1.0), std::out_of_range);
  EXPECT_FALSE(st.add(3, 1));
}

TEST(PoolState, EntryOpensSegmentsInOtherLedgers) {
  PoolState st(params(8, 64, 4), CoverRule::with_coefficient(1.0, 0.5));
  st.add(0, 0);
  st.ledger_update(0, 2.0);
  st.add(1, 2);
  st.ledger_update(0, 1.0);
  const PoolEntry* e = st.find(0);
  ASSERT_EQ(e->segments.size(), 2u);
  EXPECT_DOUBLE_EQ(e->span(0, 2), 2.0);
  EXPECT_DOUBLE_EQ(e->span(2, 3), 1.0);
}

TEST(PoolState, FilterKeepsClearlyBetterArms) {
  // Slack over a 4-day lifespan: 1 * 4^0.5 = 2.
  PoolState st(params(8, 64, 4), CoverRule::with_coefficient(1.0, 0.5));
  st.add(0, 0);
  st.add(1, 0);
  st.add(2, 0);
  st.ledger_update(0, 10.0);  // filter
  st.ledger_update(1, 7.0);   // better by 3 > 2: survives
  st.ledger_update(2, 8.5);   // better by 1.5: covered
  const auto survivors = st.filter({0}, {1, 2}, 1);
  ASSERT_EQ(survivors.size(), 1u);
  EXPECT_EQ(survivors[0], 1u);
  EXPECT_EQ(st.filter({}, {1, 2}, 1).size(), 2u);
}

TEST(PoolState, MergeOfSmallOrEmptySetIsUnchanged) {
  PoolState st(params(8, 64, 4), CoverRule::with_coefficient(0.0, 0.5));
  for (Arm a = 0; a < 3; ++a) st.add(a, 0);
  Stream s(1);
  EXPECT_TRUE(st.merge({}, 1, s).empty());
  const std::vector<std::size_t> members{0, 1, 2};
  EXPECT_EQ(st.merge(members, 1, s), members);
}

TEST(PoolState, EpochTickCascadesByValuation) {
  PoolState st(params(4, 1024, 4), CoverRule::with_coefficient(1.0, 0.5));
  Stream f(2);
  st.add(0, 0);
  const auto a1 = st.epoch_tick(1, f);
  EXPECT_TRUE(a1.empty());
  const auto a4 = st.epoch_tick(4, f);
  ASSERT_EQ(a4.size(), 2u);
  EXPECT_EQ(a4[0].from, 1u);
  EXPECT_EQ(a4[0].to, 2u);
  EXPECT_EQ(a4[1].from, 2u);
  EXPECT_EQ(a4[1].to, 3u);
  EXPECT_EQ(st.epoch_tick(6, f).size(), 1u);
  EXPECT_EQ(st.find(0)->level, 3u);
}

TEST(PoolState, DuplicateArmsAreMergedAway) {
  const std::size_t n = 400;
  PoolState st(params(n, 1 << 14, 16), CoverRule::with_coefficient(0.5, 0.5));
  for (Arm a = 0; a < 200; ++a) st.add(a, 0);
  for (Arm a = 0; a < 200; ++a) st.ledger_update(a, 8.0);
  Stream f(3);
  const auto actions = st.epoch_tick(2, f);
  ASSERT_EQ(actions.size(), 1u);
  EXPECT_EQ(actions[0].input_size, 200u);
  EXPECT_LE(static_cast<double>(actions[0].output_size), st.profile().merge_target(st.lognt()) * 2);
  EXPECT_EQ(st.evictions().size(), 200u - actions[0].output_size);
}

TEST(PoolState, BeginEpochSamplesAboutOneArm) {
  PoolState st(params(1000, 1 << 20, 4), CoverRule::with_coefficient(1.0, 0.5));
  Stream s(4);
  std::size_t joined = 0;
  for (std::size_t e = 0; e < 400; ++e) joined += st.begin_epoch(e, s).size();
  EXPECT_NEAR(static_cast<double>(joined) / 400.0, 1.0, 0.25);
}

TEST(PoolState, DumpIsSortedByArm) {
  PoolState st(params(8, 64, 4), CoverRule::with_coefficient(1.0, 0.5));
  st.add(5, 0);
  st.add(2, 0);
  st.ledger_update(5, 1.5);
  EXPECT_EQ(st.dump(), "arm=2 level=1 entry=0 credits=0 segments=0:0\narm=5 level=1 entry=0 credits=1 segments=0:1.5\n");
}

}  // namespace
