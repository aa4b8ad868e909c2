#include <gtest/gtest.h>

#include <cmath>

#include "mbol/oracles.hpp"
#include "mbol/random_order.hpp"

namespace {

using namespace mbol;
using namespace mbol::random_order;

std::vector<std::vector<double>> all_ones_except(std::size_t n, Day T, Arm best) {
  std::vector<std::vector<double>> rows(T, std::vector<double>(n, 1.0));
  for (auto& r : rows) r[best] = 0.0;
  return rows;
}

TEST(RandomOrder, Threshold) {
  EXPECT_DOUBLE_EQ(run_threshold(1, 64, 1 << 16), 50.0 * 32.0 * std::log(64.0 * 65536.0));
  EXPECT_DOUBLE_EQ(run_threshold(3, 64, 1 << 16), 25.0 * 32.0 * std::log(64.0 * 65536.0));
  EXPECT_EQ(level_cap(4, 64), 5u);
}

TEST(RandomOrder, AllOnesArmEvictedAtFirstCheckpoint) {
  const Day T = 1 << 16;
  const Instance inst = explicit_instance(all_ones_except(64, T, 63));
  RandomOrderPolicy p(64, T);
  const Day cp = p.checkpoint();
  ASSERT_LT(cp, T);
  for (Day t = 0; t < cp; ++t) step(p, inst, t);
  ASSERT_TRUE(p.last_eviction().has_value());
  EXPECT_EQ(p.last_eviction()->arm, 0u);
  EXPECT_EQ(p.last_eviction()->run_length, cp);
  EXPECT_EQ(p.last_eviction()->day, cp - 1);
  EXPECT_EQ(p.current(), 1u);
}

TEST(RandomOrder, ZeroLossArmIsNeverEvicted) {
  const Day T = 1 << 18;
  const Instance inst = explicit_instance(all_ones_except(64, T, 2));
  RandomOrderPolicy p(64, T);
  run(p, inst);
  EXPECT_EQ(p.current(), 2u);
  EXPECT_EQ(p.evictions(), 2u);
  EXPECT_EQ(p.level(), 1u);
  EXPECT_GT(p.tests(), p.evictions());
}

TEST(RandomOrder, LevelStaysNearGammaAndNeverDrops) {
  const Day T = 1 << 16;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    InstanceConfig c;
    c.n = 16;
    c.horizon = T;
    c.model = RandomOrderBest{2.0, 11, HotStreak{}};
    c.seed = seed;
    const Instance inst(c);
    RandomOrderPolicy p(16, T);
    std::size_t prev = p.level();
    for (Day t = 0; t < T; ++t) {
      step(p, inst, t);
      ASSERT_GE(p.level(), prev);
      prev = p.level();
    }
    EXPECT_LE(p.level(), 3u);
  }
}

TEST(RandomOrder, ConstantMemory) {
  const Instance inst = explicit_instance(all_ones_except(4, 256, 1));
  RandomOrderPolicy p(4, 256);
  EXPECT_EQ(run(p, inst).peak_memory_words, 7u);
}

TEST(RandomOrder, RejectsBadConfig) {
  EXPECT_THROW(RandomOrderPolicy(0, 10), ConfigError);
  EXPECT_THROW(RandomOrderPolicy(2, 0), ConfigError);
}

}  // namespace
