#pragma once

// One query per day. BaselinePolicy is the epoch pool with EXP3 inside each
// epoch and approximate-cover eviction; BoostPolicy stacks pools of growing
// epoch length and lets a softmax over meta-experts pick which level plays.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mbol/core/policy.hpp"
#include "mbol/core/random.hpp"
#include "mbol/core/softmax.hpp"
#include "mbol/epoch_pool.hpp"
#include "mbol/pool.hpp"

namespace mbol::single_query {

struct BaselineConfig {
  std::size_t n = 1;
  Day horizon = 1;
  pool::ConstantsProfile profile = pool::ConstantsProfile::desk();
  std::optional<Day> epoch;      // default T^{3/4}
  std::optional<double> gamma;   // default (n/B)^{1/3}
  double rho = 2.0 / 3.0;
};

inline Day baseline_epoch(Day horizon, const pool::ConstantsProfile& profile) {
  const Day b = profile.epoch(std::pow(static_cast<double>(horizon), 0.75), "single-query baseline");
  return std::min<Day>(b, std::max<Day>(horizon, 1));
}

/// T^{3/4} before the profile's epoch scale; the exploration rate follows it.
inline Day baseline_nominal_epoch(Day horizon) {
  return std::max<Day>(1, static_cast<Day>(std::llround(std::pow(static_cast<double>(horizon), 0.75))));
}

inline double baseline_gamma(std::size_t n, Day epoch) {
  const double g = std::cbrt(static_cast<double>(n) / static_cast<double>(epoch));
  return std::clamp(g, 1e-4, 0.5);
}

/// Each epoch: arrivals join P_1, then EXP3 in its exploration form runs over
/// the pool. An exploration day plays a uniform pool arm and credits
/// |P| * loss / gamma; other days sample softmax(-eta * epoch estimates).
/// Epoch ends run the merge cascade with approximate cover.
class BaselinePolicy final : public Policy {
 public:
  BaselinePolicy(BaselineConfig cfg, RandomStreams streams)
      : cfg_(validated(std::move(cfg))),
        epoch_(cfg_.epoch.value_or(baseline_epoch(cfg_.horizon, cfg_.profile))),
        gamma_(cfg_.gamma.value_or(baseline_gamma(cfg_.n, cfg_.epoch ? epoch_ : baseline_nominal_epoch(cfg_.horizon)))),
        pool_(params(cfg_, epoch_),
              pool::CoverRule::approximate(cfg_.rho, cfg_.profile.cover_c,
                                           cfg_.profile.approximate_n_factor(cfg_.n),
                                           pool::log_nt(cfg_.n, cfg_.horizon)),
              streams.child("pool")),
        rng_(std::move(streams)) {
    if (!(gamma_ > 0.0 && gamma_ <= 0.5)) throw ConfigError("gamma must lie in (0, 1/2]");
  }

  std::string name() const override { return "single_query"; }
  unsigned query_budget() const override { return 1; }

  Action act(Day t) override {
    if (pool_.begin_day(t)) pool_.tune_eta(static_cast<double>(std::max<std::size_t>(pool_.size(), 1)) / gamma_, cfg_.horizon);
    explored_.reset();
    if (pool_.empty()) return {static_cast<Arm>(rng_.exploitation.below(cfg_.n)), std::nullopt};
    if (rng_.exploration.bernoulli(gamma_)) {
      explored_ = rng_.exploration.below(pool_.size());
      ++exploration_days_;
      return {pool_.arms()[*explored_], std::nullopt};
    }
    return {pool_.sample(rng_.exploitation), std::nullopt};
  }

  void observe(Day t, const Feedback& fb) override {
    if (explored_) {
      pool_.credit_index(*explored_, static_cast<double>(pool_.size()) * fb.played_loss / gamma_);
    }
    pool_.end_day(t);
  }

  std::size_t tracked_words() const override { return pool_.tracked_words() + 3; }

  Day epoch_len() const { return epoch_; }
  double gamma() const { return gamma_; }
  std::size_t exploration_days() const { return exploration_days_; }
  const pool::EpochPool& pool() const { return pool_; }
  std::string dump() const { return pool_.state().dump(); }

 private:
  static BaselineConfig validated(BaselineConfig c) {
    if (c.n == 0) throw ConfigError("n must be >= 1");
    if (c.horizon == 0) throw ConfigError("T must be >= 1");
    if (c.epoch && *c.epoch == 0) throw ConfigError("epoch length must be >= 1");
    return c;
  }

  static pool::PoolState::Params params(const BaselineConfig& c, Day epoch) {
    pool::PoolState::Params p;
    p.n = c.n;
    p.horizon = c.horizon;
    p.epoch_len = epoch;
    p.log_n = c.n;
    p.log_horizon = c.horizon;
    p.profile = c.profile;
    return p;
  }

  BaselineConfig cfg_;
  Day epoch_;
  double gamma_;
  pool::EpochPool pool_;
  RandomStreams rng_;
  std::optional<std::size_t> explored_;
  std::size_t exploration_days_ = 0;
};

// ---------------------------------------------------------------------------

/// F(k) = 7 (3 * 7^k - 3^k) / (3 * 7^{k+1} - 3^{k+1}).
inline double boost_F(int k) {
  const double a = std::pow(7.0, k);
  const double b = std::pow(3.0, k);
  return 7.0 * (3.0 * a - b) / (3.0 * 7.0 * a - 3.0 * b);
}

/// G(k) = 2 * 7^{k+1} / (3 * 7^{k+1} - 3^{k+1}); G(-1) = 1.
inline double boost_G(int k) {
  const double a = std::pow(7.0, k + 1);
  const double b = std::pow(3.0, k + 1);
  return 2.0 * a / (3.0 * a - b);
}

/// B_k = n^{-1/G(k-1)} * T^{F(k)}.
inline double boost_epoch_exact(std::size_t n, int k, Day horizon, const pool::ConstantsProfile& profile) {
  double b = std::pow(static_cast<double>(horizon), boost_F(k));
  if (profile.schedule_uses_n) b *= std::pow(static_cast<double>(n), -1.0 / boost_G(k - 1));
  return b;
}

struct BoostConfig {
  std::size_t n = 1;
  Day horizon = 1;
  std::size_t depth = 0;
  std::size_t max_depth = 6;
  pool::ConstantsProfile profile = pool::ConstantsProfile::desk();
  std::optional<double> gamma_arm;   // default explore_scale * T^{-1/3}, at most 1/2
  std::optional<double> gamma_meta;  // default meta_explore_scale * T^{-1/3}, at most 1/2
};

/// Levels 0..k. Level j owns pool P_j with epoch B_j. For j >= 1 the level has
/// two meta-experts, "play from P_j" and "follow level j-1", whose estimates
/// restart every B_{j-1} days. A day explores a uniform arm of the union pool
/// with probability gamma_arm, follows a uniform meta-expert with probability
/// gamma_meta, and otherwise descends from level k through the meta softmaxes.
class BoostPolicy final : public Policy {
 public:
  BoostPolicy(BoostConfig cfg, RandomStreams streams) : cfg_(std::move(cfg)), rng_(std::move(streams)) {
    if (cfg_.n == 0) throw ConfigError("n must be >= 1");
    if (cfg_.horizon == 0) throw ConfigError("T must be >= 1");
    if (cfg_.depth > cfg_.max_depth) throw ConfigError("boost depth exceeds the configured maximum");
    const double cube = std::cbrt(static_cast<double>(cfg_.horizon));
    gamma_arm_ = cfg_.gamma_arm.value_or(std::min(0.5, cfg_.profile.explore_scale / cube));
    gamma_meta_ =
        cfg_.depth == 0 ? 0.0 : cfg_.gamma_meta.value_or(std::min(0.5, cfg_.profile.meta_explore_scale / cube));
    if (!(gamma_arm_ > 0.0 && gamma_arm_ <= 0.5)) throw ConfigError("gamma_arm must lie in (0, 1/2]");
    if (cfg_.depth > 0 && !(gamma_meta_ > 0.0 && gamma_meta_ <= 0.5))
      throw ConfigError("gamma_meta must lie in (0, 1/2]");
    if (gamma_arm_ + gamma_meta_ > 1.0) throw ConfigError("gamma_arm + gamma_meta must not exceed 1");

    const double L = pool::log_nt(cfg_.n, cfg_.horizon);
    const auto rule = pool::CoverRule::relaxed(gamma_arm_, cfg_.profile.cover_c, L);
    for (std::size_t j = 0; j <= cfg_.depth; ++j) {
      const Day b = std::min<Day>(
          cfg_.profile.epoch(boost_epoch_exact(cfg_.n, static_cast<int>(j), cfg_.horizon, cfg_.profile),
                             "boost level " + std::to_string(j)),
          cfg_.horizon);
      pool::PoolState::Params p;
      p.n = cfg_.n;
      p.horizon = cfg_.horizon;
      p.epoch_len = b;
      p.log_n = cfg_.n;
      p.log_horizon = cfg_.horizon;
      p.profile = cfg_.profile;
      levels_.push_back(Level{pool::EpochPool(p, rule, rng_.child(derive_seed(stable_tag("level"), j))),
                              {0.0, 0.0}, 1.0, b});
    }
    for (std::size_t j = 1; j <= cfg_.depth; ++j) {
      const double s = static_cast<double>(meta_count()) / gamma_meta_;
      levels_[j].meta_eta = cfg_.profile.meta_rate_scale * std::sqrt(2.0 * std::log(2.0) / (s * static_cast<double>(levels_[j - 1].epoch)));
    }
  }

  std::string name() const override { return "boost_k" + std::to_string(cfg_.depth); }
  unsigned query_budget() const override { return 1; }

  std::size_t meta_count() const { return 2 * cfg_.depth; }
  double gamma_arm() const { return gamma_arm_; }
  double gamma_meta() const { return gamma_meta_; }
  Day epoch_len(std::size_t level) const { return levels_.at(level).epoch; }
  std::size_t exploration_days() const { return exploration_days_; }
  double meta_estimate(std::size_t level, int which) const { return levels_.at(level).meta[which]; }
  const pool::EpochPool& pool(std::size_t level) const { return levels_.at(level).pool; }

  Action act(Day t) override {
    for (std::size_t j = 0; j < levels_.size(); ++j) {
      auto& lv = levels_[j];
      if (lv.pool.begin_day(t)) lv.pool.tune_eta(second_moment_, cfg_.horizon);
      if (j >= 1 && t % levels_[j - 1].epoch == 0) lv.meta = {0.0, 0.0};
    }
    union_.clear();
    for (const auto& lv : levels_) union_.insert(union_.end(), lv.pool.arms().begin(), lv.pool.arms().end());
    std::sort(union_.begin(), union_.end());
    union_.erase(std::unique(union_.begin(), union_.end()), union_.end());
    second_moment_ = static_cast<double>(std::max<std::size_t>(union_.size(), 1)) / gamma_arm_;

    kind_ = Kind::exploit;
    const double u = rng_.exploration.uniform();
    if (u < gamma_arm_ && !union_.empty()) {
      kind_ = Kind::arm;
      scale_ = static_cast<double>(union_.size()) / gamma_arm_;
      played_ = union_[rng_.exploration.below(union_.size())];
      ++exploration_days_;
    } else if (u >= gamma_arm_ && u < gamma_arm_ + gamma_meta_) {
      kind_ = Kind::meta;
      const std::size_t idx = rng_.exploration.below(meta_count());
      meta_level_ = 1 + idx / 2;
      meta_which_ = static_cast<int>(idx % 2);
      scale_ = static_cast<double>(meta_count()) / gamma_meta_;
      played_ = meta_which_ == 0 ? levels_[meta_level_].pool.sample(rng_.exploration)
                                 : sample_level(meta_level_ - 1, rng_.exploration);
      ++exploration_days_;
    } else {
      played_ = sample_level(cfg_.depth, rng_.exploitation);
    }
    return {played_, std::nullopt};
  }

  void observe(Day t, const Feedback& fb) override {
    if (kind_ == Kind::arm) {
      for (auto& lv : levels_) lv.pool.credit(played_, scale_ * fb.played_loss);
    } else if (kind_ == Kind::meta) {
      levels_[meta_level_].meta[meta_which_] += scale_ * fb.played_loss;
    }
    for (auto& lv : levels_) lv.pool.end_day(t);
  }

  std::size_t tracked_words() const override {
    std::size_t w = 4;
    for (const auto& lv : levels_) w += lv.pool.tracked_words() + 4;
    return w;
  }

  std::string dump() const {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t j = 0; j < levels_.size(); ++j) {
      std::istringstream lines(levels_[j].pool.state().dump());
      for (std::string line; std::getline(lines, line);) os << "level" << j << ' ' << line << '\n';
      for (const auto& ev : levels_[j].pool.state().evictions())
        os << "level" << j << " evicted arm=" << ev.arm << " epoch=" << ev.epoch << '\n';
    }
    return os.str();
  }

 private:
  enum class Kind { exploit, arm, meta };

  struct Level {
    pool::EpochPool pool;
    std::array<double, 2> meta;
    double meta_eta;
    Day epoch;
  };

  Arm sample_level(std::size_t j, Stream& s) const {
    for (;; --j) {
      const auto& lv = levels_[j];
      if (j == 0) return lv.pool.sample(s);
      const auto q = softmax_of_losses(lv.meta, lv.meta_eta);
      if (s.uniform() < q[0]) return lv.pool.sample(s);
    }
  }

  BoostConfig cfg_;
  RandomStreams rng_;
  double gamma_arm_ = 0.0;
  double gamma_meta_ = 0.0;
  std::vector<Level> levels_;
  std::vector<Arm> union_;
  double second_moment_ = 1.0;
  Kind kind_ = Kind::exploit;
  double scale_ = 0.0;
  Arm played_ = 0;
  std::size_t meta_level_ = 0;
  int meta_which_ = 0;
  std::size_t exploration_days_ = 0;
};

}  // namespace mbol::single_query
