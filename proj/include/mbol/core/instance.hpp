#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "mbol/core/random.hpp"

namespace mbol {

using Arm = std::size_t;  // 0-based
using Day = std::size_t;  // 0-based; day t of the text is Day t-1 here

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Loss models. Every model describes per-day Bernoulli means; the instance
// turns means into {0,1} draws (binary mode) or mean-preserving reals in
// [0,1], with the randomness a pure function of (seed, day, arm).

/// Best arm has mean 0.5 - gap, every other arm 0.5 + gap.
struct HiddenBest {
  double gap = 0.25;
  Arm best = 0;
};

/// Per-arm means switch from `first` to `second` on `switch_day`.
struct TwoPhase {
  Day switch_day = 0;
  std::vector<double> first;
  std::vector<double> second;
};

/// Time is cut into blocks of `streak_len` days; in block b the arm b mod n is
/// "hot" (mean streak_rate) and everyone else sits at off_rate.
struct HotStreak {
  Day streak_len = 64;
  double streak_rate = 0.1;
  double off_rate = 0.9;
};

struct IidMeans {
  std::vector<double> means;
};

/// The best arm suffers exactly floor(gamma * sqrt(n T)) unit losses at
/// uniformly permuted days; the remaining arms follow a HotStreak schedule
/// among themselves.
struct RandomOrderBest {
  double gamma = 1.0;
  Arm best = 0;
  HotStreak distractors{};
};

/// Dense T x n table, row = day.
struct ExplicitTable {
  std::vector<std::vector<double>> rows;
};

using LossModel =
    std::variant<HiddenBest, TwoPhase, HotStreak, IidMeans, RandomOrderBest, ExplicitTable>;

struct InstanceConfig {
  std::size_t n = 1;
  Day horizon = 1;
  LossModel model = HiddenBest{};
  std::uint64_t seed = 0;
  bool binary = true;
};

namespace detail {

inline void check_rate(double r, const char* what) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw ConfigError(std::string(what) + " must lie in [0,1], got " + std::to_string(r));
  }
}

inline std::size_t random_order_ones(double gamma, std::size_t n, Day horizon) {
  return static_cast<std::size_t>(
      std::floor(gamma * std::sqrt(static_cast<double>(n) * static_cast<double>(horizon))));
}

inline double hot_streak_mean(const HotStreak& h, Day t, std::size_t slot, std::size_t slots) {
  const std::size_t hot = (t / h.streak_len) % slots;
  return hot == slot ? h.streak_rate : h.off_rate;
}

}  // namespace detail

/// An oblivious adversarial problem: every loss is fixed before play begins.
/// Immutable and cheap to copy; safe to share across threads.
class Instance {
 public:
  explicit Instance(InstanceConfig cfg) : cfg_(std::move(cfg)) {
    validate();
    noise_seed_ = derive_seed(cfg_.seed, "model_noise");
    if (const auto* ro = std::get_if<RandomOrderBest>(&cfg_.model)) {
      build_random_order_column(*ro);
    }
  }

  std::size_t n() const noexcept { return cfg_.n; }
  Day horizon() const noexcept { return cfg_.horizon; }
  std::uint64_t seed() const noexcept { return cfg_.seed; }
  bool binary() const noexcept { return cfg_.binary; }
  const LossModel& model() const noexcept { return cfg_.model; }
  const InstanceConfig& config() const noexcept { return cfg_; }

  /// The regime the guarantees are stated for; callers may warn otherwise.
  bool paper_regime() const noexcept { return cfg_.horizon >= cfg_.n; }

  /// Loss of `arm` on day `t`. Pure: any call order, any number of calls.
  double loss(Day t, Arm arm) const {
    if (t >= cfg_.horizon || arm >= cfg_.n) throw std::out_of_range("loss(t, arm) out of range");
    if (const auto* tab = std::get_if<ExplicitTable>(&cfg_.model)) return tab->rows[t][arm];
    if (const auto* ro = std::get_if<RandomOrderBest>(&cfg_.model)) {
      if (arm == ro->best) return (*best_column_)[t];
    }
    return realize(mean(t, arm), t, arm);
  }

  /// Bernoulli mean behind loss(t, arm).
  double mean(Day t, Arm arm) const {
    return std::visit(
        [&](const auto& m) -> double {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, HiddenBest>) {
            return arm == m.best ? 0.5 - m.gap : 0.5 + m.gap;
          } else if constexpr (std::is_same_v<M, TwoPhase>) {
            return t < m.switch_day ? m.first[arm] : m.second[arm];
          } else if constexpr (std::is_same_v<M, HotStreak>) {
            return detail::hot_streak_mean(m, t, arm, cfg_.n);
          } else if constexpr (std::is_same_v<M, IidMeans>) {
            return m.means[arm];
          } else if constexpr (std::is_same_v<M, RandomOrderBest>) {
            if (arm == m.best) {
              return static_cast<double>(detail::random_order_ones(m.gamma, cfg_.n, cfg_.horizon)) /
                     static_cast<double>(cfg_.horizon);
            }
            const std::size_t slots = cfg_.n - 1;
            const std::size_t slot = arm < m.best ? arm : arm - 1;
            return detail::hot_streak_mean(m.distractors, t, slot, slots);
          } else {
            return m.rows[t][arm];
          }
        },
        cfg_.model);
  }

  /// Index of the arm with the smallest total loss (smallest index on ties).
  Arm best_arm() const {
    Arm best = 0;
    double best_loss = 0.0;
    for (Arm i = 0; i < cfg_.n; ++i) {
      double s = 0.0;
      for (Day t = 0; t < cfg_.horizon; ++t) s += loss(t, i);
      if (i == 0 || s < best_loss) {
        best = i;
        best_loss = s;
      }
    }
    return best;
  }

 private:
  double realize(double mu, Day t, Arm arm) const {
    const double u =
        Stream(derive_seed(derive_seed(noise_seed_, static_cast<std::uint64_t>(t)), arm)).uniform();
    if (cfg_.binary) return u < mu ? 1.0 : 0.0;
    // Mean-preserving spread that stays inside [0,1].
    return mu + (2.0 * u - 1.0) * std::min(mu, 1.0 - mu);
  }

  void build_random_order_column(const RandomOrderBest& ro) {
    const Day horizon = cfg_.horizon;
    const std::size_t ones = detail::random_order_ones(ro.gamma, cfg_.n, horizon);
    // The unit losses sit at a uniformly permuted set of days (partial
    // Fisher-Yates over [T]).
    std::vector<Day> days(horizon);
    for (Day t = 0; t < horizon; ++t) days[t] = t;
    Stream s(derive_seed(noise_seed_, "random_order_permutation"));
    for (std::size_t k = 0; k < ones; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(s.below(horizon - k));
      std::swap(days[k], days[j]);
    }
    auto col = std::make_shared<std::vector<double>>(horizon, 0.0);
    for (std::size_t k = 0; k < ones; ++k) (*col)[days[k]] = 1.0;
    best_column_ = std::move(col);
  }

  void validate() const {
    if (cfg_.n == 0) throw ConfigError("n must be >= 1");
    if (cfg_.horizon == 0) throw ConfigError("T must be >= 1");
    const std::size_t n = cfg_.n;
    std::visit(
        [&](const auto& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, HiddenBest>) {
            if (!(m.gap >= 0.0 && m.gap <= 0.5)) throw ConfigError("HiddenBest gap must lie in [0,0.5]");
            if (m.best >= n) throw ConfigError("HiddenBest best arm out of range");
          } else if constexpr (std::is_same_v<M, TwoPhase>) {
            if (m.first.size() != n || m.second.size() != n) {
              throw ConfigError("TwoPhase needs n means per phase");
            }
            for (double r : m.first) detail::check_rate(r, "TwoPhase mean");
            for (double r : m.second) detail::check_rate(r, "TwoPhase mean");
            if (m.switch_day > cfg_.horizon) throw ConfigError("TwoPhase switch day beyond horizon");
          } else if constexpr (std::is_same_v<M, HotStreak>) {
            if (m.streak_len == 0) throw ConfigError("HotStreak streak length must be >= 1");
            detail::check_rate(m.streak_rate, "HotStreak streak rate");
            detail::check_rate(m.off_rate, "HotStreak off rate");
          } else if constexpr (std::is_same_v<M, IidMeans>) {
            if (m.means.size() != n) throw ConfigError("IID model needs n means");
            for (double r : m.means) detail::check_rate(r, "IID mean");
          } else if constexpr (std::is_same_v<M, RandomOrderBest>) {
            if (n < 2) throw ConfigError("RandomOrderBest needs n >= 2");
            if (m.best >= n) throw ConfigError("RandomOrderBest best arm out of range");
            if (!(m.gamma >= 0.0)) throw ConfigError("RandomOrderBest gamma must be >= 0");
            if (detail::random_order_ones(m.gamma, n, cfg_.horizon) > cfg_.horizon) {
              throw ConfigError("RandomOrderBest gamma * sqrt(nT) exceeds T");
            }
            if (m.distractors.streak_len == 0) throw ConfigError("HotStreak streak length must be >= 1");
            detail::check_rate(m.distractors.streak_rate, "HotStreak streak rate");
            detail::check_rate(m.distractors.off_rate, "HotStreak off rate");
          } else {
            if (m.rows.size() != cfg_.horizon) throw ConfigError("explicit table needs T rows");
            for (const auto& row : m.rows) {
              if (row.size() != n) throw ConfigError("explicit table needs n columns");
              for (double r : row) detail::check_rate(r, "explicit loss");
            }
          }
        },
        cfg_.model);
  }

  InstanceConfig cfg_;
  std::uint64_t noise_seed_ = 0;
  std::shared_ptr<const std::vector<double>> best_column_;
};

inline Instance build_instance(InstanceConfig cfg) { return Instance(std::move(cfg)); }

/// Convenience for the tiny hand-written oracles in tests.
inline Instance explicit_instance(std::vector<std::vector<double>> rows, std::uint64_t seed = 0) {
  if (rows.empty()) throw ConfigError("T must be >= 1");
  InstanceConfig cfg;
  cfg.horizon = rows.size();
  cfg.n = rows.front().size();
  cfg.model = ExplicitTable{std::move(rows)};
  cfg.seed = seed;
  return Instance(std::move(cfg));
}

}  // namespace mbol
