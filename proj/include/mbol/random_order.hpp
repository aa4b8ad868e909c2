#pragma once

// Single-query best-expert search for instances whose best arm has its losses
// spread in random order. The policy commits to one arm at a time and drops
// it once its scaled running loss exceeds the current error level C.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "mbol/core/policy.hpp"

namespace mbol::random_order {

/// B_C = (100 / (C + 1)) * sqrt(T / n) * log(nT).
inline double run_threshold(std::size_t c, std::size_t n, Day horizon) {
  const double nn = static_cast<double>(n);
  const double tt = static_cast<double>(horizon);
  return 100.0 / (static_cast<double>(c) + 1.0) * std::sqrt(tt / nn) * std::log(std::max(nn * tt, 2.0));
}

/// Level beyond which every arm passes the test; C never climbs past it.
inline std::size_t level_cap(std::size_t n, Day horizon) {
  return static_cast<std::size_t>(
             std::ceil(std::sqrt(static_cast<double>(horizon) / static_cast<double>(n)))) +
         1;
}

struct Eviction {
  Day day;
  Arm arm;
  std::size_t level;
  Day run_length;
};

class RandomOrderPolicy final : public Policy {
 public:
  RandomOrderPolicy(std::size_t n, Day horizon) : n_(n), horizon_(horizon) {
    if (n == 0) throw ConfigError("n must be >= 1");
    if (horizon == 0) throw ConfigError("T must be >= 1");
    cap_ = level_cap(n, horizon);
    refresh_threshold();
  }

  std::string name() const override { return "random_order"; }
  unsigned query_budget() const override { return 1; }

  Action act(Day) override { return {current_, std::nullopt}; }

  void observe(Day t, const Feedback& fb) override {
    ++run_len_;
    run_loss_ += fb.played_loss;
    if (run_len_ < checkpoint_) return;
    // Every run length past B_C is the checkpoint for eps = sqrt(B_C / |D_i|).
    const double len = static_cast<double>(run_len_);
    const double eps = std::sqrt(threshold_ / len);
    const double root = std::sqrt(static_cast<double>(n_) * static_cast<double>(horizon_));
    const double c = static_cast<double>(level_);
    const double scaled = static_cast<double>(horizon_) / len * run_loss_;
    ++tests_;
    if (scaled - c * root > c * eps / 2.0 * root) {
      last_eviction_ = Eviction{t, current_, level_, run_len_};
      ++evictions_;
      advance();
    }
  }

  /// C, i, |D_i|, run loss, B_C, n, T.
  std::size_t tracked_words() const override { return 7; }

  std::size_t level() const { return level_; }
  Arm current() const { return current_; }
  Day run_length() const { return run_len_; }
  double run_loss() const { return run_loss_; }
  double threshold() const { return threshold_; }
  Day checkpoint() const { return checkpoint_; }
  std::size_t level_limit() const { return cap_; }
  std::size_t tests() const { return tests_; }
  std::size_t evictions() const { return evictions_; }
  const std::optional<Eviction>& last_eviction() const { return last_eviction_; }

 private:
  void advance() {
    run_len_ = 0;
    run_loss_ = 0.0;
    if (++current_ == n_) {
      current_ = 0;
      if (level_ < cap_) {
        ++level_;
        refresh_threshold();
      }
    }
  }

  void refresh_threshold() {
    threshold_ = run_threshold(level_, n_, horizon_);
    checkpoint_ = static_cast<Day>(std::ceil(threshold_));
  }

  std::size_t n_;
  Day horizon_;
  std::size_t cap_ = 1;
  std::size_t level_ = 1;
  Arm current_ = 0;
  Day run_len_ = 0;
  double run_loss_ = 0.0;
  double threshold_ = 0.0;
  Day checkpoint_ = 1;
  std::size_t tests_ = 0;
  std::size_t evictions_ = 0;
  std::optional<Eviction> last_eviction_;
};

}  // namespace mbol::random_order
