#pragma once

// A PoolState plus the per-epoch play state every pool-based policy needs:
// the epoch clock, arrivals and merges on epoch boundaries, and a softmax
// over accumulated estimates that survives across epochs.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "mbol/core/random.hpp"
#include "mbol/core/softmax.hpp"
#include "mbol/pool.hpp"

namespace mbol::pool {

class EpochPool {
 public:
  EpochPool(PoolState::Params params, CoverRule rule, const RandomStreams& streams)
      : horizon_(params.horizon),
        pool_(std::move(params), rule),
        arrivals_(streams.arm_sampling),
        filtration_(streams.pool_filtration) {}

  /// Call before anything else on local day t. Returns true when t opens an
  /// epoch. Arrivals join with the current mixture's estimate as their
  /// starting accumulator, so the softmax keeps what it learned about the
  /// arms that stayed.
  bool begin_day(Day t) {
    if (t % pool_.epoch_len() != 0) return false;
    double start = 0.0;
    if (!arms_.empty()) {
      const auto& p = distribution();
      for (std::size_t k = 0; k < arms_.size(); ++k) start += p[k] * acc_[k];
    }
    pool_.begin_epoch(t / pool_.epoch_len(), arrivals_);
    sync(start);
    return true;
  }

  /// Call after the day's feedback. Runs the merge cascade when t closes an epoch.
  void end_day(Day t) {
    const Day done = t + 1;
    if (done % pool_.epoch_len() == 0) {
      pool_.epoch_tick(done / pool_.epoch_len(), filtration_);
      sync(0.0);
    }
  }

  /// Learning rate for the current epoch's softmax.
  void set_eta(double eta) {
    eta_ = eta;
    dirty_ = true;
  }

  /// Hedge tuning over `days` days for estimates whose per-day second moment
  /// is at most `second_moment`.
  void tune_eta(double second_moment, Day days) {
    const double m = static_cast<double>(std::max<std::size_t>(arms_.size(), 2));
    set_eta(std::sqrt(2.0 * std::log(m) / (std::max(second_moment, 1.0) * static_cast<double>(std::max<Day>(days, 1)))));
  }

  /// Pool arms in ledger order; stable for the whole epoch.
  const std::vector<Arm>& arms() const { return arms_; }
  bool empty() const { return arms_.empty(); }
  std::size_t size() const { return arms_.size(); }

  /// Adds an estimate to the arm's ledger and play accumulator. Returns false
  /// when the arm is not tracked here.
  bool credit(Arm a, double value) {
    for (std::size_t k = 0; k < arms_.size(); ++k) {
      if (arms_[k] == a) {
        acc_[k] += value;
        pool_.ledger_update(a, value);
        dirty_ = true;
        return true;
      }
    }
    return false;
  }

  void credit_index(std::size_t k, double value) {
    acc_[k] += value;
    pool_.ledger_update(arms_[k], value);
    dirty_ = true;
  }

  const std::vector<double>& distribution() const {
    if (dirty_) {
      probs_ = softmax_of_losses(acc_, eta_);
      dirty_ = false;
    }
    return probs_;
  }

  /// Draw from the epoch softmax, or uniformly from [n] while the pool is empty.
  Arm sample(Stream& s) const {
    if (arms_.empty()) return static_cast<Arm>(s.below(pool_.n()));
    return arms_[sample_index(distribution(), s)];
  }

  /// Adds `mass` times the play distribution over [n] into `out`.
  void add_mixture(double mass, std::vector<double>& out) const {
    if (arms_.empty()) {
      const double u = mass / static_cast<double>(out.size());
      for (double& x : out) x += u;
      return;
    }
    const auto& p = distribution();
    for (std::size_t k = 0; k < arms_.size(); ++k) out[arms_[k]] += mass * p[k];
  }

  /// Probability that sample() returns `a`.
  double probability(Arm a) const {
    if (arms_.empty()) return 1.0 / static_cast<double>(pool_.n());
    const auto& p = distribution();
    for (std::size_t k = 0; k < arms_.size(); ++k)
      if (arms_[k] == a) return p[k];
    return 0.0;
  }

  const PoolState& state() const { return pool_; }
  Day horizon() const { return horizon_; }
  double eta() const { return eta_; }
  std::span<const double> accumulators() const { return acc_; }

  /// Ledger words, plus one accumulator and one id per pool arm, plus eta.
  std::size_t tracked_words() const { return pool_.tracked_words() + 2 * arms_.size() + 1; }

 private:
  Day horizon_;

  /// Re-aligns arms/accumulators with the pool; arms not seen before start at `fresh`.
  void sync(double fresh) {
    std::vector<Arm> arms;
    std::vector<double> acc;
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& e : pool_.entries()) {
      arms.push_back(e.arm);
      double v = fresh;
      for (std::size_t k = 0; k < arms_.size(); ++k)
        if (arms_[k] == e.arm) v = acc_[k];
      acc.push_back(v);
      lo = std::min(lo, v);
    }
    // Only differences matter to the softmax; keep the numbers small.
    for (double& v : acc) v -= lo;
    arms_ = std::move(arms);
    acc_ = std::move(acc);
    dirty_ = true;
  }

  PoolState pool_;
  Stream arrivals_;
  Stream filtration_;
  std::vector<Arm> arms_;
  std::vector<double> acc_;
  double eta_ = 1.0;
  mutable std::vector<double> probs_;
  mutable bool dirty_ = true;
};

}  // namespace mbol::pool
