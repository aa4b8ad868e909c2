#pragma once

// Interval regret with two queries per day. N = ceil(log2(nT)) interval
// algorithms ALG_k, each a two-query tree with horizon 2^k restarted on its
// own grid, are mixed by multiplicative weights on their estimated regret.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbol/core/policy.hpp"
#include "mbol/core/random.hpp"
#include "mbol/core/softmax.hpp"
#include "mbol/two_query.hpp"

namespace mbol::sliding {

struct SlidingConfig {
  std::size_t n = 1;
  Day horizon = 1;
  std::size_t depth = 0;  // requested depth of every ALG_k, clamped per horizon
  pool::ConstantsProfile profile = pool::ConstantsProfile::desk();
};

struct ExploitationDraw {
  std::size_t kappa;
  Arm arm;
};

struct ExplorationDraw {
  std::size_t kappa;
  Arm arm;
  double probability;
};

class SlidingPolicy final : public Policy {
 public:
  SlidingPolicy(SlidingConfig cfg, RandomStreams streams) : cfg_(std::move(cfg)), rng_(std::move(streams)) {
    if (cfg_.n == 0) throw ConfigError("n must be >= 1");
    if (cfg_.horizon == 0) throw ConfigError("T must be >= 1");
    const double nt = static_cast<double>(cfg_.n) * static_cast<double>(cfg_.horizon);
    count_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::log2(nt))));
    for (std::size_t k = 1; k <= count_; ++k) {
      Slot s;
      s.kappa = k;
      s.span = k >= 63 ? cfg_.horizon : std::min<Day>(Day{1} << k, cfg_.horizon);
      s.grid = k >= 63 ? ~Day{0} : Day{1} << k;
      s.eta = 1.0 / std::sqrt(static_cast<double>(cfg_.n) * std::ldexp(1.0, static_cast<int>(k)));
      s.weight = s.eta;
      s.depth = std::min(cfg_.depth, two_query::max_valid_depth(cfg_.n, s.span, cfg_.profile));
      slots_.push_back(std::move(s));
    }
  }

  std::string name() const override { return "sliding"; }
  unsigned query_budget() const override { return 2; }

  std::size_t algorithms() const { return count_; }
  double weight(std::size_t idx) const { return slots_.at(idx).weight; }
  double eta(std::size_t idx) const { return slots_.at(idx).eta; }
  Day grid(std::size_t idx) const { return slots_.at(idx).grid; }
  std::size_t depth(std::size_t idx) const { return slots_.at(idx).depth; }
  const two_query::Tree& algorithm(std::size_t idx) const { return *slots_.at(idx).tree; }

  /// q_t(k) = w_t(k) / sum w.
  std::vector<double> mixture_weights() const {
    std::vector<double> q(count_);
    double z = 0.0;
    for (std::size_t i = 0; i < count_; ++i) z += slots_[i].weight;
    for (std::size_t i = 0; i < count_; ++i) q[i] = slots_[i].weight / z;
    return q;
  }

  /// sum_k q(k) v^k over [n]: the distribution the played arm is drawn from.
  std::vector<double> play_distribution() const {
    std::vector<double> out(cfg_.n, 0.0);
    const auto q = mixture_weights();
    for (std::size_t i = 0; i < count_; ++i) slots_[i].tree->add_mixture(q[i], out);
    return out;
  }

  Action act(Day t) override {
    for (auto& s : slots_) {
      if (t % s.grid == 0) restart(s, t);
      s.tree->begin_day();
    }
    const auto exploit = exploitation_step();
    const auto explore = exploration_step();
    last_exploit_ = exploit;
    last_explore_ = explore;
    return {exploit.arm, explore.arm};
  }

  void observe(Day t, const Feedback& fb) override {
    const double loss = *fb.probe_loss;
    const Arm j = last_explore_.arm;
    // r_t(k) uses the day's distributions, so evaluate them before crediting.
    const auto q = mixture_weights();
    std::vector<double> v(count_);
    double mix = 0.0;
    for (std::size_t i = 0; i < count_; ++i) {
      v[i] = slots_[i].tree->probability(j);
      mix += q[i] * v[i];
    }
    slots_[last_explore_.kappa].tree->apply_probe(plan_, loss);

    const double est = loss / last_explore_.probability;
    for (std::size_t i = 0; i < count_; ++i) {
      auto& s = slots_[i];
      const double r = est * (mix - v[i]);
      const double rate = est > 0.0 ? std::min(s.eta, 0.5 / est) : s.eta;
      const double factor = 1.0 + rate * r;
      if (!(factor > 0.0)) throw std::logic_error("sliding: outer weight would turn non-positive");
      s.weight *= factor;
      if ((t + 1) % s.grid == 0) s.weight = s.eta;
    }
    for (auto& s : slots_) s.tree->end_day();
  }

  std::size_t tracked_words() const override {
    std::size_t w = 2;
    for (const auto& s : slots_) w += 5 + (s.tree ? s.tree->tracked_words() : 0);
    return w;
  }

  std::string dump() const {
    std::ostringstream os;
    for (const auto& s : slots_) {
      std::istringstream lines(s.tree->dump());
      for (std::string line; std::getline(lines, line);)
        os << "alg" << s.kappa << '#' << s.restarts - 1 << ' ' << line << '\n';
    }
    return os.str();
  }

  const ExplorationDraw& last_exploration() const { return last_explore_; }

 private:
  struct Slot {
    std::size_t kappa = 1;
    Day span = 1;
    Day grid = 1;
    double eta = 1.0;
    double weight = 1.0;
    std::size_t depth = 0;
    std::size_t restarts = 0;
    std::unique_ptr<two_query::Tree> tree;
  };

  void restart(Slot& s, Day t) {
    two_query::TreeConfig tc;
    tc.n = cfg_.n;
    tc.depth = s.depth;
    tc.horizon = std::min<Day>(s.span, cfg_.horizon - t);
    tc.profile = cfg_.profile;
    s.depth = std::min(s.depth, two_query::max_valid_depth(cfg_.n, tc.horizon, cfg_.profile));
    tc.depth = s.depth;
    const auto streams = rng_.child(derive_seed(stable_tag("alg"), s.kappa)).child(s.restarts);
    s.tree = std::make_unique<two_query::Tree>(tc, streams);
    ++s.restarts;
  }

  ExploitationDraw exploitation_step() {
    const auto q = mixture_weights();
    const std::size_t k = sample_index(q, rng_.exploitation);
    return {k, slots_[k].tree->sample_play(rng_.exploitation)};
  }

  ExplorationDraw exploration_step() {
    const std::size_t k = rng_.exploration.below(count_);
    plan_ = slots_[k].tree->plan_probe(rng_.exploration, static_cast<double>(count_));
    return {k, plan_.arm, plan_.probability};
  }

  SlidingConfig cfg_;
  RandomStreams rng_;
  std::size_t count_ = 1;
  std::vector<Slot> slots_;
  two_query::ProbePlan plan_;
  ExploitationDraw last_exploit_{0, 0};
  ExplorationDraw last_explore_{0, 0, 1.0};
};

}  // namespace mbol::sliding
