#pragma once

// Two queries per day: the play query incurs loss and never updates anything;
// the free query feeds every estimate. Baseline_0 is one epoch pool; Baseline_k
// combines a horizon-T copy of Baseline_{k-1} (A1) with one restarted every
// epoch (A2) through a softmax over meta-estimates.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
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

namespace mbol::two_query {

struct TreeConfig {
  std::size_t n = 1;
  std::size_t depth = 0;
  Day horizon = 1;
  pool::ConstantsProfile profile = pool::ConstantsProfile::desk();
  /// Outer softmax rate is meta_eta_scale / sqrt(B).
  double meta_eta_scale = 1.0;
  /// Multiplies the restart epochs of internal nodes (pool epochs at the
  /// leaves use profile.epoch_scale).
  double restart_scale = 1.0;
};

/// Epoch length of Baseline_k run for `horizon` days, before scaling.
///   k = 0: H^{2/3}
///   k > 0: n^{(2 - 2^{k+2}) / (2^{k+2} - 1)} * H^{1 - 1/(2^{k+2} - 1)}
inline double epoch_length_exact(std::size_t n, std::size_t k, double horizon,
                                 const pool::ConstantsProfile& profile) {
  const double h = std::max(horizon, 1.0);
  if (k == 0) return std::pow(h, 2.0 / 3.0);
  const double m = std::ldexp(1.0, static_cast<int>(k) + 2);
  double b = std::pow(h, 1.0 - 1.0 / (m - 1.0));
  if (profile.schedule_uses_n) b *= std::pow(static_cast<double>(n), (2.0 - m) / (m - 1.0));
  return b;
}

inline double epoch_scale_for(std::size_t k, const pool::ConstantsProfile& profile, double restart_scale) {
  return k == 0 ? profile.epoch_scale : restart_scale;
}

inline Day epoch_length(std::size_t n, std::size_t k, Day horizon, const pool::ConstantsProfile& profile,
                        double restart_scale = 1.0) {
  const double exact = epoch_length_exact(n, k, static_cast<double>(horizon), profile);
  const Day b = profile.round_epoch(exact * epoch_scale_for(k, profile, restart_scale),
                                    "Baseline_" + std::to_string(k) + " with horizon " + std::to_string(horizon));
  return std::min<Day>(b, std::max<Day>(horizon, 1));
}

/// Deepest k <= cap whose nested epochs all reach max(2, min_epoch) before
/// any flooring. The shortest epochs sit on the path that always takes A2.
inline std::size_t max_valid_depth(std::size_t n, Day horizon, const pool::ConstantsProfile& profile,
                                   double restart_scale = 1.0, std::size_t cap = 8) {
  const double floor = std::max<double>(2.0, static_cast<double>(profile.min_epoch));
  std::size_t best = 0;
  for (std::size_t k = 1; k <= cap; ++k) {
    double h = static_cast<double>(horizon);
    bool ok = true;
    for (std::size_t j = k + 1; j-- > 0;) {
      const double b = std::round(epoch_length_exact(n, j, h, profile) * epoch_scale_for(j, profile, restart_scale));
      if (b < floor) {
        ok = false;
        break;
      }
      h = b;
    }
    if (!ok) break;
    best = k;
  }
  return best;
}

class Node;

/// Where a free query landed and how to credit it.
struct ProbePlan {
  enum class Kind { arm, meta, none };
  Kind kind = Kind::none;
  Arm arm = 0;
  double scale = 0.0;        // estimate = scale * loss
  double probability = 1.0;  // chance this (kind, target) was chosen
  Node* parent = nullptr;    // meta: owner of the meta-estimate
  int which = 0;             // meta: 0 = A1, 1 = A2
};

struct Shared {
  TreeConfig cfg;
  double log_nt = 1.0;
  /// Per-day second moment of the arm estimates (2|P| for the plain tree);
  /// leaves read it when an epoch opens.
  double arm_second_moment = 2.0;
};

class Node {
 public:
  Node(const Shared* sh, std::size_t depth, Day horizon, RandomStreams streams)
      : sh_(sh), depth_(depth), horizon_(horizon), streams_(std::move(streams)) {
    const auto& c = sh_->cfg;
    epoch_ = epoch_length(c.n, depth_, horizon_, c.profile, c.restart_scale);
    if (depth_ == 0) {
      pool::PoolState::Params p;
      p.n = c.n;
      p.horizon = horizon_;
      p.epoch_len = epoch_;
      p.log_n = c.n;
      p.log_horizon = c.horizon;
      p.profile = c.profile;
      leaf_.emplace(p, pool::CoverRule::two_query(c.profile.cover_c, sh_->log_nt), streams_);
    } else {
      a1_ = std::make_unique<Node>(sh_, depth_ - 1, horizon_, streams_.child("a1"));
      meta_eta_ = c.meta_eta_scale / std::sqrt(static_cast<double>(epoch_));
      restart_a2();
    }
  }

  std::size_t depth() const { return depth_; }
  Day horizon() const { return horizon_; }
  Day epoch_len() const { return epoch_; }
  bool is_leaf() const { return depth_ == 0; }
  const pool::EpochPool* leaf() const { return leaf_ ? &*leaf_ : nullptr; }
  const Node* child(int j) const { return j == 0 ? a1_.get() : a2_.get(); }
  double meta_estimate(int j) const { return meta_[j]; }
  std::size_t restarts() const { return restarts_; }

  void begin_day() {
    if (leaf_) {
      if (leaf_->begin_day(t_)) leaf_->tune_eta(sh_->arm_second_moment, horizon_);
      return;
    }
    if (t_ > 0 && t_ % epoch_ == 0) {
      meta_[0] = meta_[1] = 0.0;
      meta_dirty_ = true;
      restart_a2();
    }
    a1_->begin_day();
    a2_->begin_day();
  }

  void end_day() {
    if (leaf_) {
      leaf_->end_day(t_);
    } else {
      a1_->end_day();
      a2_->end_day();
    }
    ++t_;
  }

  /// Probability of following A1 versus A2.
  const std::array<double, 2>& meta_distribution() const {
    if (meta_dirty_) {
      const auto p = softmax_of_losses(meta_, meta_eta_);
      meta_p_ = {p[0], p[1]};
      meta_dirty_ = false;
    }
    return meta_p_;
  }

  Arm sample(Stream& s) const {
    if (leaf_) return leaf_->sample(s);
    const int j = s.uniform() < meta_distribution()[0] ? 0 : 1;
    return child(j)->sample(s);
  }

  void add_mixture(double mass, std::vector<double>& out) const {
    if (leaf_) {
      leaf_->add_mixture(mass, out);
      return;
    }
    const auto& q = meta_distribution();
    a1_->add_mixture(mass * q[0], out);
    a2_->add_mixture(mass * q[1], out);
  }

  /// Probability that sample() returns `a`.
  double probability(Arm a) const {
    if (leaf_) return leaf_->probability(a);
    const auto& q = meta_distribution();
    return q[0] * a1_->probability(a) + q[1] * a2_->probability(a);
  }

  void collect_pool(std::vector<Arm>& out) const {
    if (leaf_) {
      out.insert(out.end(), leaf_->arms().begin(), leaf_->arms().end());
      return;
    }
    a1_->collect_pool(out);
    a2_->collect_pool(out);
  }

  /// Credits an arm estimate to every leaf that tracks the arm.
  void credit_arm(Arm a, double value) {
    if (leaf_) {
      leaf_->credit(a, value);
      return;
    }
    a1_->credit_arm(a, value);
    a2_->credit_arm(a, value);
  }

  void credit_meta(int which, double value) {
    meta_[which] += value;
    meta_dirty_ = true;
  }

  /// Non-root nodes below this one; each owns one meta-estimate at its parent.
  std::size_t meta_count() const {
    if (leaf_) return 0;
    return 2 + a1_->meta_count() + a2_->meta_count();
  }

  /// The idx-th meta-expert in pre-order: (owner, 0/1).
  std::pair<Node*, int> locate_meta(std::size_t idx) {
    if (idx < 2) return {this, static_cast<int>(idx)};
    idx -= 2;
    const std::size_t left = a1_->meta_count();
    if (idx < left) return a1_->locate_meta(idx);
    return a2_->locate_meta(idx - left);
  }

  std::size_t leaf_count() const { return leaf_ ? 1 : a1_->leaf_count() + a2_->leaf_count(); }

  /// Meta-estimates, rate, clock, epoch length, restart counter per internal
  /// node; pool state per leaf.
  std::size_t tracked_words() const {
    if (leaf_) return leaf_->tracked_words() + 2;
    return 6 + a1_->tracked_words() + a2_->tracked_words();
  }

  void dump(std::ostream& os, const std::string& path) const {
    if (leaf_) {
      std::istringstream lines(leaf_->state().dump());
      for (std::string line; std::getline(lines, line);) os << path << ' ' << line << '\n';
      for (const auto& ev : leaf_->state().evictions())
        os << path << " evicted arm=" << ev.arm << " epoch=" << ev.epoch << '\n';
      return;
    }
    a1_->dump(os, path + "/a1");
    a2_->dump(os, path + "/a2#" + std::to_string(restarts_ - 1));
  }

 private:
  /// Fresh A2 for the epoch starting at t_, cut short by the horizon.
  void restart_a2() {
    a2_ = std::make_unique<Node>(sh_, depth_ - 1, std::min<Day>(epoch_, horizon_ - t_),
                                 streams_.child(derive_seed(stable_tag("a2"), restarts_)));
    ++restarts_;
  }

  const Shared* sh_;
  std::size_t depth_;
  Day horizon_;
  RandomStreams streams_;
  Day epoch_ = 1;
  Day t_ = 0;
  std::optional<pool::EpochPool> leaf_;
  std::unique_ptr<Node> a1_;
  std::unique_ptr<Node> a2_;
  std::array<double, 2> meta_{0.0, 0.0};
  double meta_eta_ = 1.0;
  mutable std::array<double, 2> meta_p_{0.5, 0.5};
  mutable bool meta_dirty_ = true;
  std::size_t restarts_ = 0;
};

/// A Baseline_k tree plus the free-query rule at its root. `fanout` multiplies
/// every credit and divides every probe probability; the sliding ensemble
/// uses it to account for choosing among its interval algorithms.
class Tree {
 public:
  Tree(TreeConfig cfg, RandomStreams streams) : sh_(std::make_unique<Shared>()) {
    if (cfg.n == 0) throw ConfigError("n must be >= 1");
    if (cfg.horizon == 0) throw ConfigError("T must be >= 1");
    sh_->cfg = cfg;
    sh_->log_nt = pool::log_nt(cfg.n, cfg.horizon);
    root_ = std::make_unique<Node>(sh_.get(), cfg.depth, cfg.horizon, std::move(streams));
  }

  const TreeConfig& config() const { return sh_->cfg; }
  Node& root() { return *root_; }
  const Node& root() const { return *root_; }

  void begin_day() {
    root_->begin_day();
    union_.clear();
    root_->collect_pool(union_);
    std::sort(union_.begin(), union_.end());
    union_.erase(std::unique(union_.begin(), union_.end()), union_.end());
    sh_->arm_second_moment = 2.0 * static_cast<double>(std::max<std::size_t>(union_.size(), 1));
  }
  void end_day() { root_->end_day(); }

  /// Distinct arms across all leaf pools, refreshed by begin_day().
  const std::vector<Arm>& union_pool() const { return union_; }

  Arm sample_play(Stream& exploitation) const { return root_->sample(exploitation); }

  /// The free query: with probability 1/2 a uniform union-pool arm, otherwise
  /// the arm a uniformly chosen meta-expert would play (drawn from the
  /// exploration stream so that no estimate depends on exploitation coins).
  ProbePlan plan_probe(Stream& exploration, double fanout = 1.0) {
    ProbePlan plan;
    const bool arm_branch = exploration.bernoulli(0.5);
    if (arm_branch && !union_.empty()) {
      const double u = static_cast<double>(union_.size());
      plan.kind = ProbePlan::Kind::arm;
      plan.arm = union_[exploration.below(union_.size())];
      plan.scale = 2.0 * fanout * u;
      plan.probability = 1.0 / plan.scale;
      return plan;
    }
    const std::size_t m = root_->meta_count();
    if (m == 0) {
      plan.kind = ProbePlan::Kind::none;
      plan.arm = root_->sample(exploration);
      plan.scale = 2.0 * fanout;
      plan.probability = 1.0 / plan.scale;
      return plan;
    }
    const auto [owner, which] = root_->locate_meta(exploration.below(m));
    plan.kind = ProbePlan::Kind::meta;
    plan.parent = owner;
    plan.which = which;
    plan.arm = owner->child(which)->sample(exploration);
    plan.scale = 2.0 * fanout * static_cast<double>(m);
    plan.probability = 1.0 / plan.scale;
    return plan;
  }

  void apply_probe(const ProbePlan& plan, double loss) {
    switch (plan.kind) {
      case ProbePlan::Kind::arm:
        root_->credit_arm(plan.arm, plan.scale * loss);
        break;
      case ProbePlan::Kind::meta:
        plan.parent->credit_meta(plan.which, plan.scale * loss);
        break;
      case ProbePlan::Kind::none:
        break;
    }
  }

  void add_mixture(double mass, std::vector<double>& out) const { root_->add_mixture(mass, out); }
  double probability(Arm a) const { return root_->probability(a); }
  std::size_t meta_count() const { return root_->meta_count(); }

  std::size_t tracked_words() const { return root_->tracked_words() + 1; }

  std::string dump() const {
    std::ostringstream os;
    os.precision(17);
    root_->dump(os, "root");
    return os.str();
  }

 private:
  std::unique_ptr<Shared> sh_;
  std::unique_ptr<Node> root_;
  std::vector<Arm> union_;
};

/// Baseline_k as a two-query policy (k = 0 is Baseline_0).
class TwoQueryPolicy final : public Policy {
 public:
  TwoQueryPolicy(TreeConfig cfg, RandomStreams streams)
      : tree_(cfg, streams.child("tree")), rng_(std::move(streams)) {}

  std::string name() const override {
    return tree_.config().depth == 0 ? "two_query" : "two_query_k" + std::to_string(tree_.config().depth);
  }
  unsigned query_budget() const override { return 2; }

  Action act(Day) override {
    tree_.begin_day();
    const Arm play = tree_.sample_play(rng_.exploitation);
    plan_ = tree_.plan_probe(rng_.exploration);
    return {play, plan_.arm};
  }

  void observe(Day, const Feedback& fb) override {
    tree_.apply_probe(plan_, *fb.probe_loss);
    tree_.end_day();
  }

  std::size_t tracked_words() const override { return tree_.tracked_words(); }

  const Tree& tree() const { return tree_; }
  const ProbePlan& last_probe() const { return plan_; }
  std::string dump() const { return tree_.dump(); }

 private:
  Tree tree_;
  RandomStreams rng_;
  ProbePlan plan_;
};

}  // namespace mbol::two_query
