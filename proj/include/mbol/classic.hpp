#pragma once

// Reference online-learning algorithms: EXP3 and its two "learning only on
// exploration days" variants, plus the full-information Hedge and SQUINT
// learners used as building blocks and baselines.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbol/core/policy.hpp"
#include "mbol/core/random.hpp"
#include "mbol/core/softmax.hpp"

namespace mbol::classic {

/// gamma tuned for the bandit bound sqrt(n T log n), clipped to (0, 1].
inline double exp3_default_gamma(std::size_t n, Day horizon) {
  const double nn = static_cast<double>(std::max<std::size_t>(n, 2));
  const double g = std::sqrt(nn * std::log(nn) / ((std::numbers::e - 1.0) * static_cast<double>(horizon)));
  return std::min(1.0, g);
}

/// EXP3 with explicit log-weights.
///   P_t(i) = (1 - gamma) softmax(logw)_i + gamma / n
///   lt = loss / P_t(i_t) on the played arm, logw(i_t) -= gamma * lt
class Exp3 final : public Policy {
 public:
  Exp3(std::size_t n, double gamma, RandomStreams streams)
      : gamma_(gamma), logw_(n, 0.0), rng_(std::move(streams)) {
    if (n == 0) throw ConfigError("EXP3 needs n >= 1");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("EXP3 gamma must lie in (0, 1]");
  }

  std::string name() const override { return "exp3"; }
  unsigned query_budget() const override { return 1; }

  std::vector<double> distribution() const {
    auto p = softmax_of_logweights(logw_);
    const double floor = gamma_ / static_cast<double>(p.size());
    for (double& x : p) x = (1.0 - gamma_) * x + floor;
    return p;
  }

  Action act(Day) override {
    const auto p = distribution();
    last_arm_ = sample_index(p, rng_.exploitation);
    last_prob_ = p[last_arm_];
    return {last_arm_, std::nullopt};
  }

  void observe(Day, const Feedback& fb) override {
    logw_[last_arm_] -= gamma_ * importance_weighted(fb.played_loss, last_prob_);
  }

  static double importance_weighted(double loss, double prob) { return loss / prob; }

  std::span<const double> log_weights() const { return logw_; }
  std::size_t tracked_words() const override { return logw_.size(); }

 private:
  double gamma_;
  std::vector<double> logw_;
  RandomStreams rng_;
  Arm last_arm_ = 0;
  double last_prob_ = 1.0;
};

/// EXP3 as "learning as exploration": with probability gamma the day explores
/// a uniform arm and credits n * loss / gamma to it; otherwise it samples from
/// softmax(-gamma * Lhat) and learns nothing.
class Exp3Explore final : public Policy {
 public:
  Exp3Explore(std::size_t n, double gamma, RandomStreams streams)
      : gamma_(gamma), est_(n, 0.0), rng_(std::move(streams)) {
    if (n == 0) throw ConfigError("EXP3 needs n >= 1");
    if (!(gamma > 0.0 && gamma <= 0.5)) throw ConfigError("exploration EXP3 gamma must lie in (0, 1/2]");
  }

  std::string name() const override { return "exp3_explore"; }
  unsigned query_budget() const override { return 1; }

  std::vector<double> exploitation_distribution() const { return softmax_of_losses(est_, gamma_); }

  Action act(Day) override {
    exploring_ = rng_.exploration.bernoulli(gamma_);
    if (exploring_) {
      last_arm_ = rng_.exploration.below(est_.size());
    } else {
      last_arm_ = sample_index(exploitation_distribution(), rng_.exploitation);
    }
    return {last_arm_, std::nullopt};
  }

  void observe(Day, const Feedback& fb) override {
    if (exploring_) {
      est_[last_arm_] += credit(fb.played_loss, est_.size(), gamma_);
      ++exploration_days_;
    }
  }

  static double credit(double loss, std::size_t n, double gamma) {
    return static_cast<double>(n) * loss / gamma;
  }

  std::span<const double> estimates() const { return est_; }
  std::size_t exploration_days() const { return exploration_days_; }
  std::size_t tracked_words() const override { return est_.size(); }

 private:
  double gamma_;
  std::vector<double> est_;
  RandomStreams rng_;
  Arm last_arm_ = 0;
  bool exploring_ = false;
  std::size_t exploration_days_ = 0;
};

inline double two_query_default_eta(std::size_t n, Day horizon) {
  const double nn = static_cast<double>(std::max<std::size_t>(n, 2));
  return std::sqrt(std::log(nn) / static_cast<double>(horizon)) / nn;
}

/// Two queries per day: play from softmax(-eta * Lhat) without learning from
/// the played loss, and probe a uniform arm for free, crediting n * loss.
class Exp3TwoQuery final : public Policy {
 public:
  Exp3TwoQuery(std::size_t n, double eta, RandomStreams streams)
      : eta_(eta), est_(n, 0.0), rng_(std::move(streams)) {
    if (n == 0) throw ConfigError("EXP3 needs n >= 1");
    if (!(eta > 0.0)) throw ConfigError("eta must be > 0");
  }

  std::string name() const override { return "exp3_two_query"; }
  unsigned query_budget() const override { return 2; }

  std::vector<double> distribution() const { return softmax_of_losses(est_, eta_); }

  Action act(Day) override {
    const Arm play = sample_index(distribution(), rng_.exploitation);
    probe_ = rng_.exploration.below(est_.size());
    return {play, probe_};
  }

  void observe(Day, const Feedback& fb) override {
    est_[probe_] += credit(*fb.probe_loss, est_.size());
  }

  static double credit(double loss, std::size_t n) { return static_cast<double>(n) * loss; }

  std::span<const double> estimates() const { return est_; }
  std::size_t tracked_words() const override { return est_.size(); }

 private:
  double eta_;
  std::vector<double> est_;
  RandomStreams rng_;
  Arm probe_ = 0;
};

// ---------------------------------------------------------------------------
// Full-information learners. These see the whole loss vector every day, so
// they sit outside the query-budget protocol; the harness drives them with
// run_full_information().

/// Exponential weights over m experts on (possibly estimated) losses in [0, U].
class Hedge {
 public:
  Hedge(std::size_t m, double eta) : eta_(eta), cum_(m, 0.0) {
    if (m == 0) throw ConfigError("Hedge needs m >= 1");
    if (!(eta > 0.0)) throw ConfigError("Hedge eta must be > 0");
  }

  std::vector<double> distribution() const { return softmax_of_losses(cum_, eta_); }

  void update(std::span<const double> losses) {
    if (losses.size() != cum_.size()) throw std::invalid_argument("Hedge: loss vector size mismatch");
    for (double l : losses)
      if (l < 0.0) throw std::invalid_argument("Hedge: negative loss");
    for (std::size_t i = 0; i < cum_.size(); ++i) cum_[i] += losses[i];
  }

  std::span<const double> cumulative() const { return cum_; }
  std::size_t size() const { return cum_.size(); }

 private:
  double eta_;
  std::vector<double> cum_;
};

/// SQUINT with a discretized prior over the learning rate.
class Squint {
 public:
  static constexpr std::size_t kGridPoints = 64;

  explicit Squint(std::size_t m) : sum_v_(m, 0.0), sum_v2_(m, 0.0) {
    if (m == 0) throw ConfigError("SQUINT needs m >= 1");
    // 64 geometric points on [2^-20, 1/2], prior weight ~ 1/(eta log^2 eta)
    // times the geometric cell width (which is itself ~ eta), renormalized.
    const double lo = std::log(std::ldexp(1.0, -20));
    const double hi = std::log(0.5);
    double z = 0.0;
    for (std::size_t g = 0; g < kGridPoints; ++g) {
      const double eta = std::exp(lo + (hi - lo) * static_cast<double>(g) / (kGridPoints - 1));
      const double w = 1.0 / (eta * std::pow(std::log(eta), 2)) * eta;
      grid_[g] = eta;
      prior_[g] = w;
      z += w;
    }
    for (double& w : prior_) w /= z;
  }

  /// p(i) proportional to E_eta[eta exp(eta R_i - eta^2 V_i)].
  std::vector<double> distribution() const {
    const std::size_t m = sum_v_.size();
    std::vector<double> logw(m);
    std::vector<double> terms(kGridPoints);
    for (std::size_t i = 0; i < m; ++i) {
      double hi = -std::numeric_limits<double>::infinity();
      for (std::size_t g = 0; g < kGridPoints; ++g) {
        const double eta = grid_[g];
        terms[g] = std::log(prior_[g]) + std::log(eta) + eta * sum_v_[i] - eta * eta * sum_v2_[i];
        hi = std::max(hi, terms[g]);
      }
      double s = 0.0;
      for (double t : terms) s += std::exp(t - hi);
      logw[i] = hi + std::log(s);
    }
    return softmax_of_logweights(logw);
  }

  /// v(i) = <p, loss> - loss(i), accumulated with its square.
  void update(std::span<const double> losses) {
    if (losses.size() != sum_v_.size()) throw std::invalid_argument("SQUINT: loss vector size mismatch");
    const auto p = distribution();
    double mix = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) mix += p[i] * losses[i];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double v = mix - losses[i];
      sum_v_[i] += v;
      sum_v2_[i] += v * v;
    }
  }

  std::span<const double> grid() const { return grid_; }
  std::span<const double> prior() const { return prior_; }
  std::span<const double> sum_v() const { return sum_v_; }
  std::span<const double> sum_v2() const { return sum_v2_; }
  std::size_t size() const { return sum_v_.size(); }

 private:
  std::array<double, kGridPoints> grid_{};
  std::array<double, kGridPoints> prior_{};
  std::vector<double> sum_v_;
  std::vector<double> sum_v2_;
};

struct FullInformationRun {
  std::vector<Arm> played;
  std::vector<double> incurred;
  std::vector<double> expected;  // <p_t, loss_t>
};

/// Plays a full-information learner against every arm of the instance.
template <class Learner>
FullInformationRun run_full_information(Learner& learner, const Instance& inst, Stream rng) {
  if (learner.size() != inst.n()) throw std::invalid_argument("learner size differs from n");
  FullInformationRun out;
  std::vector<double> losses(inst.n());
  for (Day t = 0; t < inst.horizon(); ++t) {
    const auto p = learner.distribution();
    const Arm a = sample_index(p, rng);
    double mix = 0.0;
    for (Arm i = 0; i < inst.n(); ++i) {
      losses[i] = inst.loss(t, i);
      mix += p[i] * losses[i];
    }
    out.played.push_back(a);
    out.incurred.push_back(losses[a]);
    out.expected.push_back(mix);
    learner.update(losses);
  }
  return out;
}

}  // namespace mbol::classic
