#pragma once

// The sampled-and-evicted expert pool shared by every memory-bounded policy:
// a segmented estimated-loss ledger per tracked arm, the dynamic benchmark,
// cover rules, Merge/Filter, and the epoch cascade over sub-pools P_1..P_K.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mbol/core/instance.hpp"
#include "mbol/core/random.hpp"

namespace mbol::pool {

/// log(nT) with a floor of 1 so tiny instances do not produce zero slack.
inline double log_nt(std::size_t n, std::size_t horizon) {
  return std::max(1.0, std::log(static_cast<double>(n) * static_cast<double>(horizon)));
}

/// The thresholds of Merge and the cover constant. The literal polylog
/// formulas are astronomically large at laptop scale, so `desk` replaces each
/// power of log(nT) by a single scaled log(nT).
struct ConstantsProfile {
  enum class Kind { paper, desk };
  Kind kind = Kind::desk;
  double c1 = 4.0;  // merge target:     2 log^9(nT)  -> c1 log(nT)
  double c2 = 2.0;  // small threshold:    log^5(nT)  -> c2 log(nT)
  double c3 = 1.0;  // mark rate:       1/log^4(nT)  -> 1/(c3 log(nT))
  double cover_c = 1.0;
  double merge_rounds_factor = 16.0;  // Q = 16 log(nT)
  /// Epoch schedules: every B is multiplied by epoch_scale, the n factors of
  /// the nested schedules are kept only if schedule_uses_n, and a B below
  /// min_epoch is raised to it (min_epoch = 0: B < 2 is a config error).
  double epoch_scale = 1.0;
  bool schedule_uses_n = true;
  std::size_t min_epoch = 4;
  /// Multipliers on the single-query boost rates: gamma_arm, gamma_meta and
  /// the meta learning rate.
  double explore_scale = 1.0;
  double meta_explore_scale = 1.0;
  double meta_rate_scale = 1.0;

  static ConstantsProfile paper() {
    ConstantsProfile p;
    p.kind = Kind::paper;
    p.min_epoch = 0;
    return p;
  }
  static ConstantsProfile desk() {
    ConstantsProfile p;
    p.cover_c = 0.25;
    p.epoch_scale = 1.0 / 16.0;
    p.schedule_uses_n = false;
    p.explore_scale = 4.0;
    p.meta_explore_scale = 8.0;
    p.meta_rate_scale = 64.0;
    return p;
  }

  double merge_target(double L) const { return kind == Kind::paper ? 2.0 * std::pow(L, 9) : c1 * L; }
  double small_threshold(double L) const { return kind == Kind::paper ? std::pow(L, 5) : c2 * L; }
  double mark_rate(double L) const {
    return std::min(1.0, kind == Kind::paper ? 1.0 / std::pow(L, 4) : 1.0 / (c3 * L));
  }
  std::size_t merge_rounds(double L) const {
    return static_cast<std::size_t>(std::ceil(merge_rounds_factor * L));
  }
  /// The paper profile keeps the n in the approximate-cover slack.
  double approximate_n_factor(std::size_t n) const {
    return kind == Kind::paper ? static_cast<double>(n) : 1.0;
  }

  /// Scales and rounds a pool-epoch schedule value to a usable length.
  std::size_t epoch(double b, const std::string& what) const { return round_epoch(b * epoch_scale, what); }

  std::size_t round_epoch(double b, const std::string& what) const {
    const double v = std::round(b);
    if (min_epoch == 0) {
      if (!(v >= 2.0)) throw ConfigError(what + " has epoch length below 2; reduce the depth");
      return static_cast<std::size_t>(v);
    }
    return std::max(min_epoch, static_cast<std::size_t>(std::max(v, 0.0)));
  }
};

inline const char* to_string(ConstantsProfile::Kind k) {
  return k == ConstantsProfile::Kind::paper ? "paper" : "desk";
}

/// Eviction slack as a function of the lifespan length |D| (days).
class CoverRule {
 public:
  enum class Kind { approximate, relaxed, two_query };

  /// C * nfactor * log(nT) * |D|^rho.
  static CoverRule approximate(double rho, double c, double n_factor, double lognt) {
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("cover exponent rho must lie in (0,1)");
    return CoverRule(Kind::approximate, c * n_factor * lognt, rho, 0.0);
  }
  /// C * log(nT) * sqrt(|D| / gamma_arm).
  static CoverRule relaxed(double gamma_arm, double c, double lognt) {
    if (!(gamma_arm > 0.0 && gamma_arm <= 0.5)) throw ConfigError("gamma_arm must lie in (0, 1/2]");
    return CoverRule(Kind::relaxed, c * lognt, 0.5, gamma_arm);
  }
  /// C * log(nT) * sqrt(|D|): rho = 1/2 and no exploration term.
  static CoverRule two_query(double c, double lognt) {
    return CoverRule(Kind::two_query, c * lognt, 0.5, 0.0);
  }
  /// slack(D) = coefficient * D^rho exactly; handy for hand-checked tests.
  static CoverRule with_coefficient(double coefficient, double rho) {
    return CoverRule(Kind::approximate, coefficient, rho, 0.0);
  }

  double slack(double lifespan_days) const {
    const double d = std::max(0.0, lifespan_days);
    if (kind_ == Kind::relaxed) return coef_ * std::sqrt(d / gamma_arm_);
    return coef_ * std::pow(d, rho_);
  }

  Kind kind() const { return kind_; }
  double rho() const { return rho_; }
  double coefficient() const { return coef_; }

 private:
  CoverRule(Kind k, double coef, double rho, double gamma_arm)
      : kind_(k), coef_(std::max(0.0, coef)), rho_(rho), gamma_arm_(gamma_arm) {}

  Kind kind_;
  double coef_;
  double rho_;
  double gamma_arm_;
};

/// Covered (and therefore evictable) unless the arm beats the benchmark by
/// more than the slack.
inline bool is_covered(double arm_estimate, double benchmark, double lifespan_days,
                       const CoverRule& rule) {
  return arm_estimate >= benchmark - rule.slack(lifespan_days);
}

struct Segment {
  std::size_t start_epoch;
  double value;
};

/// One tracked arm. Segment k covers epochs [segments[k].start, segments[k+1].start);
/// the last segment is open and receives new credits.
struct PoolEntry {
  Arm arm = 0;
  std::size_t level = 1;  // sub-pool index, 1-based
  std::size_t entry_epoch = 0;
  std::vector<Segment> segments;
  std::uint64_t credits = 0;

  double total() const {
    double s = 0.0;
    for (const auto& seg : segments) s += seg.value;
    return s;
  }

  /// Sum over epochs [e0, e1). Both ends must be segment boundaries of this
  /// entry (or lie outside its lifespan).
  double span(std::size_t e0, std::size_t e1) const {
    double s = 0.0;
    for (const auto& seg : segments)
      if (seg.start_epoch >= e0 && seg.start_epoch < e1) s += seg.value;
    return s;
  }
};

struct MergeAction {
  std::size_t from;
  std::size_t to;
  std::size_t input_size;
  std::size_t output_size;
};

struct Eviction {
  Arm arm;
  std::size_t epoch;
};

/// Largest p with 2^p dividing tau (tau >= 1).
inline std::size_t two_adic_valuation(std::size_t tau) {
  if (tau == 0) throw std::invalid_argument("epoch index must be >= 1");
  std::size_t p = 0;
  while ((tau & 1u) == 0) {
    tau >>= 1;
    ++p;
  }
  return p;
}

/// P = P_1 u ... u P_K, K = ceil(log2 T), with per-arm segmented ledgers.
class PoolState {
 public:
  struct Params {
    std::size_t n = 1;
    Day horizon = 1;      // sets K
    Day epoch_len = 1;    // B
    std::size_t log_n = 1;  // n and T used inside log(nT)
    Day log_horizon = 1;
    ConstantsProfile profile{};
  };

  PoolState(Params p, CoverRule rule) : p_(std::move(p)), rule_(rule) {
    if (p_.epoch_len == 0) throw ConfigError("epoch length B must be >= 1");
    K_ = std::max<std::size_t>(1, static_cast<std::size_t>(
                                      std::ceil(std::log2(static_cast<double>(std::max<Day>(p_.horizon, 2))))));
    L_ = log_nt(p_.log_n, p_.log_horizon);
  }

  std::size_t n() const { return p_.n; }
  Day epoch_len() const { return p_.epoch_len; }
  std::size_t levels() const { return K_; }
  double lognt() const { return L_; }
  const CoverRule& rule() const { return rule_; }
  const ConstantsProfile& profile() const { return p_.profile; }
  std::size_t current_epoch() const { return epoch_; }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<PoolEntry>& entries() const { return entries_; }

  std::size_t level_size(std::size_t level) const {
    return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(),
                                                  [&](const PoolEntry& e) { return e.level == level; }));
  }

  const PoolEntry* find(Arm a) const {
    for (const auto& e : entries_)
      if (e.arm == a) return &e;
    return nullptr;
  }
  bool contains(Arm a) const { return find(a) != nullptr; }

  /// Upper bound on the live pool asserted by the tests: every sub-pool is
  /// held to the merge target, plus one epoch of fresh arrivals.
  std::size_t cap() const {
    return (K_ + 1) * static_cast<std::size_t>(std::ceil(p_.profile.merge_target(L_))) + 8;
  }

  /// Start of epoch `epoch` (0-based): every arm joins P_1 independently with
  /// probability 1/n. Returns the arms that entered.
  std::vector<Arm> begin_epoch(std::size_t epoch, Stream& arm_sampling) {
    epoch_ = epoch;
    std::vector<Arm> joined;
    const double p = 1.0 / static_cast<double>(p_.n);
    for (std::uint64_t a = arm_sampling.geometric_skip(p); a < p_.n;) {
      joined.push_back(static_cast<Arm>(a));
      const std::uint64_t skip = arm_sampling.geometric_skip(p);
      if (skip >= p_.n) break;
      a += skip + 1;
    }
    for (Arm a : joined) add(a, epoch);
    return joined;
  }

  /// Inserts an arm into P_1 at the start of `epoch`; opens a segment boundary
  /// at `epoch` in every other live ledger. No-op if the arm is already tracked.
  bool add(Arm a, std::size_t epoch) {
    if (a >= p_.n) throw std::out_of_range("arm outside [n]");
    if (contains(a)) return false;
    for (auto& e : entries_)
      if (e.segments.back().start_epoch < epoch) e.segments.push_back({epoch, 0.0});
    entries_.push_back(PoolEntry{a, 1, epoch, {{epoch, 0.0}}, 0});
    return true;
  }

  /// Adds an estimated loss to the arm's open segment.
  void ledger_update(Arm a, double estimate) {
    for (auto& e : entries_) {
      if (e.arm == a) {
        e.segments.back().value += estimate;
        ++e.credits;
        return;
      }
    }
    throw std::out_of_range("ledger_update: arm " + std::to_string(a) + " is not in the pool");
  }

  /// Benchmark of `arm` over its lifespan [entry, `until_epoch`) against the
  /// filter arms given by pool index.
  double dynamic_benchmark(Arm arm, std::size_t until_epoch, const std::vector<std::size_t>& filter) const {
    const PoolEntry* self = find(arm);
    if (!self) throw std::out_of_range("dynamic_benchmark: arm not in pool");
    if (filter.empty()) throw std::invalid_argument("dynamic_benchmark: empty filter");
    const std::size_t first = self->entry_epoch;
    if (until_epoch < first) throw std::invalid_argument("dynamic_benchmark: misaligned lifespan");

    std::vector<std::size_t> cuts{first, until_epoch};
    for (std::size_t j : filter) {
      const std::size_t e = entries_.at(j).entry_epoch;
      if (e > first && e < until_epoch) cuts.push_back(e);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double bm = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const std::size_t e0 = cuts[k];
      const std::size_t e1 = cuts[k + 1];
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j : filter) {
        const PoolEntry& f = entries_[j];
        if (f.entry_epoch <= e0) best = std::min(best, f.span(e0, e1));
      }
      bm += std::isinf(best) ? self->span(e0, e1) : best;
    }
    return bm;
  }

  /// Indices in `candidates` that are NOT covered by `filter`, evaluated over
  /// each arm's lifespan up to `until_epoch`.
  std::vector<std::size_t> filter(const std::vector<std::size_t>& filter_set,
                                  const std::vector<std::size_t>& candidates,
                                  std::size_t until_epoch) const {
    if (filter_set.empty()) return candidates;
    std::vector<std::size_t> survivors;
    for (std::size_t idx : candidates) {
      const PoolEntry& e = entries_[idx];
      const double est = e.span(e.entry_epoch, until_epoch);
      const double bm = dynamic_benchmark(e.arm, until_epoch, filter_set);
      const double days = static_cast<double>((until_epoch - e.entry_epoch) * p_.epoch_len);
      if (!is_covered(est, bm, days, rule_)) survivors.push_back(idx);
    }
    return survivors;
  }

  /// Merge of the given pool indices. Returns the surviving indices; does
  /// not mutate the pool.
  std::vector<std::size_t> merge(std::vector<std::size_t> members, std::size_t until_epoch,
                                 Stream& filtration) const {
    const double rate = p_.profile.mark_rate(L_);
    const double small = p_.profile.small_threshold(L_);
    const std::size_t rounds = p_.profile.merge_rounds(L_);
    for (std::size_t q = 0; q < rounds; ++q) {
      std::size_t marks = 0;
      for (std::size_t k = 0; k < members.size(); ++k) marks += filtration.bernoulli(rate) ? 1 : 0;
      const double estimate = static_cast<double>(marks) / rate;
      if (estimate <= small) return members;
      std::vector<std::size_t> f;
      for (std::size_t idx : members)
        if (filtration.bernoulli(rate)) f.push_back(idx);
      const auto x = filter(f, members, until_epoch);
      std::vector<std::size_t> next = f;
      for (std::size_t idx : x)
        if (std::find(f.begin(), f.end(), idx) == f.end()) next.push_back(idx);
      std::sort(next.begin(), next.end());
      members = std::move(next);
    }
    return members;
  }

  /// End of the tau-th epoch (tau = 1, 2, ...): cascade P_k into P_{k+1} for
  /// k = 1..pw(tau), where pw is the 2-adic valuation of tau.
  std::vector<MergeAction> epoch_tick(std::size_t tau, Stream& filtration) {
    std::vector<MergeAction> actions;
    const std::size_t pw = two_adic_valuation(tau);
    const std::size_t until = tau;  // epochs [0, tau) are complete
    for (std::size_t k = 1; k <= pw && k < K_; ++k) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].level == k || entries_[i].level == k + 1) members.push_back(i);
      const std::size_t in = members.size();
      const auto kept = merge(members, until, filtration);
      std::vector<bool> keep(entries_.size(), true);
      for (std::size_t idx : members) keep[idx] = false;
      for (std::size_t idx : kept) keep[idx] = true;
      for (std::size_t idx : kept) entries_[idx].level = k + 1;
      std::vector<PoolEntry> next;
      next.reserve(entries_.size());
      for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (keep[i]) {
          next.push_back(std::move(entries_[i]));
        } else {
          evictions_.push_back({entries_[i].arm, tau});
        }
      }
      entries_ = std::move(next);
      actions.push_back({k, k + 1, in, kept.size()});
    }
    compact();
    return actions;
  }

  /// Drops ledger boundaries that no live arm's entry epoch requires.
  void compact() {
    std::vector<std::size_t> live;
    for (const auto& e : entries_) live.push_back(e.entry_epoch);
    std::sort(live.begin(), live.end());
    for (auto& e : entries_) {
      std::vector<Segment> out;
      for (const auto& s : e.segments) {
        if (!out.empty() && !std::binary_search(live.begin(), live.end(), s.start_epoch)) {
          out.back().value += s.value;
        } else {
          out.push_back(s);
        }
      }
      e.segments = std::move(out);
    }
  }

  const std::vector<Eviction>& evictions() const { return evictions_; }

  /// arm, level, entry epoch, credits, then per segment (start, value).
  std::size_t tracked_words() const {
    std::size_t w = 0;
    for (const auto& e : entries_) w += 4 + 2 * e.segments.size();
    return w;
  }

  /// One line per arm: `arm=<a> level=<k> entry=<e> credits=<c> segments=<s:v,...>`.
  void dump(std::ostream& os) const {
    std::vector<const PoolEntry*> sorted;
    for (const auto& e : entries_) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->arm < b->arm; });
    for (const auto* e : sorted) {
      os << "arm=" << e->arm << " level=" << e->level << " entry=" << e->entry_epoch
         << " credits=" << e->credits << " segments=";
      for (std::size_t k = 0; k < e->segments.size(); ++k) {
        if (k) os << ',';
        os << e->segments[k].start_epoch << ':' << e->segments[k].value;
      }
      os << '\n';
    }
  }

  std::string dump() const {
    std::ostringstream os;
    os.precision(17);
    dump(os);
    return os.str();
  }

 private:
  Params p_;
  CoverRule rule_;
  std::size_t K_ = 1;
  double L_ = 1.0;
  std::size_t epoch_ = 0;
  std::vector<PoolEntry> entries_;
  std::vector<Eviction> evictions_;
};

}  // namespace mbol::pool
