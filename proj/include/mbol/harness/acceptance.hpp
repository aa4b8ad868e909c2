#pragma once

// The acceptance suite: ten criteria with pinned seeds. Each returns the
// measured values next to the bounds they are checked against.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mbol/classic.hpp"
#include "mbol/core/instance.hpp"
#include "mbol/core/policy.hpp"
#include "mbol/core/random.hpp"
#include "mbol/harness/config.hpp"
#include "mbol/harness/experiment.hpp"
#include "mbol/harness/slope.hpp"
#include "mbol/oracles.hpp"
#include "mbol/pool.hpp"
#include "mbol/random_order.hpp"
#include "mbol/single_query.hpp"
#include "mbol/sliding.hpp"
#include "mbol/two_query.hpp"

namespace mbol::harness {

struct Check {
  std::string what;
  double measured = 0.0;
  std::string bound;
  bool passed = false;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::vector<Check> checks;
  std::string note;
  double wall_ms = 0.0;
};

struct AcceptanceOptions {
  /// Replaces every upper slope bound (failure injection).
  std::optional<double> slope_bound;
  /// Criterion ids to run; empty runs all.
  std::vector<int> only;
  /// Receives one progress line per finished criterion.
  std::ostream* progress = nullptr;
};

namespace accept {

inline std::string fmt(double x, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << x;
  return os.str();
}

inline Check at_most(std::string what, double v, double bound) {
  return {std::move(what), v, "<= " + fmt(bound), v <= bound};
}

inline Check at_least(std::string what, double v, double bound) {
  return {std::move(what), v, ">= " + fmt(bound), v >= bound};
}

inline Check within(std::string what, double v, double lo, double hi) {
  return {std::move(what), v, "in [" + fmt(lo) + ", " + fmt(hi) + "]", v >= lo && v <= hi};
}

inline Check below(std::string what, double v, double other, const std::string& other_name) {
  return {std::move(what), v, "< " + other_name + " (" + fmt(other) + ")", v < other};
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------
// 1. Oracle equivalence against a direct double loop.

inline double brute_interval(const Trace& tr, const Instance& inst, Day a, Day b) {
  double alg = 0.0;
  for (Day t = a; t <= b; ++t) alg += tr.records[t].incurred;
  double best = std::numeric_limits<double>::infinity();
  for (Arm i = 0; i < inst.n(); ++i) {
    double s = 0.0;
    for (Day t = a; t <= b; ++t) s += inst.loss(t, i);
    best = std::min(best, s);
  }
  return alg - best;
}

inline CriterionResult oracle_equivalence() {
  CriterionResult r;
  r.id = 1;
  r.name = "oracle equivalence";
  Stream gen(derive_seed(1001, "instances"));
  std::size_t mismatches = 0;
  std::size_t comparisons = 0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + gen.below(5);
    const Day T = 1 + gen.below(64);
    std::vector<std::vector<double>> rows(T, std::vector<double>(n));
    // Quarter-integer losses keep every partial sum exact.
    for (auto& row : rows)
      for (auto& x : row) x = static_cast<double>(gen.below(5)) / 4.0;
    const Instance inst = explicit_instance(rows, static_cast<std::uint64_t>(k));
    classic::Exp3 policy(n, classic::exp3_default_gamma(n, T), RandomStreams(derive_seed(1002, k)));
    const Trace tr = run(policy, inst);

    ++comparisons;
    if (oracles::cumulative_regret(tr, inst) != brute_interval(tr, inst, 0, T - 1)) ++mismatches;
    for (Day W = 1; W <= T; ++W) {
      double brute = -std::numeric_limits<double>::infinity();
      for (Day e = W - 1; e < T; ++e) brute = std::max(brute, brute_interval(tr, inst, e + 1 - W, e));
      ++comparisons;
      if (oracles::sliding_window_regret(tr, inst, W) != brute) ++mismatches;
    }
    double brute = -std::numeric_limits<double>::infinity();
    for (Day a = 0; a < T; ++a)
      for (Day b = a; b < T; ++b) brute = std::max(brute, brute_interval(tr, inst, a, b));
    ++comparisons;
    if (oracles::interval_regret(tr, inst).regret != brute) ++mismatches;
  }
  r.checks.push_back(at_most("mismatching oracle values", static_cast<double>(mismatches), 0.0));
  r.note = std::to_string(comparisons) + " comparisons over 200 instances";
  return r;
}

// ---------------------------------------------------------------------------
// 2. Importance-weighted estimators are unbiased.

struct MonteCarlo {
  double mean = 0.0;
  double se = 0.0;
};

inline MonteCarlo monte_carlo(std::size_t draws, const std::function<double()>& draw) {
  double s = 0.0, s2 = 0.0;
  for (std::size_t k = 0; k < draws; ++k) {
    const double x = draw();
    s += x;
    s2 += x * x;
  }
  const double m = s / static_cast<double>(draws);
  const double var = std::max(0.0, s2 / static_cast<double>(draws) - m * m);
  return {m, std::sqrt(var / static_cast<double>(draws))};
}

inline CriterionResult estimator_unbiasedness() {
  CriterionResult r;
  r.id = 2;
  r.name = "estimator unbiasedness";
  constexpr std::size_t kDraws = 100000;
  constexpr double kLoss = 0.3;
  Stream s(derive_seed(2001, "estimators"));
  auto loss = [&] { return s.bernoulli(kLoss) ? 1.0 : 0.0; };
  auto add = [&](const std::string& name, const std::function<double()>& draw) {
    const auto mc = monte_carlo(kDraws, draw);
    const double z = mc.se > 0.0 ? std::abs(mc.mean - kLoss) / mc.se : 0.0;
    r.checks.push_back(at_most(name + " |mean - loss| / se", z, 3.0));
  };
  const std::size_t n = 8;
  const Arm target = 2;

  {
    std::vector<double> p{0.05, 0.1, 0.2, 0.15, 0.1, 0.2, 0.1, 0.1};
    add("played-arm loss / p", [&] {
      const Arm a = sample_index(p, s);
      return a == target ? loss() / p[target] : 0.0;
    });
  }
  {
    const double gamma = 0.2;
    add("n / gamma exploration", [&] {
      if (!s.bernoulli(gamma)) return 0.0;
      return s.below(n) == target ? static_cast<double>(n) * loss() / gamma : 0.0;
    });
  }
  add("n uniform probe", [&] { return s.below(n) == target ? static_cast<double>(n) * loss() : 0.0; });
  {
    const std::size_t pool = 5;
    add("2|P| pool probe", [&] {
      if (!s.bernoulli(0.5)) return 0.0;
      return s.below(pool) == 0 ? 2.0 * static_cast<double>(pool) * loss() : 0.0;
    });
  }
  add("4 loss meta probe", [&] {
    if (!s.bernoulli(0.5)) return 0.0;
    return s.below(2) == 1 ? 4.0 * loss() : 0.0;
  });
  {
    const std::size_t meta = 6;
    add("2 N_meta meta probe", [&] {
      if (!s.bernoulli(0.5)) return 0.0;
      return s.below(meta) == 3 ? 2.0 * static_cast<double>(meta) * loss() : 0.0;
    });
  }
  {
    const double ga = 0.1, gm = 0.1;
    const std::size_t u = 6;
    add("|P| / gamma_arm exploration", [&] {
      const double v = s.uniform();
      if (v >= ga) return 0.0;
      return s.below(u) == 1 ? static_cast<double>(u) * loss() / ga : 0.0;
    });
    add("2 / gamma_meta exploration", [&] {
      const double v = s.uniform();
      if (v < ga || v >= ga + gm) return 0.0;
      return s.below(2) == 0 ? 2.0 * loss() / gm : 0.0;
    });
  }
  {
    // The probe rule of a live depth-2 tree: credits to one union arm and to
    // one meta-expert must average to the loss.
    two_query::TreeConfig tc;
    tc.n = 16;
    tc.horizon = 4096;
    tc.depth = 2;
    two_query::Tree tree(tc, RandomStreams(2002));
    Stream drive(2003);
    for (Day t = 0; t < 600; ++t) {
      tree.begin_day();
      auto plan = tree.plan_probe(drive);
      tree.apply_probe(plan, drive.bernoulli(0.5) ? 1.0 : 0.0);
      tree.end_day();
    }
    tree.begin_day();
    if (!tree.union_pool().empty() && tree.meta_count() > 0) {
      const Arm arm = tree.union_pool().front();
      add("tree arm probe", [&] {
        const auto plan = tree.plan_probe(s);
        return plan.kind == two_query::ProbePlan::Kind::arm && plan.arm == arm ? plan.scale * loss() : 0.0;
      });
      Stream pick(2004);
      std::optional<std::pair<const two_query::Node*, int>> meta;
      for (int k = 0; k < 64 && !meta; ++k) {
        const auto plan = tree.plan_probe(pick);
        if (plan.kind == two_query::ProbePlan::Kind::meta) meta = {{plan.parent, plan.which}};
      }
      if (meta) {
        add("tree meta probe", [&] {
          const auto plan = tree.plan_probe(s);
          return plan.kind == two_query::ProbePlan::Kind::meta && plan.parent == meta->first &&
                         plan.which == meta->second
                     ? plan.scale * loss()
                     : 0.0;
        });
      }
    }
  }
  r.note = std::to_string(kDraws) + " draws per estimator, Bernoulli(0.3) loss";
  return r;
}

// ---------------------------------------------------------------------------
// 3. Concentration of accumulated estimates.

inline CriterionResult concentration() {
  CriterionResult r;
  r.id = 3;
  r.name = "estimate concentration";
  const std::size_t n = 16;
  const Day T = Day{1} << 14;
  const double L = std::log(static_cast<double>(n) * static_cast<double>(T));
  const std::size_t pool = 8;
  const double gamma_arm = std::min(0.5, pool::ConstantsProfile::desk().explore_scale / std::cbrt(double(T)));
  InstanceConfig ic;
  ic.n = n;
  ic.horizon = T;
  ic.model = HotStreak{};
  ic.seed = 3001;
  const Instance inst(ic);
  const Arm arm = 5;
  for (Day D : {Day{256}, Day{1024}, Day{4096}}) {
    std::size_t ok_two = 0, ok_one = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      Stream s(derive_seed(3002, static_cast<std::uint64_t>(trial) * 16 + D));
      const Day start = s.below(T - D);
      double truth = 0.0, two = 0.0, one = 0.0;
      for (Day t = start; t < start + D; ++t) {
        const double l = inst.loss(t, arm);
        truth += l;
        if (s.bernoulli(0.5) && s.below(pool) == 0) two += 2.0 * static_cast<double>(pool) * l;
        if (s.uniform() < gamma_arm && s.below(pool) == 0) one += static_cast<double>(pool) * l / gamma_arm;
      }
      const double d = static_cast<double>(D);
      ok_two += std::abs(two - truth) <= 5.0 * std::sqrt(d) * L;
      ok_one += std::abs(one - truth) <= 5.0 * std::sqrt(d / gamma_arm) * L;
    }
    r.checks.push_back(at_least("two-query within 5 sqrt(D) log(nT), D=" + std::to_string(D),
                                static_cast<double>(ok_two) / 1000.0, 0.99));
    r.checks.push_back(at_least("single-query within 5 sqrt(D/gamma) log(nT), D=" + std::to_string(D),
                                static_cast<double>(ok_one) / 1000.0, 0.99));
  }
  r.note = "fraction of 1000 trials inside the bound; HotStreak losses, |P| = 8";
  return r;
}

// ---------------------------------------------------------------------------
// 4. EXP3 regret.

inline CriterionResult exp3_regret() {
  CriterionResult r;
  r.id = 4;
  r.name = "EXP3 regret";
  const std::size_t n = 8;
  const Day T = Day{1} << 14;
  std::vector<double> regrets;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    InstanceConfig ic;
    ic.n = n;
    ic.horizon = T;
    ic.model = HiddenBest{0.5, static_cast<Arm>(seed % n)};
    ic.seed = derive_seed(4001, seed);
    const Instance inst(ic);
    classic::Exp3 policy(n, classic::exp3_default_gamma(n, T), RandomStreams(derive_seed(4002, seed)));
    regrets.push_back(oracles::cumulative_regret(run(policy, inst), inst));
  }
  const double bound = 3.0 * std::sqrt(static_cast<double>(n) * static_cast<double>(T) * std::log(double(n)));
  r.checks.push_back(at_most("mean cumulative regret", mean(regrets), bound));
  return r;
}

// ---------------------------------------------------------------------------
// 5. Regret-slope ladder.

using PolicyMaker = std::function<std::unique_ptr<Policy>(std::size_t n, Day T, RandomStreams)>;

/// Mean regret per horizon over paired seeds on HiddenBest(gap) with the best
/// arm rotating with the seed.
inline std::vector<double> ladder(const PolicyMaker& make, std::size_t n, const std::vector<Day>& horizons,
                                  std::size_t seeds, double gap) {
  std::vector<double> means;
  for (Day T : horizons) {
    std::vector<double> regrets;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
      InstanceConfig ic;
      ic.n = n;
      ic.horizon = T;
      ic.model = HiddenBest{gap, static_cast<Arm>(seed % n)};
      ic.seed = derive_seed(5001, seed);
      const Instance inst(ic);
      auto policy = make(n, T, RandomStreams(derive_seed(5002, seed)));
      regrets.push_back(oracles::cumulative_regret(run(*policy, inst), inst));
    }
    means.push_back(mean(regrets));
  }
  return means;
}

inline double slope_of(const std::vector<Day>& horizons, const std::vector<double>& means) {
  std::vector<double> x;
  for (Day T : horizons) x.push_back(static_cast<double>(T));
  return fit_loglog(x, means).slope;
}

inline CriterionResult slope_ladder(const AcceptanceOptions& opt) {
  CriterionResult r;
  r.id = 5;
  r.name = "regret-slope ladder";
  const std::size_t n = 16;
  std::vector<Day> horizons;
  for (int k = 12; k <= 17; ++k) horizons.push_back(Day{1} << k);
  const std::size_t seeds = 20;
  const double gap = 0.25;
  auto ub = [&](double b) { return opt.slope_bound.value_or(b); };

  const PolicyMaker exp3 = [](std::size_t n, Day T, RandomStreams s) {
    return std::make_unique<classic::Exp3>(n, classic::exp3_default_gamma(n, T), std::move(s));
  };
  auto tree = [](std::size_t depth) -> PolicyMaker {
    return [depth](std::size_t n, Day T, RandomStreams s) {
      two_query::TreeConfig tc;
      tc.n = n;
      tc.horizon = T;
      tc.depth = depth;
      return std::make_unique<two_query::TwoQueryPolicy>(tc, std::move(s));
    };
  };
  const PolicyMaker baseline = [](std::size_t n, Day T, RandomStreams s) {
    single_query::BaselineConfig bc;
    bc.n = n;
    bc.horizon = T;
    return std::make_unique<single_query::BaselinePolicy>(bc, std::move(s));
  };
  const PolicyMaker boost = [](std::size_t n, Day T, RandomStreams s) {
    single_query::BoostConfig bc;
    bc.n = n;
    bc.horizon = T;
    bc.depth = 3;
    return std::make_unique<single_query::BoostPolicy>(bc, std::move(s));
  };

  const double s_exp3 = slope_of(horizons, ladder(exp3, n, horizons, seeds, gap));
  const double s_tq0 = slope_of(horizons, ladder(tree(0), n, horizons, seeds, gap));
  const double s_tq2 = slope_of(horizons, ladder(tree(2), n, horizons, seeds, gap));
  const double s_alg4 = slope_of(horizons, ladder(baseline, n, horizons, seeds, gap));
  const double s_boost = slope_of(horizons, ladder(boost, n, horizons, seeds, gap));

  r.checks.push_back(within("EXP3 slope", s_exp3, 0.40, ub(0.65)));
  r.checks.push_back(at_most("two_query depth 0 slope", s_tq0, ub(0.75)));
  r.checks.push_back(below("two_query depth 2 slope", s_tq2, s_tq0, "depth 0"));
  r.checks.push_back(at_most("two_query depth 2 slope", s_tq2, ub(0.68)));
  r.checks.push_back(at_most("single_query baseline slope", s_alg4, ub(0.85)));
  r.checks.push_back(below("single_query boost depth 3 slope", s_boost, s_alg4, "baseline"));
  r.note = "HiddenBest gap 0.25, n=16, T=2^12..2^17, 20 paired seeds";
  return r;
}

// ---------------------------------------------------------------------------
// 6. Sliding-window regret.

inline CriterionResult sliding_window(const AcceptanceOptions& opt) {
  CriterionResult r;
  r.id = 6;
  r.name = "sliding-window regret";
  const std::size_t n = 8;
  const Day T = Day{1} << 15;
  const std::size_t seeds = 20;
  std::size_t wins = 0;
  std::vector<double> window_sum(4, 0.0);
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    std::vector<double> a(n, 0.5), b(n, 0.5);
    a[seed % n] = 0.25;
    b[(seed + 3) % n] = 0.25;
    InstanceConfig ic;
    ic.n = n;
    ic.horizon = T;
    ic.model = TwoPhase{T / 2, a, b};
    ic.seed = derive_seed(6001, seed);
    const Instance inst(ic);
    sliding::SlidingConfig sc;
    sc.n = n;
    sc.horizon = T;
    sliding::SlidingPolicy sp(sc, RandomStreams(derive_seed(6002, seed)));
    two_query::TreeConfig tc;
    tc.n = n;
    tc.horizon = T;
    two_query::TwoQueryPolicy tp(tc, RandomStreams(derive_seed(6002, seed)));
    const Trace ts = run(sp, inst);
    const Trace tt = run(tp, inst);
    const Day W = 2048;
    if (oracles::sliding_window_regret(ts, inst, W) <= 0.5 * oracles::sliding_window_regret(tt, inst, W)) ++wins;
    for (std::size_t k = 0; k < 4; ++k) {
      const Day w = Day{256} << k;
      window_sum[k] += std::max(oracles::sliding_window_regret(ts, inst, w, 0, T / 2),
                                oracles::sliding_window_regret(ts, inst, w, T / 2, T));
    }
  }
  std::vector<double> ws;
  for (std::size_t k = 0; k < 4; ++k) ws.push_back(static_cast<double>(Day{256} << k));
  const double slope = fit_loglog(ws, window_sum).slope;
  r.checks.push_back(at_least("seeds with sliding <= 0.5 x two_query at W=2^11", static_cast<double>(wins), 15.0));
  r.checks.push_back(within("window-regret slope over W=2^8..2^11", slope, 0.35, opt.slope_bound.value_or(0.65)));
  r.note = "TwoPhase gap 0.25 switching at T/2, n=8, T=2^15, 20 paired seeds";
  return r;
}

// ---------------------------------------------------------------------------
// 7. Random-order best expert.

inline CriterionResult random_order_best() {
  CriterionResult r;
  r.id = 7;
  r.name = "random-order best expert";
  const std::size_t n = 8;
  std::size_t cells = 0, inside = 0, level_breaches = 0, max_words = 0;
  for (double g : {1.0, 4.0, 16.0}) {
    for (int k = 12; k <= 18; ++k) {
      const Day T = Day{1} << k;
      for (std::uint64_t seed = 0; seed < 30; ++seed) {
        InstanceConfig ic;
        ic.n = n;
        ic.horizon = T;
        ic.model = RandomOrderBest{g, static_cast<Arm>((seed * 5) % n), HotStreak{}};
        ic.seed = derive_seed(7001, seed * 64 + static_cast<std::uint64_t>(k));
        const Instance inst(ic);
        random_order::RandomOrderPolicy p(n, T);
        Trace tr;
        tr.records.reserve(T);
        std::size_t top = 0;
        for (Day t = 0; t < T; ++t) {
          tr.records.push_back(step(p, inst, t));
          top = std::max(top, p.level());
          max_words = std::max(max_words, p.tracked_words());
        }
        const double L = std::log(static_cast<double>(n) * static_cast<double>(T));
        const double bound = 4.0 * std::sqrt(static_cast<double>(n) * static_cast<double>(T)) * L * L;
        ++cells;
        inside += oracles::cumulative_regret(tr, inst) <= bound;
        level_breaches += static_cast<double>(top) > g + 1.0;
      }
    }
  }
  r.checks.push_back(at_least("fraction of cells with regret <= 4 sqrt(nT) log^2(nT)",
                              static_cast<double>(inside) / static_cast<double>(cells), 0.90));
  r.checks.push_back(at_most("cells where C exceeded gamma + 1", static_cast<double>(level_breaches), 0.0));
  r.checks.push_back(at_most("live scalar count", static_cast<double>(max_words), 8.0));
  r.note = std::to_string(cells) + " cells: gamma in {1,4,16}, T=2^12..2^18, 30 seeds";
  return r;
}

// ---------------------------------------------------------------------------
// 8. Memory sublinearity.

inline CriterionResult memory_sublinearity() {
  CriterionResult r;
  r.id = 8;
  r.name = "memory sublinearity";
  const Day T = Day{1} << 14;
  const std::vector<std::size_t> ns{64, 256, 1024, 4096};
  const std::size_t seeds = 3;
  auto peaks = [&](const PolicyMaker& make) {
    std::vector<double> out;
    for (std::size_t n : ns) {
      std::vector<double> p;
      for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        InstanceConfig ic;
        ic.n = n;
        ic.horizon = T;
        ic.model = HiddenBest{0.25, static_cast<Arm>(seed % n)};
        ic.seed = derive_seed(8001, seed);
        const Instance inst(ic);
        auto policy = make(n, T, RandomStreams(derive_seed(8002, seed)));
        p.push_back(static_cast<double>(run(*policy, inst).peak_memory_words));
      }
      out.push_back(mean(p));
    }
    return out;
  };
  const auto tq = peaks([](std::size_t n, Day T, RandomStreams s) {
    two_query::TreeConfig tc;
    tc.n = n;
    tc.horizon = T;
    tc.depth = 2;
    return std::make_unique<two_query::TwoQueryPolicy>(tc, std::move(s));
  });
  const auto bo = peaks([](std::size_t n, Day T, RandomStreams s) {
    single_query::BoostConfig bc;
    bc.n = n;
    bc.horizon = T;
    bc.depth = 2;
    return std::make_unique<single_query::BoostPolicy>(bc, std::move(s));
  });
  const auto ex = peaks([](std::size_t n, Day T, RandomStreams s) {
    return std::make_unique<classic::Exp3>(n, classic::exp3_default_gamma(n, T), std::move(s));
  });
  std::vector<double> xs(ns.begin(), ns.end());
  r.checks.push_back(at_most("two_query depth 2 peak ratio n=2^12 / n=2^6", tq.back() / tq.front(), 4.0));
  r.checks.push_back(at_most("boost depth 2 peak ratio n=2^12 / n=2^6", bo.back() / bo.front(), 4.0));
  r.checks.push_back(within("EXP3 peak growth exponent in n", fit_loglog(xs, ex).slope, 0.9, 1.1));
  r.note = "T=2^14, mean peak over 3 seeds per n";
  return r;
}

// ---------------------------------------------------------------------------
// 9. Merge shrinkage.

inline CriterionResult merge_shrinkage() {
  CriterionResult r;
  r.id = 9;
  r.name = "merge shrinkage";
  const std::size_t size = 200;
  std::size_t ok = 0;
  double largest = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    pool::PoolState::Params p;
    p.n = size;
    p.horizon = Day{1} << 14;
    p.epoch_len = 64;
    p.log_n = p.n;
    p.log_horizon = p.horizon;
    p.profile = pool::ConstantsProfile::desk();
    const double L = pool::log_nt(p.n, p.horizon);
    pool::PoolState st(p, pool::CoverRule::approximate(2.0 / 3.0, p.profile.cover_c, 1.0, L));
    Stream noise(derive_seed(9001, seed));
    std::vector<std::size_t> members;
    // Duplicates: every arm carries the same loss history up to small noise.
    for (Arm a = 0; a < size; ++a) {
      st.add(a, 0);
      st.ledger_update(a, 128.0 + 4.0 * (noise.uniform() - 0.5));
      members.push_back(a);
    }
    Stream filtration(derive_seed(9002, seed));
    const auto kept = st.merge(members, 4, filtration);
    const double bound = std::max(p.profile.merge_target(L), static_cast<double>(size) / 4.0);
    ok += static_cast<double>(kept.size()) <= bound;
    largest = std::max(largest, static_cast<double>(kept.size()));
  }
  r.checks.push_back(at_least("fraction of merges within max(cap, input/4)", static_cast<double>(ok) / 200.0, 0.95));
  r.note = "pools of 200 duplicate arms; largest output " + fmt(largest);
  return r;
}

// ---------------------------------------------------------------------------
// 10. Determinism and exploitation decoupling.

template <class P>
std::string ledger_history(P& policy, const Instance& inst, Day every) {
  std::string out;
  for (Day t = 0; t < inst.horizon(); ++t) {
    step(policy, inst, t);
    if ((t + 1) % every == 0 || t + 1 == inst.horizon())
      out += "day " + std::to_string(t) + '\n' + policy.dump();
  }
  return out;
}

inline CriterionResult determinism() {
  CriterionResult r;
  r.id = 10;
  r.name = "determinism and decoupling";
  ExperimentConfig cfg;
  cfg.policy = "two_query";
  cfg.n = 8;
  cfg.depth = 2;
  cfg.horizons = {1024, 2048};
  cfg.windows = {256};
  cfg.seeds = 3;
  std::size_t diffs = 0;
  for (const char* policy : {"exp3", "two_query", "single_query", "boost", "sliding", "random_order"}) {
    cfg.policy = policy;
    if (to_csv(run_experiment(cfg).rows) != to_csv(run_experiment(cfg).rows)) ++diffs;
  }
  r.checks.push_back(at_most("policies whose CSV differs on rerun", static_cast<double>(diffs), 0.0));

  InstanceConfig ic;
  ic.n = 8;
  ic.horizon = 2048;
  ic.model = HotStreak{};
  ic.seed = 10001;
  const Instance inst(ic);
  std::size_t tq_diff = 0, sl_diff = 0;
  std::string tq_ref, sl_ref;
  for (std::uint64_t k = 0; k < 5; ++k) {
    const RandomStreams streams(10002, derive_seed(10003, k));
    two_query::TreeConfig tc;
    tc.n = ic.n;
    tc.horizon = ic.horizon;
    tc.depth = 2;
    two_query::TwoQueryPolicy tp(tc, streams);
    const auto tq = ledger_history(tp, inst, 128);
    sliding::SlidingConfig sc;
    sc.n = ic.n;
    sc.horizon = ic.horizon;
    sliding::SlidingPolicy sp(sc, streams);
    const auto sl = ledger_history(sp, inst, 128);
    if (k == 0) {
      tq_ref = tq;
      sl_ref = sl;
    } else {
      tq_diff += tq != tq_ref;
      sl_diff += sl != sl_ref;
    }
  }
  r.checks.push_back(at_most("two_query exploitation reseeds with different ledgers", double(tq_diff), 0.0));
  r.checks.push_back(at_most("sliding exploitation reseeds with different ledgers", double(sl_diff), 0.0));
  r.note = "ledgers and evictions snapshotted every 128 days";
  return r;
}

}  // namespace accept

inline const std::vector<std::string>& criterion_names() {
  static const std::vector<std::string> names{
      "oracle equivalence",       "estimator unbiasedness", "estimate concentration", "EXP3 regret",
      "regret-slope ladder",      "sliding-window regret",  "random-order best expert",
      "memory sublinearity",      "merge shrinkage",        "determinism and decoupling"};
  return names;
}

inline CriterionResult run_criterion(int id, const AcceptanceOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r;
  switch (id) {
    case 1: r = accept::oracle_equivalence(); break;
    case 2: r = accept::estimator_unbiasedness(); break;
    case 3: r = accept::concentration(); break;
    case 4: r = accept::exp3_regret(); break;
    case 5: r = accept::slope_ladder(opt); break;
    case 6: r = accept::sliding_window(opt); break;
    case 7: r = accept::random_order_best(); break;
    case 8: r = accept::memory_sublinearity(); break;
    case 9: r = accept::merge_shrinkage(); break;
    case 10: r = accept::determinism(); break;
    default: throw ConfigError("no acceptance criterion " + std::to_string(id));
  }
  r.passed = !r.checks.empty() &&
             std::all_of(r.checks.begin(), r.checks.end(), [](const Check& c) { return c.passed; });
  r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline std::string summary_line(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << " (" << accept::fmt(r.wall_ms / 1000.0, 3)
     << " s)";
  for (const auto& c : r.checks)
    os << "\n    " << (c.passed ? "ok  " : "FAIL") << ' ' << c.what << " = " << accept::fmt(c.measured, 5) << ' '
       << c.bound;
  if (!r.note.empty()) os << "\n    note: " << r.note;
  return os.str();
}

inline std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
  std::vector<int> ids = opt.only;
  if (ids.empty())
    for (int i = 1; i <= static_cast<int>(criterion_names().size()); ++i) ids.push_back(i);
  std::vector<CriterionResult> out;
  for (int id : ids) {
    out.push_back(run_criterion(id, opt));
    if (opt.progress) *opt.progress << summary_line(out.back()) << std::endl;
  }
  return out;
}

}  // namespace mbol::harness
