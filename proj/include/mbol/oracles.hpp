#pragma once

// Slow, obviously correct reference computations. Everything here scans the
// full loss table; none of it is meant to run inside a policy.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mbol/core/instance.hpp"
#include "mbol/core/policy.hpp"

namespace mbol::oracles {

inline constexpr Day kDefaultIntervalCap = 4096;

struct IntervalArgmax {
  Day first = 0;  // inclusive
  Day last = 0;   // inclusive
};

struct RegretReport {
  double cumulative = 0.0;
  Day window = 0;
  double window_regret = 0.0;
  std::optional<double> interval;
  IntervalArgmax interval_span;
  std::vector<double> per_day;  // loss(t, i_t) - loss(t, overall best arm)
};

namespace detail {

inline void check_trace(const Trace& trace, const Instance& inst) {
  if (trace.size() != inst.horizon()) {
    throw std::invalid_argument("trace length differs from the instance horizon");
  }
}

}  // namespace detail

/// Sum of incurred losses minus the smallest per-arm total.
inline double cumulative_regret(const Trace& trace, const Instance& inst) {
  detail::check_trace(trace, inst);
  double alg = 0.0;
  std::vector<double> totals(inst.n(), 0.0);
  for (Day t = 0; t < inst.horizon(); ++t) {
    alg += trace.records[t].incurred;
    for (Arm i = 0; i < inst.n(); ++i) totals[i] += inst.loss(t, i);
  }
  return alg - *std::min_element(totals.begin(), totals.end());
}

/// max over windows [t-W+1, t] inside days [begin, end) of the window
/// regret. Uses rolling per-arm sums, so memory is O(n) and time O(nT).
inline double sliding_window_regret(const Trace& trace, const Instance& inst, Day window, Day begin,
                                    Day end) {
  detail::check_trace(trace, inst);
  if (begin > end || end > inst.horizon()) throw std::invalid_argument("day range outside [0, T]");
  if (window < 1 || window > end - begin) throw std::invalid_argument("window W must fit the day range");
  std::vector<double> arm_sum(inst.n(), 0.0);
  double alg = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (Day t = begin; t < end; ++t) {
    alg += trace.records[t].incurred;
    for (Arm i = 0; i < inst.n(); ++i) arm_sum[i] += inst.loss(t, i);
    if (t >= begin + window) {
      const Day out = t - window;
      alg -= trace.records[out].incurred;
      for (Arm i = 0; i < inst.n(); ++i) arm_sum[i] -= inst.loss(out, i);
    }
    if (t + 1 >= begin + window) {
      best = std::max(best, alg - *std::min_element(arm_sum.begin(), arm_sum.end()));
    }
  }
  return best;
}

inline double sliding_window_regret(const Trace& trace, const Instance& inst, Day window) {
  if (window < 1 || window > inst.horizon()) throw std::invalid_argument("window W must lie in [1, T]");
  return sliding_window_regret(trace, inst, window, 0, inst.horizon());
}

struct IntervalResult {
  double regret = 0.0;
  IntervalArgmax span;
};

/// Max regret over every interval [t1, t2]. O(n T^2); refuses horizons above
/// `cap` because it exists to check other code, not to be run at scale.
inline IntervalResult interval_regret(const Trace& trace, const Instance& inst,
                                      Day cap = kDefaultIntervalCap) {
  detail::check_trace(trace, inst);
  const Day T = inst.horizon();
  if (T > cap) throw std::invalid_argument("interval regret oracle is capped at T <= " + std::to_string(cap));
  const std::size_t n = inst.n();
  // Dense table once; the double loop would otherwise re-derive every loss T times.
  std::vector<double> table(T * n);
  for (Day t = 0; t < T; ++t)
    for (Arm i = 0; i < n; ++i) table[t * n + i] = inst.loss(t, i);

  IntervalResult best{-std::numeric_limits<double>::infinity(), {}};
  std::vector<double> sums(n);
  for (Day a = 0; a < T; ++a) {
    std::fill(sums.begin(), sums.end(), 0.0);
    double alg = 0.0;
    for (Day b = a; b < T; ++b) {
      alg += trace.records[b].incurred;
      double lo = std::numeric_limits<double>::infinity();
      for (Arm i = 0; i < n; ++i) {
        sums[i] += table[b * n + i];
        lo = std::min(lo, sums[i]);
      }
      if (alg - lo > best.regret) best = {alg - lo, {a, b}};
    }
  }
  return best;
}

/// Regret trajectory against the overall best arm (smallest index on ties).
inline std::vector<double> per_day_regret(const Trace& trace, const Instance& inst) {
  detail::check_trace(trace, inst);
  const Arm best = inst.best_arm();
  std::vector<double> out(inst.horizon());
  for (Day t = 0; t < inst.horizon(); ++t) out[t] = trace.records[t].incurred - inst.loss(t, best);
  return out;
}

inline RegretReport regret_report(const Trace& trace, const Instance& inst, Day window,
                                  bool with_interval) {
  RegretReport r;
  r.cumulative = cumulative_regret(trace, inst);
  r.window = window;
  r.window_regret = sliding_window_regret(trace, inst, window);
  if (with_interval) {
    const auto iv = interval_regret(trace, inst);
    r.interval = iv.regret;
    r.interval_span = iv.span;
  }
  r.per_day = per_day_regret(trace, inst);
  return r;
}

/// A filter arm and the epoch at which it entered the pool.
struct FilterMember {
  Arm arm;
  std::size_t entry_epoch;
};

/// The dynamic benchmark of `arm` over the lifespan [start_day, end_day),
/// evaluated on true losses. The lifespan is cut at the filter arms' entry
/// epochs; on each piece the benchmark takes the smallest loss among filter
/// arms already present at the piece's start, and falls back to `arm`'s own
/// loss when none is.
inline double exact_benchmark(const Instance& inst, Day epoch_len, Day start_day, Day end_day,
                              Arm arm, const std::vector<FilterMember>& filter) {
  if (epoch_len == 0 || start_day % epoch_len != 0 || end_day % epoch_len != 0 ||
      end_day < start_day) {
    throw std::invalid_argument("lifespan must be aligned to epoch multiples");
  }
  if (filter.empty()) throw std::invalid_argument("filter set must be nonempty");
  const std::size_t first = start_day / epoch_len;
  const std::size_t last = end_day / epoch_len;

  std::vector<std::size_t> cuts{first, last};
  for (const auto& f : filter)
    if (f.entry_epoch > first && f.entry_epoch < last) cuts.push_back(f.entry_epoch);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto span_loss = [&](Arm a, std::size_t e0, std::size_t e1) {
    double s = 0.0;
    for (Day t = e0 * epoch_len; t < e1 * epoch_len; ++t) s += inst.loss(t, a);
    return s;
  };

  double bm = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const std::size_t e0 = cuts[k];
    const std::size_t e1 = cuts[k + 1];
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : filter)
      if (f.entry_epoch <= e0) best = std::min(best, span_loss(f.arm, e0, e1));
    bm += std::isinf(best) ? span_loss(arm, e0, e1) : best;
  }
  return bm;
}

}  // namespace mbol::oracles
