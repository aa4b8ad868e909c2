#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mbol/core/instance.hpp"

namespace mbol {

class ProtocolViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// What a policy does on one day: the arm it plays (its loss is incurred and
/// observed) and, for two-query policies, one extra arm observed for free.
struct Action {
  Arm play = 0;
  std::optional<Arm> probe;
};

struct Feedback {
  double played_loss = 0.0;
  std::optional<double> probe_loss;
};

struct Observation {
  Arm arm;
  double loss;
};

struct PlayRecord {
  Day day = 0;
  Arm played = 0;
  double incurred = 0.0;
  std::optional<Arm> probe;
  double probe_loss = 0.0;

  std::vector<Observation> observed() const {
    std::vector<Observation> out{{played, incurred}};
    if (probe) out.push_back({*probe, probe_loss});
    return out;
  }
};

/// Live word count in the unit of the space bounds: one tracked scalar or
/// index. Per-day temporaries are not counted.
class MemoryMeter {
 public:
  void observe(std::size_t words) noexcept {
    current_ = words;
    peak_ = std::max(peak_, words);
  }
  std::size_t current() const noexcept { return current_; }
  std::size_t peak() const noexcept { return peak_; }

 private:
  std::size_t current_ = 0;
  std::size_t peak_ = 0;
};

struct Trace {
  std::vector<PlayRecord> records;
  std::vector<std::uint32_t> memory;  // tracked words after each day
  std::size_t peak_memory_words = 0;

  std::size_t size() const noexcept { return records.size(); }
  std::vector<Arm> played_arms() const {
    std::vector<Arm> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.played);
    return out;
  }
};

/// The uniform state-machine contract: act on day t, then receive exactly the
/// losses of the arms named in the action.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string name() const = 0;
  /// Observed losses allowed per day (1 = bandit, 2 = one free extra query).
  virtual unsigned query_budget() const = 0;
  virtual Action act(Day t) = 0;
  virtual void observe(Day t, const Feedback& feedback) = 0;
  /// Persistent scalars currently held (weights, accumulators, counters, ids).
  virtual std::size_t tracked_words() const = 0;
};

/// Advances the policy by exactly one day against the oblivious instance.
inline PlayRecord step(Policy& policy, const Instance& instance, Day t) {
  if (t >= instance.horizon()) throw std::out_of_range("step: day beyond horizon");
  const Action a = policy.act(t);
  const unsigned used = a.probe ? 2u : 1u;
  if (used > policy.query_budget()) {
    throw ProtocolViolation(policy.name() + " observed " + std::to_string(used) +
                            " losses with a budget of " + std::to_string(policy.query_budget()));
  }
  if (a.play >= instance.n() || (a.probe && *a.probe >= instance.n())) {
    throw ProtocolViolation(policy.name() + " queried an arm outside [n]");
  }
  PlayRecord rec;
  rec.day = t;
  rec.played = a.play;
  rec.incurred = instance.loss(t, a.play);
  Feedback fb{rec.incurred, std::nullopt};
  if (a.probe) {
    rec.probe = a.probe;
    rec.probe_loss = instance.loss(t, *a.probe);
    fb.probe_loss = rec.probe_loss;
  }
  policy.observe(t, fb);
  return rec;
}

/// Runs a full horizon and records the memory meter after every day.
inline Trace run(Policy& policy, const Instance& instance) {
  Trace trace;
  trace.records.reserve(instance.horizon());
  trace.memory.reserve(instance.horizon());
  MemoryMeter meter;
  for (Day t = 0; t < instance.horizon(); ++t) {
    trace.records.push_back(step(policy, instance, t));
    meter.observe(policy.tracked_words());
    trace.memory.push_back(static_cast<std::uint32_t>(meter.current()));
  }
  trace.peak_memory_words = meter.peak();
  return trace;
}

}  // namespace mbol
