#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace mbol {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used both as the seed mixer
// and as the stream generator: 64 bits of state, passes BigCrush, and is
// cheap to construct, which matters because restarted sub-policies derive
// fresh streams thousands of times per run.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a over the bytes of a name; stable across platforms and compilers.
constexpr std::uint64_t stable_tag(std::string_view name) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// seed(child) = mix(seed(parent) + golden * (tag + 1)).
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) noexcept {
  return splitmix64_mix(parent + 0x9e3779b97f4a7c15ULL * (tag + 1));
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view name) noexcept {
  return derive_seed(parent, stable_tag(name));
}

/// Deterministic random stream. All helpers are written out explicitly
/// instead of going through <random> distributions, whose output is
/// implementation-defined and would break cross-platform replay.
class Stream {
 public:
  explicit constexpr Stream(std::uint64_t seed = 0) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64_mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept {
    // Lemire's multiply-shift; the residual bias is < bound / 2^64.
    const unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    return static_cast<std::uint64_t>(m >> 64);
  }

  constexpr bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Number of failures before the first success of a Bernoulli(p) sequence.
  /// Used to skip through "sample each of n arms with probability p" in
  /// O(expected hits) instead of O(n).
  std::uint64_t geometric_skip(double p) noexcept {
    if (p >= 1.0) return 0;
    if (p <= 0.0) return std::numeric_limits<std::uint64_t>::max();
    const double u = 1.0 - uniform();  // (0, 1]
    const double k = std::floor(std::log(u) / std::log1p(-p));
    if (!(k < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(k);
  }

  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// The five named substreams every policy draws from. Keeping the roles apart
/// is what makes the ledgers of the two-query and sliding policies independent
/// of the exploitation coin flips: only `exploitation` touches the played arm.
struct RandomStreams {
  std::uint64_t master = 0;
  Stream arm_sampling;
  Stream exploration;
  Stream exploitation;
  Stream pool_filtration;
  Stream model_noise;

  RandomStreams() = default;

  explicit RandomStreams(std::uint64_t master_seed)
      : RandomStreams(master_seed, derive_seed(master_seed, "exploitation_sampling")) {}

  /// Same master seed, but the exploitation substream is reseeded explicitly.
  RandomStreams(std::uint64_t master_seed, std::uint64_t exploitation_seed)
      : master(master_seed),
        arm_sampling(derive_seed(master_seed, "arm_sampling")),
        exploration(derive_seed(master_seed, "exploration_query")),
        exploitation(exploitation_seed),
        pool_filtration(derive_seed(master_seed, "pool_filtration")),
        model_noise(derive_seed(master_seed, "model_noise")) {
    freeze_seeds();
  }

  /// Independent streams for an owned sub-component (a restarted sub-policy,
  /// a tree node). Every child substream is derived from the matching parent
  /// substream's seed, so fixing the parent's exploration stream fixes every
  /// descendant's exploration stream too.
  RandomStreams child(std::uint64_t tag) const {
    RandomStreams c;
    c.master = derive_seed(master, tag);
    c.arm_sampling = Stream(derive_seed(arm_seed_, tag));
    c.exploration = Stream(derive_seed(explore_seed_, tag));
    c.exploitation = Stream(derive_seed(exploit_seed_, tag));
    c.pool_filtration = Stream(derive_seed(filter_seed_, tag));
    c.model_noise = Stream(derive_seed(noise_seed_, tag));
    c.arm_seed_ = c.arm_sampling.state();
    c.explore_seed_ = c.exploration.state();
    c.exploit_seed_ = c.exploitation.state();
    c.filter_seed_ = c.pool_filtration.state();
    c.noise_seed_ = c.model_noise.state();
    return c;
  }

  RandomStreams child(std::string_view name) const { return child(stable_tag(name)); }

 private:
  void freeze_seeds() {
    arm_seed_ = arm_sampling.state();
    explore_seed_ = exploration.state();
    exploit_seed_ = exploitation.state();
    filter_seed_ = pool_filtration.state();
    noise_seed_ = model_noise.state();
  }

  std::uint64_t arm_seed_ = 0;
  std::uint64_t explore_seed_ = 0;
  std::uint64_t exploit_seed_ = 0;
  std::uint64_t filter_seed_ = 0;
  std::uint64_t noise_seed_ = 0;
};

}  // namespace mbol
