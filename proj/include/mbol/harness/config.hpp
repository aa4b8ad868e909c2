#pragma once

// Experiment configuration: a flat key=value file, CLI overrides on top, and
// factories that turn the validated config into instances and policies.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mbol/classic.hpp"
#include "mbol/core/instance.hpp"
#include "mbol/core/policy.hpp"
#include "mbol/core/random.hpp"
#include "mbol/pool.hpp"
#include "mbol/random_order.hpp"
#include "mbol/single_query.hpp"
#include "mbol/sliding.hpp"
#include "mbol/two_query.hpp"

namespace mbol::harness {

inline const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names{"exp3",         "exp3_explore", "exp3_two_query", "single_query",
                                              "boost",        "two_query",    "sliding",        "random_order"};
  return names;
}

struct ExperimentConfig {
  std::string policy = "exp3";
  std::size_t n = 8;
  std::vector<Day> horizons{4096};
  std::vector<Day> windows;
  std::size_t seeds = 1;
  std::vector<std::uint64_t> seed_list;  // overrides `seeds` when non-empty
  std::string model = "hidden_best";
  std::string profile = "desk";
  std::string out;
  std::size_t depth = 0;
  std::optional<double> gamma;
  std::optional<double> eta;
  bool interval = false;
  bool timing = false;
  std::size_t threads = 1;

  std::vector<std::uint64_t> seed_values() const {
    if (!seed_list.empty()) return seed_list;
    std::vector<std::uint64_t> out(seeds);
    for (std::size_t i = 0; i < seeds; ++i) out[i] = i;
    return out;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": integer out of range: '" + v + "'");
  }
}

/// Accepts plain integers and powers written as 2^k.
inline Day parse_day(const std::string& key, const std::string& v) {
  if (v.rfind("2^", 0) == 0) {
    const auto k = parse_uint(key, v.substr(2));
    if (k > 40) throw ConfigError(key + ": exponent too large: " + v);
    return Day{1} << k;
  }
  return static_cast<Day>(parse_uint(key, v));
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

}  // namespace detail

/// Applies one key=value setting. Unknown keys are rejected.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  using namespace detail;
  const std::string v = trim(value);
  if (key == "policy") {
    cfg.policy = v;
  } else if (key == "n") {
    cfg.n = parse_uint(key, v);
  } else if (key == "T") {
    cfg.horizons.clear();
    for (const auto& x : split(v, ',')) cfg.horizons.push_back(parse_day(key, x));
  } else if (key == "W") {
    cfg.windows.clear();
    if (!v.empty())
      for (const auto& x : split(v, ',')) cfg.windows.push_back(parse_day(key, x));
  } else if (key == "seeds") {
    cfg.seeds = parse_uint(key, v);
  } else if (key == "seed_list" || key == "seed-list") {
    cfg.seed_list.clear();
    if (!v.empty())
      for (const auto& x : split(v, ',')) cfg.seed_list.push_back(parse_uint(key, x));
  } else if (key == "model") {
    cfg.model = v;
  } else if (key == "profile") {
    cfg.profile = v;
  } else if (key == "out") {
    cfg.out = v;
  } else if (key == "depth") {
    cfg.depth = parse_uint(key, v);
  } else if (key == "gamma") {
    cfg.gamma = parse_double(key, v);
  } else if (key == "eta") {
    cfg.eta = parse_double(key, v);
  } else if (key == "interval") {
    cfg.interval = parse_bool(key, v);
  } else if (key == "timing") {
    cfg.timing = parse_bool(key, v);
  } else if (key == "threads") {
    cfg.threads = parse_uint(key, v);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

/// Reads key=value lines; blank lines and lines starting with '#' are skipped.
inline void load_config_text(ExperimentConfig& cfg, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    apply_setting(cfg, detail::trim(s.substr(0, eq)), s.substr(eq + 1));
  }
}

inline void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  load_config_text(cfg, in);
}

inline pool::ConstantsProfile make_profile(const std::string& name) {
  if (name == "desk") return pool::ConstantsProfile::desk();
  if (name == "paper") return pool::ConstantsProfile::paper();
  throw ConfigError("profile must be 'paper' or 'desk', got '" + name + "'");
}

/// Model strings look like `name` or `name:key=value,key=value`.
///   hidden_best:gap=0.25,best=0
///   two_phase:gap=0.25,first=0,second=1,switch=<day, default T/2>
///   hot_streak:len=64,hot=0.1,off=0.9
///   iid:means=0.5 0.4 0.3
///   random_order:gamma=1,best=0,len=64,hot=0.1,off=0.9
///   explicit:rows=0 1;1 0
inline LossModel make_model(const std::string& spec, std::size_t n, Day horizon) {
  using namespace detail;
  const auto colon = spec.find(':');
  const std::string name = trim(spec.substr(0, colon));
  std::map<std::string, std::string> kv;
  if (colon != std::string::npos) {
    for (const auto& item : split(spec.substr(colon + 1), ',')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ConfigError("model: expected key=value, got '" + item + "'");
      kv[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
    }
  }
  std::vector<std::string> allowed;
  auto num = [&](const std::string& k, double d) {
    allowed.push_back(k);
    const auto it = kv.find(k);
    return it == kv.end() ? d : parse_double("model." + k, it->second);
  };
  auto idx = [&](const std::string& k, std::uint64_t d) {
    allowed.push_back(k);
    const auto it = kv.find(k);
    return it == kv.end() ? d : parse_uint("model." + k, it->second);
  };
  auto text = [&](const std::string& k) {
    allowed.push_back(k);
    const auto it = kv.find(k);
    return it == kv.end() ? std::string{} : it->second;
  };
  auto check_keys = [&] {
    for (const auto& [k, v] : kv)
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
        throw ConfigError("model " + name + ": unknown parameter '" + k + "'");
  };
  auto streak = [&] {
    HotStreak h;
    h.streak_len = idx("len", h.streak_len);
    h.streak_rate = num("hot", h.streak_rate);
    h.off_rate = num("off", h.off_rate);
    return h;
  };
  auto numbers = [&](const std::string& key, const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    for (std::string tok; is >> tok;) out.push_back(parse_double(key, tok));
    return out;
  };

  LossModel m;
  if (name == "hidden_best") {
    m = HiddenBest{num("gap", 0.25), static_cast<Arm>(idx("best", 0))};
  } else if (name == "two_phase") {
    const double gap = num("gap", 0.25);
    const auto first = idx("first", 0);
    const auto second = idx("second", 1);
    const Day sw = idx("switch", horizon / 2);
    if (first >= n || second >= n) throw ConfigError("model two_phase: arm outside [n]");
    std::vector<double> a(n, 0.5), b(n, 0.5);
    a[first] = 0.5 - gap;
    b[second] = 0.5 - gap;
    m = TwoPhase{sw, a, b};
  } else if (name == "hot_streak") {
    m = streak();
  } else if (name == "iid") {
    m = IidMeans{numbers("model.means", text("means"))};
  } else if (name == "random_order") {
    const double g = num("gamma", 1.0);
    const auto best = static_cast<Arm>(idx("best", 0));
    m = RandomOrderBest{g, best, streak()};
  } else if (name == "explicit") {
    std::vector<std::vector<double>> rows;
    for (const auto& r : split(text("rows"), ';')) rows.push_back(numbers("model.rows", r));
    m = ExplicitTable{rows};
  } else {
    throw ConfigError("unknown model '" + name + "'");
  }
  check_keys();
  return m;
}

inline InstanceConfig make_instance_config(const ExperimentConfig& cfg, Day horizon, std::uint64_t seed) {
  InstanceConfig ic;
  ic.n = cfg.n;
  ic.horizon = horizon;
  ic.model = make_model(cfg.model, cfg.n, horizon);
  ic.seed = derive_seed(seed, "instance");
  if (const auto* t = std::get_if<ExplicitTable>(&ic.model)) {
    ic.horizon = t->rows.size();
    if (!t->rows.empty()) ic.n = t->rows.front().size();
  }
  return ic;
}

inline RandomStreams policy_streams(std::uint64_t seed) { return RandomStreams(derive_seed(seed, "policy")); }

inline std::unique_ptr<Policy> make_policy(const ExperimentConfig& cfg, std::size_t n, Day horizon,
                                           RandomStreams streams) {
  const auto profile = make_profile(cfg.profile);
  const std::string& p = cfg.policy;
  auto reject = [&](bool bad, const char* what) {
    if (bad) throw ConfigError(std::string(what) + " is not used by policy '" + p + "'");
  };
  if (p == "exp3" || p == "exp3_explore") {
    reject(cfg.eta.has_value(), "eta");
    const double g = cfg.gamma.value_or(classic::exp3_default_gamma(n, horizon));
    if (p == "exp3") return std::make_unique<classic::Exp3>(n, g, std::move(streams));
    return std::make_unique<classic::Exp3Explore>(n, g, std::move(streams));
  }
  if (p == "exp3_two_query") {
    reject(cfg.gamma.has_value(), "gamma");
    return std::make_unique<classic::Exp3TwoQuery>(n, cfg.eta.value_or(classic::two_query_default_eta(n, horizon)),
                                                   std::move(streams));
  }
  if (p == "single_query") {
    reject(cfg.eta.has_value(), "eta");
    single_query::BaselineConfig bc;
    bc.n = n;
    bc.horizon = horizon;
    bc.profile = profile;
    bc.gamma = cfg.gamma;
    return std::make_unique<single_query::BaselinePolicy>(bc, std::move(streams));
  }
  if (p == "boost") {
    reject(cfg.eta.has_value(), "eta");
    single_query::BoostConfig bc;
    bc.n = n;
    bc.horizon = horizon;
    bc.depth = cfg.depth;
    bc.profile = profile;
    bc.gamma_arm = cfg.gamma;
    return std::make_unique<single_query::BoostPolicy>(bc, std::move(streams));
  }
  if (p == "two_query") {
    reject(cfg.gamma.has_value(), "gamma");
    two_query::TreeConfig tc;
    tc.n = n;
    tc.horizon = horizon;
    tc.depth = cfg.depth;
    tc.profile = profile;
    if (cfg.eta) tc.meta_eta_scale = *cfg.eta;
    return std::make_unique<two_query::TwoQueryPolicy>(tc, std::move(streams));
  }
  if (p == "sliding") {
    reject(cfg.gamma.has_value(), "gamma");
    reject(cfg.eta.has_value(), "eta");
    sliding::SlidingConfig sc;
    sc.n = n;
    sc.horizon = horizon;
    sc.depth = cfg.depth;
    sc.profile = profile;
    return std::make_unique<sliding::SlidingPolicy>(sc, std::move(streams));
  }
  if (p == "random_order") {
    reject(cfg.gamma.has_value(), "gamma");
    reject(cfg.eta.has_value(), "eta");
    return std::make_unique<random_order::RandomOrderPolicy>(n, horizon);
  }
  throw ConfigError("unknown policy '" + p + "'");
}

/// Checks every field, and builds one instance and policy per horizon so that
/// schedule errors surface before any run starts.
inline void validate(const ExperimentConfig& cfg) {
  if (std::find(policy_names().begin(), policy_names().end(), cfg.policy) == policy_names().end())
    throw ConfigError("unknown policy '" + cfg.policy + "'");
  if (cfg.n == 0) throw ConfigError("n must be >= 1");
  if (cfg.horizons.empty()) throw ConfigError("T needs at least one horizon");
  if (cfg.threads == 0) throw ConfigError("threads must be >= 1");
  make_profile(cfg.profile);
  if (cfg.gamma && !(*cfg.gamma > 0.0 && *cfg.gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (cfg.eta && !(*cfg.eta > 0.0)) throw ConfigError("eta must be > 0");
  for (Day T : cfg.horizons) {
    const auto ic = make_instance_config(cfg, T, 0);
    Instance inst(ic);
    for (Day W : cfg.windows)
      if (W < 1 || W > inst.horizon()) throw ConfigError("window W=" + std::to_string(W) + " outside [1, T]");
    make_policy(cfg, inst.n(), inst.horizon(), policy_streams(0));
  }
}

}  // namespace mbol::harness
