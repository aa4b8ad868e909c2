#pragma once

// Runs a config over its (T, seed) cells, computes oracle metrics on each
// trace and writes plot-ready CSV rows in a fixed order.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mbol/harness/config.hpp"
#include "mbol/oracles.hpp"

namespace mbol::harness {

/// Fixed column set and order of the per-cell CSV.
inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"policy",         "n",
                                             "T",              "W",
                                             "seed",           "cumulative_regret",
                                             "window_regret",  "interval_regret",
                                             "peak_memory_words", "wall_ms",
                                             "errors"};
  return cols;
}

/// One CSV row. A cell with several windows yields one row per W.
struct CellRow {
  std::string policy;
  std::size_t n = 0;
  Day T = 0;
  std::optional<Day> W;
  std::uint64_t seed = 0;
  std::optional<double> cumulative_regret;
  std::optional<double> window_regret;
  std::optional<double> interval_regret;
  std::optional<std::size_t> peak_memory_words;
  std::optional<double> wall_ms;
  std::string errors;
};

struct SummaryRow {
  std::string policy;
  std::size_t n = 0;
  Day T = 0;
  std::optional<Day> W;
  std::size_t cells = 0;
  double mean_cumulative = 0.0;
  double std_cumulative = 0.0;
  std::optional<double> mean_window;  // empty when no window was requested
  std::optional<double> std_window;
  double mean_peak_memory = 0.0;
};

struct ExperimentResult {
  std::vector<CellRow> rows;
  std::vector<SummaryRow> summary;
};

namespace detail {

inline std::string format_number(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << x;
  return os.str();
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

template <class T>
std::string opt(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_floating_point_v<T>) {
    return format_number(*v);
  } else {
    return std::to_string(*v);
  }
}

inline std::vector<CellRow> run_cell(const ExperimentConfig& cfg, Day T, std::uint64_t seed) {
  CellRow base;
  base.policy = cfg.policy;
  base.n = cfg.n;
  base.T = T;
  base.seed = seed;
  std::vector<CellRow> out;
  auto rows_for = [&](const CellRow& r) {
    if (cfg.windows.empty()) {
      out.push_back(r);
      return;
    }
    for (Day W : cfg.windows) {
      out.push_back(r);
      out.back().W = W;
    }
  };
  try {
    const auto start = std::chrono::steady_clock::now();
    Instance inst(make_instance_config(cfg, T, seed));
    base.n = inst.n();
    base.T = inst.horizon();
    auto policy = make_policy(cfg, inst.n(), inst.horizon(), policy_streams(seed));
    const Trace trace = run(*policy, inst);
    const auto stop = std::chrono::steady_clock::now();
    base.cumulative_regret = oracles::cumulative_regret(trace, inst);
    base.peak_memory_words = trace.peak_memory_words;
    if (cfg.interval) {
      if (inst.horizon() <= oracles::kDefaultIntervalCap) {
        base.interval_regret = oracles::interval_regret(trace, inst).regret;
      } else {
        base.errors = "interval regret skipped: T above " + std::to_string(oracles::kDefaultIntervalCap);
      }
    }
    if (cfg.timing) base.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    if (cfg.windows.empty()) {
      out.push_back(base);
    } else {
      for (Day W : cfg.windows) {
        out.push_back(base);
        out.back().W = W;
        out.back().window_regret = oracles::sliding_window_regret(trace, inst, W);
      }
    }
  } catch (const std::exception& e) {
    base.cumulative_regret.reset();
    base.peak_memory_words.reset();
    base.interval_regret.reset();
    base.wall_ms.reset();
    base.errors = e.what();
    rows_for(base);
  }
  return out;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// Mean and sample standard deviation per (T, W) over the cells without errors.
inline std::vector<SummaryRow> summarize(const std::vector<CellRow>& rows) {
  std::map<std::pair<Day, Day>, std::vector<const CellRow*>> groups;
  for (const auto& r : rows) groups[{r.T, r.W.value_or(0)}].push_back(&r);
  std::vector<SummaryRow> out;
  for (const auto& [key, cells] : groups) {
    SummaryRow s;
    s.policy = cells.front()->policy;
    s.n = cells.front()->n;
    s.T = key.first;
    s.W = cells.front()->W;
    std::vector<double> cum, win, mem;
    for (const auto* c : cells) {
      if (!c->cumulative_regret) continue;
      cum.push_back(*c->cumulative_regret);
      if (c->window_regret) win.push_back(*c->window_regret);
      if (c->peak_memory_words) mem.push_back(static_cast<double>(*c->peak_memory_words));
    }
    s.cells = cum.size();
    s.mean_cumulative = detail::mean_of(cum);
    s.std_cumulative = detail::stddev_of(cum);
    if (!win.empty()) {
      s.mean_window = detail::mean_of(win);
      s.std_window = detail::stddev_of(win);
    }
    s.mean_peak_memory = detail::mean_of(mem);
    out.push_back(s);
  }
  return out;
}

/// Runs every (T, seed) cell. Cells are farmed to `threads` workers, each
/// writing only its own slot, so row order is fixed by (T, seed) order.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto seeds = cfg.seed_values();
  std::vector<std::pair<Day, std::uint64_t>> cells;
  for (Day T : cfg.horizons)
    for (auto s : seeds) cells.emplace_back(T, s);
  std::vector<std::vector<CellRow>> slots(cells.size());
  const std::size_t workers = std::min<std::size_t>(cfg.threads, std::max<std::size_t>(cells.size(), 1));
  auto work = [&](std::size_t w) {
    for (std::size_t i = w; i < cells.size(); i += workers)
      slots[i] = detail::run_cell(cfg, cells[i].first, cells[i].second);
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  ExperimentResult res;
  for (auto& s : slots)
    for (auto& r : s) res.rows.push_back(std::move(r));
  res.summary = summarize(res.rows);
  return res;
}

inline void write_csv(std::ostream& os, const std::vector<CellRow>& rows) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : rows) {
    os << detail::csv_escape(r.policy) << ',' << r.n << ',' << r.T << ',' << detail::opt(r.W) << ',' << r.seed
       << ',' << detail::opt(r.cumulative_regret) << ',' << detail::opt(r.window_regret) << ','
       << detail::opt(r.interval_regret) << ',' << detail::opt(r.peak_memory_words) << ','
       << detail::opt(r.wall_ms) << ',' << detail::csv_escape(r.errors) << '\n';
  }
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "policy,n,T,W,cells,mean_cumulative_regret,std_cumulative_regret,mean_window_regret,"
        "std_window_regret,mean_peak_memory_words\n";
  for (const auto& s : rows) {
    os << detail::csv_escape(s.policy) << ',' << s.n << ',' << s.T << ',' << detail::opt(s.W) << ',' << s.cells
       << ',' << detail::format_number(s.mean_cumulative) << ',' << detail::format_number(s.std_cumulative) << ','
       << detail::opt(s.mean_window) << ',' << detail::opt(s.std_window) << ','
       << detail::format_number(s.mean_peak_memory) << '\n';
  }
}

inline std::string to_csv(const std::vector<CellRow>& rows) {
  std::ostringstream os;
  write_csv(os, rows);
  return os.str();
}

/// Parses a CSV produced by write_csv. Quoted fields may contain commas.
inline std::vector<CellRow> read_csv(std::istream& in) {
  auto fields_of = [](const std::string& line) {
    std::vector<std::string> f(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          f.back() += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          f.back() += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        f.emplace_back();
      } else {
        f.back() += c;
      }
    }
    return f;
  };
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("CSV is empty");
  const auto header = fields_of(line);
  if (header != csv_columns()) throw std::runtime_error("CSV header does not match the experiment schema");
  std::vector<CellRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = fields_of(line);
    if (f.size() != header.size()) throw std::runtime_error("CSV row has the wrong number of fields");
    CellRow r;
    r.policy = f[0];
    r.n = std::stoull(f[1]);
    r.T = std::stoull(f[2]);
    if (!f[3].empty()) r.W = std::stoull(f[3]);
    r.seed = std::stoull(f[4]);
    if (!f[5].empty()) r.cumulative_regret = std::stod(f[5]);
    if (!f[6].empty()) r.window_regret = std::stod(f[6]);
    if (!f[7].empty()) r.interval_regret = std::stod(f[7]);
    if (!f[8].empty()) r.peak_memory_words = std::stoull(f[8]);
    if (!f[9].empty()) r.wall_ms = std::stod(f[9]);
    r.errors = f[10];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace mbol::harness
