// mbol: run experiments, fit regret slopes, and run the acceptance suite.
// Exit codes: 0 success, 1 criterion failure, 2 configuration error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mbol/harness/acceptance.hpp"
#include "mbol/harness/config.hpp"
#include "mbol/harness/experiment.hpp"
#include "mbol/harness/slope.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;

struct RunFlags {
  std::string config;
  std::optional<std::string> policy, n, T, W, seeds, seed_list, model, profile, out, depth, gamma, eta, threads;
  bool interval = false;
  bool timing = false;
  std::string summary;
};

void add_run(CLI::App& app, RunFlags& f) {
  app.add_option("--config", f.config, "key=value config file; flags override it");
  app.add_option("--policy", f.policy, "exp3 | exp3_explore | exp3_two_query | single_query | boost | two_query | "
                                       "sliding | random_order");
  app.add_option("--n", f.n, "number of arms");
  app.add_option("--T", f.T, "horizons, comma separated; 2^k accepted");
  app.add_option("--W", f.W, "window lengths for window regret, comma separated");
  app.add_option("--seeds", f.seeds, "seed count (seeds 0..count-1)");
  app.add_option("--seed-list", f.seed_list, "explicit seeds, comma separated");
  app.add_option("--model", f.model, "loss model, e.g. hidden_best:gap=0.25,best=0");
  app.add_option("--profile", f.profile, "constants profile: paper | desk");
  app.add_option("--out", f.out, "CSV output path (default stdout)");
  app.add_option("--depth", f.depth, "nesting depth for boost, two_query and sliding");
  app.add_option("--gamma", f.gamma, "exploration rate override");
  app.add_option("--eta", f.eta, "learning-rate override");
  app.add_option("--threads", f.threads, "worker threads");
  app.add_flag("--interval", f.interval, "also compute interval regret (T <= 4096)");
  app.add_flag("--timing", f.timing, "fill the wall_ms column (output is then not reproducible)");
  app.add_option("--summary", f.summary, "write per-T mean/stddev CSV to this path");
}

mbol::harness::ExperimentConfig build_config(const RunFlags& f) {
  mbol::harness::ExperimentConfig cfg;
  if (!f.config.empty()) mbol::harness::load_config_file(cfg, f.config);
  auto set = [&](const char* key, const std::optional<std::string>& v) {
    if (v) mbol::harness::apply_setting(cfg, key, *v);
  };
  set("policy", f.policy);
  set("n", f.n);
  set("T", f.T);
  set("W", f.W);
  set("seeds", f.seeds);
  set("seed_list", f.seed_list);
  set("model", f.model);
  set("profile", f.profile);
  set("out", f.out);
  set("depth", f.depth);
  set("gamma", f.gamma);
  set("eta", f.eta);
  set("threads", f.threads);
  if (f.interval) cfg.interval = true;
  if (f.timing) cfg.timing = true;
  return cfg;
}

int cmd_run(const RunFlags& f) {
  const auto cfg = build_config(f);
  const auto res = mbol::harness::run_experiment(cfg);
  if (cfg.out.empty()) {
    mbol::harness::write_csv(std::cout, res.rows);
  } else {
    std::ofstream os(cfg.out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + cfg.out + "'");
    mbol::harness::write_csv(os, res.rows);
    if (!os) throw std::runtime_error("write failed for '" + cfg.out + "'");
  }
  if (!f.summary.empty()) {
    std::ofstream os(f.summary, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + f.summary + "'");
    mbol::harness::write_summary_csv(os, res.summary);
  } else {
    mbol::harness::write_summary_csv(std::cerr, res.summary);
  }
  return kOk;
}

int cmd_fit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mbol::ConfigError("cannot open '" + path + "'");
  const auto fit = mbol::harness::fit_slope(mbol::harness::read_csv(in));
  std::printf("points=%zu slope=%.6f intercept=%.6f r2=%.6f\n", fit.points.size(), fit.slope, fit.intercept, fit.r2);
  return kOk;
}

int cmd_acceptance(const std::vector<int>& only, std::optional<double> slope_bound, const std::string& report) {
  mbol::harness::AcceptanceOptions opt;
  opt.only = only;
  opt.slope_bound = slope_bound;
  opt.progress = &std::cout;
  const auto results = mbol::harness::run_acceptance(opt);
  bool all = true;
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : results) {
    all = all && r.passed;
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : r.checks)
      checks.push_back({{"what", c.what}, {"measured", c.measured}, {"bound", c.bound}, {"passed", c.passed}});
    j.push_back({{"id", r.id},
                 {"name", r.name},
                 {"passed", r.passed},
                 {"wall_ms", r.wall_ms},
                 {"checks", checks},
                 {"note", r.note}});
  }
  if (!report.empty()) {
    std::ofstream os(report);
    if (!os) throw std::runtime_error("cannot write '" + report + "'");
    os << j.dump(2) << '\n';
  }
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.passed;
  std::printf("%zu/%zu criteria passed\n", passed, results.size());
  return all ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memory-bounded online learning experiments"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "run an experiment and write CSV rows");
  add_run(*run, run_flags);

  std::string fit_path;
  auto* fit = app.add_subcommand("fit", "fit the log-log regret slope of a CSV");
  fit->add_option("csv", fit_path, "CSV written by `run`")->required();

  std::vector<int> only;
  std::optional<double> slope_bound;
  std::string report;
  auto* acc = app.add_subcommand("acceptance", "run the acceptance criteria");
  acc->add_option("--only", only, "criterion ids to run, comma separated")->delimiter(',')->check(CLI::Range(1, 10));
  acc->add_option("--slope-bound", slope_bound, "replace every upper slope bound (failure injection)");
  acc->add_option("--report", report, "write a JSON report to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*fit) return cmd_fit(fit_path);
    return cmd_acceptance(only, slope_bound, report);
  } catch (const mbol::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
