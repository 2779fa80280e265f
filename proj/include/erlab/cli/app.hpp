// `erlab run` and `erlab list`.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "erlab/cli/config.hpp"
#include "erlab/cli/experiments.hpp"
#include "erlab/prob/parallel.hpp"

namespace erlab::cli {

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kConfigInvalid = 2, kCheckFailed = 3 };

struct RunOptions {
  bool check = false;
  std::optional<unsigned> threads;
  std::optional<std::string> output_dir;  ///< overrides the config's output_dir
};

struct ExperimentInfo {
  Experiment experiment;
  const char* description;
  const char* exercises;
};

inline constexpr ExperimentInfo kExperimentInfo[] = {
    {Experiment::rls_bound,
     "Monte Carlo Bayes excess risk of ridge and posterior sampling vs the information bounds",
     "thm10 (Gaussian posterior-sampling bound), thm7 (prior-family bound), ridge <= PS dominance"},
    {Experiment::game, "excess-risk game on a finite grid: LP and fictitious-play values, pure gap",
     "minimax duality at finite scale, least favorable prior, thm5b capacity bound"},
    {Experiment::vc, "exact information chain and Bayes excess risk of the threshold class",
     "growth function / Sauer-Shelah chain, thm4b realizable bound"},
    {Experiment::rates, "large-n information residual, lower rate and fitted excess-risk slope",
     "Fisher-information expansion of I(W;Z^n), individual upper and lower rates"},
    {Experiment::capacity, "Blahut-Arimoto capacity of the threshold data channel",
     "channel capacity kappa_n, thm5b minimax bound"},
    {Experiment::envelope, "Monte Carlo cumulant of the posterior-sampling loss vs its envelope",
     "sub-exponential envelope behind thm7 and thm10"},
};

inline std::string list_experiments() {
  std::string out;
  for (const auto& info : kExperimentInfo) {
    std::string name = to_string(info.experiment);
    name.resize(std::max<std::size_t>(name.size(), 10), ' ');
    out += name + "  " + info.description + "\n";
    out += std::string(12, ' ') + "exercises: " + info.exercises + "\n";
  }
  return out;
}

namespace detail {

inline json report_json(const ExperimentConfig& cfg, const RunResult& res) {
  json report = res.report;
  report["experiment"] = to_string(cfg.experiment);
  report["seed"] = cfg.seed;
  json checks = json::array();
  for (const auto& c : res.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  report["checks"] = checks;
  report["all_checks_passed"] = res.all_passed();
  if (!report.contains("bounds")) report["bounds"] = json::array();
  return report;
}

inline void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << body;
  out.close();
  if (!out) throw std::runtime_error("error writing " + p.string());
}

}  // namespace detail

/// Writes results.csv, report.json, config-echo.json (plus any extra files)
/// into dir.  Files already written are removed if a later write fails.
inline void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                          const RunResult& res) {
  std::vector<std::pair<std::string, std::string>> files = {
      {"results.csv", res.csv},
      {"report.json", detail::report_json(cfg, res).dump(2) + "\n"},
      {"config-echo.json", cfg.echo.dump(2) + "\n"},
  };
  for (const auto& [name, body] : res.extra_files) files.emplace_back(name, body);
  std::vector<std::filesystem::path> written;
  try {
    std::filesystem::create_directories(dir);
    for (const auto& [name, body] : files) {
      const auto p = dir / name;
      detail::write_file(p, body);
      written.push_back(p);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) std::filesystem::remove(p, ec);
    throw;
  }
}

/// Full `erlab run`: returns the process exit code.
inline int run(const std::string& config_path, const RunOptions& opts,
               std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  if (opts.threads) set_max_threads(*opts.threads);
  ExperimentConfig cfg;
  try {
    std::optional<std::string> seed_env;
    if (const char* s = std::getenv("ERLAB_SEED")) seed_env = s;
    cfg = load_config(config_path, seed_env);
    if (opts.output_dir) cfg.output_dir = *opts.output_dir;
  } catch (const ConfigError& e) {
    err << "erlab: invalid config: " << e.what() << "\n";
    return kConfigInvalid;
  }

  RunResult res;
  try {
    res = run_experiment(cfg);
  } catch (const std::invalid_argument& e) {
    err << "erlab: invalid input: " << e.what() << "\n";
    return kConfigInvalid;
  } catch (const std::exception& e) {
    err << "erlab: " << e.what() << "\n";
    return kRuntimeError;
  }

  try {
    write_outputs(cfg.output_dir, cfg, res);
  } catch (const std::exception& e) {
    err << "erlab: " << e.what() << "\n";
    return kRuntimeError;
  }

  std::size_t failed = 0;
  for (const auto& c : res.checks) {
    if (!c.passed) {
      ++failed;
      if (opts.check) err << "FAILED " << c.name << ": " << c.detail << "\n";
    }
  }
  out << to_string(cfg.experiment) << ": wrote " << cfg.output_dir << " (" << res.checks.size() - failed
      << "/" << res.checks.size() << " checks passed)\n";
  return opts.check && failed > 0 ? kCheckFailed : kOk;
}

}  // namespace erlab::cli
