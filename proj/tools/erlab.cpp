// erlab: experiment runner.
//   erlab run [--check] [--threads N] [--output-dir DIR] <config.json>
//   erlab list
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "erlab/cli/app.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Excess-risk lab: Bayesian and minimax excess-risk experiments"};
  app.require_subcommand(1);

  std::string config;
  bool check = false;
  unsigned threads = 0;
  std::string output_dir;
  auto* run = app.add_subcommand("run", "Run one experiment from a JSON config");
  run->add_flag("--check", check, "Exit 3 if any invariant check fails");
  run->add_option("--threads", threads, "Maximum worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  run->add_option("--output-dir", output_dir, "Override the config's output_dir");
  run->add_option("config", config, "Experiment config (JSON)")->required();

  app.add_subcommand("list", "List experiments and what they exercise");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : erlab::cli::kConfigInvalid;
  }

  if (app.got_subcommand("list")) {
    std::cout << erlab::cli::list_experiments();
    return 0;
  }
  erlab::cli::RunOptions opts;
  opts.check = check;
  if (threads > 0) opts.threads = threads;
  if (!output_dir.empty()) opts.output_dir = output_dir;
  return erlab::cli::run(config, opts);
}
