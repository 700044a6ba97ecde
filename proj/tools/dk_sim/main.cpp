#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dk-sim: regularized Dean-Kawasaki simulations and diagnostics"};
  app.require_subcommand(1);

  dk::cli::RunOptions opts;
  std::string config, out;
  std::uint64_t seed = 0;
  int replicas = 0, threads = 0;
  const std::map<std::string, std::string> help{
      {"simulate", "run the SPDE and write trajectories, diagnostics and kinetic tails"},
      {"uniqueness", "L1 distance between two runs sharing one noise path"},
      {"ladder", "Cauchy differences along gamma and sigma_n ladders"},
      {"particles", "simulate the interacting particle system"},
      {"compare", "particle empirical density against the mean-field solution"},
      {"kernel-audit", "integrability verdict and divergence of the configured kernel"},
      {"entropy-audit", "entropy, dissipation and budget along a run"},
  };
  for (const auto& name : dk::cli::subcommands()) {
    const auto it = help.find(name);
    CLI::App* sub = app.add_subcommand(name, it == help.end() ? "" : it->second);
    sub->add_option("--config", config, "experiment config (INI)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (default: [output] dir)");
    sub->add_option("--seed", seed, "top-level seed (default: [experiment] seed)");
    sub->add_option("--replicas", replicas, "Monte Carlo replicas")->check(CLI::PositiveNumber);
    sub->add_option("--threads", threads, "worker threads (fallback: DK_SIM_THREADS)")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dk::cli::kExitConfig;
  }

  const CLI::App* sub = app.get_subcommands().front();
  opts.config = config;
  if (sub->count("--out")) opts.out = out;
  if (sub->count("--seed")) opts.seed = seed;
  if (sub->count("--replicas")) opts.replicas = replicas;
  if (sub->count("--threads")) opts.threads = threads;
  return dk::cli::run_subcommand(sub->get_name(), opts, std::cout, std::cerr);
}
