#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "convexflow/app.hpp"
#include "convexflow/error.hpp"

int main(int argc, char** argv) {
  using namespace convexflow;
  CLI::App cli{"Convex envelopes by the convexifying evolution equation"};
  std::string command;
  std::optional<std::string> config_path, problem, dirs, out, method;
  std::optional<int> n;
  std::optional<double> T, safety, dt_mc;
  std::optional<std::uint64_t> seed;
  std::optional<long> paths;

  cli.add_option("command", command, "solve, envelope, flow, mc-validate, rates, audit or all")
      ->required()
      ->check(CLI::IsMember(subcommands()));
  cli.add_option("--config", config_path, "JSON configuration file");
  cli.add_option("--problem", problem, "built-in problem name");
  cli.add_option("--n", n, "nodes per axis");
  cli.add_option("--T", T, "final time");
  cli.add_option("--dirs", dirs, "direction set")->check(CLI::IsMember({"axes", "stencil8", "stencil16"}));
  cli.add_option("--safety", safety, "CFL safety factor in (0, 1]");
  cli.add_option("--seed", seed, "Monte Carlo seed");
  cli.add_option("--out", out, "output directory (CONVEXFLOW_OUT overrides)");
  cli.add_option("--method", method, "flow integrator")->check(CLI::IsMember({"euler", "rk4"}));
  cli.add_option("--paths", paths, "Monte Carlo paths");
  cli.add_option("--dt-mc", dt_mc, "Monte Carlo time step");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : 2;
  }

  RunConfig cfg;
  try {
    if (config_path) cfg = config_from_json(Json::parse(read_text(*config_path)), cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  if (problem) {
    cfg.problem = *problem;
    cfg.custom.reset();
  }
  if (n) cfg.n = *n;
  if (T) cfg.T = *T;
  if (dirs) cfg.dirs = *dirs;
  if (safety) cfg.safety = *safety;
  if (seed) cfg.seed = *seed;
  if (out) cfg.out = *out;
  if (method) cfg.flow.method = *method;
  if (paths) cfg.mc.n_paths = *paths;
  if (dt_mc) cfg.mc.dt_mc = *dt_mc;
  if (const char* env = std::getenv("CONVEXFLOW_OUT"); env && *env) cfg.out = env;

  return run(command, cfg, std::cout, std::cerr);
}
