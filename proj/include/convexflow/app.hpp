#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "convexflow/diagnostics.hpp"
#include "convexflow/io.hpp"
#include "convexflow/problems.hpp"
#include "convexflow/stochastic.hpp"

namespace convexflow {

struct FlowSettings {
  std::vector<std::vector<double>> x0;  // empty: five points spread over the box
  double dt_ode = 0.01;
  std::string method = "rk4";
  double t_end = 20;
};

struct McSettings {
  long n_paths = 20000;
  double dt_mc = 1e-3;
  double horizon = 2.0;
  double facet_x0 = 0.5;
  std::optional<double> value_t;  // default: min(2, T)
  std::vector<double> value_x0;  // empty: origin
  double exit_r = 0.5;
  long exit_paths = 100000;
  std::vector<double> exit_ts{2, 3, 4, 5, 6, 7, 8};
};

struct RunConfig {
  std::string problem = "double_well_1d";
  std::optional<PolynomialSpec> custom;  // replaces `problem` when present
  std::optional<int> n;                  // default: the problem's
  std::optional<double> lower, upper;    // default: the problem's box
  std::optional<std::string> dirs;       // default: axes in 1D, stencil8 in 2D
  double safety = 0.9;
  double T = 6;
  double snapshot_spacing = 0.05;
  std::vector<double> snapshot_times;  // overrides the spacing when nonempty
  double tail_fraction = 0.5;
  double lemma2_radius = 0.5;
  FlowSettings flow;
  McSettings mc;
  Tolerances tol;
  std::string out = "convexflow_out";
  std::uint64_t seed = 20240611;
};

Json config_to_json(const RunConfig& c);
// Overlays the keys present in j onto base. Unknown keys are an error.
RunConfig config_from_json(const Json& j, RunConfig base = {});
// Hash of the configuration without the output directory.
std::string config_hash(const RunConfig& c);

// Everything a run needs, resolved and checked before any computation.
struct ResolvedRun {
  Problem problem;
  Grid grid;
  DirectionSet dirs;
  SolveOptions solve;
  FlowOptions flow;
  std::vector<Point> flow_starts;
  MCConfig mc;
};

ResolvedRun resolve(const RunConfig& c);

const std::vector<std::string>& subcommands();

// Runs one subcommand, writing artifacts and manifest.json under c.out.
// Returns the exit code: 0 ok, 1 invariant failure, 2 config or validation
// error, 3 numerical abort. Errors are reported on `err`.
int run(const std::string& subcommand, const RunConfig& c, std::ostream& log, std::ostream& err);

}  // namespace convexflow
