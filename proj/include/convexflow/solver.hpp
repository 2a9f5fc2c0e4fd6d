#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "convexflow/field.hpp"

namespace convexflow {

using ScalarFunction = std::function<double(const Point&)>;

// Initial datum plus the metadata the theory needs: a Hessian bound M, a radius
// R0 outside which u0 already equals its envelope, and the square box the grid
// covers.
struct Problem {
  std::string name;
  int dim = 1;
  ScalarFunction u0;
  double hessian_bound = 0;  // M >= sup |D^2 u0| over the box
  double r0 = 0;
  std::optional<ScalarFunction> analytic_envelope;
  double box_lower = -2;
  double box_upper = 2;
  int default_n = 201;

  // Box strictly contains B_{R0}, M > 0. Throws PreconditionError otherwise.
  void validate() const;
  Grid grid(int n) const;
  ScalarField sample(int n) const;
};

// Largest stable explicit step: safety * (h min|p|)^2 / 2.
double cfl_dt(const Grid& grid, const DirectionSet& dirs, double safety);

// One explicit step u + dt min(0, lambda_min) on the interior band; band nodes
// are copied unchanged. Throws CflViolation if dt exceeds cfl_dt(..., 1).
ScalarField step(const ScalarField& u, double dt, const DirectionSet& dirs);

struct SolveOptions {
  double T = 1.0;
  std::vector<double> snapshot_times;  // sorted, within [0, T]; 0 is always recorded
  DirectionSet dirs = DirectionSet::preset(DirectionPreset::axes, 1);
  double safety = 0.9;
  double steady_tol_rel = 1e-8;  // relative to max u0 - min u0
  std::optional<double> dt;      // overrides safety * cfl when set
  bool enforce_cfl = true;       // only disabled by negative tests
};

struct Snapshots {
  std::vector<double> times;
  std::vector<ScalarField> fields;
  double dt_used = 0;
  DirectionSet dirs;
  bool steady_state_reached = false;
  long steps = 0;

  const Grid& grid() const { return fields.front().grid(); }
  std::size_t size() const { return times.size(); }
};

// Evolves u_t = min(0, lambda_1(D^2 u)) from u0. Requested snapshot times are
// snapped to the nearest completed step; the actual times are stored.
Snapshots solve(const ScalarField& u0, const SolveOptions& options);

// Evenly spaced snapshot times 0, spacing, 2 spacing, ..., T.
std::vector<double> uniform_times(double T, double spacing);

struct TimeLipschitzReport {
  double worst_ratio = 0;           // against M_disc
  double m_disc = 0;                // max |directional second difference| of u0
  double worst_ratio_analytic = 0;  // against the supplied M
};

TimeLipschitzReport time_lipschitz_check(const Snapshots& snapshots, double M);

// Extremes of directional second differences over the interior band.
struct CurvatureExtremes {
  double min_lambda_min;   // min over nodes of discrete_lambda_min
  double max_lambda_max;   // max over nodes of discrete_lambda_max
  double max_abs;          // max |D_p u|
};
CurvatureExtremes curvature_extremes(const ScalarField& u, const DirectionSet& dirs);

}  // namespace convexflow
