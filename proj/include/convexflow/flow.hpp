#pragma once

#include <string>
#include <vector>

#include "convexflow/solver.hpp"

namespace convexflow {

enum class FlowMethod { euler, rk4 };
enum class Termination { t_end, stationary, left_box };

std::string to_string(FlowMethod m);
std::string to_string(Termination t);
FlowMethod parse_flow_method(const std::string& s);

struct Trajectory {
  std::vector<double> times;
  std::vector<Point> points;
  std::vector<double> values_u0;
  std::vector<double> values_env;
  std::vector<double> grad_norm;
  Termination terminated_reason = Termination::t_end;

  const Point& final_point() const { return points.back(); }
};

// grad u(t, x): multilinear in space, linear in time between the bracketing
// snapshots, frozen at the last snapshot beyond it. Throws outside the box.
Point eval_gradient_field(const Snapshots& snapshots, double t, const Point& x);

struct FlowOptions {
  double t_end = 20;
  double dt_ode = 0.01;
  FlowMethod method = FlowMethod::rk4;
  double grad_tol = 0;  // <= 0: 1e-6 * scale / box diameter
  int stationary_patience = 50;
};

// Fixed-step integration of x' = -grad u(t, x). Stationarity only ends the run
// once the field is frozen (t past the last snapshot).
Trajectory integrate(const Snapshots& snapshots, const ScalarField& envelope, const Point& x0,
                     const FlowOptions& options);

// Nodes whose envelope value is within rel_tol * scale of the minimum.
std::vector<Point> argmin_nodes(const ScalarField& envelope, double rel_tol = 1e-9);
double distance_to_set(const Point& x, const std::vector<Point>& set);

struct TailReport {
  double worst_excess = 0;  // max over consecutive samples of d(t+) - d(t) - slack(t)
  bool passed = true;
};

// dist(x(t), argmin) is nonincreasing over the final quarter of the run, up to
// the slack 2 (C / lambda) exp(-lambda t).
TailReport monotone_tail_check(const Trajectory& traj, const std::vector<Point>& argmin, double C, double lambda);

struct IntegrabilityReport {
  double integral = 0;
  std::vector<double> t;
  std::vector<double> grad_error;
  std::vector<double> interval_contribution;
};

// Trapezoid estimate of the integral of ||grad u(t) - grad envelope||_inf over the snapshot range.
IntegrabilityReport gradient_error_integrability_report(const Snapshots& snapshots, const ScalarField& envelope);

}  // namespace convexflow
