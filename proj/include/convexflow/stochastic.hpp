#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "convexflow/diagnostics.hpp"
#include "convexflow/solver.hpp"

namespace convexflow {

struct MCConfig {
  long n_paths = 20000;
  double dt_mc = 1e-3;
  std::uint64_t seed = 20240611;
  double horizon = 2.0;

  void validate() const;
};

// Independent engine for path `index`; results never depend on evaluation order.
std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t index);

// Gaussian mass of [-2r, 2r] by adaptive Simpson quadrature (absolute tolerance 1e-12).
double q_of_r(double r);

// Adaptive Simpson on [a, b]; exposed for tests.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol);

struct ExitTimeReport {
  double r = 0;
  long n_paths = 0;
  std::vector<double> ts;
  std::vector<long> survivors;        // paths with tau >= t
  std::vector<double> empirical_tail;
  std::vector<double> standard_error; // binomial
  std::vector<double> bound;          // q(r)^(t - 1)
};

// Standard Brownian motion from 0, first exit from [-r, r], monitored every dt_mc.
ExitTimeReport exit_time_tail(double r, const std::vector<double>& ts, const MCConfig& cfg);

// Least-squares slope of log P(tau >= t) against t over points with at least
// min_count survivors (t > 0).
double tail_log_slope(const ExitTimeReport& report, long min_count = 20);

struct FacetWalkResult {
  double mean = 0;           // E[u0(Y_stop)]
  double se = 0;
  double a = 0, b = 0;       // endpoints of the non-convexity interval
  double weight_a = 0;       // barycentric weight (b - x0) / (b - a)
  double envelope_value = 0; // reference envelope at x0
  double hit_a_fraction = 0;
  double hit_a_se = 0;
  double mean_stop = 0;      // E[Y_stop]
  double mean_stop_se = 0;
  double censored_fraction = 0;
  double censored_bound = 0; // q(R)^(horizon-1) tail bound with the sqrt(2) time rescaling
  long n_paths = 0;
};

// dY = sqrt(2) dW from x0 until Y leaves [a, b] (or the horizon), where [a, b]
// is the envelope face around x0. u0 is evaluated exactly at the stopping point.
FacetWalkResult facet_walk_1d(const Problem& problem, const ScalarField& u0_sampled, double x0, const MCConfig& cfg);

enum class ControlPolicy { feedback, zero, first_axis };

struct ControlEstimate {
  double mean = 0;  // E[u0(Y_t)]
  double se = 0;
  long absorbed = 0;
  long n_paths = 0;
  std::vector<double> checkpoint_s;   // elapsed times
  std::vector<double> value_mean;     // E[u(t - s, Y_s)]
  std::vector<double> value_se;
};

// Controlled diffusion dY = sqrt(2) sigma dW over [0, t]. The feedback policy
// uses time-to-go indexing: at elapsed s the control comes from u(t - s, .),
// sigma = Z (x) Z with Z the minimal-second-difference direction when that
// value is below -1e-8 * scale. Paths reaching the box edge are absorbed.
ControlEstimate control_value_estimate(const Snapshots& snapshots, const Point& x0, double t, const MCConfig& cfg,
                                       ControlPolicy policy, int checkpoints = 10);

ControlEstimate feedback_value_estimate(const Snapshots& snapshots, const Point& x0, double t, const MCConfig& cfg);

// Value of the interpolated field at (t, x): multilinear in space, linear in time.
double field_value(const Snapshots& snapshots, double t, const Point& x);

struct DynamicProgrammingReport {
  double value_t = 0;     // u(t, y)
  double mean_value_s = 0; // E[u(s, Y_t) | Y_s = y]
  double se = 0;
  double gap = 0;
  double tolerance = 0;    // 3 se + c_disc (h + sqrt(dt_mc))
  bool within = false;
};

DynamicProgrammingReport dynamic_programming_check(const Snapshots& snapshots, const Point& y, double t, double s,
                                                   const MCConfig& cfg, const Tolerances& tol = {});

}  // namespace convexflow
