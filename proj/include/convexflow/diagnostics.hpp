#pragma once

#include <string>
#include <vector>

#include "convexflow/solver.hpp"

namespace convexflow {

// Slack constants for discretization effects. c_dir scales the O(h) envelope
// and direction-set bias (value units per unit length); c_disc scales the
// Monte Carlo discretization slack c_disc * (h + sqrt(dt_mc)).
struct Tolerances {
  double c_dir = 5.0;
  double c_disc = 1.0;
};

struct ErrorSeries {
  std::vector<double> t;
  std::vector<double> error;
  int clamped = 0;             // snapshots whose raw error was negative and got clamped to 0
  double most_negative = 0;    // min over snapshots and nodes of u - envelope
};

// e(t_k) = max over nodes of u(t_k) - envelope, clamped at 0.
ErrorSeries sup_error_series(const Snapshots& snapshots, const ScalarField& envelope);

// max over interior nodes of |grad u(t_k) - grad envelope| (central differences).
ErrorSeries grad_error_series(const Snapshots& snapshots, const ScalarField& envelope);

struct RateFit {
  double C = 0;
  double lambda = 0;
  double r_squared = 0;
  double t_lo = 0;
  double t_hi = 0;
  std::vector<double> t;      // points used in the regression
  std::vector<double> error;
  int excluded_below_floor = 0;
};

// Error floor below which points are treated as converged noise.
double rate_floor(double scale, double c_dir, double h);

// Least squares of log e(t) on t over the last tail_fraction of the span of
// points above floor. Throws PreconditionError when fewer than 5 usable points remain.
RateFit fit_rate(const ErrorSeries& series, double tail_fraction, double floor);

struct Lemma2Entry {
  double t = 0;
  double lhs = 0;       // sup |grad v| on B_r
  double rhs = 0;       // 2 sqrt(M sup |v| on B_{r + r'})
  double r_prime = 0;
  double modulus = 0;   // M actually used (>= M_disc, >= semiconvexity modulus of v)
  double ratio = 0;
};

struct Lemma2Report {
  double r = 0;
  bool shrunk = false;
  double worst_ratio = 0;
  std::vector<Lemma2Entry> entries;
};

// Gradient-from-sup-norm bound for v = u(t) - envelope on balls centred at the origin.
Lemma2Report lemma2_gradient_bound_check(const Snapshots& snapshots, const ScalarField& envelope, double m_disc,
                                         double r);

struct InvariantCheck {
  std::string name;
  bool passed = false;
  double measured = 0;
  double limit = 0;
};

struct AuditReport {
  std::vector<InvariantCheck> checks;
  bool all_passed() const;
  const InvariantCheck& operator[](const std::string& name) const;
};

// Sandwich, time monotonicity, semiconcavity, eigenvalue-extreme monotonicity,
// time-Lipschitz bound and frozen band in one pass.
AuditReport structural_audit(const Snapshots& snapshots, const ScalarField& envelope, const Problem& problem,
                             const Tolerances& tol = {});

}  // namespace convexflow
