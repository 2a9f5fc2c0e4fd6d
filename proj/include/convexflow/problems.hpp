#pragma once

#include <optional>
#include <string>
#include <vector>

#include "convexflow/solver.hpp"

namespace convexflow {

std::vector<std::string> problem_names();

// Built-in initial data. Every entry is C^{1,1}, superlinearly coercive and
// equal to its convex envelope outside B_{R0}. Unknown names throw a
// PreconditionError that lists the available problems.
Problem problem_library(const std::string& name);

// Custom polynomial data: in 1D u0(x) = sum_k c_k x^k, in 2D the radial
// polynomial u0(x) = sum_k c_k |x|^{2k}. The leading coefficient must be
// positive (and the 1D degree even, >= 2) so coercivity holds.
struct PolynomialSpec {
  int dim = 1;
  std::vector<double> coefficients;
  double lower = -2;
  double upper = 2;
  std::optional<double> r0;  // estimated from the envelope of the profile when absent
  int default_n = 0;         // 0: 201 in 1D, 101 in 2D
};

Problem polynomial_problem(const PolynomialSpec& spec);

}  // namespace convexflow
