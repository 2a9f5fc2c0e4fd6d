#include "convexflow/problems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "convexflow/envelope.hpp"
#include "convexflow/error.hpp"

namespace convexflow {
namespace {

double sq(double x) { return x * x; }

double radius2(const Point& x) { return x.squaredNorm(); }

double poly(const std::vector<double>& c, double x) {
  double acc = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::vector<double> derivative(const std::vector<double>& c) {
  std::vector<double> d;
  for (std::size_t k = 1; k < c.size(); ++k) d.push_back(double(k) * c[k]);
  if (d.empty()) d.push_back(0);
  return d;
}

// Radius outside which the even/1D profile equals its envelope, from a fine hull.
double estimate_r0(const std::function<double(double)>& profile, double lower, double upper) {
  const int n = 4001;
  const Grid g = Grid::line(lower, upper, n);
  const ScalarField f = ScalarField::sample(g, [&](const Point& x) { return profile(x(0)); });
  const auto env = lower_hull_envelope_1d(f);
  const double tol = 1e-9 * f.scale();
  double r = 0;
  for (int k = 0; k < n; ++k)
    if (f[k] - env.envelope[k] > tol) r = std::max(r, std::abs(g.coord(0, k)));
  return std::max(r + 2 * g.h(), 2 * g.h());
}

}  // namespace

std::vector<std::string> problem_names() {
  return {"double_well_1d", "asymmetric_quartic_1d", "radial_double_well_2d", "convex_quadratic_1d",
          "convex_quadratic_2d"};
}

Problem problem_library(const std::string& name) {
  Problem p;
  p.name = name;
  p.box_lower = -2;
  p.box_upper = 2;
  if (name == "double_well_1d") {
    p.dim = 1;
    p.u0 = [](const Point& x) { return sq(x(0) * x(0) - 1); };
    p.hessian_bound = 44;  // max |12 x^2 - 4| on [-2, 2]
    p.r0 = 1;
    p.analytic_envelope = [](const Point& x) { return std::abs(x(0)) <= 1 ? 0.0 : sq(x(0) * x(0) - 1); };
    p.default_n = 201;
  } else if (name == "asymmetric_quartic_1d") {
    // (x^2 - 1)^2 - 1 + 0.3 x: the bitangent -1 + 0.3 x touches at x = -1 and x = 1.
    p.dim = 1;
    p.u0 = [](const Point& x) { return sq(x(0) * x(0) - 1) - 1 + 0.3 * x(0); };
    p.hessian_bound = 44;
    p.r0 = 1;
    p.analytic_envelope = [](const Point& x) {
      return std::abs(x(0)) <= 1 ? -1 + 0.3 * x(0) : sq(x(0) * x(0) - 1) - 1 + 0.3 * x(0);
    };
    p.default_n = 201;
  } else if (name == "radial_double_well_2d") {
    p.dim = 2;
    p.u0 = [](const Point& x) { return sq(radius2(x) - 1); };
    // Hessian eigenvalues 4(s - 1) and 12 s - 4 with s = |x|^2 <= 8 on the box.
    p.hessian_bound = 92;
    p.r0 = 1;
    p.analytic_envelope = [](const Point& x) { return radius2(x) <= 1 ? 0.0 : sq(radius2(x) - 1); };
    p.default_n = 101;
  } else if (name == "convex_quadratic_1d") {
    p.dim = 1;
    p.u0 = [](const Point& x) { return x(0) * x(0); };
    p.hessian_bound = 2;
    p.r0 = 0.5;
    p.analytic_envelope = p.u0;
    p.default_n = 201;
  } else if (name == "convex_quadratic_2d") {
    p.dim = 2;
    p.u0 = [](const Point& x) { return radius2(x); };
    p.hessian_bound = 2;
    p.r0 = 0.5;
    p.analytic_envelope = p.u0;
    p.default_n = 101;
  } else {
    std::ostringstream msg;
    msg << "unknown problem '" << name << "'; available:";
    for (const auto& n : problem_names()) msg << ' ' << n;
    throw PreconditionError(msg.str());
  }
  return p;
}

Problem polynomial_problem(const PolynomialSpec& spec) {
  std::vector<double> c = spec.coefficients;
  while (!c.empty() && c.back() == 0) c.pop_back();
  if (c.empty()) throw PreconditionError("custom polynomial has no nonzero coefficients");
  const std::size_t degree = c.size() - 1;
  if (c.back() <= 0) throw PreconditionError("custom polynomial: leading coefficient must be positive");
  if (spec.dim == 1 && (degree < 2 || degree % 2 != 0))
    throw PreconditionError("custom 1D polynomial must have even degree >= 2 for coercivity");
  if (spec.dim == 2 && degree < 1) throw PreconditionError("custom radial polynomial needs a |x|^2 term or higher");
  if (spec.dim != 1 && spec.dim != 2) throw PreconditionError("custom polynomial: dim must be 1 or 2");

  Problem p;
  p.name = "custom";
  p.dim = spec.dim;
  p.box_lower = spec.lower;
  p.box_upper = spec.upper;
  p.default_n = spec.default_n > 0 ? spec.default_n : (spec.dim == 1 ? 201 : 101);

  const auto d1 = derivative(c);
  const auto d2 = derivative(d1);
  const int samples = 20001;
  double m = 0;
  if (spec.dim == 1) {
    p.u0 = [c](const Point& x) { return poly(c, x(0)); };
    for (int k = 0; k < samples; ++k) {
      const double x = spec.lower + (spec.upper - spec.lower) * k / (samples - 1);
      m = std::max(m, std::abs(poly(d2, x)));
    }
    p.r0 = spec.r0.value_or(estimate_r0([c](double x) { return poly(c, x); }, spec.lower, spec.upper));
  } else {
    // u0 = g(|x|^2): Hessian eigenvalues 2 g'(s) and 2 g'(s) + 4 s g''(s).
    p.u0 = [c](const Point& x) { return poly(c, x.squaredNorm()); };
    const double rmax = std::max(std::abs(spec.lower), std::abs(spec.upper));
    const double smax = 2 * rmax * rmax;
    for (int k = 0; k < samples; ++k) {
      const double s = smax * k / (samples - 1);
      const double a = 2 * poly(d1, s), b = a + 4 * s * poly(d2, s);
      m = std::max({m, std::abs(a), std::abs(b)});
    }
    p.r0 = spec.r0.value_or(
        estimate_r0([c](double t) { return poly(c, t * t); }, -rmax * std::sqrt(2.0), rmax * std::sqrt(2.0)));
  }
  p.hessian_bound = m > 0 ? m : 1;
  return p;
}

}  // namespace convexflow
