#include <doctest.h>

#include <cmath>
#include <string>

#include "convexflow/envelope.hpp"
#include "convexflow/error.hpp"
#include "convexflow/problems.hpp"

using namespace convexflow;

namespace {
Point p1(double x) { return Point::Constant(1, x); }
}  // namespace

TEST_CASE("library names") {
  const auto names = problem_names();
  CHECK(names.size() == 5);
  for (const auto& n : names) CHECK_NOTHROW(problem_library(n).validate());
  try {
    problem_library("rosenbrock");
    FAIL("no exception");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("radial_double_well_2d") != std::string::npos);
  }
}

TEST_CASE("double well values") {
  const auto p = problem_library("double_well_1d");
  CHECK(p.u0(p1(0)) == 1.0);
  CHECK(p.u0(p1(1)) == 0.0);
  CHECK(p.u0(p1(-1)) == 0.0);
  CHECK((*p.analytic_envelope)(p1(0)) == 0.0);
  CHECK(p.hessian_bound == 44.0);
  // 12 x^2 - 4 at the box edge
  CHECK(12 * 4 - 4 == 44);
}

TEST_CASE("asymmetric quartic: envelope and data share their minimum") {
  const auto p = problem_library("asymmetric_quartic_1d");
  double best = INFINITY, arg = 0;
  for (int k = 0; k <= 400000; ++k) {
    const double x = -2 + 4.0 * k / 400000;
    const double v = x * x * x * x - 2 * x * x + 0.3 * x;
    if (v < best) {
      best = v;
      arg = x;
    }
  }
  CHECK(arg < -1.0);
  const auto u0 = p.sample(401);
  const auto env = reference_envelope(u0).envelope;
  CHECK(env.values().minCoeff() == doctest::Approx(best).epsilon(1e-3));
  CHECK(u0.values().minCoeff() == doctest::Approx(best).epsilon(1e-3));
  CHECK((*p.analytic_envelope)(p1(0.5)) == doctest::Approx(-1 + 0.15));
}

TEST_CASE("convex quadratics are their own envelope") {
  for (const char* name : {"convex_quadratic_1d", "convex_quadratic_2d"}) {
    const auto p = problem_library(name);
    const auto u0 = p.sample(p.dim == 1 ? 101 : 41);
    const auto env = reference_envelope(u0).envelope;
    CHECK((env.values() - u0.values()).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("radial double well bound") {
  const auto p = problem_library("radial_double_well_2d");
  // At |x|^2 = 8 (box corner) the radial eigenvalue is 12 * 8 - 4.
  CHECK(p.hessian_bound == 92.0);
  Point c(2);
  c << 0.3, 0.4;
  CHECK((*p.analytic_envelope)(c) == 0.0);
}

TEST_CASE("custom polynomials") {
  PolynomialSpec s;
  s.coefficients = {0, 0, -2, 0, 1};
  const auto p = polynomial_problem(s);
  CHECK(p.hessian_bound == doctest::Approx(44.0).epsilon(1e-6));
  CHECK(p.r0 == doctest::Approx(1.0).epsilon(0.01));
  CHECK(p.u0(p1(1.5)) == doctest::Approx(1.5 * 1.5 * 1.5 * 1.5 - 2 * 2.25));

  s.coefficients = {0, 1, 0, 1};
  CHECK_THROWS_AS(polynomial_problem(s), PreconditionError);
  s.coefficients = {0, 0, 1, 0, -1};
  CHECK_THROWS_AS(polynomial_problem(s), PreconditionError);

  PolynomialSpec r;
  r.dim = 2;
  r.coefficients = {1, -2, 1};  // (|x|^2 - 1)^2
  const auto q = polynomial_problem(r);
  CHECK(q.hessian_bound == doctest::Approx(92.0).epsilon(1e-6));
  Point x(2);
  x << 0.6, 0.8;
  CHECK(q.u0(x) == doctest::Approx(0.0));
}

TEST_CASE("box must contain the ball") {
  auto p = problem_library("double_well_1d");
  p.box_upper = 0.9;
  CHECK_THROWS_AS(p.validate(), PreconditionError);
}
