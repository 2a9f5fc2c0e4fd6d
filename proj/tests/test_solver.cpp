#include <doctest.h>

#include <cmath>
#include <string>

#include "convexflow/error.hpp"
#include "convexflow/problems.hpp"
#include "convexflow/solver.hpp"

using namespace convexflow;

namespace {

double sq(double v) { return v * v; }

ScalarField double_well(int n) {
  return ScalarField::sample(Grid::line(-2, 2, n), [](const Point& x) { return sq(x(0) * x(0) - 1); });
}

}  // namespace

TEST_CASE("cfl step size") {
  const Grid g = Grid::square(-1, 1, 21);
  CHECK(cfl_dt(g, DirectionSet::preset(DirectionPreset::axes, 2), 1.0) == doctest::Approx(0.01 / 2));
  CHECK(cfl_dt(g, DirectionSet::preset(DirectionPreset::stencil8, 2), 0.5) == doctest::Approx(0.01 / 4));
}

TEST_CASE("step beyond the CFL bound is rejected with the bound in the message") {
  const auto u = double_well(41);
  const auto dirs = DirectionSet::preset(DirectionPreset::axes, 1);
  const double limit = cfl_dt(u.grid(), dirs, 1.0);
  try {
    step(u, 1.01 * limit, dirs);
    FAIL("no exception");
  } catch (const CflViolation& e) {
    CHECK(std::string(e.what()).find("CFL") != std::string::npos);
  }
  CHECK_NOTHROW(step(u, limit, dirs));

  SolveOptions opt;
  opt.T = 0.1;
  opt.safety = 1.5;
  CHECK_THROWS_AS(solve(u, opt), CflViolation);
}

TEST_CASE("one explicit step by hand") {
  const auto u = double_well(41);
  const auto dirs = DirectionSet::preset(DirectionPreset::axes, 1);
  const double dt = cfl_dt(u.grid(), dirs, 0.9);
  const auto v = step(u, dt, dirs);
  const double h = u.grid().h();
  for (int k = 1; k < 40; ++k) {
    const double d2 = (u[k + 1] - 2 * u[k] + u[k - 1]) / (h * h);
    CHECK(v[k] == doctest::Approx(u[k] + dt * std::min(0.0, d2)).epsilon(1e-14));
  }
  CHECK(v[0] == u[0]);
  CHECK(v[40] == u[40]);
}

TEST_CASE("convex data are stationary") {
  const auto p = problem_library("convex_quadratic_2d");
  const auto u0 = p.sample(31);
  SolveOptions opt;
  opt.T = 0.5;
  opt.dirs = DirectionSet::preset(DirectionPreset::stencil8, 2);
  opt.snapshot_times = uniform_times(0.5, 0.1);
  const auto s = solve(u0, opt);
  CHECK(s.steady_state_reached);
  for (const auto& f : s.fields) CHECK((f.values() - u0.values()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("snapshot times snap to completed steps and end at T") {
  const auto u0 = double_well(41);
  SolveOptions opt;
  opt.T = 0.3;
  opt.snapshot_times = {0.0, 0.1, 0.2};
  const auto s = solve(u0, opt);
  REQUIRE(s.size() == 4);
  CHECK(s.times.front() == 0.0);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double steps = s.times[k] / s.dt_used;
    CHECK(std::abs(steps - std::round(steps)) < 1e-9);
  }
  CHECK(s.times.back() == doctest::Approx(0.3).epsilon(s.dt_used));

  opt.snapshot_times = {0.2, 0.1};
  CHECK_THROWS_AS(solve(u0, opt), PreconditionError);
  opt.snapshot_times = {0.5};
  CHECK_THROWS_AS(solve(u0, opt), PreconditionError);
}

TEST_CASE("solution decreases in time and stays between envelope and data") {
  const auto u0 = double_well(81);
  SolveOptions opt;
  opt.T = 1.0;
  opt.snapshot_times = uniform_times(1.0, 0.1);
  const auto s = solve(u0, opt);
  for (std::size_t k = 1; k < s.size(); ++k) {
    CHECK((s.fields[k].values() - s.fields[k - 1].values()).maxCoeff() <= 0.0);
    CHECK(s.fields[k].values().minCoeff() >= -1e-12);
  }
  const auto ext0 = curvature_extremes(s.fields.front(), s.dirs);
  const auto ext1 = curvature_extremes(s.fields.back(), s.dirs);
  CHECK(ext1.min_lambda_min >= ext0.min_lambda_min);
  CHECK(ext1.max_lambda_max <= ext0.max_lambda_max);
  CHECK(time_lipschitz_check(s, 44).worst_ratio <= 1 + 1e-12);
}

TEST_CASE("bypassing the CFL check blows up and aborts") {
  const auto u0 = double_well(81);
  SolveOptions opt;
  opt.T = 50.0;
  opt.dt = 40 * cfl_dt(u0.grid(), opt.dirs, 1.0);
  opt.enforce_cfl = false;
  CHECK_THROWS_AS(solve(u0, opt), NumericalAbort);
}

TEST_CASE("uniform times") {
  const auto t = uniform_times(1.0, 0.25);
  REQUIRE(t.size() == 5);
  CHECK(t.back() == 1.0);
  CHECK_THROWS_AS(uniform_times(1.0, 0.0), PreconditionError);
}

TEST_CASE("final states converge under grid refinement") {
  auto final_state = [](int n) {
    SolveOptions opt;
    opt.T = 2.0;
    opt.snapshot_times = {0.0};
    return solve(double_well(n), opt).fields.back();
  };
  const auto a = final_state(51), b = final_state(101), c = final_state(201);
  double d1 = 0, d2 = 0;
  for (int k = 0; k < 51; ++k) d1 = std::max(d1, std::abs(a[k] - b[2 * k]));
  for (int k = 0; k < 101; ++k) d2 = std::max(d2, std::abs(b[k] - c[2 * k]));
  MESSAGE("refinement distances " << d1 << " " << d2);
  CHECK(d1 >= 1.5 * d2);
}
