#include <doctest.h>

#include <cmath>

#include "convexflow/error.hpp"
#include "convexflow/problems.hpp"
#include "convexflow/stochastic.hpp"

using namespace convexflow;

TEST_CASE("q(r) matches erf") {
  // P(|N(0,1)| <= 2r) = erf(sqrt(2) r).
  for (double r : {0.1, 0.5, 1.0, 2.0}) CHECK(std::abs(q_of_r(r) - std::erf(std::sqrt(2.0) * r)) <= 1e-10);
  CHECK(std::abs(q_of_r(0.5) - 0.682689492137086) <= 1e-12);
  CHECK(std::abs(q_of_r(1.0) - 0.954499736103642) <= 1e-12);
  CHECK(q_of_r(0) == 0.0);
  CHECK_THROWS_AS(q_of_r(-1), PreconditionError);
}

TEST_CASE("adaptive simpson integrates smooth functions") {
  CHECK(adaptive_simpson([](double x) { return x * x * x; }, 0, 2, 1e-12) == doctest::Approx(4.0));
  CHECK(std::abs(adaptive_simpson([](double x) { return std::sin(x); }, 0, M_PI, 1e-12) - 2.0) < 1e-10);
}

TEST_CASE("path engines are a function of (seed, index)") {
  auto a = path_engine(5, 17), b = path_engine(5, 17), c = path_engine(5, 18), d = path_engine(6, 17);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}

TEST_CASE("mc config validation") {
  MCConfig c;
  c.n_paths = 10;
  CHECK_THROWS_AS(c.validate(), PreconditionError);
  c.n_paths = 1000;
  c.dt_mc = 0;
  CHECK_THROWS_AS(c.validate(), PreconditionError);
}

TEST_CASE("exit-time tail is deterministic and decreasing") {
  MCConfig c;
  c.n_paths = 2000;
  const auto a = exit_time_tail(0.5, {0.1, 0.5, 1.0}, c);
  const auto b = exit_time_tail(0.5, {0.1, 0.5, 1.0}, c);
  CHECK(a.empirical_tail == b.empirical_tail);
  CHECK(a.empirical_tail[0] >= a.empirical_tail[1]);
  CHECK(a.empirical_tail[1] >= a.empirical_tail[2]);
  CHECK(a.bound[2] == doctest::Approx(1.0));
  CHECK(tail_log_slope(a, 20) < 0);
}

TEST_CASE("facet walk on the double well") {
  const auto p = problem_library("double_well_1d");
  const auto u0 = p.sample(201);
  MCConfig c;
  c.n_paths = 2000;
  c.dt_mc = 1e-3;
  const auto r = facet_walk_1d(p, u0, 0.5, c);
  CHECK(r.a == doctest::Approx(-1.0));
  CHECK(r.b == doctest::Approx(1.0));
  CHECK(r.weight_a == doctest::Approx(0.25));
  CHECK(std::abs(r.hit_a_fraction - 0.25) <= 4 * r.hit_a_se + 0.01);
  CHECK(r.censored_bound <= 1.0);
  CHECK_THROWS_AS(facet_walk_1d(p, u0, 1.5, c), PreconditionError);
}

TEST_CASE("controls on a frozen convex field") {
  const auto p = problem_library("convex_quadratic_1d");
  Snapshots s;
  s.times = {0, 1};
  s.fields = {p.sample(101), p.sample(101)};
  s.dirs = DirectionSet::preset(DirectionPreset::axes, 1);
  MCConfig c;
  c.n_paths = 500;
  const Point x0 = Point::Constant(1, 0.3);
  const auto zero = control_value_estimate(s, x0, 1.0, c, ControlPolicy::zero);
  CHECK(zero.mean == doctest::Approx(interp_value(s.fields[0], x0)));
  CHECK(zero.se == 0.0);
  // Convex field: the feedback policy finds no negative curvature and never moves.
  const auto fb = feedback_value_estimate(s, x0, 1.0, c);
  CHECK(fb.mean == zero.mean);
  // Moving along the axis under a convex function raises the expectation (x^2: by 2t).
  c.n_paths = 4000;
  const auto ax = control_value_estimate(s, x0, 0.25, c, ControlPolicy::first_axis);
  CHECK(std::abs(ax.mean - (0.09 + 0.5)) <= 4 * ax.se + 0.01);
  CHECK(field_value(s, 0.5, x0) == doctest::Approx(0.09).epsilon(1e-3));
}

TEST_CASE("value along feedback paths is a supermartingale") {
  const auto p = problem_library("double_well_1d");
  SolveOptions opt;
  opt.T = 1.0;
  opt.snapshot_times = uniform_times(1.0, 0.05);
  const auto s = solve(p.sample(101), opt);
  MCConfig c;
  c.n_paths = 4000;
  const auto fb = control_value_estimate(s, Point::Constant(1, 0.2), 1.0, c, ControlPolicy::feedback, 8);
  REQUIRE(fb.value_mean.size() >= 2);
  for (std::size_t k = 1; k < fb.value_mean.size(); ++k)
    CHECK(fb.value_mean[k] <= fb.value_mean[k - 1] + 3 * std::hypot(fb.value_se[k], fb.value_se[k - 1]));
}
