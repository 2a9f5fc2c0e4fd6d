#include <doctest.h>

#include <cmath>

#include "convexflow/error.hpp"
#include "convexflow/flow.hpp"

using namespace convexflow;

namespace {

Snapshots frozen(const ScalarField& u) {
  Snapshots s;
  s.times = {0};
  s.fields = {u};
  s.dirs = DirectionSet::preset(DirectionPreset::axes, u.grid().dim());
  return s;
}

Point p1(double x) { return Point::Constant(1, x); }

}  // namespace

TEST_CASE("flow on x^2 follows x0 exp(-2t)") {
  // Nodal central gradients of x^2 are exact, so interp_gradient is exactly 2x.
  const auto u = ScalarField::sample(Grid::line(-2, 2, 81), [](const Point& x) { return x(0) * x(0); });
  const auto s = frozen(u);
  FlowOptions opt;
  opt.t_end = 1.0;
  opt.dt_ode = 0.01;
  const auto rk = integrate(s, u, p1(1.5), opt);
  CHECK(rk.terminated_reason == Termination::t_end);
  CHECK(rk.final_point()(0) == doctest::Approx(1.5 * std::exp(-2.0)).epsilon(1e-8));
  opt.method = FlowMethod::euler;
  const auto eu = integrate(s, u, p1(1.5), opt);
  CHECK(eu.final_point()(0) == doctest::Approx(1.5 * std::pow(0.98, 100)).epsilon(1e-10));
}

TEST_CASE("flow leaving the box stops with left_box") {
  const auto u = ScalarField::sample(Grid::line(-1, 1, 21), [](const Point& x) { return -x(0); });
  FlowOptions opt;
  opt.t_end = 5;
  for (auto m : {FlowMethod::euler, FlowMethod::rk4}) {
    opt.method = m;
    const auto tr = integrate(frozen(u), u, p1(0.5), opt);
    CHECK(tr.terminated_reason == Termination::left_box);
    CHECK(std::isnan(tr.grad_norm.back()));
    CHECK(tr.times.back() < 0.6);
  }
}

TEST_CASE("stationarity only counts once the field is frozen") {
  const Grid g = Grid::line(-2, 2, 41);
  const auto flat = ScalarField(g, Eigen::VectorXd::Zero(41));
  Snapshots s = frozen(flat);
  s.times = {0, 1};
  s.fields = {flat, flat};
  FlowOptions opt;
  opt.t_end = 10;
  opt.dt_ode = 0.01;
  const auto tr = integrate(s, flat, p1(0.3), opt);
  CHECK(tr.terminated_reason == Termination::stationary);
  CHECK(tr.times.back() >= 1.0 + 0.01 * 49);
}

TEST_CASE("gradient field interpolates linearly in time") {
  const Grid g = Grid::line(-1, 1, 21);
  const auto a = ScalarField::sample(g, [](const Point& x) { return x(0); });
  const auto b = ScalarField::sample(g, [](const Point& x) { return 3 * x(0); });
  Snapshots s = frozen(a);
  s.times = {0, 1};
  s.fields = {a, b};
  CHECK(eval_gradient_field(s, 0.25, p1(0.1))(0) == doctest::Approx(1.5));
  CHECK(eval_gradient_field(s, 7, p1(0.1))(0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(eval_gradient_field(s, 0.5, p1(2.0)), PreconditionError);
}

TEST_CASE("argmin set, tail check and integrability") {
  const Grid g = Grid::line(-2, 2, 41);
  const auto env = ScalarField::sample(g, [](const Point& x) { return std::max(0.0, std::abs(x(0)) - 1); });
  const auto am = argmin_nodes(env);
  CHECK(am.size() == 21);
  CHECK(distance_to_set(p1(1.5), am) == doctest::Approx(0.5));

  Trajectory tr;
  for (int k = 0; k <= 8; ++k) {
    tr.times.push_back(k);
    tr.points.push_back(p1(2.0 - 0.1 * k));
  }
  CHECK(monotone_tail_check(tr, am, 0, 0).passed);
  tr.points.back() = p1(1.9);
  CHECK_FALSE(monotone_tail_check(tr, am, 0, 0).passed);

  Snapshots s = frozen(env);
  s.times = {0, 1, 2};
  s.fields = {env, env, env};
  CHECK(gradient_error_integrability_report(s, env).integral == 0.0);
  CHECK_THROWS_AS(parse_flow_method("leapfrog"), PreconditionError);
}
