#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "convexflow/error.hpp"
#include "convexflow/field.hpp"
#include "convexflow/log.hpp"

using namespace convexflow;

TEST_CASE("grid geometry") {
  const Grid g = Grid::line(-2, 2, 201);
  CHECK(g.h() == doctest::Approx(0.02));
  CHECK(g.size() == 201);
  CHECK(g.coord(0, 100) == doctest::Approx(0.0));
  CHECK(g.is_boundary({0, 0}));
  CHECK_FALSE(g.is_boundary({1, 0}));

  const Grid s = Grid::square(-1, 1, 11);
  CHECK(s.size() == 121);
  CHECK(s.unflat(s.flat({3, 7})) == NodeIndex{3, 7});
  CHECK(s.diameter() == doctest::Approx(std::sqrt(8.0)));
  CHECK(s.in_interior_band({2, 2}, 2));
  CHECK_FALSE(s.in_interior_band({1, 5}, 2));
}

TEST_CASE("grid rejects bad shapes") {
  CHECK_THROWS_AS(Grid::line(0, 1, 4), PreconditionError);
  CHECK_THROWS_AS(Grid::line(1, 0, 11), PreconditionError);
  CHECK_THROWS_AS(Grid(2, {0, 0}, {1, 2}, {11, 11}), PreconditionError);
}

TEST_CASE("fields must be finite and sized") {
  const Grid g = Grid::line(0, 1, 11);
  CHECK_THROWS_AS(ScalarField(g, Eigen::VectorXd::Zero(10)), PreconditionError);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(11);
  v(3) = std::nan("");
  CHECK_THROWS_AS(ScalarField(g, v), NumericalAbort);
}

TEST_CASE("direction sets") {
  const auto s8 = DirectionSet::preset(DirectionPreset::stencil8, 2);
  CHECK(s8.size() == 4);
  CHECK(s8.band_width() == 1);
  const auto s16 = DirectionSet::preset(DirectionPreset::stencil16, 2);
  CHECK(s16.size() == 8);
  CHECK(s16.band_width() == 2);
  CHECK(s16.min_length() == doctest::Approx(1.0));
  // Offsets are canonicalised and sorted.
  const DirectionSet d(2, {{1, 0}, {0, -1}, {-1, -1}});
  CHECK(d[0].p == Offset{0, 1});
  CHECK(d[1].p == Offset{1, 0});
  CHECK(d[2].p == Offset{1, 1});

  CHECK_THROWS_AS(DirectionSet(2, {{1, 0}, {0, 1}, {2, 2}}), PreconditionError);
  CHECK_THROWS_AS(DirectionSet(2, {{1, 0}, {0, 1}, {-1, 0}}), PreconditionError);
  CHECK_THROWS_AS(DirectionSet(2, {{1, 0}, {1, 1}}), PreconditionError);
  CHECK_THROWS_AS(parse_direction_preset("hex"), PreconditionError);
  CHECK(parse_direction_preset("stencil16") == DirectionPreset::stencil16);
}

TEST_CASE("second difference of x^4 is second-order consistent") {
  // D_h x^4 at x = 1 equals 12 + 2 h^2 exactly, so halving h quarters the error.
  auto err = [](int n) {
    const Grid g = Grid::line(0, 2, n);
    const auto u = ScalarField::sample(g, [](const Point& x) { return std::pow(x(0), 4); });
    return std::abs(directional_second_difference(u, {(n - 1) / 2, 0}, {1, 0}) - 12.0);
  };
  const double ratio = err(21) / err(41);
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("discrete eigenvalue extremes on a quadratic") {
  // Hessian [[2,1],[1,6]]: second differences are exact, (1,0)->2, (0,1)->6,
  // (1,1)->(2+2+6)/2 = 5, (1,-1)->(2-2+6)/2 = 3.
  const Grid g = Grid::square(-1, 1, 21);
  const auto u = ScalarField::sample(g, [](const Point& x) { return x(0) * x(0) + x(0) * x(1) + 3 * x(1) * x(1); });
  const auto dirs = DirectionSet::preset(DirectionPreset::stencil8, 2);
  CHECK(discrete_lambda_min(u, {10, 10}, dirs) == doctest::Approx(2.0));
  CHECK(discrete_lambda_max(u, {10, 10}, dirs) == doctest::Approx(6.0));
  CHECK(directional_second_difference(u, {10, 10}, {1, -1}) == doctest::Approx(3.0));
  CHECK_THROWS_AS(directional_second_difference(u, {0, 10}, {1, 0}), StencilOutOfRange);
}

TEST_CASE("lambda_min ties go to the smallest offset") {
  const Grid g = Grid::square(-1, 1, 11);
  const auto u = ScalarField::sample(g, [](const Point& x) { return x.squaredNorm(); });
  const auto dirs = DirectionSet::preset(DirectionPreset::axes, 2);
  const auto e = lambda_min_direction(u, {5, 5}, dirs);
  CHECK(dirs[e.direction].p == Offset{0, 1});
}

TEST_CASE("gradients and interpolation") {
  const Grid g = Grid::square(-1, 1, 21);
  const auto u = ScalarField::sample(g, [](const Point& x) { return 3 * x(0) - 2 * x(1) + 1; });
  const auto grad = gradient_central(u, {4, 7});
  CHECK(grad(0) == doctest::Approx(3.0));
  CHECK(grad(1) == doctest::Approx(-2.0));
  CHECK_THROWS_AS(gradient_central(u, {0, 7}), StencilOutOfRange);
  const auto edge = nodal_gradient(u, {0, 20});
  CHECK(edge(0) == doctest::Approx(3.0));
  CHECK(edge(1) == doctest::Approx(-2.0));

  Point x(2);
  x << 0.13, -0.71;
  CHECK(interp_value(u, x) == doctest::Approx(3 * 0.13 + 2 * 0.71 + 1));
  CHECK(interp_gradient(u, x)(0) == doctest::Approx(3.0));

  Point far(2);
  far << 1.5, 0.0;
  CHECK_THROWS_AS(interp_value(u, far), PreconditionError);
  std::vector<std::string> seen;
  auto old = set_warning_sink([&](std::string_view m) { seen.emplace_back(m); });
  CHECK(interp_value(u, far, OutOfBox::clamp) == doctest::Approx(4.0));
  set_warning_sink(old);
  CHECK(seen.size() == 1);
}

TEST_CASE("float instantiation") {
  using GridF = BasicGrid<float>;
  using FieldF = BasicField<float>;
  const GridF g = GridF::line(-1.0f, 1.0f, 21);
  const auto u = FieldF::sample(g, [](const BasicPoint<float>& x) { return x(0) * x(0); });
  CHECK(directional_second_difference(u, {10, 0}, {1, 0}) == doctest::Approx(2.0).epsilon(1e-3));
  BasicPoint<float> x(1);
  x << 0.25f;
  CHECK(interp_value(u, x) == doctest::Approx(0.0625).epsilon(1e-2));
}
