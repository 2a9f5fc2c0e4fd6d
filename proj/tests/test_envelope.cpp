#include <doctest.h>

#include <cmath>
#include <random>

#include "convexflow/envelope.hpp"
#include "convexflow/error.hpp"
#include "convexflow/log.hpp"

using namespace convexflow;

namespace {

double sq(double v) { return v * v; }

// O(n m) conjugate straight from the definition.
Eigen::VectorXd naive_conjugate(const Eigen::VectorXd& xs, const Eigen::VectorXd& v, const Eigen::VectorXd& s) {
  Eigen::VectorXd out(s.size());
  for (Eigen::Index j = 0; j < s.size(); ++j) out(j) = (s(j) * xs - v).maxCoeff();
  return out;
}

ScalarField random_field(const Grid& g, unsigned seed) {
  std::mt19937 eng(seed);
  std::uniform_real_distribution<double> d(-1, 1);
  Eigen::VectorXd v(g.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = d(eng);
  return ScalarField(g, v);
}

}  // namespace

TEST_CASE("hull of the double well is flat on [-1, 1]") {
  const Grid g = Grid::line(-2, 2, 201);
  const auto u = ScalarField::sample(g, [](const Point& x) { return sq(x(0) * x(0) - 1); });
  const auto env = lower_hull_envelope_1d(u);
  CHECK(env.method == EnvelopeMethod::hull1d);
  for (int k = 0; k < 201; ++k) {
    const double x = g.coord(0, k);
    const double want = std::abs(x) <= 1 ? 0.0 : sq(x * x - 1);
    CHECK(env.envelope[k] == doctest::Approx(want).epsilon(0).scale(1).epsilon(1e-12));
  }
  CHECK(env.max_gap_to_input >= 0);
}

TEST_CASE("hull matches the brute-force oracle on random data") {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const auto u = random_field(Grid::line(0, 1, 41), seed);
    const auto a = lower_hull_envelope_1d(u).envelope.values();
    const auto b = caratheodory_bruteforce(u).envelope.values();
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * u.scale());
  }
}

TEST_CASE("legendre conjugate agrees with the definition") {
  std::mt19937 eng(7);
  std::uniform_real_distribution<double> d(-1, 1);
  Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(30, -2, 3);
  Eigen::VectorXd v(30);
  for (Eigen::Index i = 0; i < 30; ++i) v(i) = d(eng) + 0.3 * sq(xs(i));
  const Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(57, -5, 4);
  const Eigen::VectorXd fast = legendre_conjugate_1d(xs, v, s);
  CHECK((fast - naive_conjugate(xs, v, s)).cwiseAbs().maxCoeff() <= 1e-12);

  Eigen::VectorXd bad = xs;
  bad(3) = bad(2);
  CHECK_THROWS_AS(legendre_conjugate_1d(bad, v, s), PreconditionError);
}

TEST_CASE("slope lattice is anchored at zero") {
  const auto s = slope_lattice(-3.3, 7.1, 40);
  bool has_zero = false;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    has_zero = has_zero || s(i) == 0.0;
    if (i > 0) CHECK(s(i) > s(i - 1));
  }
  CHECK(has_zero);
  CHECK(s(0) <= -3.3);
  CHECK(s(s.size() - 1) >= 7.1);
  CHECK_THROWS_AS(slope_lattice(1, 0, 10), PreconditionError);
}

TEST_CASE("biconjugate in 1D reproduces the flat face exactly") {
  const Grid g = Grid::line(-2, 2, 101);
  const auto u = ScalarField::sample(g, [](const Point& x) { return sq(x(0) * x(0) - 1); });
  const auto hull = lower_hull_envelope_1d(u).envelope.values();
  const auto bic = biconjugate(u, 404).envelope.values();
  for (int k = 0; k < 101; ++k)
    if (std::abs(g.coord(0, k)) < 1) CHECK(std::abs(bic(k)) <= 1e-12);
  CHECK((hull - bic).cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("convex data are their own envelope") {
  const Grid g = Grid::square(-1, 1, 9);
  const auto u = ScalarField::sample(g, [](const Point& x) { return x.squaredNorm() + 0.5 * x(0); });
  const auto car = caratheodory_bruteforce(u);
  CHECK((car.envelope.values() - u.values()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(convexity_defect(u) >= 0);
}

TEST_CASE("2D biconjugate stays below the data and is discretely convex") {
  const Grid g = Grid::square(-1, 1, 9);
  const auto u = random_field(g, 3);
  const auto env = biconjugate(u, 36);
  CHECK(env.max_gap_to_input >= -1e-12);
  CHECK(convexity_defect(env.envelope) >= -1e-9);
  const auto car = caratheodory_bruteforce(u);
  CHECK(convexity_defect(car.envelope) >= -1e-9);
  // The oracle is the exact discrete envelope, so every other lower convex candidate lies below it.
  CHECK((env.envelope.values() - car.envelope.values()).maxCoeff() <= 1e-9);
}

TEST_CASE("oracle guard and slope-count warning") {
  const auto big = random_field(Grid::square(0, 1, 50), 1);
  CHECK_THROWS_AS(caratheodory_bruteforce(big), GuardExceeded);
  int warnings = 0;
  auto old = set_warning_sink([&](std::string_view) { ++warnings; });
  biconjugate(random_field(Grid::line(0, 1, 21), 2), 10);
  set_warning_sink(old);
  CHECK(warnings == 1);
}

TEST_CASE("convexity defect sees a dent") {
  const Grid g = Grid::line(0, 1, 11);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(11);
  v(5) = 0.5;
  CHECK(convexity_defect(ScalarField(g, v)) == doctest::Approx(-1.0));
}
