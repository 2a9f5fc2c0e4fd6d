#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <random>

#include "convexflow/error.hpp"
#include "convexflow/io.hpp"
#include "convexflow/problems.hpp"

using namespace convexflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("convexflow_test_" + name);
  fs::remove_all(p);
  return p;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("17 digits round-trip every double") {
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> d(-1e3, 1e3);
  for (int k = 0; k < 10000; ++k) {
    const double v = d(eng) * std::pow(10.0, double(k % 40) - 20);
    CHECK(same_bits(std::strtod(format_double(v).c_str(), nullptr), v));
  }
}

TEST_CASE("fnv-1a reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("snapshots round-trip bit-exactly") {
  const auto p = problem_library("radial_double_well_2d");
  const auto u0 = p.sample(21);
  SolveOptions opt;
  opt.T = 0.05;
  opt.dirs = DirectionSet::preset(DirectionPreset::stencil16, 2);
  opt.snapshot_times = {0, 0.02};
  const auto s = solve(u0, opt);
  const auto dir = scratch("snaps");
  const auto files = write_snapshots(dir, s, "deadbeef");
  CHECK(files.size() == s.size() + 1);
  const auto r = read_snapshots(dir);
  CHECK(r.grid() == s.grid());
  CHECK(r.dirs == s.dirs);
  CHECK(same_bits(r.dt_used, s.dt_used));
  REQUIRE(r.size() == s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(same_bits(r.times[k], s.times[k]));
    for (Eigen::Index i = 0; i < u0.grid().size(); ++i) CHECK(same_bits(r.fields[k][i], s.fields[k][i]));
  }
  const auto manifest = Json::parse(read_text(dir / "snapshots.json"));
  CHECK(manifest["config_hash"] == "deadbeef");
  fs::remove_all(dir);
}

TEST_CASE("csv helpers") {
  CHECK(columns_csv({"t", "e"}, {{0, 1}, {2, 3}}) == "t,e\n0,2\n1,3\n");
  CHECK_THROWS_AS(columns_csv({"t", "e"}, {{0, 1}, {2}}), PreconditionError);
  const Grid g = Grid::line(0, 1, 5);
  CHECK_THROWS_AS(parse_field_csv("i,x,value\n0,0,1\n", g), PreconditionError);
  const auto script = gnuplot_error_script("e.csv", "e.png", "sup error");
  CHECK(script.find("'e.csv'") != std::string::npos);
  CHECK(script.find("logscale y") != std::string::npos);
}

TEST_CASE("trajectory csv columns") {
  Trajectory tr;
  tr.times = {0, 0.5};
  tr.points = {Point::Constant(2, 1.0), Point::Constant(2, 0.5)};
  tr.values_u0 = {1, 2};
  tr.values_env = {0, 0};
  tr.grad_norm = {3, 4};
  const auto csv = trajectory_csv(tr);
  CHECK(csv.rfind("t,x,y,u0,env,grad\n", 0) == 0);
  CHECK(csv.find("0.5,0.5,0.5,2,0,4") != std::string::npos);
  const auto j = trajectory_summary(tr, -1);
  CHECK(j["final_env_gap"].get<double>() == 1.0);
  CHECK(j["termination"] == "t_end");
}
