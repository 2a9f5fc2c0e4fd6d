#include "convexflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "convexflow/error.hpp"

namespace convexflow {

void Problem::validate() const {
  if (dim != 1 && dim != 2) throw PreconditionError("problem '" + name + "': dimension must be 1 or 2");
  if (!u0) throw PreconditionError("problem '" + name + "': missing u0");
  if (!(hessian_bound > 0)) throw PreconditionError("problem '" + name + "': Hessian bound M must be positive");
  if (!(r0 > 0)) throw PreconditionError("problem '" + name + "': R0 must be positive");
  if (!(box_lower < -r0 && box_upper > r0)) {
    std::ostringstream msg;
    msg << "problem '" << name << "': box [" << box_lower << ", " << box_upper
        << "] must strictly contain the ball of radius R0 = " << r0;
    throw PreconditionError(msg.str());
  }
}

Grid Problem::grid(int n) const {
  return dim == 1 ? Grid::line(box_lower, box_upper, n) : Grid::square(box_lower, box_upper, n);
}

ScalarField Problem::sample(int n) const { return ScalarField::sample(grid(n), u0); }

double cfl_dt(const Grid& grid, const DirectionSet& dirs, double safety) {
  const double delta = grid.h() * dirs.min_length();
  return safety * delta * delta / 2;
}

namespace {

struct Stencil {
  std::vector<Eigen::Index> interior;  // flat indices of updated nodes
  std::vector<Eigen::Index> shift;
  std::vector<double> inv_delta2;
};

Stencil build_stencil(const Grid& g, const DirectionSet& dirs) {
  if (dirs.dim() != g.dim()) throw PreconditionError("direction set dimension does not match the grid");
  Stencil s;
  const int band = dirs.band_width();
  for (Eigen::Index f = 0; f < g.size(); ++f)
    if (g.in_interior_band(g.unflat(f), band)) s.interior.push_back(f);
  for (const auto& d : dirs) {
    s.shift.push_back(Eigen::Index(d.p[0]) * g.n(1) + d.p[1]);
    const double delta = g.h() * d.length;
    s.inv_delta2.push_back(1.0 / (delta * delta));
  }
  return s;
}

// next = u + dt min(0, lambda_min(u)) on the interior, u elsewhere.
// Returns max over nodes of -min(0, lambda_min).
double advance(const Stencil& s, const Eigen::VectorXd& u, Eigen::VectorXd& next, double dt) {
  next = u;
  double rate = 0;
  const std::size_t nd = s.shift.size();
  for (const Eigen::Index i : s.interior) {
    double lam = 0;
    for (std::size_t q = 0; q < nd; ++q) {
      const double d2 = (u(i + s.shift[q]) - 2 * u(i) + u(i - s.shift[q])) * s.inv_delta2[q];
      lam = std::min(lam, d2);
    }
    next(i) = u(i) + dt * lam;
    rate = std::max(rate, -lam);
  }
  return rate;
}

void check_cfl(const Grid& g, const DirectionSet& dirs, double dt) {
  const double bound = cfl_dt(g, dirs, 1.0);
  if (!(dt > 0) || dt > bound * (1 + 1e-12)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "CFL bound violated: dt = " << dt << " must lie in (0, (h*min|p|)^2/2 = " << bound << "]";
    throw CflViolation(msg.str());
  }
}

}  // namespace

ScalarField step(const ScalarField& u, double dt, const DirectionSet& dirs) {
  check_cfl(u.grid(), dirs, dt);
  const Stencil s = build_stencil(u.grid(), dirs);
  Eigen::VectorXd next;
  advance(s, u.values(), next, dt);
  return ScalarField(u.grid(), std::move(next));
}

std::vector<double> uniform_times(double T, double spacing) {
  if (!(spacing > 0)) throw PreconditionError("snapshot spacing must be positive");
  std::vector<double> t;
  const long count = std::lround(T / spacing);
  for (long k = 0; k <= count; ++k) t.push_back(std::min(T, double(k) * spacing));
  return t;
}

Snapshots solve(const ScalarField& u0, const SolveOptions& opt) {
  const Grid& g = u0.grid();
  if (!(opt.T > 0)) throw PreconditionError("solve: horizon T must be positive");
  if (!(opt.safety > 0 && opt.safety <= 1))
    throw CflViolation("CFL bound violated: safety " + std::to_string(opt.safety) + " must lie in (0, 1]");
  for (std::size_t i = 0; i < opt.snapshot_times.size(); ++i) {
    const double t = opt.snapshot_times[i];
    if (t < 0 || t > opt.T * (1 + 1e-12)) throw PreconditionError("solve: snapshot time outside [0, T]");
    if (i > 0 && t < opt.snapshot_times[i - 1]) throw PreconditionError("solve: snapshot times must be sorted");
  }

  const double dt = opt.dt.value_or(cfl_dt(g, opt.dirs, opt.safety));
  if (opt.enforce_cfl) check_cfl(g, opt.dirs, dt);
  const long total = std::max(1L, std::lround(opt.T / dt));

  std::set<long> record{0, total};
  for (double t : opt.snapshot_times) record.insert(std::min(total, std::lround(t / dt)));

  const Stencil stencil = build_stencil(g, opt.dirs);
  const double steady_tol = opt.steady_tol_rel * u0.scale();

  Snapshots out;
  out.dt_used = dt;
  out.dirs = opt.dirs;
  out.steps = *record.rbegin();

  Eigen::VectorXd cur = u0.values(), next;
  for (long n = 0;; ++n) {
    if (record.count(n)) {
      out.times.push_back(double(n) * dt);
      out.fields.emplace_back(g, cur);
    }
    if (n == out.steps) break;
    const double rate = advance(stencil, cur, next, dt);
    if (!next.allFinite()) {
      Eigen::Index bad = 0;
      for (Eigen::Index i = 0; i < next.size(); ++i)
        if (!std::isfinite(next(i))) {
          bad = i;
          break;
        }
      const NodeIndex k = g.unflat(bad);
      std::ostringstream msg;
      msg.precision(17);
      msg << "non-finite value at step " << n + 1 << " (t = " << double(n + 1) * dt << "), node (" << k[0] << ","
          << k[1] << "), previous value " << cur(bad) << ", dt = " << dt;
      throw NumericalAbort(msg.str());
    }
    if (rate < steady_tol) out.steady_state_reached = true;
    cur.swap(next);
  }
  return out;
}

CurvatureExtremes curvature_extremes(const ScalarField& u, const DirectionSet& dirs) {
  const Stencil s = build_stencil(u.grid(), dirs);
  const auto& v = u.values();
  CurvatureExtremes e{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0};
  for (const Eigen::Index i : s.interior) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t q = 0; q < s.shift.size(); ++q) {
      const double d2 = (v(i + s.shift[q]) - 2 * v(i) + v(i - s.shift[q])) * s.inv_delta2[q];
      lo = std::min(lo, d2);
      hi = std::max(hi, d2);
    }
    e.min_lambda_min = std::min(e.min_lambda_min, lo);
    e.max_lambda_max = std::max(e.max_lambda_max, hi);
    e.max_abs = std::max({e.max_abs, std::abs(lo), std::abs(hi)});
  }
  return e;
}

TimeLipschitzReport time_lipschitz_check(const Snapshots& snaps, double M) {
  TimeLipschitzReport r;
  r.m_disc = curvature_extremes(snaps.fields.front(), snaps.dirs).max_abs;
  for (std::size_t k = 0; k + 1 < snaps.size(); ++k) {
    const double dt = snaps.times[k + 1] - snaps.times[k];
    const double jump = (snaps.fields[k + 1].values() - snaps.fields[k].values()).cwiseAbs().maxCoeff();
    auto ratio = [&](double bound) {
      if (jump == 0) return 0.0;
      return bound > 0 ? jump / (bound * dt) : std::numeric_limits<double>::infinity();
    };
    r.worst_ratio = std::max(r.worst_ratio, ratio(r.m_disc));
    r.worst_ratio_analytic = std::max(r.worst_ratio_analytic, ratio(M));
  }
  return r;
}

}  // namespace convexflow
