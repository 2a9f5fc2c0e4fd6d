#include "convexflow/stochastic.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

#include "convexflow/envelope.hpp"
#include "convexflow/error.hpp"

namespace convexflow {

void MCConfig::validate() const {
  if (n_paths < 100) throw PreconditionError("Monte Carlo needs at least 100 paths");
  if (!(dt_mc > 0)) throw PreconditionError("dt_mc must be positive");
  if (!(dt_mc <= horizon)) throw PreconditionError("dt_mc must not exceed the horizon");
}

std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finaliser over (seed, index)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  std::seed_seq seq{static_cast<std::uint32_t>(z), static_cast<std::uint32_t>(z >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(seed)};
  return std::mt19937_64(seq);
}

namespace {

struct Moments {
  long n = 0;
  double mean = 0;
  double m2 = 0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / double(n);
    m2 += d * (x - mean);
  }
  double se() const { return n > 1 ? std::sqrt(m2 / double(n - 1) / double(n)) : 0.0; }
};

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15;
  return simpson_step(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, 60);
}

double q_of_r(double r) {
  if (!(r >= 0)) throw PreconditionError("q_of_r: r must be nonnegative");
  if (r == 0) return 0;
  if (std::isinf(r)) return 1;
  const double inv_sqrt_2pi = 1 / std::sqrt(2 * M_PI);
  // Beyond |s| = 40 the density underflows; clip the range.
  const double hi = std::min(2 * r, 40.0);
  const double half = adaptive_simpson([](double s) { return std::exp(-0.5 * s * s); }, 0, hi, 1e-13);
  return std::min(1.0, 2 * inv_sqrt_2pi * half);
}

ExitTimeReport exit_time_tail(double r, const std::vector<double>& ts, const MCConfig& cfg) {
  cfg.validate();
  if (!(r > 0)) throw PreconditionError("exit_time_tail: r must be positive");
  ExitTimeReport rep;
  rep.r = r;
  rep.n_paths = cfg.n_paths;
  rep.ts = ts;
  const double t_max = ts.empty() ? 0 : *std::max_element(ts.begin(), ts.end());
  const long max_steps = static_cast<long>(std::ceil(t_max / cfg.dt_mc));
  const double sd = std::sqrt(cfg.dt_mc);

  std::vector<double> tau(static_cast<std::size_t>(cfg.n_paths), std::numeric_limits<double>::infinity());
  for (long p = 0; p < cfg.n_paths; ++p) {
    auto eng = path_engine(cfg.seed, static_cast<std::uint64_t>(p));
    std::normal_distribution<double> normal(0.0, sd);
    double x = 0;
    for (long k = 1; k <= max_steps; ++k) {
      x += normal(eng);
      if (x < -r || x > r) {
        tau[static_cast<std::size_t>(p)] = double(k) * cfg.dt_mc;
        break;
      }
    }
  }
  const double q = q_of_r(r);
  for (double t : ts) {
    long alive = 0;
    for (double v : tau) alive += v >= t ? 1 : 0;
    const double p = double(alive) / double(cfg.n_paths);
    rep.survivors.push_back(alive);
    rep.empirical_tail.push_back(p);
    rep.standard_error.push_back(std::sqrt(p * (1 - p) / double(cfg.n_paths)));
    rep.bound.push_back(std::pow(q, t - 1));
  }
  return rep;
}

double tail_log_slope(const ExitTimeReport& rep, long min_count) {
  std::vector<double> t, y;
  for (std::size_t k = 0; k < rep.ts.size(); ++k)
    if (rep.ts[k] > 0 && rep.survivors[k] >= min_count) {
      t.push_back(rep.ts[k]);
      y.push_back(std::log(rep.empirical_tail[k]));
    }
  if (t.size() < 2) throw PreconditionError("tail_log_slope: fewer than two well-populated times");
  const Eigen::Map<const Eigen::VectorXd> tv(t.data(), Eigen::Index(t.size()));
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), Eigen::Index(y.size()));
  const double tm = tv.mean(), ym = yv.mean();
  return ((tv.array() - tm) * (yv.array() - ym)).sum() / (tv.array() - tm).square().sum();
}

FacetWalkResult facet_walk_1d(const Problem& problem, const ScalarField& u0, double x0, const MCConfig& cfg) {
  cfg.validate();
  const Grid& g = u0.grid();
  if (g.dim() != 1) throw PreconditionError("facet_walk_1d needs a 1D problem");
  const auto env = reference_envelope(u0);
  const double tol = 1e-9 * u0.scale();

  // Contact nodes (u0 == envelope) bracketing x0 delimit the face.
  double a = -std::numeric_limits<double>::infinity(), b = std::numeric_limits<double>::infinity();
  for (int k = 0; k < g.n(0); ++k) {
    if (u0[k] - env.envelope[k] > tol) continue;
    const double x = g.coord(0, k);
    if (x <= x0) a = std::max(a, x);
    if (x >= x0) b = std::min(b, x);
  }
  if (!(a < x0 && x0 < b) || !(b - a > 1.5 * g.h()))
    throw PreconditionError("facet_walk_1d: x0 must lie strictly inside an interval where the envelope is below u0");

  FacetWalkResult res;
  res.a = a;
  res.b = b;
  res.weight_a = (b - x0) / (b - a);
  res.envelope_value = interp_value(env.envelope, Point(Point::Constant(1, x0)));
  res.n_paths = cfg.n_paths;

  const long max_steps = static_cast<long>(std::ceil(cfg.horizon / cfg.dt_mc));
  const double sd = std::sqrt(2 * cfg.dt_mc);
  Moments value, stop, hit_a;
  long censored = 0;
  for (long p = 0; p < cfg.n_paths; ++p) {
    auto eng = path_engine(cfg.seed, static_cast<std::uint64_t>(p));
    std::normal_distribution<double> normal(0.0, sd);
    double y = x0;
    bool exited = false;
    for (long k = 0; k < max_steps; ++k) {
      y += normal(eng);
      if (y <= a || y >= b) {
        exited = true;
        break;
      }
    }
    if (!exited) ++censored;
    value.add(problem.u0(Point::Constant(1, y)));
    stop.add(y);
    hit_a.add(exited && y <= a ? 1.0 : 0.0);
  }
  res.mean = value.mean;
  res.se = value.se();
  res.mean_stop = stop.mean;
  res.mean_stop_se = stop.se();
  res.hit_a_fraction = hit_a.mean;
  res.hit_a_se = std::sqrt(hit_a.mean * (1 - hit_a.mean) / double(cfg.n_paths));
  res.censored_fraction = double(censored) / double(cfg.n_paths);
  // W = (Y - x0) / sqrt(2) must stay in [-R, R] with R the larger half-gap over sqrt(2).
  const double R = std::max(x0 - a, b - x0) / std::sqrt(2.0);
  res.censored_bound = std::min(1.0, std::pow(q_of_r(R), cfg.horizon - 1));
  return res;
}

double field_value(const Snapshots& snaps, double t, const Point& x) {
  const auto& ts = snaps.times;
  if (t <= ts.front()) return interp_value(snaps.fields.front(), x);
  if (t >= ts.back()) return interp_value(snaps.fields.back(), x);
  const std::size_t k = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin()) - 1;
  const double w = (t - ts[k]) / (ts[k + 1] - ts[k]);
  const double v0 = interp_value(snaps.fields[k], x);
  if (w == 0) return v0;
  return (1 - w) * v0 + w * interp_value(snaps.fields[k + 1], x);
}

namespace {

// Unit direction of the most negative second difference of u(tau, .) at y, or
// nothing when that value is above -eig_tol or the stencil leaves the box.
std::optional<Point> feedback_direction(const Snapshots& snaps, double tau, const Point& y, double eig_tol) {
  const Grid& g = snaps.grid();
  const double h = g.h();
  double best = std::numeric_limits<double>::infinity();
  std::optional<Point> dir;
  const double center = field_value(snaps, tau, y);
  for (const auto& d : snaps.dirs) {
    Point step(g.dim());
    for (int a = 0; a < g.dim(); ++a) step(a) = h * d.p[a];
    const Point lo = y - step, hi = y + step;
    if (!g.contains(lo) || !g.contains(hi)) return std::nullopt;
    const double delta = h * d.length;
    const double d2 = (field_value(snaps, tau, hi) - 2 * center + field_value(snaps, tau, lo)) / (delta * delta);
    if (d2 < best) {
      best = d2;
      dir = step / delta;
    }
  }
  if (!(best < -eig_tol)) return std::nullopt;
  return dir;
}

struct Simulation {
  std::vector<Point> finals;
  long absorbed = 0;
  std::vector<double> checkpoint_s;
  std::vector<Moments> checkpoint_values;
};

// Runs paths from x0 for `duration`, using u(t_start - elapsed, .) for the control.
Simulation simulate(const Snapshots& snaps, const Point& x0, double t_start, double duration, const MCConfig& cfg,
                    ControlPolicy policy, int checkpoints) {
  const Grid& g = snaps.grid();
  if (!g.contains(x0)) throw PreconditionError("controlled diffusion: starting point outside the box");
  const long steps = duration > 0 ? std::max(1L, std::lround(duration / cfg.dt_mc)) : 0;
  const double dt = steps > 0 ? duration / double(steps) : 0;
  const double eig_tol = 1e-8 * snaps.fields.front().scale();

  Simulation sim;
  std::vector<long> check_steps;
  for (int c = 0; c <= checkpoints && steps > 0; ++c) {
    const long k = std::lround(double(c) * double(steps) / double(checkpoints));
    if (check_steps.empty() || k != check_steps.back()) check_steps.push_back(k);
  }
  for (long k : check_steps) sim.checkpoint_s.push_back(double(k) * dt);
  sim.checkpoint_values.resize(check_steps.size());

  for (long p = 0; p < cfg.n_paths; ++p) {
    auto eng = path_engine(cfg.seed, static_cast<std::uint64_t>(p));
    std::normal_distribution<double> normal(0.0, std::sqrt(dt));
    Point y = x0;
    bool absorbed = false;
    std::size_t next_check = 0;
    for (long k = 0; k <= steps; ++k) {
      const double elapsed = double(k) * dt;
      const double tau = t_start - elapsed;
      if (next_check < check_steps.size() && check_steps[next_check] == k)
        sim.checkpoint_values[next_check++].add(field_value(snaps, tau, y));
      if (k == steps || absorbed) {
        if (k == steps) break;
        continue;
      }
      std::optional<Point> z;
      if (policy == ControlPolicy::feedback)
        z = feedback_direction(snaps, tau, y, eig_tol);
      else if (policy == ControlPolicy::first_axis)
        z = Point::Unit(g.dim(), 0);
      if (!z) continue;
      // Rank-one noise: one scalar Gaussian increment along z.
      y += std::sqrt(2.0) * normal(eng) * *z;
      if (!g.contains(y)) {
        for (int a = 0; a < g.dim(); ++a) y(a) = std::clamp(y(a), g.lower(a), g.upper(a));
        absorbed = true;
      }
    }
    if (absorbed) ++sim.absorbed;
    sim.finals.push_back(y);
  }
  return sim;
}

}  // namespace

ControlEstimate control_value_estimate(const Snapshots& snaps, const Point& x0, double t, const MCConfig& cfg,
                                       ControlPolicy policy, int checkpoints) {
  cfg.validate();
  if (!(t >= 0) || t > snaps.times.back() * (1 + 1e-12))
    throw PreconditionError("control_value_estimate: t must lie within the snapshot range");
  const Simulation sim = simulate(snaps, x0, t, t, cfg, policy, checkpoints);
  ControlEstimate est;
  Moments m;
  for (const auto& y : sim.finals) m.add(interp_value(snaps.fields.front(), y));
  est.mean = m.mean;
  est.se = m.se();
  est.absorbed = sim.absorbed;
  est.n_paths = cfg.n_paths;
  est.checkpoint_s = sim.checkpoint_s;
  for (const auto& c : sim.checkpoint_values) {
    est.value_mean.push_back(c.mean);
    est.value_se.push_back(c.se());
  }
  return est;
}

ControlEstimate feedback_value_estimate(const Snapshots& snaps, const Point& x0, double t, const MCConfig& cfg) {
  return control_value_estimate(snaps, x0, t, cfg, ControlPolicy::feedback);
}

DynamicProgrammingReport dynamic_programming_check(const Snapshots& snaps, const Point& y, double t, double s,
                                                   const MCConfig& cfg, const Tolerances& tol) {
  cfg.validate();
  if (!(s >= 0 && s <= t) || t > snaps.times.back() * (1 + 1e-12))
    throw PreconditionError("dynamic_programming_check: need 0 <= s <= t <= last snapshot time");
  const Simulation sim = simulate(snaps, y, t, t - s, cfg, ControlPolicy::feedback, 0);
  DynamicProgrammingReport rep;
  rep.value_t = field_value(snaps, t, y);
  Moments m;
  for (const auto& x : sim.finals) m.add(field_value(snaps, s, x));
  rep.mean_value_s = m.mean;
  rep.se = m.se();
  rep.gap = rep.mean_value_s - rep.value_t;
  rep.tolerance = 3 * rep.se + tol.c_disc * (snaps.grid().h() + std::sqrt(cfg.dt_mc));
  rep.within = std::abs(rep.gap) <= rep.tolerance;
  return rep;
}

}  // namespace convexflow
