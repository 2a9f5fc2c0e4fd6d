#include "convexflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "convexflow/diagnostics.hpp"
#include "convexflow/error.hpp"

namespace convexflow {

std::string to_string(FlowMethod m) { return m == FlowMethod::euler ? "euler" : "rk4"; }

std::string to_string(Termination t) {
  switch (t) {
    case Termination::t_end: return "t_end";
    case Termination::stationary: return "stationary";
    case Termination::left_box: return "left_box";
  }
  return "?";
}

FlowMethod parse_flow_method(const std::string& s) {
  if (s == "euler") return FlowMethod::euler;
  if (s == "rk4") return FlowMethod::rk4;
  throw PreconditionError("unknown flow method '" + s + "' (expected euler or rk4)");
}

Point eval_gradient_field(const Snapshots& snaps, double t, const Point& x) {
  if (snaps.fields.empty()) throw PreconditionError("eval_gradient_field: no snapshots");
  if (!snaps.grid().contains(x)) throw PreconditionError("eval_gradient_field: point outside the grid box");
  const auto& ts = snaps.times;
  if (t <= ts.front()) return interp_gradient(snaps.fields.front(), x);
  if (t >= ts.back()) return interp_gradient(snaps.fields.back(), x);
  const std::size_t k = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin()) - 1;
  const double w = (t - ts[k]) / (ts[k + 1] - ts[k]);
  const Point g0 = interp_gradient(snaps.fields[k], x);
  if (w == 0) return g0;
  return (1 - w) * g0 + w * interp_gradient(snaps.fields[k + 1], x);
}

namespace {

Point clamp_to_box(const Grid& g, Point x) {
  for (int a = 0; a < g.dim(); ++a) x(a) = std::clamp(x(a), g.lower(a), g.upper(a));
  return x;
}

}  // namespace

Trajectory integrate(const Snapshots& snaps, const ScalarField& env, const Point& x0, const FlowOptions& opt) {
  const Grid& g = snaps.grid();
  if (!(env.grid() == g)) throw PreconditionError("integrate: envelope grid does not match the snapshots");
  if (x0.size() != g.dim()) throw PreconditionError("integrate: starting point has the wrong dimension");
  if (!g.contains(x0)) throw PreconditionError("integrate: starting point outside the grid box");
  if (!(opt.dt_ode > 0)) throw PreconditionError("integrate: dt_ode must be positive");
  if (!(opt.t_end > 0)) throw PreconditionError("integrate: t_end must be positive");

  const double grad_tol = opt.grad_tol > 0 ? opt.grad_tol : 1e-6 * snaps.fields.front().scale() / g.diameter();
  const double frozen_after = snaps.times.back();
  const ScalarField& u0 = snaps.fields.front();

  Trajectory tr;
  auto record = [&](double t, const Point& x, double gnorm) {
    const Point xc = clamp_to_box(g, x);
    tr.times.push_back(t);
    tr.points.push_back(x);
    tr.values_u0.push_back(interp_value(u0, xc));
    tr.values_env.push_back(interp_value(env, xc));
    tr.grad_norm.push_back(gnorm);
  };

  double t = 0;
  Point x = x0;
  Point grad = eval_gradient_field(snaps, t, x);
  record(t, x, grad.norm());
  int quiet = 0;

  while (t < opt.t_end * (1 - 1e-14)) {
    const double h = std::min(opt.dt_ode, opt.t_end - t);
    Point next;
    bool outside = false;
    if (opt.method == FlowMethod::euler) {
      next = x - h * grad;
      outside = !g.contains(next);
    } else {
      const Point k1 = -grad;
      Point stage = x + 0.5 * h * k1;
      if (!(outside = !g.contains(stage))) {
        const Point k2 = -eval_gradient_field(snaps, t + 0.5 * h, stage);
        stage = x + 0.5 * h * k2;
        if (!(outside = !g.contains(stage))) {
          const Point k3 = -eval_gradient_field(snaps, t + 0.5 * h, stage);
          stage = x + h * k3;
          if (!(outside = !g.contains(stage))) {
            const Point k4 = -eval_gradient_field(snaps, t + h, stage);
            next = x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
            outside = !g.contains(next);
          }
        }
      }
      if (outside && next.size() == 0) next = stage;
    }
    t += h;
    if (outside) {
      record(t, next, std::numeric_limits<double>::quiet_NaN());
      tr.terminated_reason = Termination::left_box;
      return tr;
    }
    x = next;
    grad = eval_gradient_field(snaps, t, x);
    const double gn = grad.norm();
    record(t, x, gn);
    if (t >= frozen_after && gn < grad_tol) {
      if (++quiet >= opt.stationary_patience) {
        tr.terminated_reason = Termination::stationary;
        return tr;
      }
    } else {
      quiet = 0;
    }
  }
  tr.terminated_reason = Termination::t_end;
  return tr;
}

std::vector<Point> argmin_nodes(const ScalarField& env, double rel_tol) {
  const double lo = env.values().minCoeff();
  const double cut = lo + rel_tol * env.scale();
  std::vector<Point> out;
  for (Eigen::Index f = 0; f < env.grid().size(); ++f)
    if (env[f] <= cut) out.push_back(env.grid().point(env.grid().unflat(f)));
  return out;
}

double distance_to_set(const Point& x, const std::vector<Point>& set) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& p : set) d = std::min(d, (x - p).norm());
  return d;
}

TailReport monotone_tail_check(const Trajectory& tr, const std::vector<Point>& argmin, double C, double lambda) {
  TailReport rep;
  if (tr.times.size() < 2) return rep;
  const double t_start = tr.times.front() + 0.75 * (tr.times.back() - tr.times.front());
  rep.worst_excess = -std::numeric_limits<double>::infinity();
  double prev = std::numeric_limits<double>::quiet_NaN();
  double prev_t = 0;
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    if (tr.times[k] < t_start) continue;
    const double d = distance_to_set(tr.points[k], argmin);
    if (!std::isnan(prev)) {
      const double slack = lambda > 0 ? 2 * (C / lambda) * std::exp(-lambda * prev_t) : 0.0;
      rep.worst_excess = std::max(rep.worst_excess, d - prev - slack);
    }
    prev = d;
    prev_t = tr.times[k];
  }
  if (!std::isfinite(rep.worst_excess)) rep.worst_excess = 0;
  rep.passed = rep.worst_excess <= 1e-12;
  return rep;
}

IntegrabilityReport gradient_error_integrability_report(const Snapshots& snaps, const ScalarField& env) {
  if (snaps.size() < 3) throw PreconditionError("integrability report needs at least 3 snapshots");
  const auto series = grad_error_series(snaps, env);
  IntegrabilityReport rep;
  rep.t = series.t;
  rep.grad_error = series.error;
  for (std::size_t k = 0; k + 1 < series.t.size(); ++k) {
    const double piece = 0.5 * (series.error[k] + series.error[k + 1]) * (series.t[k + 1] - series.t[k]);
    rep.interval_contribution.push_back(piece);
    rep.integral += piece;
  }
  return rep;
}

}  // namespace convexflow
