#include "convexflow/diagnostics.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

#include "convexflow/error.hpp"
#include "convexflow/log.hpp"

namespace convexflow {
namespace {

void require_same_grid(const Snapshots& s, const ScalarField& env) {
  if (s.fields.empty()) throw PreconditionError("empty snapshot sequence");
  if (!(s.grid() == env.grid())) throw PreconditionError("envelope grid does not match the snapshot grid");
}

double central_gradient_gap(const ScalarField& a, const ScalarField& b, const NodeIndex& k) {
  return (gradient_central(a, k) - gradient_central(b, k)).norm();
}

}  // namespace

ErrorSeries sup_error_series(const Snapshots& snaps, const ScalarField& env) {
  require_same_grid(snaps, env);
  ErrorSeries s;
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const Eigen::VectorXd diff = snaps.fields[k].values() - env.values();
    const double e = diff.maxCoeff();
    s.most_negative = std::min(s.most_negative, diff.minCoeff());
    if (e < 0) ++s.clamped;
    s.t.push_back(snaps.times[k]);
    s.error.push_back(std::max(0.0, e));
  }
  return s;
}

ErrorSeries grad_error_series(const Snapshots& snaps, const ScalarField& env) {
  require_same_grid(snaps, env);
  const Grid& g = env.grid();
  ErrorSeries s;
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    double worst = 0;
    for (Eigen::Index f = 0; f < g.size(); ++f) {
      const NodeIndex node = g.unflat(f);
      if (g.is_boundary(node)) continue;
      worst = std::max(worst, central_gradient_gap(snaps.fields[k], env, node));
    }
    s.t.push_back(snaps.times[k]);
    s.error.push_back(worst);
  }
  return s;
}

double rate_floor(double scale, double c_dir, double h) { return std::max(1e-12 * scale, c_dir * h / 10); }

RateFit fit_rate(const ErrorSeries& series, double tail_fraction, double floor) {
  if (!(tail_fraction > 0 && tail_fraction <= 1)) throw PreconditionError("tail_fraction must lie in (0, 1]");
  RateFit fit;
  std::vector<std::size_t> usable;
  for (std::size_t k = 0; k < series.t.size(); ++k) {
    if (series.error[k] > floor)
      usable.push_back(k);
    else
      ++fit.excluded_below_floor;
  }
  if (usable.size() >= 2) {
    const double t0 = series.t[usable.front()], t1 = series.t[usable.back()];
    const double cut = t1 - tail_fraction * (t1 - t0);
    for (const auto k : usable)
      if (series.t[k] >= cut - 1e-12 * std::max(1.0, std::abs(cut))) {
        fit.t.push_back(series.t[k]);
        fit.error.push_back(series.error[k]);
      }
  }
  if (fit.t.size() < 5)
    throw PreconditionError("converged-too-fast; enlarge grid or shrink snapshot spacing (" +
                            std::to_string(fit.t.size()) + " usable points above the error floor)");

  const Eigen::Index n = static_cast<Eigen::Index>(fit.t.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = 1;
    A(i, 1) = fit.t[i];
    y(i) = std::log(fit.error[i]);
  }
  const Eigen::Vector2d beta = A.colPivHouseholderQr().solve(y);
  fit.C = std::exp(beta(0));
  fit.lambda = -beta(1);
  const double ss_res = (A * beta - y).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  fit.r_squared = ss_tot > 0 ? 1 - ss_res / ss_tot : 1.0;
  fit.t_lo = fit.t.front();
  fit.t_hi = fit.t.back();
  return fit;
}

Lemma2Report lemma2_gradient_bound_check(const Snapshots& snaps, const ScalarField& env, double m_disc, double r) {
  require_same_grid(snaps, env);
  const Grid& g = env.grid();
  if (!(r > 0)) throw PreconditionError("lemma2 check: radius must be positive");
  double half = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.dim(); ++a) half = std::min({half, -g.lower(a), g.upper(a)});

  std::vector<Eigen::VectorXd> diffs;
  std::vector<double> moduli;
  for (const auto& f : snaps.fields) {
    diffs.push_back(f.values() - env.values());
    const ScalarField v(g, diffs.back());
    moduli.push_back(std::max(m_disc, std::max(0.0, -curvature_extremes(v, snaps.dirs).min_lambda_min)));
  }

  auto sup_on_ball = [&](const Eigen::VectorXd& v, double radius) {
    double s = 0;
    for (Eigen::Index f = 0; f < g.size(); ++f)
      if (g.point(g.unflat(f)).norm() <= radius * (1 + 1e-12)) s = std::max(s, std::abs(v(f)));
    return s;
  };
  auto r_prime = [&](std::size_t k, double radius) {
    return 2 / (moduli[k] * radius) * sup_on_ball(diffs[k], 2 * radius) + radius / 2;
  };

  Lemma2Report rep;
  rep.r = r;
  for (int attempt = 0; attempt < 30; ++attempt) {
    bool fits = 2 * rep.r <= half;
    for (std::size_t k = 0; fits && k < diffs.size(); ++k) fits = rep.r + r_prime(k, rep.r) <= half;
    if (fits) break;
    rep.r /= 2;
    rep.shrunk = true;
  }
  if (rep.shrunk) warn("lemma2 check: balls left the box; radius shrunk to " + std::to_string(rep.r));

  const double scale = std::max(env.scale(), snaps.fields.front().scale());
  for (std::size_t k = 0; k < diffs.size(); ++k) {
    Lemma2Entry e;
    e.t = snaps.times[k];
    e.modulus = moduli[k];
    e.r_prime = r_prime(k, rep.r);
    const ScalarField v(g, diffs[k]);
    for (Eigen::Index f = 0; f < g.size(); ++f) {
      const NodeIndex node = g.unflat(f);
      if (g.is_boundary(node) || g.point(node).norm() > rep.r * (1 + 1e-12)) continue;
      e.lhs = std::max(e.lhs, gradient_central(v, node).norm());
    }
    e.rhs = 2 * std::sqrt(e.modulus * sup_on_ball(diffs[k], rep.r + e.r_prime));
    if (e.rhs > 0)
      e.ratio = e.lhs / e.rhs;
    else
      e.ratio = e.lhs <= 1e-12 * scale ? 0.0 : std::numeric_limits<double>::infinity();
    rep.worst_ratio = std::max(rep.worst_ratio, e.ratio);
    rep.entries.push_back(e);
  }
  return rep;
}

bool AuditReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.passed; });
}

const InvariantCheck& AuditReport::operator[](const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw PreconditionError("no audit check named '" + name + "'");
}

AuditReport structural_audit(const Snapshots& snaps, const ScalarField& env, const Problem& problem,
                             const Tolerances& tol) {
  require_same_grid(snaps, env);
  const Grid& g = env.grid();
  const ScalarField& u0 = snaps.fields.front();
  const double scale = u0.scale();
  const double curv_tol = 1e-8 * scale;
  AuditReport rep;
  auto add = [&](std::string name, double measured, double limit) {
    rep.checks.push_back({std::move(name), measured <= limit, measured, limit});
  };

  double above_u0 = -std::numeric_limits<double>::infinity();
  double below_env = std::numeric_limits<double>::infinity();
  double time_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const auto& u = snaps.fields[k].values();
    above_u0 = std::max(above_u0, (u - u0.values()).maxCoeff());
    below_env = std::min(below_env, (u - env.values()).minCoeff());
    if (k > 0) time_increase = std::max(time_increase, (u - snaps.fields[k - 1].values()).maxCoeff());
  }
  if (snaps.size() < 2) time_increase = 0;
  add("sandwich_upper", above_u0, 0.0);
  // Stored as -(u - env) so that "measured <= limit" reads as u - env >= -c_dir h.
  add("sandwich_lower", -below_env, tol.c_dir * g.h());
  add("time_monotone", time_increase, 0.0);

  std::vector<CurvatureExtremes> ext;
  for (const auto& f : snaps.fields) ext.push_back(curvature_extremes(f, snaps.dirs));
  double semiconcave_excess = -std::numeric_limits<double>::infinity();
  double min_drop = 0, max_rise = 0;
  for (std::size_t k = 0; k < ext.size(); ++k) {
    semiconcave_excess = std::max(semiconcave_excess, ext[k].max_lambda_max - ext[0].max_lambda_max);
    if (k > 0) {
      min_drop = std::max(min_drop, ext[k - 1].min_lambda_min - ext[k].min_lambda_min);
      max_rise = std::max(max_rise, ext[k].max_lambda_max - ext[k - 1].max_lambda_max);
    }
  }
  add("semiconcavity", semiconcave_excess, curv_tol);
  add("lambda_min_nondecreasing", min_drop, curv_tol);
  add("lambda_max_nonincreasing", max_rise, curv_tol);

  const auto lip = time_lipschitz_check(snaps, problem.hessian_bound);
  add("time_lipschitz", lip.worst_ratio, 1 + 1e-6);

  const int band = snaps.dirs.band_width();
  double band_change = 0;
  for (Eigen::Index f = 0; f < g.size(); ++f) {
    if (g.in_interior_band(g.unflat(f), band)) continue;
    for (const auto& s : snaps.fields) band_change = std::max(band_change, std::abs(s[f] - u0[f]));
  }
  add("frozen_band", band_change, 0.0);
  return rep;
}

}  // namespace convexflow
