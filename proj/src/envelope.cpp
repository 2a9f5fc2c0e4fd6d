#include "convexflow/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "convexflow/error.hpp"
#include "convexflow/log.hpp"

namespace convexflow {

std::string to_string(EnvelopeMethod m) {
  switch (m) {
    case EnvelopeMethod::hull1d: return "hull1d";
    case EnvelopeMethod::biconjugate: return "biconjugate";
    case EnvelopeMethod::caratheodory: return "caratheodory";
  }
  return "?";
}

namespace {

EnvelopeResult make_result(const ScalarField& input, Eigen::VectorXd env, EnvelopeMethod method) {
  const double gap = (input.values() - env).maxCoeff();
  return {ScalarField(input.grid(), std::move(env)), method, gap};
}

// Chord value between nodes i < j evaluated at i <= k <= j. Shared by the hull
// and the brute-force oracle so both round identically.
inline double chord(double ui, double uj, int i, int j, int k) {
  return ui + (uj - ui) * (double(k - i) / double(j - i));
}

// Indices of the lower hull vertices of (x_k, v_k), x strictly increasing.
// Collinear middle points are dropped, so ties resolve to the outer vertices.
template <typename X, typename V>
std::vector<Eigen::Index> lower_hull(Eigen::Index n, X&& x, V&& v) {
  std::vector<Eigen::Index> hull;
  hull.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    while (hull.size() >= 2) {
      const Eigen::Index a = hull[hull.size() - 2], b = hull.back();
      const double cross = (x(b) - x(a)) * (v(k) - v(a)) - (v(b) - v(a)) * (x(k) - x(a));
      if (cross <= 0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(k);
  }
  return hull;
}

void require_increasing(const Eigen::Ref<const Eigen::VectorXd>& v, const char* what) {
  for (Eigen::Index i = 0; i + 1 < v.size(); ++i)
    if (!(v(i + 1) > v(i))) throw PreconditionError(std::string(what) + " must be strictly increasing");
}

}  // namespace

EnvelopeResult lower_hull_envelope_1d(const ScalarField& u) {
  const auto& g = u.grid();
  if (g.dim() != 1) throw PreconditionError("lower_hull_envelope_1d needs a 1D field");
  const Eigen::Index n = g.size();
  const auto& v = u.values();
  // Work in index space; the map k -> lower + k h is affine so the hull is the same.
  const auto hull = lower_hull(n, [](Eigen::Index k) { return double(k); }, [&](Eigen::Index k) { return v(k); });

  Eigen::VectorXd env(n);
  for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
    const int a = static_cast<int>(hull[s]), b = static_cast<int>(hull[s + 1]);
    env(a) = v(a);
    for (int k = a + 1; k < b; ++k) env(k) = chord(v(a), v(b), a, b, k);
  }
  env(hull.back()) = v(hull.back());
  return make_result(u, std::move(env), EnvelopeMethod::hull1d);
}

Eigen::VectorXd legendre_conjugate_1d(const Eigen::Ref<const Eigen::VectorXd>& xs,
                                      const Eigen::Ref<const Eigen::VectorXd>& vals,
                                      const Eigen::Ref<const Eigen::VectorXd>& slopes) {
  if (xs.size() != vals.size()) throw PreconditionError("legendre_conjugate_1d: xs and vals differ in length");
  if (xs.size() == 0) throw PreconditionError("legendre_conjugate_1d: empty input");
  require_increasing(xs, "xs");
  require_increasing(slopes, "slopes");

  // Only lower-hull vertices can maximize s x - v; along the hull that
  // objective is unimodal and its argmax moves right as s grows.
  const auto hull = lower_hull(xs.size(), [&](Eigen::Index k) { return xs(k); }, [&](Eigen::Index k) { return vals(k); });
  Eigen::VectorXd out(slopes.size());
  std::size_t k = 0;
  for (Eigen::Index m = 0; m < slopes.size(); ++m) {
    const double s = slopes(m);
    auto obj = [&](std::size_t h) { return s * xs(hull[h]) - vals(hull[h]); };
    while (k + 1 < hull.size() && obj(k + 1) > obj(k)) ++k;
    out(m) = obj(k);
  }
  return out;
}

Eigen::VectorXd slope_lattice(double lo, double hi, int count) {
  if (!(hi >= lo)) throw PreconditionError("slope_lattice: hi < lo");
  if (hi == lo || count < 2) return Eigen::VectorXd::Constant(1, lo);
  const double step = (hi - lo) / double(count - 1);
  if (lo < 0 && hi > 0) {
    const long k_lo = static_cast<long>(std::floor(lo / step));
    const long k_hi = static_cast<long>(std::ceil(hi / step));
    Eigen::VectorXd s(k_hi - k_lo + 1);
    for (long k = k_lo; k <= k_hi; ++k) s(k - k_lo) = double(k) * step;
    return s;
  }
  Eigen::VectorXd s(count);
  for (int k = 0; k < count; ++k) s(k) = lo + double(k) * step;
  s(count - 1) = hi;
  return s;
}

EnvelopeResult biconjugate(const ScalarField& u, int slope_count) {
  const auto& g = u.grid();
  const auto& v = u.values();
  for (int a = 0; a < g.dim(); ++a)
    if (slope_count < g.n(a))
      warn("biconjugate: slope_count " + std::to_string(slope_count) + " is below the grid size " +
           std::to_string(g.n(a)) + "; the envelope may be loose");

  auto axis_coords = [&](int a) {
    Eigen::VectorXd c(g.n(a));
    for (int k = 0; k < g.n(a); ++k) c(k) = g.coord(a, k);
    return c;
  };
  // Extreme pairwise difference quotients along an axis are attained by neighbours.
  auto axis_slopes = [&](int a) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    const Offset step = a == 0 ? Offset{1, 0} : Offset{0, 1};
    for (Eigen::Index f = 0; f < g.size(); ++f) {
      const NodeIndex k = g.unflat(f);
      if (k[a] + 1 >= g.n(a)) continue;
      const double q = (u({k[0] + step[0], k[1] + step[1]}) - v(f)) / g.h();
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    return slope_lattice(lo, hi, slope_count);
  };

  if (g.dim() == 1) {
    const Eigen::VectorXd xs = axis_coords(0);
    const Eigen::VectorXd slopes = axis_slopes(0);
    const Eigen::VectorXd conj = legendre_conjugate_1d(xs, v, slopes);
    return make_result(u, legendre_conjugate_1d(slopes, conj, xs), EnvelopeMethod::biconjugate);
  }

  const int n0 = g.n(0), n1 = g.n(1);
  const Eigen::VectorXd x0 = axis_coords(0), x1 = axis_coords(1);
  const Eigen::VectorXd s0 = axis_slopes(0), s1 = axis_slopes(1);
  const Eigen::Index m0 = s0.size(), m1 = s1.size();

  // f*(s0, s1) = max_i [ s0 x0_i + max_j (s1 x1_j - f(i, j)) ]
  Eigen::MatrixXd inner(n0, m1);
  for (int i = 0; i < n0; ++i)
    inner.row(i) = legendre_conjugate_1d(x1, v.segment(Eigen::Index(i) * n1, n1), s1).transpose();
  Eigen::MatrixXd conj(m0, m1);
  for (Eigen::Index k = 0; k < m1; ++k) conj.col(k) = legendre_conjugate_1d(x0, -inner.col(k), s0);

  // f**(x0, x1) = max_k [ s1_k x1 + max_l (s0_l x0 - f*(l, k)) ]
  Eigen::MatrixXd back(n0, m1);
  for (Eigen::Index k = 0; k < m1; ++k) back.col(k) = legendre_conjugate_1d(s0, conj.col(k), x0);
  Eigen::VectorXd env(g.size());
  for (int i = 0; i < n0; ++i) {
    const Eigen::VectorXd neg_row = -back.row(i).transpose();
    env.segment(Eigen::Index(i) * n1, n1) = legendre_conjugate_1d(s1, neg_row, x1);
  }
  return make_result(u, std::move(env), EnvelopeMethod::biconjugate);
}

EnvelopeResult caratheodory_bruteforce(const ScalarField& u) {
  const auto& g = u.grid();
  const Eigen::Index n = g.size();
  if (n > 2000)
    throw GuardExceeded("caratheodory_bruteforce refuses grids above 2000 nodes (got " + std::to_string(n) + ")");
  const auto& v = u.values();
  Eigen::VectorXd env = v;

  if (g.dim() == 1) {
    const int nn = static_cast<int>(n);
    for (int k = 1; k + 1 < nn; ++k)
      for (int i = 0; i < k; ++i)
        for (int j = k + 1; j < nn; ++j) env(k) = std::min(env(k), chord(v(i), v(j), i, j, k));
    return make_result(u, std::move(env), EnvelopeMethod::caratheodory);
  }

  // 2D: node positions in index space keep all containment tests exact.
  auto at = [&](Eigen::Index f) { return g.unflat(f); };
  auto cross = [](const NodeIndex& o, const NodeIndex& a, const NodeIndex& b) {
    return long(a[0] - o[0]) * long(b[1] - o[1]) - long(a[1] - o[1]) * long(b[0] - o[0]);
  };

  // Pairs: nodes lying on the open segment between two nodes.
  for (Eigen::Index a = 0; a < n; ++a) {
    const NodeIndex pa = at(a);
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const NodeIndex pb = at(b);
      const int dx = pb[0] - pa[0], dy = pb[1] - pa[1];
      const int steps = std::gcd(std::abs(dx), std::abs(dy));
      for (int t = 1; t < steps; ++t) {
        const NodeIndex q{pa[0] + t * dx / steps, pa[1] + t * dy / steps};
        const Eigen::Index f = g.flat(q);
        env(f) = std::min(env(f), chord(v(a), v(b), 0, steps, t));
      }
    }
  }

  // Nondegenerate triangles.
  for (Eigen::Index a = 0; a < n; ++a) {
    const NodeIndex pa = at(a);
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const NodeIndex pb = at(b);
      for (Eigen::Index c = b + 1; c < n; ++c) {
        const NodeIndex pc = at(c);
        const long det = cross(pa, pb, pc);
        if (det == 0) continue;
        const int i_lo = std::min({pa[0], pb[0], pc[0]}), i_hi = std::max({pa[0], pb[0], pc[0]});
        const int j_lo = std::min({pa[1], pb[1], pc[1]}), j_hi = std::max({pa[1], pb[1], pc[1]});
        for (int i = i_lo; i <= i_hi; ++i)
          for (int j = j_lo; j <= j_hi; ++j) {
            const NodeIndex x{i, j};
            long wa = cross(x, pb, pc), wb = cross(x, pc, pa), wc = cross(x, pa, pb);
            if (det < 0) {
              wa = -wa;
              wb = -wb;
              wc = -wc;
            }
            if (wa < 0 || wb < 0 || wc < 0) continue;
            const double ad = double(std::abs(det));
            const double val = (double(wa) * v(a) + double(wb) * v(b) + double(wc) * v(c)) / ad;
            const Eigen::Index f = g.flat(x);
            env(f) = std::min(env(f), val);
          }
      }
    }
  }
  return make_result(u, std::move(env), EnvelopeMethod::caratheodory);
}

EnvelopeResult reference_envelope(const ScalarField& u) {
  if (u.grid().dim() == 1) return lower_hull_envelope_1d(u);
  return biconjugate(u, 4 * std::max(u.grid().n(0), u.grid().n(1)));
}

double convexity_defect(const ScalarField& v) {
  const auto& g = v.grid();
  double worst = std::numeric_limits<double>::infinity();
  std::vector<Offset> lines{{1, 0}};
  if (g.dim() == 2) lines = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  for (Eigen::Index f = 0; f < g.size(); ++f) {
    const NodeIndex k = g.unflat(f);
    for (const auto& p : lines) {
      const NodeIndex lo{k[0] - p[0], k[1] - p[1]}, hi{k[0] + p[0], k[1] + p[1]};
      bool inside = true;
      for (int a = 0; a < g.dim(); ++a)
        inside = inside && std::min(lo[a], hi[a]) >= 0 && std::max(lo[a], hi[a]) < g.n(a);
      if (!inside) continue;
      worst = std::min(worst, v(lo) - 2 * v(k) + v(hi));
    }
  }
  return worst;
}

}  // namespace convexflow
