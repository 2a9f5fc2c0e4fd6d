#pragma once

// Uniform box grids, nodal scalar fields and the finite-difference operators
// built on them. Everything here is templated on the scalar type; the rest of
// the library works with the double instantiations (Grid, ScalarField).

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "convexflow/error.hpp"
#include "convexflow/log.hpp"

namespace convexflow {

using NodeIndex = std::array<int, 2>;
using Offset = std::array<int, 2>;

template <typename Scalar>
using BasicPoint = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;

// Uniform grid on a box in one or two dimensions. In 1D the second axis is a
// dummy with a single node. Node (i, j) has flat index i * n(1) + j.
template <typename Scalar>
class BasicGrid {
 public:
  using Point = BasicPoint<Scalar>;

  BasicGrid() = default;

  BasicGrid(int dim, std::array<Scalar, 2> lower, std::array<Scalar, 2> upper, std::array<int, 2> n)
      : dim_(dim), lower_(lower), upper_(upper), n_(n) {
    if (dim != 1 && dim != 2) throw PreconditionError("grid dimension must be 1 or 2");
    if (dim == 1) {
      n_[1] = 1;
      lower_[1] = upper_[1] = Scalar(0);
    }
    for (int a = 0; a < dim; ++a) {
      if (n_[a] < 5) throw PreconditionError("grid needs at least 5 nodes per axis");
      if (!(upper_[a] > lower_[a])) throw PreconditionError("grid bounds must satisfy lower < upper");
      h_[a] = (upper_[a] - lower_[a]) / Scalar(n_[a] - 1);
    }
    if (dim == 2) {
      using std::abs;
      if (abs(h_[0] - h_[1]) > Scalar(1e-12) * h_[0] * Scalar(16))
        throw PreconditionError("2D grids need square cells (equal spacing on both axes)");
      h_[1] = h_[0];
    } else {
      h_[1] = h_[0];
    }
  }

  static BasicGrid line(Scalar lower, Scalar upper, int n) {
    return BasicGrid(1, {lower, Scalar(0)}, {upper, Scalar(0)}, {n, 1});
  }
  static BasicGrid square(Scalar lower, Scalar upper, int n) {
    return BasicGrid(2, {lower, lower}, {upper, upper}, {n, n});
  }

  int dim() const { return dim_; }
  Scalar lower(int axis) const { return lower_[axis]; }
  Scalar upper(int axis) const { return upper_[axis]; }
  int n(int axis) const { return n_[axis]; }
  Scalar h() const { return h_[0]; }
  Eigen::Index size() const { return Eigen::Index(n_[0]) * n_[1]; }

  Eigen::Index flat(const NodeIndex& k) const { return Eigen::Index(k[0]) * n_[1] + k[1]; }
  NodeIndex unflat(Eigen::Index i) const {
    return {static_cast<int>(i / n_[1]), static_cast<int>(i % n_[1])};
  }

  Scalar coord(int axis, int k) const { return lower_[axis] + Scalar(k) * h_[axis]; }

  Point point(const NodeIndex& k) const {
    Point p(dim_);
    for (int a = 0; a < dim_; ++a) p(a) = coord(a, k[a]);
    return p;
  }

  bool contains(const Point& x) const {
    for (int a = 0; a < dim_; ++a)
      if (!(x(a) >= lower_[a] && x(a) <= upper_[a])) return false;
    return true;
  }

  bool is_boundary(const NodeIndex& k) const {
    for (int a = 0; a < dim_; ++a)
      if (k[a] == 0 || k[a] == n_[a] - 1) return true;
    return false;
  }

  // Node at index-space distance >= width from every edge.
  bool in_interior_band(const NodeIndex& k, int width) const {
    for (int a = 0; a < dim_; ++a)
      if (k[a] < width || k[a] > n_[a] - 1 - width) return false;
    return true;
  }

  // Length of the box diagonal.
  Scalar diameter() const {
    Scalar s(0);
    for (int a = 0; a < dim_; ++a) s += (upper_[a] - lower_[a]) * (upper_[a] - lower_[a]);
    using std::sqrt;
    return sqrt(s);
  }

  bool operator==(const BasicGrid& o) const {
    return dim_ == o.dim_ && lower_ == o.lower_ && upper_ == o.upper_ && n_ == o.n_;
  }

 private:
  int dim_ = 1;
  std::array<Scalar, 2> lower_{};
  std::array<Scalar, 2> upper_{};
  std::array<int, 2> n_{1, 1};
  std::array<Scalar, 2> h_{};
};

// Immutable nodal values on a grid.
template <typename Scalar>
class BasicField {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BasicField() = default;

  BasicField(BasicGrid<Scalar> grid, Vector values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw PreconditionError("field size " + std::to_string(values_.size()) + " does not match grid size " +
                              std::to_string(grid_.size()));
    if (!values_.allFinite()) throw NumericalAbort("field contains non-finite values");
  }

  template <typename F>
  static BasicField sample(const BasicGrid<Scalar>& grid, F&& f) {
    Vector v(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) v(i) = f(grid.point(grid.unflat(i)));
    return BasicField(grid, std::move(v));
  }

  const BasicGrid<Scalar>& grid() const { return grid_; }
  const Vector& values() const { return values_; }
  Scalar operator()(const NodeIndex& k) const { return values_(grid_.flat(k)); }
  Scalar operator[](Eigen::Index i) const { return values_(i); }

  // max - min, floored so it can be used as a relative tolerance scale.
  Scalar scale() const {
    const Scalar s = values_.maxCoeff() - values_.minCoeff();
    return s > Scalar(0) ? s : Scalar(1);
  }

 private:
  BasicGrid<Scalar> grid_;
  Vector values_;
};

using Grid = BasicGrid<double>;
using ScalarField = BasicField<double>;
using Point = BasicPoint<double>;

// ---------------------------------------------------------------------------
// Direction sets

enum class DirectionPreset { axes, stencil8, stencil16 };

struct Direction {
  Offset p{};
  double length = 0;
};

// Integer stencil offsets, one representative per antipodal pair, kept in
// lexicographic order so that ties in extreme searches resolve to the
// lexicographically smallest offset.
class DirectionSet {
 public:
  DirectionSet() = default;

  DirectionSet(int dim, std::vector<Offset> offsets) : dim_(dim) {
    if (offsets.empty()) throw PreconditionError("direction set must be nonempty");
    for (auto& p : offsets) {
      if (dim == 1 && p[1] != 0) throw PreconditionError("1D offsets must have zero second component");
      if (p[0] == 0 && p[1] == 0) throw PreconditionError("zero offset in direction set");
      if (std::gcd(std::abs(p[0]), std::abs(p[1])) != 1)
        throw PreconditionError("direction offsets must have coprime components");
      if (p[0] < 0 || (p[0] == 0 && p[1] < 0)) p = {-p[0], -p[1]};
    }
    std::sort(offsets.begin(), offsets.end());
    for (std::size_t i = 0; i + 1 < offsets.size(); ++i)
      if (offsets[i] == offsets[i + 1]) throw PreconditionError("parallel offsets in direction set");
    for (int a = 0; a < dim; ++a) {
      const Offset axis = a == 0 ? Offset{1, 0} : Offset{0, 1};
      if (std::find(offsets.begin(), offsets.end(), axis) == offsets.end())
        throw PreconditionError("direction set must contain every axis offset");
    }
    for (const auto& p : offsets) dirs_.push_back({p, std::hypot(double(p[0]), double(p[1]))});
  }

  static DirectionSet preset(DirectionPreset which, int dim) {
    if (dim == 1) return DirectionSet(1, {{1, 0}});
    switch (which) {
      case DirectionPreset::axes:
        return DirectionSet(2, {{1, 0}, {0, 1}});
      case DirectionPreset::stencil8:
        return DirectionSet(2, {{1, 0}, {0, 1}, {1, 1}, {1, -1}});
      case DirectionPreset::stencil16:
        return DirectionSet(2, {{1, 0}, {0, 1}, {1, 1}, {1, -1}, {2, 1}, {1, 2}, {2, -1}, {1, -2}});
    }
    throw PreconditionError("unknown direction preset");
  }

  int dim() const { return dim_; }
  std::size_t size() const { return dirs_.size(); }
  const Direction& operator[](std::size_t i) const { return dirs_[i]; }
  auto begin() const { return dirs_.begin(); }
  auto end() const { return dirs_.end(); }

  // Index-space half-width of the stencil: nodes closer than this to an edge are frozen.
  int band_width() const {
    int w = 0;
    for (const auto& d : dirs_) w = std::max({w, std::abs(d.p[0]), std::abs(d.p[1])});
    return w;
  }

  double min_length() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& d : dirs_) m = std::min(m, d.length);
    return m;
  }

  bool operator==(const DirectionSet& o) const {
    if (dim_ != o.dim_ || dirs_.size() != o.dirs_.size()) return false;
    for (std::size_t i = 0; i < dirs_.size(); ++i)
      if (dirs_[i].p != o.dirs_[i].p) return false;
    return true;
  }

 private:
  int dim_ = 1;
  std::vector<Direction> dirs_;
};

inline std::string to_string(DirectionPreset p) {
  switch (p) {
    case DirectionPreset::axes: return "axes";
    case DirectionPreset::stencil8: return "stencil8";
    case DirectionPreset::stencil16: return "stencil16";
  }
  return "?";
}

inline DirectionPreset parse_direction_preset(const std::string& s) {
  if (s == "axes") return DirectionPreset::axes;
  if (s == "stencil8") return DirectionPreset::stencil8;
  if (s == "stencil16") return DirectionPreset::stencil16;
  throw PreconditionError("unknown direction set '" + s + "' (expected axes, stencil8 or stencil16)");
}

// ---------------------------------------------------------------------------
// Second differences and discrete extreme eigenvalues

namespace detail {

template <typename Scalar>
void require_stencil(const BasicGrid<Scalar>& g, const NodeIndex& k, const Offset& p) {
  for (int a = 0; a < g.dim(); ++a) {
    if (k[a] - std::abs(p[a]) < 0 || k[a] + std::abs(p[a]) > g.n(a) - 1)
      throw StencilOutOfRange("stencil offset (" + std::to_string(p[0]) + "," + std::to_string(p[1]) +
                              ") leaves the grid at node (" + std::to_string(k[0]) + "," +
                              std::to_string(k[1]) + ")");
  }
}

// No range check; callers guarantee the node is in the interior band.
template <typename Scalar>
Scalar second_difference_unchecked(const BasicGrid<Scalar>& g, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v,
                                   Eigen::Index i, const Direction& d) {
  const Eigen::Index shift = Eigen::Index(d.p[0]) * g.n(1) + d.p[1];
  const Scalar delta = g.h() * Scalar(d.length);
  return (v(i + shift) - Scalar(2) * v(i) + v(i - shift)) / (delta * delta);
}

}  // namespace detail

// (u(x + h p) - 2 u(x) + u(x - h p)) / (h |p|)^2
template <typename Scalar>
Scalar directional_second_difference(const BasicField<Scalar>& u, const NodeIndex& node, const Offset& p) {
  detail::require_stencil(u.grid(), node, p);
  const Direction d{p, std::hypot(double(p[0]), double(p[1]))};
  return detail::second_difference_unchecked(u.grid(), u.values(), u.grid().flat(node), d);
}

template <typename Scalar>
struct DirectionalExtreme {
  Scalar value;
  std::size_t direction;  // index into the DirectionSet
};

// Minimum second difference over dirs; ties go to the earliest (lexicographically smallest) offset.
template <typename Scalar>
DirectionalExtreme<Scalar> lambda_min_direction(const BasicField<Scalar>& u, const NodeIndex& node,
                                                const DirectionSet& dirs) {
  DirectionalExtreme<Scalar> best{std::numeric_limits<Scalar>::infinity(), 0};
  for (std::size_t q = 0; q < dirs.size(); ++q) {
    detail::require_stencil(u.grid(), node, dirs[q].p);
    const Scalar v = detail::second_difference_unchecked(u.grid(), u.values(), u.grid().flat(node), dirs[q]);
    if (v < best.value) best = {v, q};
  }
  return best;
}

template <typename Scalar>
Scalar discrete_lambda_min(const BasicField<Scalar>& u, const NodeIndex& node, const DirectionSet& dirs) {
  return lambda_min_direction(u, node, dirs).value;
}

template <typename Scalar>
Scalar discrete_lambda_max(const BasicField<Scalar>& u, const NodeIndex& node, const DirectionSet& dirs) {
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  for (const auto& d : dirs) {
    detail::require_stencil(u.grid(), node, d.p);
    best = std::max(best, detail::second_difference_unchecked(u.grid(), u.values(), u.grid().flat(node), d));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Gradients and interpolation

template <typename Scalar>
BasicPoint<Scalar> gradient_central(const BasicField<Scalar>& u, const NodeIndex& node) {
  const auto& g = u.grid();
  if (g.is_boundary(node)) throw StencilOutOfRange("central gradient requested at a boundary node");
  BasicPoint<Scalar> grad(g.dim());
  for (int a = 0; a < g.dim(); ++a) {
    NodeIndex lo = node, hi = node;
    --lo[a];
    ++hi[a];
    grad(a) = (u(hi) - u(lo)) / (Scalar(2) * g.h());
  }
  return grad;
}

// Central differences in the interior, second-order one-sided differences on edges.
template <typename Scalar>
BasicPoint<Scalar> nodal_gradient(const BasicField<Scalar>& u, const NodeIndex& node) {
  const auto& g = u.grid();
  BasicPoint<Scalar> grad(g.dim());
  for (int a = 0; a < g.dim(); ++a) {
    auto at = [&](int k) {
      NodeIndex m = node;
      m[a] = k;
      return u(m);
    };
    const int k = node[a];
    const int last = g.n(a) - 1;
    if (k == 0)
      grad(a) = (-Scalar(3) * at(0) + Scalar(4) * at(1) - at(2)) / (Scalar(2) * g.h());
    else if (k == last)
      grad(a) = (Scalar(3) * at(last) - Scalar(4) * at(last - 1) + at(last - 2)) / (Scalar(2) * g.h());
    else
      grad(a) = (at(k + 1) - at(k - 1)) / (Scalar(2) * g.h());
  }
  return grad;
}

enum class OutOfBox { error, clamp };

namespace detail {

template <typename Scalar>
struct Cell {
  NodeIndex base{0, 0};
  std::array<Scalar, 2> w{Scalar(0), Scalar(0)};
};

template <typename Scalar>
Cell<Scalar> locate(const BasicGrid<Scalar>& g, const BasicPoint<Scalar>& x, OutOfBox policy) {
  if (!g.contains(x)) {
    if (policy == OutOfBox::error) throw PreconditionError("point lies outside the grid box");
    warn("interpolation point outside the grid box; clamping");
  }
  Cell<Scalar> c;
  for (int a = 0; a < g.dim(); ++a) {
    using std::floor;
    Scalar s = (x(a) - g.lower(a)) / g.h();
    s = std::clamp(s, Scalar(0), Scalar(g.n(a) - 1));
    int k = static_cast<int>(floor(s));
    k = std::clamp(k, 0, g.n(a) - 2);
    c.base[a] = k;
    c.w[a] = s - Scalar(k);
  }
  return c;
}

}  // namespace detail

// Multilinear interpolation of nodal values.
template <typename Scalar>
Scalar interp_value(const BasicField<Scalar>& u, const BasicPoint<Scalar>& x, OutOfBox policy = OutOfBox::error) {
  const auto& g = u.grid();
  const auto c = detail::locate(g, x, policy);
  if (g.dim() == 1) {
    const NodeIndex k0 = c.base, k1{c.base[0] + 1, 0};
    return (Scalar(1) - c.w[0]) * u(k0) + c.w[0] * u(k1);
  }
  const int i = c.base[0], j = c.base[1];
  const Scalar wx = c.w[0], wy = c.w[1];
  return (Scalar(1) - wx) * ((Scalar(1) - wy) * u({i, j}) + wy * u({i, j + 1})) +
         wx * ((Scalar(1) - wy) * u({i + 1, j}) + wy * u({i + 1, j + 1}));
}

// Gradient interpolated componentwise (multilinear) from nodal differences.
template <typename Scalar>
BasicPoint<Scalar> interp_gradient(const BasicField<Scalar>& u, const BasicPoint<Scalar>& x,
                                   OutOfBox policy = OutOfBox::error) {
  const auto& g = u.grid();
  const auto c = detail::locate(g, x, policy);
  if (g.dim() == 1) {
    const NodeIndex k0 = c.base, k1{c.base[0] + 1, 0};
    return (Scalar(1) - c.w[0]) * nodal_gradient(u, k0) + c.w[0] * nodal_gradient(u, k1);
  }
  const int i = c.base[0], j = c.base[1];
  const Scalar wx = c.w[0], wy = c.w[1];
  return (Scalar(1) - wx) * ((Scalar(1) - wy) * nodal_gradient(u, {i, j}) + wy * nodal_gradient(u, {i, j + 1})) +
         wx * ((Scalar(1) - wy) * nodal_gradient(u, {i + 1, j}) + wy * nodal_gradient(u, {i + 1, j + 1}));
}

}  // namespace convexflow
