#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "convexflow/field.hpp"

namespace convexflow {

enum class EnvelopeMethod { hull1d, biconjugate, caratheodory };

std::string to_string(EnvelopeMethod m);

struct EnvelopeResult {
  ScalarField envelope;
  EnvelopeMethod method;
  double max_gap_to_input;  // max(input - envelope), >= 0 up to rounding
};

// Lower convex hull of {(x_i, u_i)} evaluated at every node (monotone chain, O(n)).
EnvelopeResult lower_hull_envelope_1d(const ScalarField& u);

// Discrete Legendre conjugate s -> max_i (s x_i - v_i), linear time in
// xs.size() + slopes.size(). Both xs and slopes must be strictly increasing.
Eigen::VectorXd legendre_conjugate_1d(const Eigen::Ref<const Eigen::VectorXd>& xs,
                                      const Eigen::Ref<const Eigen::VectorXd>& vals,
                                      const Eigen::Ref<const Eigen::VectorXd>& slopes);

// Uniform slope lattice covering [lo, hi] with about `count` points. When the
// interval straddles zero the lattice is anchored at zero, so slope 0 is always
// sampled (flat faces of the envelope are then reproduced exactly).
Eigen::VectorXd slope_lattice(double lo, double hi, int count);

// Envelope as the Legendre biconjugate, computed on per-axis slope lattices.
// In 2D each transform is factored into two passes of 1D conjugates.
EnvelopeResult biconjugate(const ScalarField& u, int slope_count);

// Carathéodory brute force over (d+1)-tuples of nodes. Test oracle; refuses
// grids with more than 2000 nodes.
EnvelopeResult caratheodory_bruteforce(const ScalarField& u);

// hull1d in 1D, biconjugate with 4n slopes per axis in 2D.
EnvelopeResult reference_envelope(const ScalarField& u);

// Most negative second difference of v along any grid line (axes and, in 2D,
// both diagonals) over consecutive node triples. Nonnegative for convex data.
double convexity_defect(const ScalarField& v);

}  // namespace convexflow
