#pragma once

#include "lclab/density.hpp"
#include "lclab/quadrature.hpp"
#include "lclab/spectral.hpp"

#include <string>
#include <vector>

namespace lclab {

/// Isoperimetric quantities. `infimum` is the smallest boundary-measure to
/// mass ratio found over the competitor class and psi = 1 / infimum.
struct IsoperimetricReport {
  double infimum = 0.0;
  double psi = 0.0;
  /// True when the competitor class is all half-lines of a 1D measure, so psi
  /// is the isoperimetric constant itself. Otherwise psi is a lower bound.
  bool exact = false;
  Point direction;       // unit normal of the minimizing half-space
  double offset = 0.0;   // minimizer is { <x, direction> >= offset }
  std::string minimizer;
};

/// Scan over half-lines (-inf, a] at the lattice nodes, refined to round-off
/// around the best node. Half-lines are the minimizers for 1D log-concave
/// measures, which the scan takes as given.
IsoperimetricReport cheeger_1d(const Density& d, const Grid& grid);

struct ProfileOptions {
  int panels = 64;       // offset panels per direction
  int refine_steps = 60; // golden-section steps around the best panel edge
};

/// Infimum of section(c) / min(mass, 1 - mass) over half-spaces
/// { <x, u> >= c } for the given directions. Sections come from hyperplane
/// quadrature and masses from integrating sections over the offset.
IsoperimetricReport halfspace_profile(const Density& d, const std::vector<Point>& directions,
                                      ProfileOptions opts = {});

struct BuserReport {
  double psi = 0.0;
  double c_p = 0.0;
  double ratio = 0.0;    // psi^2 / C_P
  bool exact = false;    // psi is the 1D constant rather than a half-space bound
  double lower = 0.25;
  double upper = 0.0;    // pi
  bool holds = false;    // full sandwich in 1D, ratio <= pi otherwise
};

/// 1D: both sides of 1/4 <= psi^2 / C_P <= pi. nD: only the half-space value
/// is available and it is a lower bound on psi, so only ratio <= pi is tested.
BuserReport buser_sandwich_check(const IsoperimetricReport& iso, const SpectralResult& sr, double tol = 1e-3);

struct LipschitzReport {
  double sup_variance = 0.0;  // over the witness family
  std::string witness;
  double c_p = 0.0;
  double ratio = 0.0;         // lambda * sup_variance, in (0, 1]
  double worst_poincare_slack = 0.0;  // min over witnesses of C_P E|grad phi|^2 - Var(phi)
};

/// Variance of 1-Lipschitz witnesses on the lattice: linear functions in the
/// given directions and clipped linear functions across each listed half-space.
LipschitzReport lipschitz_variance_ratio(const DiscreteOperator& op, const SpectralResult& sr,
                                         const std::vector<Point>& directions,
                                         const std::vector<std::pair<Point, double>>& halfspaces = {});

}  // namespace lclab
