#pragma once

#include "lclab/density.hpp"
#include "lclab/quadrature.hpp"

#include <functional>

namespace lclab {

/// Smallest Hessian eigenvalue of psi over the grid nodes inside the support.
double uniform_convexity_estimate(const Density& d, const Grid& grid);

struct ShuffleReport {
  double discrepancy = 0.0;  // sup over evaluation points
  double scale = 0.0;        // sup of |left side|, for context
  int points = 0;
};

/// Compares (f gamma_t) * gamma_s with S_r[(f * gamma_p) gamma_q], where
/// p = st/(s+t), q = t^2/(s+t), r = t/(s+t) and S_r g(x) = r^n g(r x).
/// Both convolutions are computed by quadrature on the nodes of a 1D grid;
/// the comparison runs over every `stride`-th node. Throws GridTooSmall when
/// f gamma_t is not negligible at the grid boundary.
ShuffleReport gaussian_shuffle_check(const std::function<double(double)>& f, double s, double t, const Grid& grid,
                                     int stride = 20);

/// Both sides of the shuffle identity at a single point x.
std::pair<double, double> gaussian_shuffle_sides(const std::function<double(double)>& f, double s, double t,
                                                 const Grid& grid, double x);


}  // namespace lclab
