#pragma once

#include "lclab/density.hpp"
#include "lclab/quadrature.hpp"

#include <vector>

namespace lclab {

struct MomentReport {
  Point barycenter;
  Mat covariance;
  double op_norm = 0.0;
  bool is_isotropic = false;
};

/// Barycenter and covariance by summation on a lattice (mass leakage checked).
MomentReport moment_report(const Density& d, const Grid& grid);
/// Same, by support-clipped Gauss-Legendre quadrature.
MomentReport moment_report(const Density& d);

/// Affine image with barycenter 0 and covariance Id.
Density isotropize(const Density& d);

/// Integral of the density over the hyperplane <x, normal> = offset.
double section_integral(const Density& d, const Point& normal, double offset);
/// Section through the barycenter orthogonal to `normal`.
double central_section(const Density& d, const Point& normal);

/// Mass of { x : <x, normal> >= offset }.
double halfspace_mass(const Density& d, const Point& normal, double offset = 0.0);

/// Hilbert-Schmidt norm of the 3-tensor E X_1 X (x) X.
double kappa_functional(const Density& d);

/// Unit directions: evenly spaced angles on the circle in 2D, Fibonacci points
/// on the sphere in 3D, +-1 in 1D.
std::vector<Point> direction_set(int dim, int count);

/// Hensley-type interval for central sections of isotropic densities.
inline constexpr double kSectionLower = 0.28867513459481288225;  // 1/sqrt(12)
inline constexpr double kSectionUpper = 0.70710678118654752440;  // 1/sqrt(2)
/// Grunbaum interval for half-spaces through the barycenter.
inline constexpr double kGrunbaumLower = 0.36787944117144232160;  // 1/e
inline constexpr double kGrunbaumUpper = 0.63212055882855767840;  // 1 - 1/e

}  // namespace lclab
