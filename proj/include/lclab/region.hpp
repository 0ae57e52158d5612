#pragma once

#include "lclab/types.hpp"

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace lclab {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

/// Convex region in its own coordinates: half-space intersection, optionally
/// clipped by a ball. Must be bounded.
struct Region {
  int dim = 1;
  std::vector<Halfspace> halfspaces;
  std::optional<Ball> ball;

  /// Fixes the first coordinate and returns the (dim-1)-dimensional slice.
  Region slice_first(double u0) const;
  /// Extent along the first coordinate; nullopt if empty.
  std::optional<std::pair<double, double>> extent_first() const;
  /// Sorted coordinates along the first axis where the slice volume may have
  /// kinks (vertex projections and ball extremes).
  std::vector<double> breakpoints_first() const;
  /// Vertices of the polytope part (ball ignored), brute force, dim <= 3.
  std::vector<Point> vertices(double eps = 1e-10) const;
};

struct RegionRule {
  int order = 12;
  int min_panels = 4;
  double max_panel_width = kInf;
};

/// Calls visit(u, w) for each quadrature node of a nested Gauss-Legendre rule
/// over the region. Panels between breakpoints are plain Gauss-Legendre for
/// polytopes (exact on polynomial slice volumes); regions clipped by a ball
/// use a cosine substitution so square-root edges integrate accurately.
void for_each_region_node(const Region& region, const RegionRule& rule,
                          const std::function<void(const Point&, double)>& visit);

double integrate_region(const Region& region, const RegionRule& rule,
                        const std::function<double(const Point&)>& f);

/// True when the half-space intersection is bounded (its recession cone is
/// trivial). Emptiness is not checked.
bool bounded_polytope(int dim, const std::vector<Halfspace>& hs);

/// Orthonormal basis of the orthogonal complement of a unit vector, as the
/// columns of an n x (n-1) matrix.
Mat complement_basis(const Point& unit_normal);

}  // namespace lclab
