#pragma once

#include "lclab/density.hpp"
#include "lclab/types.hpp"

#include <string>
#include <vector>

namespace lclab {

/// Convex body in dimension 2 or 3 (dimension 1 is accepted for intervals).
/// Polytopes carry both half-spaces and vertices.
struct ConvexBody {
  enum class Kind { Ball, Box, Simplex, HPolytope };

  Kind kind = Kind::Box;
  int dim = 2;
  Point center;   // ball centre
  double radius = 0.0;
  std::vector<Halfspace> halfspaces;  // polytopes, outward unit normals
  std::vector<Point> vertices;        // polytopes
  double volume = 0.0;

  bool is_polytope() const { return kind != Kind::Ball; }
  Point centroid() const;
  /// Interval of <x, u> over the body, u a unit vector.
  std::pair<double, double> support_interval(const Point& u) const;
  std::string describe() const;
};

ConvexBody make_ball_body(const Point& center, double radius);
ConvexBody make_box_body(const Box& box);
ConvexBody make_simplex_body(const std::vector<Point>& vertices);
/// Throws when the intersection is unbounded, empty or flat.
ConvexBody make_hpolytope_body(int dim, std::vector<Halfspace> halfspaces);
/// Regular simplex of volume one centred at the origin (dim 2 or 3).
ConvexBody regular_simplex_body(int dim);

/// Dilation about the centroid to volume one.
ConvexBody normalize_volume(const ConvexBody& k);

struct SectionQuery {
  Point normal;  // unit
  double offset = 0.0;
};

/// (n-1)-volume of K cut by <x, normal> = offset: chord length in the plane,
/// clipped polygon or disc area in space, 0 or 1 on a line.
double section_volume(const ConvexBody& k, const SectionQuery& q);
double section_volume(const ConvexBody& k, const Point& normal, double offset);

struct BestSection {
  SectionQuery query;
  double value = 0.0;
  int evaluations = 0;
};

/// Grid search over `directions` directions and `offsets` interior offsets,
/// then local refinement of direction and offset. The value is a lower bound
/// on the largest section. Requires a volume-one body.
BestSection best_section(const ConvexBody& k, int directions, int offsets);

/// Uniform density on the body.
Density body_to_density(const ConvexBody& k);

/// Integral of the section volume over all offsets along `normal`, with
/// panels split at vertex projections.
double fubini_volume(const ConvexBody& k, const Point& normal);

/// Largest second difference of o -> V(o)^{1/(n-1)} over `samples` interior
/// offsets; concavity means it is not positive.
double brunn_minkowski_defect(const ConvexBody& k, const Point& normal, int samples = 200);

/// Largest |V(o + h) - V(o)| / h over `samples` offsets, for continuity checks.
double section_lipschitz_estimate(const ConvexBody& k, const Point& normal, int samples = 400);

/// Writes offset,section rows for `count` evenly spaced offsets.
void write_section_sweep_csv(const std::string& path, const ConvexBody& k, const Point& normal, int count);

}  // namespace lclab
