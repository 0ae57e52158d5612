#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace lclab {

/// Points and small matrices live in at most three dimensions, so they are
/// stack allocated.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

inline constexpr int kMaxDim = 3;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Axis-aligned box, one closed interval per axis.
struct Box {
  Point lo;
  Point hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const;
  bool contains(const Point& x, double eps = 0.0) const;
  Box intersect(const Box& other) const;
  bool empty() const;
};

/// The closed half-space { x : <normal, x> <= offset }.
struct Halfspace {
  Point normal;
  double offset = 0.0;

  double violation(const Point& x) const { return normal.dot(x) - offset; }
};

struct Ball {
  Point center;
  double radius = 0.0;
};

/// Support of a density: all of space, a box, an intersection of half-spaces,
/// or a Euclidean ball.
struct Support {
  enum class Kind { AllSpace, Box, Halfspaces, Ball };

  Kind kind = Kind::AllSpace;
  int dim = 1;
  std::vector<Halfspace> halfspaces;  // filled for Box and Halfspaces
  std::optional<Ball> ball;

  static Support all_space(int dim);
  static Support box(const lclab::Box& b);
  static Support polytope(int dim, std::vector<Halfspace> hs);
  static Support euclidean_ball(const Point& center, double radius);

  bool contains(const Point& x, double eps = 1e-12) const;
  bool bounded() const { return kind != Kind::AllSpace; }
};

Box make_box(std::initializer_list<std::pair<double, double>> axes);
std::vector<Halfspace> box_halfspaces(const Box& b);

}  // namespace lclab
