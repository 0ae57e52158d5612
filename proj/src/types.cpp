#include "lclab/types.hpp"

#include <cassert>

namespace lclab {

double Box::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= hi[i] - lo[i];
  return v;
}

bool Box::contains(const Point& x, double eps) const {
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lo[i] - eps || x[i] > hi[i] + eps) return false;
  return true;
}

Box Box::intersect(const Box& other) const {
  Box r{lo.cwiseMax(other.lo), hi.cwiseMin(other.hi)};
  return r;
}

bool Box::empty() const {
  for (int i = 0; i < dim(); ++i)
    if (!(hi[i] > lo[i])) return true;
  return false;
}

Box make_box(std::initializer_list<std::pair<double, double>> axes) {
  const int n = static_cast<int>(axes.size());
  Box b{Point(n), Point(n)};
  int i = 0;
  for (const auto& [lo, hi] : axes) {
    b.lo[i] = lo;
    b.hi[i] = hi;
    ++i;
  }
  return b;
}

std::vector<Halfspace> box_halfspaces(const Box& b) {
  std::vector<Halfspace> hs;
  const int n = b.dim();
  for (int i = 0; i < n; ++i) {
    Point e = Point::Zero(n);
    e[i] = 1.0;
    hs.push_back({e, b.hi[i]});
    hs.push_back({-e, -b.lo[i]});
  }
  return hs;
}

Support Support::all_space(int dim) {
  Support s;
  s.kind = Kind::AllSpace;
  s.dim = dim;
  return s;
}

Support Support::box(const lclab::Box& b) {
  Support s;
  s.kind = Kind::Box;
  s.dim = b.dim();
  s.halfspaces = box_halfspaces(b);
  return s;
}

Support Support::polytope(int dim, std::vector<Halfspace> hs) {
  Support s;
  s.kind = Kind::Halfspaces;
  s.dim = dim;
  s.halfspaces = std::move(hs);
  return s;
}

Support Support::euclidean_ball(const Point& center, double radius) {
  Support s;
  s.kind = Kind::Ball;
  s.dim = static_cast<int>(center.size());
  s.ball = Ball{center, radius};
  return s;
}

bool Support::contains(const Point& x, double eps) const {
  for (const auto& h : halfspaces)
    if (h.violation(x) > eps) return false;
  if (ball && (x - ball->center).norm() > ball->radius + eps) return false;
  return true;
}

}  // namespace lclab
