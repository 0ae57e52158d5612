#include "lclab/slicing.hpp"

#include "lclab/errors.hpp"
#include "lclab/moments.hpp"
#include "lclab/region.hpp"
#include "lclab/util.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace lclab {

namespace {

constexpr double kGeomEps = 1e-12;

double vertex_scale(const std::vector<Point>& v) {
  double s = 1.0;
  for (const auto& p : v) s = std::max(s, p.cwiseAbs().maxCoeff());
  return s;
}

std::vector<Halfspace> unit_halfspaces(std::vector<Halfspace> hs) {
  for (auto& h : hs) {
    const double nn = h.normal.norm();
    if (!(nn > 0.0)) throw Error("half-space with a zero normal");
    h.normal /= nn;
    h.offset /= nn;
  }
  return hs;
}

/// Shoelace area of a planar polygon given in order.
double polygon_area(const std::vector<Eigen::Vector2d>& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& q = p[i];
    const auto& r = p[(i + 1) % p.size()];
    a += q.x() * r.y() - q.y() * r.x();
  }
  return 0.5 * std::abs(a);
}

/// Sutherland-Hodgman clip of a convex polygon by n . y <= b.
std::vector<Eigen::Vector2d> clip(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& n, double b) {
  std::vector<Eigen::Vector2d> out;
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % m];
    const double fp = n.dot(p) - b, fq = n.dot(q) - b;
    if (fp <= 0.0) out.push_back(p);
    if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) out.push_back(p + (fp / (fp - fq)) * (q - p));
  }
  return out;
}

/// Volume of a polytope by pyramids from the vertex average over each facet.
double polytope_volume(int dim, const std::vector<Halfspace>& hs, const std::vector<Point>& verts) {
  Point c = Point::Zero(dim);
  for (const auto& v : verts) c += v;
  c /= static_cast<double>(verts.size());
  const double tol = 1e-9 * vertex_scale(verts);
  double vol = 0.0;
  for (const auto& h : hs) {
    std::vector<Point> face;
    for (const auto& v : verts)
      if (std::abs(h.violation(v)) <= tol) face.push_back(v);
    const double dist = h.offset - h.normal.dot(c);
    double measure = 0.0;
    if (dim == 1) {
      measure = face.empty() ? 0.0 : 1.0;
    } else if (dim == 2) {
      for (std::size_t i = 0; i < face.size(); ++i)
        for (std::size_t j = i + 1; j < face.size(); ++j) measure = std::max(measure, (face[i] - face[j]).norm());
    } else if (face.size() >= 3) {
      const Mat b = complement_basis(h.normal);
      Point fc = Point::Zero(3);
      for (const auto& v : face) fc += v;
      fc /= static_cast<double>(face.size());
      std::vector<std::pair<double, Eigen::Vector2d>> pts;
      for (const auto& v : face) {
        const Point y = b.transpose() * (v - fc);
        pts.push_back({std::atan2(y[1], y[0]), Eigen::Vector2d(y[0], y[1])});
      }
      std::sort(pts.begin(), pts.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
      std::vector<Eigen::Vector2d> poly;
      for (const auto& p : pts) poly.push_back(p.second);
      measure = polygon_area(poly);
    }
    vol += measure * dist / dim;
  }
  return vol;
}

ConvexBody finish_polytope(ConvexBody k) {
  k.halfspaces = unit_halfspaces(std::move(k.halfspaces));
  if (k.vertices.empty()) k.vertices = Region{k.dim, k.halfspaces, std::nullopt}.vertices();
  if (static_cast<int>(k.vertices.size()) < k.dim + 1) throw Error("polytope has no interior: " + k.describe());
  // Cross-check the vertex list against the half-spaces.
  const double tol = 1e-9 * vertex_scale(k.vertices);
  for (const auto& v : k.vertices)
    for (const auto& h : k.halfspaces)
      if (h.violation(v) > tol) throw Error("vertex " + fmt_point(v) + " violates a half-space of " + k.describe());
  k.volume = polytope_volume(k.dim, k.halfspaces, k.vertices);
  if (!(k.volume > kGeomEps)) throw Error("polytope has no interior: " + k.describe());
  return k;
}

}  // namespace

Point ConvexBody::centroid() const {
  if (kind == Kind::Ball) return center;
  if (kind == Kind::Simplex || kind == Kind::Box) {
    Point c = Point::Zero(dim);
    for (const auto& v : vertices) c += v;
    return c / static_cast<double>(vertices.size());
  }
  return moment_report(uniform_polytope(dim, halfspaces)).barycenter;
}

std::pair<double, double> ConvexBody::support_interval(const Point& u) const {
  if (kind == Kind::Ball) {
    const double c = u.dot(center);
    return {c - radius, c + radius};
  }
  double lo = kInf, hi = -kInf;
  for (const auto& v : vertices) {
    lo = std::min(lo, u.dot(v));
    hi = std::max(hi, u.dot(v));
  }
  return {lo, hi};
}

std::string ConvexBody::describe() const {
  switch (kind) {
    case Kind::Ball:
      return "ball(center=" + fmt_point(center) + ", r=" + fmt_num(radius) + ")";
    case Kind::Box: {
      Point lo = vertices.front(), hi = vertices.front();
      for (const auto& v : vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
      }
      return "box(" + fmt_point(lo) + ", " + fmt_point(hi) + ")";
    }
    case Kind::Simplex:
      return "simplex(" + std::to_string(vertices.size()) + " vertices in R^" + std::to_string(dim) + ")";
    case Kind::HPolytope:
      return "hpolytope(" + std::to_string(halfspaces.size()) + " half-spaces in R^" + std::to_string(dim) + ")";
  }
  return "body";
}

ConvexBody make_ball_body(const Point& center, double radius) {
  if (!(radius > 0.0)) throw Error("ball radius must be positive");
  const int n = static_cast<int>(center.size());
  if (n < 1 || n > 3) throw Error("bodies live in dimension 1 to 3");
  ConvexBody k;
  k.kind = ConvexBody::Kind::Ball;
  k.dim = n;
  k.center = center;
  k.radius = radius;
  const double pi = std::numbers::pi;
  k.volume = n == 1 ? 2 * radius : (n == 2 ? pi * radius * radius : 4.0 / 3.0 * pi * radius * radius * radius);
  return k;
}

ConvexBody make_box_body(const Box& box) {
  const int n = box.dim();
  if (n < 1 || n > 3) throw Error("bodies live in dimension 1 to 3");
  ConvexBody k;
  k.kind = ConvexBody::Kind::Box;
  k.dim = n;
  k.halfspaces = box_halfspaces(box);
  for (int mask = 0; mask < (1 << n); ++mask) {
    Point v(n);
    for (int a = 0; a < n; ++a) v[a] = (mask >> a) & 1 ? box.hi[a] : box.lo[a];
    k.vertices.push_back(v);
  }
  k = finish_polytope(std::move(k));
  k.volume = box.volume();
  return k;
}

ConvexBody make_simplex_body(const std::vector<Point>& vertices) {
  const int n = vertices.empty() ? 0 : static_cast<int>(vertices.front().size());
  if (n < 1 || n > 3 || static_cast<int>(vertices.size()) != n + 1)
    throw Error("a simplex in R^n needs n + 1 vertices, n <= 3");
  ConvexBody k;
  k.kind = ConvexBody::Kind::Simplex;
  k.dim = n;
  k.vertices = vertices;
  Mat e(n, n);
  for (int i = 0; i < n; ++i) e.col(i) = vertices[i + 1] - vertices[0];
  double fact = 1.0;
  for (int i = 2; i <= n; ++i) fact *= i;
  const double vol = std::abs(e.determinant()) / fact;
  if (!(vol > kGeomEps)) throw Error("degenerate simplex");
  for (int i = 0; i <= n; ++i) {
    // Facet opposite vertex i.
    std::vector<Point> f;
    for (int j = 0; j <= n; ++j)
      if (j != i) f.push_back(vertices[j]);
    Point normal(n);
    if (n == 1) {
      normal[0] = 1.0;
    } else {
      Mat d(n - 1, n);
      for (int r = 0; r + 1 < n; ++r) d.row(r) = (f[r + 1] - f[0]).transpose();
      Eigen::FullPivLU<Mat> lu(d);
      normal = lu.kernel().col(0);
    }
    double off = normal.dot(f[0]);
    if (normal.dot(vertices[i]) > off) {
      normal = -normal;
      off = -off;
    }
    k.halfspaces.push_back({normal, off});
  }
  k = finish_polytope(std::move(k));
  k.volume = vol;
  return k;
}

ConvexBody make_hpolytope_body(int dim, std::vector<Halfspace> halfspaces) {
  if (dim < 1 || dim > 3) throw Error("bodies live in dimension 1 to 3");
  if (!bounded_polytope(dim, halfspaces)) throw Error("half-space intersection is unbounded");
  ConvexBody k;
  k.kind = ConvexBody::Kind::HPolytope;
  k.dim = dim;
  k.halfspaces = std::move(halfspaces);
  return finish_polytope(std::move(k));
}

ConvexBody regular_simplex_body(int dim) {
  std::vector<Point> v;
  if (dim == 2) {
    for (int i = 0; i < 3; ++i) {
      const double a = 2 * std::numbers::pi * i / 3 + std::numbers::pi / 2;
      Point p(2);
      p << std::cos(a), std::sin(a);
      v.push_back(p);
    }
  } else if (dim == 3) {
    const double s = 1.0 / std::sqrt(3.0);
    for (const auto& [x, y, z] : {std::tuple{1, 1, 1}, std::tuple{1, -1, -1}, std::tuple{-1, 1, -1},
                                  std::tuple{-1, -1, 1}}) {
      Point p(3);
      p << s * x, s * y, s * z;
      v.push_back(p);
    }
  } else {
    throw Error("regular simplex needs dimension 2 or 3");
  }
  return normalize_volume(make_simplex_body(v));
}

ConvexBody normalize_volume(const ConvexBody& k) {
  const double f = std::pow(1.0 / k.volume, 1.0 / k.dim);
  const Point c = k.centroid();
  if (k.kind == ConvexBody::Kind::Ball) return make_ball_body(c, k.radius * f);
  std::vector<Point> v;
  for (const auto& p : k.vertices) v.push_back(c + f * (p - c));
  switch (k.kind) {
    case ConvexBody::Kind::Box: {
      Point lo = v.front(), hi = v.front();
      for (const auto& p : v) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
      return make_box_body(Box{lo, hi});
    }
    case ConvexBody::Kind::Simplex:
      return make_simplex_body(v);
    default: {
      std::vector<Halfspace> hs;
      for (const auto& h : k.halfspaces) hs.push_back({h.normal, h.normal.dot(c) + f * (h.offset - h.normal.dot(c))});
      return make_hpolytope_body(k.dim, hs);
    }
  }
}

double section_volume(const ConvexBody& k, const Point& normal, double offset) {
  const double nn = normal.norm();
  if (std::abs(nn - 1.0) > 1e-12) throw Error("section normal must be a unit vector");
  const Point& u = normal;
  const int n = k.dim;
  if (k.kind == ConvexBody::Kind::Ball) {
    const double d = offset - u.dot(k.center);
    const double r2 = k.radius * k.radius - d * d;
    if (r2 < 0.0) return 0.0;
    if (n == 1) return 1.0;
    return n == 2 ? 2.0 * std::sqrt(r2) : std::numbers::pi * r2;
  }
  const Point base = offset * u;
  if (n == 1) {
    for (const auto& h : k.halfspaces)
      if (h.violation(base) > kGeomEps) return 0.0;
    return 1.0;
  }
  if (n == 2) {
    Point v(2);
    v << -u[1], u[0];
    double lo = -kInf, hi = kInf;
    for (const auto& h : k.halfspaces) {
      const double a = h.normal.dot(v);
      const double b = h.offset - h.normal.dot(base);
      if (std::abs(a) <= kGeomEps) {
        if (b < -kGeomEps) return 0.0;
        continue;
      }
      if (a > 0) {
        hi = std::min(hi, b / a);
      } else {
        lo = std::max(lo, b / a);
      }
    }
    return std::max(0.0, hi - lo);
  }
  const Mat b = complement_basis(u);
  double r = 1.0;
  for (const auto& v : k.vertices) r = std::max(r, (v - base).norm());
  r *= 2.0;
  std::vector<Eigen::Vector2d> poly{{-r, -r}, {r, -r}, {r, r}, {-r, r}};
  for (const auto& h : k.halfspaces) {
    const Point nn2 = b.transpose() * h.normal;
    const double c = h.offset - h.normal.dot(base);
    if (nn2.norm() <= kGeomEps) {
      if (c < -kGeomEps) return 0.0;
      continue;
    }
    poly = clip(poly, Eigen::Vector2d(nn2[0], nn2[1]), c);
    if (poly.size() < 3) return 0.0;
  }
  return polygon_area(poly);
}

double section_volume(const ConvexBody& k, const SectionQuery& q) { return section_volume(k, q.normal, q.offset); }

namespace {

Point direction_from_angles(int dim, const std::vector<double>& ang) {
  Point u(dim);
  if (dim == 1) {
    u[0] = 1.0;
  } else if (dim == 2) {
    u << std::cos(ang[0]), std::sin(ang[0]);
  } else {
    u << std::sin(ang[0]) * std::cos(ang[1]), std::sin(ang[0]) * std::sin(ang[1]), std::cos(ang[0]);
  }
  return u;
}

std::vector<double> angles_of(const Point& u) {
  if (u.size() == 2) return {std::atan2(u[1], u[0])};
  if (u.size() == 3) return {std::acos(std::clamp(u[2], -1.0, 1.0)), std::atan2(u[1], u[0])};
  return {};
}

}  // namespace

BestSection best_section(const ConvexBody& k, int directions, int offsets) {
  if (std::abs(k.volume - 1.0) > 1e-9) throw Error("best_section expects a volume-one body; normalize first");
  BestSection best;
  best.value = -1.0;
  auto eval = [&](const Point& u, double o) {
    ++best.evaluations;
    return section_volume(k, u, o);
  };
  // Largest section along u: golden section on the offset, valid because
  // V^{1/(n-1)} is concave on the support interval.
  auto best_offset = [&](const Point& u, double& o_best) {
    auto [lo, hi] = k.support_interval(u);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = eval(u, c), fd = eval(u, d);
    for (int it = 0; it < 80 && b - a > 1e-13 * (1.0 + std::abs(a)); ++it) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = eval(u, c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = eval(u, d);
      }
    }
    o_best = fc >= fd ? c : d;
    return std::max(fc, fd);
  };
  const auto dirs = direction_set(k.dim, std::max(directions, 1));
  for (const auto& u : dirs) {
    auto [lo, hi] = k.support_interval(u);
    for (int j = 0; j < offsets; ++j) {
      const double o = lo + (hi - lo) * (j + 0.5) / offsets;
      const double v = eval(u, o);
      if (v > best.value) {
        best.value = v;
        best.query = {u, o};
      }
    }
  }
  if (k.dim == 1) return best;
  // Pattern search over the direction angles with the offset optimized inside.
  std::vector<double> ang = angles_of(best.query.normal);
  double o = best.query.offset;
  double val = best_offset(best.query.normal, o);
  double step = 2.0 * std::numbers::pi / std::max(directions, 4);
  while (step > 1e-9) {
    bool improved = false;
    for (std::size_t i = 0; i < ang.size(); ++i) {
      for (double s : {step, -step}) {
        auto trial = ang;
        trial[i] += s;
        const Point u = direction_from_angles(k.dim, trial);
        double ot = 0.0;
        const double v = best_offset(u, ot);
        if (v > val + 1e-15) {
          val = v;
          ang = trial;
          o = ot;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  if (val > best.value) {
    best.value = val;
    best.query = {direction_from_angles(k.dim, ang), o};
  }
  return best;
}

Density body_to_density(const ConvexBody& k) {
  switch (k.kind) {
    case ConvexBody::Kind::Ball:
      return uniform_ball(k.center, k.radius);
    case ConvexBody::Kind::Box: {
      Point lo = k.vertices.front(), hi = k.vertices.front();
      for (const auto& v : k.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
      }
      return uniform_box(Box{lo, hi});
    }
    default:
      return uniform_polytope(k.dim, k.halfspaces);
  }
}

double fubini_volume(const ConvexBody& k, const Point& normal) {
  const GaussRule& r = gauss_legendre(20);
  auto [lo, hi] = k.support_interval(normal);
  double total = 0.0;
  if (k.kind == ConvexBody::Kind::Ball) {
    // o = c + R sin(phi) removes the square-root endpoints.
    const double c = normal.dot(k.center);
    const int panels = 4;
    const double pi = std::numbers::pi;
    for (int p = 0; p < panels; ++p) {
      const double a = -pi / 2 + pi * p / panels, b = a + pi / panels;
      for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        const double phi = 0.5 * (a + b) + 0.5 * (b - a) * r.nodes[i];
        total += 0.5 * (b - a) * r.weights[i] * section_volume(k, normal, c + k.radius * std::sin(phi)) * k.radius *
                 std::cos(phi);
      }
    }
    return total;
  }
  std::vector<double> cuts;
  for (const auto& v : k.vertices) cuts.push_back(normal.dot(v));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return std::abs(a - b) <= 1e-13; }),
             cuts.end());
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double a = cuts[p], b = cuts[p + 1];
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
      total += 0.5 * (b - a) * r.weights[i] * section_volume(k, normal, 0.5 * (a + b) + 0.5 * (b - a) * r.nodes[i]);
  }
  (void)lo;
  (void)hi;
  return total;
}

double brunn_minkowski_defect(const ConvexBody& k, const Point& normal, int samples) {
  if (k.dim < 2) return 0.0;
  auto [lo, hi] = k.support_interval(normal);
  const double h = (hi - lo) / (samples + 1);
  const double e = 1.0 / (k.dim - 1);
  auto g = [&](double o) { return std::pow(section_volume(k, normal, o), e); };
  double worst = -kInf;
  for (int i = 1; i < samples; ++i) {
    const double o = lo + h * i;
    worst = std::max(worst, g(o - h) + g(o + h) - 2.0 * g(o));
  }
  return worst;
}

double section_lipschitz_estimate(const ConvexBody& k, const Point& normal, int samples) {
  auto [lo, hi] = k.support_interval(normal);
  const double h = (hi - lo) / samples;
  double worst = 0.0;
  for (int i = 1; i + 1 < samples; ++i) {
    const double o = lo + h * i;
    worst = std::max(worst, std::abs(section_volume(k, normal, o + h) - section_volume(k, normal, o)) / h);
  }
  return worst;
}

void write_section_sweep_csv(const std::string& path, const ConvexBody& k, const Point& normal, int count) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  auto [lo, hi] = k.support_interval(normal);
  out << "offset,section\n";
  for (int i = 0; i < count; ++i) {
    const double o = count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (count - 1);
    out << fmt_num(o) << "," << fmt_num(section_volume(k, normal, o)) << "\n";
  }
}

}  // namespace lclab
