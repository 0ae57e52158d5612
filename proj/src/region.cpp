#include "lclab/region.hpp"

#include "lclab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace lclab {

namespace {

GaussRule build_gauss_legendre(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    r.nodes[n - 1 - i] = x;
    r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

constexpr double kRegionEps = 1e-12;

}  // namespace

const GaussRule& gauss_legendre(int order) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_gauss_legendre(order)).first;
  return it->second;
}

Region Region::slice_first(double u0) const {
  Region r;
  r.dim = dim - 1;
  bool empty = false;
  for (const auto& h : halfspaces) {
    Point n = h.normal.tail(dim - 1);
    const double off = h.offset - h.normal[0] * u0;
    if (n.norm() <= kRegionEps * (1.0 + std::abs(h.normal[0]))) {
      if (off < -kRegionEps * (1.0 + std::abs(h.offset))) empty = true;
      continue;
    }
    r.halfspaces.push_back({n, off});
  }
  if (ball) {
    const double d = u0 - ball->center[0];
    const double r2 = ball->radius * ball->radius - d * d;
    if (r2 <= 0.0) {
      empty = true;
    } else {
      r.ball = Ball{ball->center.tail(dim - 1), std::sqrt(r2)};
    }
  }
  if (empty) {
    // Contradictory pair marks the empty slice.
    Point e = Point::Zero(std::max(r.dim, 1));
    e[0] = 1.0;
    r.halfspaces = {{e, -1.0}, {-e, -1.0}};
    r.ball.reset();
  }
  return r;
}

std::vector<Point> Region::vertices(double eps) const {
  std::vector<Point> out;
  const int m = static_cast<int>(halfspaces.size());
  if (m < dim) return out;
  // Enumerate all dim-subsets of the half-spaces.
  std::vector<bool> sel(m, false);
  std::fill(sel.begin(), sel.begin() + dim, true);
  do {
    Mat a(dim, dim);
    Point b(dim);
    int row = 0;
    for (int i = 0; i < m; ++i) {
      if (!sel[i]) continue;
      a.row(row) = halfspaces[i].normal.transpose();
      b[row] = halfspaces[i].offset;
      ++row;
    }
    Eigen::FullPivLU<Mat> lu(a);
    if (lu.rank() < dim) continue;
    Point v = lu.solve(b);
    bool feasible = true;
    for (const auto& h : halfspaces) {
      const double scale = 1.0 + std::abs(h.offset) + h.normal.norm() * v.norm();
      if (h.violation(v) > eps * scale) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    bool dup = false;
    for (const auto& w : out)
      if ((w - v).norm() <= 1e-9 * (1.0 + v.norm())) dup = true;
    if (!dup) out.push_back(v);
  } while (std::prev_permutation(sel.begin(), sel.end()));
  return out;
}

std::optional<std::pair<double, double>> Region::extent_first() const {
  double lo = -kInf, hi = kInf;
  if (dim == 1) {
    for (const auto& h : halfspaces) {
      const double a = h.normal[0];
      if (a > 0) {
        hi = std::min(hi, h.offset / a);
      } else if (a < 0) {
        lo = std::max(lo, h.offset / a);
      } else if (h.offset < 0) {
        return std::nullopt;
      }
    }
  } else if (!halfspaces.empty()) {
    const auto vs = vertices();
    if (vs.empty()) {
      if (!ball) return std::nullopt;
    } else {
      lo = kInf;
      hi = -kInf;
      for (const auto& v : vs) {
        lo = std::min(lo, v[0]);
        hi = std::max(hi, v[0]);
      }
    }
  }
  if (ball) {
    lo = std::max(lo, ball->center[0] - ball->radius);
    hi = std::min(hi, ball->center[0] + ball->radius);
  }
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw Error("region integration requires a bounded region");
  if (!(hi > lo)) return std::nullopt;
  return std::make_pair(lo, hi);
}

std::vector<double> Region::breakpoints_first() const {
  const auto ext = extent_first();
  if (!ext) return {};
  std::vector<double> bp{ext->first, ext->second};
  if (dim > 1) {
    for (const auto& v : vertices()) bp.push_back(v[0]);
  }
  if (ball) {
    bp.push_back(ball->center[0] - ball->radius);
    bp.push_back(ball->center[0] + ball->radius);
  }
  std::vector<double> out;
  std::sort(bp.begin(), bp.end());
  const double tol = 1e-12 * (1.0 + std::abs(ext->second - ext->first));
  for (double x : bp) {
    if (x < ext->first - tol || x > ext->second + tol) continue;
    x = std::clamp(x, ext->first, ext->second);
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  }
  return out;
}

namespace {

void visit_interval(double a, double b, const RegionRule& rule, bool cosine_map,
                    const std::function<void(double, double)>& emit) {
  const auto& g = gauss_legendre(rule.order);
  int panels = rule.min_panels;
  if (std::isfinite(rule.max_panel_width))
    panels = std::max(panels, static_cast<int>(std::ceil((b - a) / rule.max_panel_width)));
  const double pi = std::numbers::pi;
  for (int p = 0; p < panels; ++p) {
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
      const double tau = (p + 0.5 * (g.nodes[k] + 1.0)) / panels;
      if (cosine_map) {
        const double s = a + 0.5 * (b - a) * (1.0 - std::cos(pi * tau));
        const double jac = 0.5 * (b - a) * pi * std::sin(pi * tau);
        emit(s, g.weights[k] * 0.5 / panels * jac);
      } else {
        emit(a + (b - a) * tau, g.weights[k] * 0.5 / panels * (b - a));
      }
    }
  }
}

void visit_rec(const Region& region, const RegionRule& rule, Point& u, int depth, double w0,
               const std::function<void(const Point&, double)>& visit) {
  const auto bp = region.breakpoints_first();
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    visit_interval(bp[i], bp[i + 1], rule, region.ball.has_value(), [&](double s, double w) {
      u[depth] = s;
      if (region.dim == 1) {
        visit(u, w0 * w);
      } else {
        visit_rec(region.slice_first(s), rule, u, depth + 1, w0 * w, visit);
      }
    });
  }
}

}  // namespace

void for_each_region_node(const Region& region, const RegionRule& rule,
                          const std::function<void(const Point&, double)>& visit) {
  Point u = Point::Zero(region.dim);
  visit_rec(region, rule, u, 0, 1.0, visit);
}

double integrate_region(const Region& region, const RegionRule& rule,
                        const std::function<double(const Point&)>& f) {
  double acc = 0.0;
  for_each_region_node(region, rule, [&](const Point& u, double w) { acc += w * f(u); });
  return acc;
}

Mat complement_basis(const Point& n) {
  const int dim = static_cast<int>(n.size());
  Mat e(dim, dim - 1);
  if (dim == 2) {
    e(0, 0) = -n[1];
    e(1, 0) = n[0];
  } else if (dim == 3) {
    Point a = Point::Zero(3);
    int k = 0;
    if (std::abs(n[1]) < std::abs(n[k])) k = 1;
    if (std::abs(n[2]) < std::abs(n[k])) k = 2;
    a[k] = 1.0;
    Point e1 = a - n.dot(a) * n;
    e1.normalize();
    Point e2(3);
    e2 << n[1] * e1[2] - n[2] * e1[1], n[2] * e1[0] - n[0] * e1[2], n[0] * e1[1] - n[1] * e1[0];
    e.col(0) = e1;
    e.col(1) = e2;
  }
  return e;
}

bool bounded_polytope(int dim, const std::vector<Halfspace>& hs) {
  // Recession cone { d : <n, d> <= 0 } clipped to the unit box; any nonzero
  // vertex is a direction of unboundedness.
  Region cone{dim, {}, std::nullopt};
  for (const auto& h : hs) cone.halfspaces.push_back({h.normal, 0.0});
  for (const auto& h : box_halfspaces(Box{Point::Constant(dim, -1.0), Point::Constant(dim, 1.0)}))
    cone.halfspaces.push_back(h);
  for (const auto& v : cone.vertices())
    if (v.norm() > 1e-9) return false;
  return true;
}

}  // namespace lclab
