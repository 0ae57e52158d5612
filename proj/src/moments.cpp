#include "lclab/moments.hpp"

#include "lclab/errors.hpp"
#include "lclab/util.hpp"

#include <cmath>
#include <numbers>

namespace lclab {

namespace {

MomentReport finish(Point b, Mat c) {
  MomentReport r;
  c = 0.5 * (c + c.transpose());
  r.barycenter = std::move(b);
  r.covariance = std::move(c);
  r.op_norm = sym_max_eigenvalue(r.covariance);
  const int n = static_cast<int>(r.barycenter.size());
  r.is_isotropic = r.barycenter.norm() <= 1e-6 &&
                   (r.covariance - Mat::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-6;
  return r;
}

/// Rule for an (m)-dimensional integral with the density's length scale.
RegionRule rule_for(const Density& d, int m) {
  const double ls = d.length_scale();
  switch (m) {
    case 1:
      return RegionRule{16, 2, 0.5 * ls};
    case 2:
      return RegionRule{12, 2, ls};
    default:
      return RegionRule{8, 2, 1.5 * ls};
  }
}

}  // namespace

MomentReport moment_report(const Density& d, const Grid& grid) {
  check_mass_leakage(d, grid);
  const int n = d.dim();
  Point m = Point::Zero(n);
  Mat s = Mat::Zero(n, n);
  double z = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point x = grid.node(k);
    const double w = grid.weight(k) * d.density(x);
    if (!(w > 0.0)) continue;
    z += w;
    m += w * x;
    s += w * x * x.transpose();
  }
  m /= z;
  return finish(m, s / z - m * m.transpose());
}

MomentReport moment_report(const Density& d) {
  const int n = d.dim();
  const Region region = support_region(d);
  const RegionRule rule = default_region_rule(d);
  // Two passes: the second centres at the barycenter for a clean covariance.
  Point m = Point::Zero(n);
  double z = 0.0;
  for_each_region_node(region, rule, [&](const Point& x, double w) {
    const double v = w * d.density(x);
    z += v;
    m += v * x;
  });
  m /= z;
  Mat c = Mat::Zero(n, n);
  for_each_region_node(region, rule, [&](const Point& x, double w) {
    const Point y = x - m;
    c += w * d.density(x) * y * y.transpose();
  });
  return finish(m, c / z);
}

Density isotropize(const Density& d) {
  const MomentReport mr = moment_report(d);
  Eigen::SelfAdjointEigenSolver<Mat> es(mr.covariance);
  const auto& ev = es.eigenvalues();
  if (!(ev.minCoeff() > 1e-12 * std::max(1.0, ev.maxCoeff())))
    throw SingularCovariance("covariance is singular for " + d.describe());
  const Mat a = es.eigenvectors() * ev.cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  return affine_image(d, a, Point(-a * mr.barycenter));
}

double section_integral(const Density& d, const Point& normal, double offset) {
  const int n = d.dim();
  const Point u = normal / normal.norm();
  if (n == 1) {
    const double v = d.density(Point::Constant(1, offset / u[0]));
    return std::isfinite(v) ? v : 0.0;
  }
  const Mat basis = complement_basis(u);
  const Point base = offset * u;
  const Region full = support_region(d);
  Region slice{n - 1, {}, std::nullopt};
  for (const auto& h : full.halfspaces) {
    const Point nn = basis.transpose() * h.normal;
    const double c = h.offset - h.normal.dot(base);
    if (nn.norm() <= 1e-14 * h.normal.norm()) {
      if (c < 0.0) return 0.0;  // the whole hyperplane violates this constraint
      continue;
    }
    slice.halfspaces.push_back({nn, c});
  }
  if (full.ball) {
    const double dist = u.dot(full.ball->center) - offset;
    const double r2 = full.ball->radius * full.ball->radius - dist * dist;
    if (r2 <= 0.0) return 0.0;
    slice.ball = Ball{Point(basis.transpose() * (full.ball->center - base)), std::sqrt(r2)};
  }
  if (!slice.extent_first()) return 0.0;
  return integrate_region(slice, rule_for(d, n - 1), [&](const Point& y) {
    return d.density(Point(base + basis * y));
  });
}

double central_section(const Density& d, const Point& normal) {
  const Point b = moment_report(d).barycenter;
  const Point u = normal / normal.norm();
  return section_integral(d, u, u.dot(b));
}

double halfspace_mass(const Density& d, const Point& normal, double offset) {
  Region region = support_region(d);
  const Point u = normal / normal.norm();
  region.halfspaces.push_back({Point(-u), -offset});
  if (!region.extent_first()) return 0.0;
  return integrate_region(region, default_region_rule(d), [&](const Point& x) { return d.density(x); });
}

double kappa_functional(const Density& d) {
  const int n = d.dim();
  // t_{jk} = E X_1 X_j X_k
  Mat t = Mat::Zero(n, n);
  const Region region = support_region(d);
  for_each_region_node(region, default_region_rule(d), [&](const Point& x, double w) {
    t += w * d.density(x) * x[0] * x * x.transpose();
  });
  return t.norm();
}

std::vector<Point> direction_set(int dim, int count) {
  std::vector<Point> out;
  if (dim == 1) {
    out.push_back(Point::Constant(1, 1.0));
    out.push_back(Point::Constant(1, -1.0));
    return out;
  }
  if (dim == 2) {
    // Full circle so that both half-spaces of each line are covered.
    for (int k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * k / count;
      Point p(2);
      p << std::cos(a), std::sin(a);
      out.push_back(p);
    }
    return out;
  }
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    Point p(3);
    p << r * std::cos(golden * k), r * std::sin(golden * k), z;
    out.push_back(p);
  }
  return out;
}

}  // namespace lclab
