#include "lclab/isoperimetry.hpp"

#include "lclab/errors.hpp"
#include "lclab/moments.hpp"
#include "lclab/region.hpp"
#include "lclab/util.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lclab {

namespace {

constexpr int kCellOrder = 10;

/// Integral of g over [a, b] by one Gauss-Legendre panel.
template <class G>
double panel_integral(G&& g, double a, double b) {
  const GaussRule& r = gauss_legendre(kCellOrder);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t k = 0; k < r.nodes.size(); ++k) s += r.weights[k] * g(mid + half * r.nodes[k]);
  return half * s;
}

double ratio_of(double boundary, double mass_above, double total) {
  const double m = std::min(mass_above, total - mass_above) / total;
  if (!(m > 1e-14)) return kInf;
  return boundary / total / m;
}

/// Minimizes ratio(c) on [a, b] by golden-section search.
template <class F>
std::pair<double, double> golden_min(F&& f, double a, double b, int steps) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < steps; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
}

/// Half-space sweep along one direction; section(c) is the boundary measure.
template <class S>
std::pair<double, double> sweep(S&& section, double lo, double hi, const ProfileOptions& opts) {
  const int np = std::max(opts.panels, 4);
  const double w = (hi - lo) / np;
  std::vector<double> edge(np + 1), above(np + 1, 0.0), sec(np + 1);
  for (int k = 0; k <= np; ++k) {
    edge[k] = lo + w * k;
    sec[k] = section(edge[k]);
  }
  for (int k = np - 1; k >= 0; --k) above[k] = above[k + 1] + panel_integral(section, edge[k], edge[k + 1]);
  const double total = above[0];
  if (!(total > 0.0)) throw Error("no mass found in the half-space sweep window");
  int best = 0;
  double best_val = kInf;
  for (int k = 1; k < np; ++k) {
    const double r = ratio_of(sec[k], above[k], total);
    if (r < best_val) {
      best_val = r;
      best = k;
    }
  }
  if (best == 0) throw Error("half-space sweep found no admissible offset");
  // Refine on the two panels around the best edge.
  auto f = [&](double c) {
    const int k = std::clamp(static_cast<int>(std::floor((c - lo) / w)), 0, np - 1);
    const double mass = above[k + 1] + panel_integral(section, c, edge[k + 1]);
    return ratio_of(section(c), mass, total);
  };
  const auto [c, v] = golden_min(f, edge[best - 1], edge[best + 1], opts.refine_steps);
  return v < best_val ? std::pair{c, v} : std::pair{edge[best], best_val};
}

}  // namespace

IsoperimetricReport cheeger_1d(const Density& d, const Grid& grid) {
  if (d.dim() != 1) throw Error("cheeger_1d needs a one-dimensional density");
  const auto& xs = grid.axis_nodes(0);
  const int n = static_cast<int>(xs.size());
  auto rho = [&](double x) {
    const double v = d.density(Point::Constant(1, x));
    return std::isfinite(v) ? v : 0.0;
  };
  // Cell masses by Gauss-Legendre, accumulated from the right so tail masses
  // keep full relative precision.
  std::vector<double> above(n, 0.0), below(n, 0.0);
  for (int k = n - 2; k >= 0; --k) above[k] = above[k + 1] + panel_integral(rho, xs[k], xs[k + 1]);
  for (int k = 1; k < n; ++k) below[k] = below[k - 1] + panel_integral(rho, xs[k - 1], xs[k]);
  const double total = above[0];
  auto ratio_at = [&](double boundary, double lower_mass, double upper_mass) {
    const double m = std::min(lower_mass, upper_mass) / total;
    return m > 1e-14 ? boundary / m : kInf;
  };
  int best = -1;
  double best_val = kInf;
  for (int k = 1; k + 1 < n; ++k) {
    const double r = ratio_at(rho(xs[k]), below[k], above[k]);
    if (r < best_val) {
      best_val = r;
      best = k;
    }
  }
  if (best < 0) throw Error("no admissible half-line on " + grid.describe());
  auto f = [&](double a) {
    const int k = std::clamp(static_cast<int>(std::upper_bound(xs.begin(), xs.end(), a) - xs.begin()) - 1, 0, n - 2);
    const double part = panel_integral(rho, xs[k], a);
    return ratio_at(rho(a), below[k] + part, above[k] - part);
  };
  auto [a, v] = golden_min(f, xs[best - 1], xs[best + 1], 60);
  if (!(v < best_val)) {
    a = xs[best];
    v = best_val;
  }
  IsoperimetricReport rep;
  rep.infimum = v;
  rep.psi = 1.0 / v;
  rep.exact = true;
  rep.direction = Point::Constant(1, -1.0);
  rep.offset = -a;
  rep.minimizer = "half-line (-inf, " + fmt_num(a) + "]";
  return rep;
}

IsoperimetricReport halfspace_profile(const Density& d, const std::vector<Point>& directions, ProfileOptions opts) {
  if (directions.empty()) throw Error("half-space profile needs at least one direction");
  const Box box = d.effective_box();
  IsoperimetricReport rep;
  rep.infimum = kInf;
  for (const Point& dir : directions) {
    const Point u = dir / dir.norm();
    double lo = 0.0, hi = 0.0;
    for (int a = 0; a < d.dim(); ++a) {
      lo += std::min(u[a] * box.lo[a], u[a] * box.hi[a]);
      hi += std::max(u[a] * box.lo[a], u[a] * box.hi[a]);
    }
    auto section = [&](double c) { return section_integral(d, u, c); };
    const auto [c, v] = sweep(section, lo, hi, opts);
    if (v < rep.infimum) {
      rep.infimum = v;
      rep.direction = u;
      rep.offset = c;
    }
  }
  rep.psi = 1.0 / rep.infimum;
  rep.exact = false;
  rep.minimizer = "half-space <x, " + fmt_point(rep.direction) + "> >= " + fmt_num(rep.offset);
  return rep;
}

BuserReport buser_sandwich_check(const IsoperimetricReport& iso, const SpectralResult& sr, double tol) {
  BuserReport rep;
  rep.psi = iso.psi;
  rep.c_p = sr.c_p;
  rep.ratio = iso.psi * iso.psi / sr.c_p;
  rep.exact = iso.exact;
  rep.upper = std::numbers::pi;
  rep.holds = rep.ratio <= rep.upper + tol && (!rep.exact || rep.ratio >= rep.lower - tol);
  return rep;
}

LipschitzReport lipschitz_variance_ratio(const DiscreteOperator& op, const SpectralResult& sr,
                                         const std::vector<Point>& directions,
                                         const std::vector<std::pair<Point, double>>& halfspaces) {
  LipschitzReport rep;
  rep.c_p = sr.c_p;
  rep.worst_poincare_slack = kInf;
  const double z = op.total_mass();
  auto consider = [&](const Vec& phi, const std::string& name) {
    const double var = op.variance(phi);
    const double grad = op.energy(phi, phi) / z;
    rep.worst_poincare_slack = std::min(rep.worst_poincare_slack, sr.c_p * grad - var);
    if (var > rep.sup_variance) {
      rep.sup_variance = var;
      rep.witness = name;
    }
  };
  for (const Point& dir : directions) {
    const Point u = dir / dir.norm();
    consider(op.sample([&](const Point& x) { return u.dot(x); }), "linear " + fmt_point(u));
  }
  const double ls = op.density().length_scale();
  for (const auto& [dir, c] : halfspaces) {
    const Point u = dir / dir.norm();
    for (double r : {0.5, 1.0, 2.0}) {
      const double cap = r * ls;
      consider(op.sample([&](const Point& x) { return std::clamp(u.dot(x) - c, -cap, cap); }),
               "clipped distance " + fmt_point(u) + " width " + fmt_num(cap));
    }
  }
  rep.ratio = rep.sup_variance / sr.c_p;
  return rep;
}

}  // namespace lclab
