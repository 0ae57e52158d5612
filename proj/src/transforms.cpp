#include "lclab/transforms.hpp"

#include "lclab/errors.hpp"
#include "lclab/util.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lclab {

double uniform_convexity_estimate(const Density& d, const Grid& grid) {
  double m = kInf;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point x = grid.node(k);
    if (!d.support().contains(x, 0.0)) continue;
    m = std::min(m, sym_min_eigenvalue(d.hess_psi(x)));
  }
  return m;
}

namespace {

double gauss_kernel(double x, double v) {
  return std::exp(-x * x / (2.0 * v)) / std::sqrt(2.0 * std::numbers::pi * v);
}

}  // namespace

namespace {

struct ShuffleSetup {
  double p, q, r;
  const std::vector<double>& ys;
  const std::vector<double>& ws;
  std::vector<double> fy, fgt;

  ShuffleSetup(const std::function<double(double)>& f, double s, double t, const Grid& grid)
      : p(s * t / (s + t)), q(t * t / (s + t)), r(t / (s + t)), ys(grid.axis_nodes(0)), ws(grid.axis_weights(0)) {
    if (grid.dim() != 1) throw Error("gaussian shuffle runs on 1D grids");
    if (!(s > 0.0 && t > 0.0)) throw Error("gaussian shuffle: s and t must be positive");
    const std::size_t n = ys.size();
    fy.resize(n);
    fgt.resize(n);
    double gmax = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      fy[k] = f(ys[k]);
      fgt[k] = fy[k] * gauss_kernel(ys[k], t);
      gmax = std::max(gmax, std::abs(fgt[k]));
    }
    if (std::max(std::abs(fgt.front()), std::abs(fgt.back())) > 1e-10 * gmax)
      throw GridTooSmall("f gamma_t is not negligible at the boundary of " + grid.describe());
  }

  /// Convolution of nodal values g with gamma_v at z, over the nodes within
  /// twelve standard deviations.
  double convolve(const std::vector<double>& g, double z, double v) const {
    const int n = static_cast<int>(ys.size());
    const double lo = ys.front(), h = ys[1] - ys[0];
    const double w = 12.0 * std::sqrt(v);
    const int a = std::clamp(static_cast<int>(std::floor((z - w - lo) / h)), 0, n - 1);
    const int b = std::clamp(static_cast<int>(std::ceil((z + w - lo) / h)), 0, n - 1);
    double acc = 0.0;
    for (int k = a; k <= b; ++k) acc += ws[k] * g[k] * gauss_kernel(z - ys[k], v);
    return acc;
  }

  std::pair<double, double> sides(double x, double s) const {
    return {convolve(fgt, x, s), r * convolve(fy, r * x, p) * gauss_kernel(r * x, q)};
  }
};

}  // namespace

std::pair<double, double> gaussian_shuffle_sides(const std::function<double(double)>& f, double s, double t,
                                                 const Grid& grid, double x) {
  return ShuffleSetup(f, s, t, grid).sides(x, s);
}

ShuffleReport gaussian_shuffle_check(const std::function<double(double)>& f, double s, double t, const Grid& grid,
                                     int stride) {
  const ShuffleSetup setup(f, s, t, grid);
  ShuffleReport rep;
  const auto& ys = grid.axis_nodes(0);
  for (std::size_t k = 0; k < ys.size(); k += stride) {
    const auto [left, right] = setup.sides(ys[k], s);
    rep.discrepancy = std::max(rep.discrepancy, std::abs(left - right));
    rep.scale = std::max(rep.scale, std::abs(left));
    ++rep.points;
  }
  return rep;
}

}  // namespace lclab
