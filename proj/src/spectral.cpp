#include "lclab/spectral.hpp"

#include "lclab/errors.hpp"
#include "lclab/moments.hpp"
#include "lclab/util.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <random>

namespace lclab {

// ---------------------------------------------------------------------------
// Operator assembly

namespace {

/// A masked lattice can leave nodes with no active neighbour near corners;
/// each stray component would add a spurious zero eigenvalue.
void keep_largest_component(const Grid& grid, std::vector<std::size_t>& active, std::vector<int>& index_of,
                            std::vector<double>& rho) {
  const int n = static_cast<int>(active.size());
  std::vector<int> comp(n, -1);
  std::vector<int> sizes;
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    const int id = static_cast<int>(sizes.size());
    sizes.push_back(0);
    comp[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      ++sizes[id];
      const auto idx = grid.unflatten(active[i]);
      for (int a = 0; a < grid.dim(); ++a) {
        for (int step : {-1, 1}) {
          const int t = idx[a] + step;
          if (t < 0 || t >= grid.shape()[a]) continue;
          const int j = index_of[step > 0 ? active[i] + grid.stride(a) : active[i] - grid.stride(a)];
          if (j >= 0 && comp[j] < 0) {
            comp[j] = id;
            stack.push_back(j);
          }
        }
      }
    }
  }
  if (sizes.size() <= 1) return;
  const int keep = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<std::size_t> a2;
  std::vector<double> r2;
  std::fill(index_of.begin(), index_of.end(), -1);
  for (int i = 0; i < n; ++i) {
    if (comp[i] != keep) continue;
    index_of[active[i]] = static_cast<int>(a2.size());
    a2.push_back(active[i]);
    r2.push_back(rho[i]);
  }
  active = std::move(a2);
  rho = std::move(r2);
}

}  // namespace

DiscreteOperator::DiscreteOperator(const Density& d, const Grid& grid, OperatorOptions opts)
    : d_(d), grid_(grid) {
  if (grid.rule() == QuadRule::Gauss) throw Error("operator needs a uniform lattice (trapezoid or simpson grid)");
  if (grid.dim() != d.dim()) throw Error("grid and density dimensions differ");
  const int n = grid.dim();
  // The operator always uses trapezoid lattice weights.
  std::vector<std::vector<double>> tw(n);
  std::vector<double> h(n);
  for (int a = 0; a < n; ++a) {
    h[a] = grid.spacing(a);
    tw[a].assign(grid.shape()[a], h[a]);
    tw[a].front() = tw[a].back() = 0.5 * h[a];
  }
  index_of_.assign(grid.size(), -1);
  std::vector<double> rho_active;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double r = d.density(grid.node(k));
    if (r > 0.0 && std::isfinite(r)) {
      index_of_[k] = static_cast<int>(active_.size());
      active_.push_back(k);
      rho_active.push_back(r);
    } else if (!opts.mask_outside_support) {
      throw NonPositiveDensity("density vanishes at lattice node " + fmt_point(grid.node(k)) + " of " +
                               grid.describe() + "; regularize the density or mask the lattice");
    }
  }
  if (opts.mask_outside_support) keep_largest_component(grid, active_, index_of_, rho_active);
  if (active_.size() < 2) throw NonPositiveDensity("fewer than two lattice nodes inside the support");
  mass_.resize(size());
  for (int i = 0; i < size(); ++i) {
    const auto idx = grid.unflatten(active_[i]);
    double w = 1.0;
    for (int a = 0; a < n; ++a) w *= tw[a][idx[a]];
    mass_[i] = w * rho_active[i];
  }
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < size(); ++i) {
    const std::size_t k = active_[i];
    const auto idx = grid.unflatten(k);
    for (int a = 0; a < n; ++a) {
      if (idx[a] + 1 >= grid.shape()[a]) continue;
      const int j = index_of_[k + grid.stride(a)];
      if (j < 0) continue;
      double trans = 1.0;
      for (int b = 0; b < n; ++b)
        if (b != a) trans *= tw[b][idx[b]];
      Edge e;
      e.i = i;
      e.j = j;
      e.axis = a;
      e.h = h[a];
      e.mid = 0.5 * (node(i) + node(j));
      e.nu = h[a] * trans * d.density(e.mid);
      if (!std::isfinite(e.nu)) e.nu = 0.0;
      const double c = e.nu / (h[a] * h[a]);
      trips.emplace_back(i, i, c);
      trips.emplace_back(j, j, c);
      trips.emplace_back(i, j, -c);
      trips.emplace_back(j, i, -c);
      edges_.push_back(e);
    }
  }
  k_.resize(size(), size());
  k_.setFromTriplets(trips.begin(), trips.end());
  k_.makeCompressed();
}

Vec DiscreteOperator::sample(const std::function<double(const Point&)>& f) const {
  Vec v(size());
  for (int i = 0; i < size(); ++i) v[i] = f(node(i));
  return v;
}

Vec DiscreteOperator::coordinate(int axis) const {
  return sample([axis](const Point& x) { return x[axis]; });
}

Vec DiscreteOperator::apply_l(const Vec& u) const {
  // Edge differences, so constants map to exactly zero.
  Vec out = Vec::Zero(size());
  for (const auto& e : edges_) {
    const double flux = e.nu / (e.h * e.h) * (u[e.j] - u[e.i]);
    out[e.i] += flux;
    out[e.j] -= flux;
  }
  return out.cwiseQuotient(mass_);
}

double DiscreteOperator::inner(const Vec& u, const Vec& v) const { return (u.cwiseProduct(mass_)).dot(v); }

double DiscreteOperator::energy(const Vec& u, const Vec& v) const { return u.dot(k_ * v); }

double DiscreteOperator::mean(const Vec& u) const { return u.dot(mass_) / mass_.sum(); }

double DiscreteOperator::variance(const Vec& u) const {
  const Vec c = u.array() - mean(u);
  return inner(c, c) / mass_.sum();
}

Point DiscreteOperator::gradient_integral(const Vec& u) const {
  Point g = Point::Zero(dim());
  for (const auto& e : edges_) g[e.axis] += e.nu * (u[e.j] - u[e.i]) / e.h;
  return g;
}

std::vector<Point> DiscreteOperator::nodal_gradient(const Vec& u) const {
  const int n = dim();
  std::vector<Point> g(size(), Point::Zero(n));
  for (int i = 0; i < size(); ++i) {
    const std::size_t k = active_[i];
    const auto idx = grid_.unflatten(k);
    for (int a = 0; a < n; ++a) {
      const double h = grid_.spacing(a);
      const int up = idx[a] + 1 < grid_.shape()[a] ? index_of_[k + grid_.stride(a)] : -1;
      const int dn = idx[a] > 0 ? index_of_[k - grid_.stride(a)] : -1;
      if (up >= 0 && dn >= 0) {
        g[i][a] = (u[up] - u[dn]) / (2 * h);
      } else if (up >= 0) {
        g[i][a] = (u[up] - u[i]) / h;
      } else if (dn >= 0) {
        g[i][a] = (u[i] - u[dn]) / h;
      }
    }
  }
  return g;
}

double DiscreteOperator::hessian_form(const Vec& u) const {
  double acc = 0.0;
  for (const auto& e : edges_) {
    if (e.nu == 0.0) continue;
    const double du = (u[e.j] - u[e.i]) / e.h;
    acc += e.nu * d_.hess_psi(e.mid)(e.axis, e.axis) * du * du;
  }
  if (dim() > 1) {
    const auto g = nodal_gradient(u);
    for (int i = 0; i < size(); ++i) {
      const Mat hp = d_.hess_psi(node(i));
      for (int a = 0; a < dim(); ++a)
        for (int b = 0; b < dim(); ++b)
          if (a != b) acc += mass_[i] * hp(a, b) * g[i][a] * g[i][b];
    }
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Eigen-solvers

namespace {

/// Number of eigenvalues of the symmetric tridiagonal (a, b) below x.
int sturm_count(const Vec& a, const Vec& b, double x, double pivmin) {
  int count = 0;
  double d = 1.0;
  for (int i = 0; i < a.size(); ++i) {
    d = a[i] - x - (i > 0 ? b[i - 1] * b[i - 1] / d : 0.0);
    if (std::abs(d) < pivmin) d = -pivmin;
    if (d < 0.0) ++count;
  }
  return count;
}

/// k-th smallest eigenvalue (0-based) of a symmetric tridiagonal matrix.
double tridiagonal_eigenvalue(const Vec& a, const Vec& b, int k, int* iterations) {
  const int n = static_cast<int>(a.size());
  double lo = kInf, hi = -kInf;
  for (int i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(b[i - 1]) : 0.0) + (i + 1 < n ? std::abs(b[i]) : 0.0);
    lo = std::min(lo, a[i] - r);
    hi = std::max(hi, a[i] + r);
  }
  const double scale = std::max(std::abs(lo), std::abs(hi));
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, scale * scale);
  int it = 0;
  while (hi - lo > 4 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo) + std::abs(hi), 1e-300) &&
         it < 400) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (sturm_count(a, b, mid, pivmin) > k) {
      hi = mid;
    } else {
      lo = mid;
    }
    ++it;
  }
  if (iterations) *iterations = it;
  return 0.5 * (lo + hi);
}

struct PencilResult {
  double lambda = 0.0;
  Vec x;
  int iterations = 0;
};

/// Smallest eigenpair of A x = lambda diag(b) x orthogonal to z, by
/// shift-invert block subspace iteration with Rayleigh-Ritz.
PencilResult subspace_iteration(const SpMat& a, const Vec& b, const Vec& z, const std::vector<Vec>& starts,
                                const EigenOptions& opts) {
  const int n = static_cast<int>(a.rows());
  const int p = std::min<int>(opts.block, n - 1);
  auto binner = [&](const Vec& u, const Vec& v) { return u.cwiseProduct(b).dot(v); };
  const double zz = binner(z, z);
  auto deflate = [&](Vec& v) { v -= (binner(z, v) / zz) * z; };

  // Shift from the best Rayleigh quotient among the start vectors: an upper
  // bound on the target eigenvalue.
  double rq = kInf;
  for (Vec v : starts) {
    deflate(v);
    const double den = binner(v, v);
    if (den > 0.0) rq = std::min(rq, v.dot(a * v) / den);
  }
  if (!std::isfinite(rq) || rq <= 0.0) rq = 1.0;
  const double sigma = 0.1 * rq;
  SpMat shifted = a;
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) += sigma * b[i];
  Eigen::SimplicialLDLT<SpMat> solver(shifted);
  if (solver.info() != Eigen::Success) throw SingularSolve("factorization of the shifted operator failed");

  Eigen::MatrixXd x(n, p);
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  for (int c = 0; c < p; ++c) {
    if (c < static_cast<int>(starts.size())) {
      x.col(c) = starts[c];
    } else {
      for (int i = 0; i < n; ++i) x(i, c) = normal(rng);
    }
  }
  auto orthonormalize = [&](Eigen::MatrixXd& y) {
    for (int c = 0; c < y.cols(); ++c) {
      Vec v = y.col(c);
      deflate(v);
      for (int r = 0; r < c; ++r) v -= binner(y.col(r), v) * y.col(r);
      // Second pass for stability.
      for (int r = 0; r < c; ++r) v -= binner(y.col(r), v) * y.col(r);
      double nv = std::sqrt(binner(v, v));
      if (!(nv > 1e-300)) {
        for (int i = 0; i < n; ++i) v[i] = normal(rng);
        deflate(v);
        nv = std::sqrt(binner(v, v));
      }
      y.col(c) = v / nv;
    }
  };
  orthonormalize(x);

  PencilResult res;
  double prev = kInf;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    Eigen::MatrixXd y(n, p);
    for (int c = 0; c < p; ++c) y.col(c) = solver.solve(Vec(x.col(c).cwiseProduct(b)));
    orthonormalize(y);
    const Eigen::MatrixXd ay = a * y;
    Eigen::MatrixXd kr = y.transpose() * ay;
    Eigen::MatrixXd br = y.transpose() * b.asDiagonal() * y;
    kr = 0.5 * (kr + kr.transpose());
    br = 0.5 * (br + br.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(kr, br);
    x = y * es.eigenvectors();
    const double theta = es.eigenvalues()[0];
    const Vec v = x.col(0);
    const Vec r = a * v - theta * v.cwiseProduct(b);
    const double rnorm = std::sqrt(r.cwiseProduct(r).cwiseQuotient(b).sum() / binner(v, v));
    res.lambda = theta;
    res.x = v;
    res.iterations = it;
    if (std::abs(theta - prev) <= opts.tol * theta && rnorm <= 1e-9 * theta) return res;
    prev = theta;
  }
  throw ConvergenceFailure("subspace iteration did not converge in " + std::to_string(opts.max_iterations) +
                           " iterations");
}

std::vector<Vec> start_vectors(const DiscreteOperator& op) {
  std::vector<Vec> s;
  for (int a = 0; a < op.dim(); ++a) s.push_back(op.coordinate(a));
  for (int a = 0; a < op.dim(); ++a) s.push_back(op.coordinate(a).cwiseAbs2());
  return s;
}

void normalize_eigenfunction(const DiscreteOperator& op, Vec& f) {
  f.array() -= op.mean(f);
  f /= std::sqrt(op.inner(f, f));
  // Deterministic sign: positive correlation with the first coordinate that
  // carries any, otherwise a positive first entry.
  for (int a = 0; a < op.dim(); ++a) {
    const double m = op.inner(f, op.coordinate(a));
    if (std::abs(m) > 1e-8) {
      if (m < 0) f = -f;
      return;
    }
  }
  if (f[0] < 0) f = -f;
}

double residual_norm(const DiscreteOperator& op, const Vec& f, double lambda) {
  const Vec r = op.stiffness() * f - lambda * f.cwiseProduct(op.mass());
  return std::sqrt(r.cwiseAbs2().cwiseQuotient(op.mass()).sum());
}

}  // namespace

double direct_gap(const DiscreteOperator& op, const EigenOptions& opts) {
  return subspace_iteration(op.stiffness(), op.mass(), op.constant(), start_vectors(op), opts).lambda;
}

double symmetrized_gap(const DiscreteOperator& op, const EigenOptions& opts) {
  const Vec sq = op.mass().cwiseSqrt();
  const Vec isq = sq.cwiseInverse();
  const SpMat s = isq.asDiagonal() * op.stiffness() * isq.asDiagonal();
  std::vector<Vec> starts;
  for (const auto& v : start_vectors(op)) starts.push_back(v.cwiseProduct(sq));
  return subspace_iteration(s, Vec::Ones(op.size()), sq, starts, opts).lambda;
}

SpectralResult spectral_gap(const DiscreteOperator& op, const EigenOptions& opts) {
  SpectralResult sr;
  const Vec& m = op.mass();
  if (op.dim() == 1) {
    const int n = op.size();
    const SpMat& k = op.stiffness();
    Vec a(n), b(std::max(n - 1, 1));
    for (int i = 0; i < n; ++i) a[i] = k.coeff(i, i) / m[i];
    for (int i = 0; i + 1 < n; ++i) b[i] = k.coeff(i, i + 1) / std::sqrt(m[i] * m[i + 1]);
    sr.lambda = tridiagonal_eigenvalue(a, b, 1, &sr.iterations);
    sr.lambda_symmetrized = sr.lambda;
    // Inverse iteration on the symmetrized form for the eigenvector.
    SpMat s(n, n);
    std::vector<Eigen::Triplet<double>> trips;
    const double shift = sr.lambda * (1.0 - 1e-9);
    for (int i = 0; i < n; ++i) {
      trips.emplace_back(i, i, a[i] - shift);
      if (i + 1 < n) {
        trips.emplace_back(i, i + 1, b[i]);
        trips.emplace_back(i + 1, i, b[i]);
      }
    }
    s.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<SpMat> lu;
    lu.compute(s);
    if (lu.info() != Eigen::Success) throw SingularSolve("tridiagonal factorization failed");
    const Vec sq = m.cwiseSqrt();
    Vec v = op.coordinate(0).cwiseProduct(sq);
    v -= (v.dot(sq) / sq.squaredNorm()) * sq;
    for (int it = 0; it < 4; ++it) {
      v = lu.solve(v);
      v -= (v.dot(sq) / sq.squaredNorm()) * sq;
      v /= v.norm();
    }
    sr.eigenfunction = v.cwiseQuotient(sq);
    sr.method = "sturm-bisection";
    if (opts.cross_check) sr.lambda_direct = direct_gap(op, opts);
  } else {
    const auto pr = subspace_iteration(op.stiffness(), m, op.constant(), start_vectors(op), opts);
    sr.lambda = pr.lambda;
    sr.lambda_direct = pr.lambda;
    sr.eigenfunction = pr.x;
    sr.iterations = pr.iterations;
    sr.method = "subspace-iteration";
    if (opts.cross_check) sr.lambda_symmetrized = symmetrized_gap(op, opts);
  }
  if (!(sr.lambda > 0.0)) throw ConvergenceFailure("non-positive spectral gap");
  normalize_eigenfunction(op, sr.eigenfunction);
  sr.c_p = 1.0 / sr.lambda;
  sr.residual = residual_norm(op, sr.eigenfunction, sr.lambda);
  return sr;
}

SpectralResult spectral_gap(const Density& d, const Grid& grid, const EigenOptions& opts) {
  return spectral_gap(DiscreteOperator(d, grid), opts);
}

// ---------------------------------------------------------------------------
// Test functions

TestFunction linear_function(const Point& theta, double shift) {
  TestFunction f;
  f.name = "linear";
  f.value = [theta, shift](const Point& x) { return theta.dot(x) - shift; };
  f.grad = [theta](const Point&) { return theta; };
  f.hess = [n = theta.size()](const Point&) { return Mat(Mat::Zero(n, n)); };
  return f;
}

TestFunction quadratic_function(const Point& diag, const Point& lin) {
  TestFunction f;
  f.name = "quadratic";
  f.value = [diag, lin](const Point& x) { return diag.dot(x.cwiseAbs2()) + lin.dot(x); };
  f.grad = [diag, lin](const Point& x) { return Point(2.0 * diag.cwiseProduct(x) + lin); };
  f.hess = [diag](const Point&) { return Mat(Mat(2.0 * diag.asDiagonal())); };
  return f;
}

TestFunction spline_function(const DiscreteOperator& op, const Vec& values, std::string name) {
  if (op.dim() != 1) throw Error("spline test functions are one-dimensional");
  const int n = op.size();
  auto xs = std::make_shared<std::vector<double>>(n);
  auto ys = std::make_shared<std::vector<double>>(values.data(), values.data() + n);
  for (int i = 0; i < n; ++i) (*xs)[i] = op.node(i)[0];
  // Natural spline second derivatives.
  auto m2 = std::make_shared<std::vector<double>>(n, 0.0);
  if (n > 2) {
    std::vector<double> c(n, 0.0), dd(n, 0.0);
    for (int i = 1; i + 1 < n; ++i) {
      const double h0 = (*xs)[i] - (*xs)[i - 1], h1 = (*xs)[i + 1] - (*xs)[i];
      const double rhs = 6.0 * (((*ys)[i + 1] - (*ys)[i]) / h1 - ((*ys)[i] - (*ys)[i - 1]) / h0);
      const double diag = 2.0 * (h0 + h1) - (i > 1 ? h0 * c[i - 1] : 0.0);
      c[i] = h1 / diag;
      dd[i] = (rhs - (i > 1 ? h0 * dd[i - 1] : 0.0)) / diag;
    }
    for (int i = n - 2; i >= 1; --i) (*m2)[i] = dd[i] - c[i] * (i + 1 < n - 1 ? (*m2)[i + 1] : 0.0);
  }
  auto locate = [xs](double x) {
    auto it = std::upper_bound(xs->begin(), xs->end(), x);
    int k = static_cast<int>(it - xs->begin()) - 1;
    return std::clamp(k, 0, static_cast<int>(xs->size()) - 2);
  };
  // Value, first and second derivative on the cell holding x.
  auto eval = [xs, ys, m2, locate](double x) {
    const int k = locate(x);
    const double x0 = (*xs)[k], x1 = (*xs)[k + 1], h = x1 - x0;
    const double a = (x1 - x) / h, b = (x - x0) / h;
    const double y0 = (*ys)[k], y1 = (*ys)[k + 1], s0 = (*m2)[k], s1 = (*m2)[k + 1];
    const double v = a * y0 + b * y1 + ((a * a * a - a) * s0 + (b * b * b - b) * s1) * h * h / 6.0;
    const double d1 = (y1 - y0) / h - (3 * a * a - 1) * h * s0 / 6.0 + (3 * b * b - 1) * h * s1 / 6.0;
    const double d2 = a * s0 + b * s1;
    return std::array<double, 3>{v, d1, d2};
  };
  TestFunction f;
  f.name = std::move(name);
  f.value = [eval](const Point& x) { return eval(x[0])[0]; };
  f.grad = [eval](const Point& x) { return Point(Point::Constant(1, eval(x[0])[1])); };
  f.hess = [eval](const Point& x) { return Mat(Mat::Constant(1, 1, eval(x[0])[2])); };
  return f;
}

// ---------------------------------------------------------------------------
// Identity and inequality checks

BochnerReport bochner_residual(const Density& d, const TestFunction& u, const Grid& grid) {
  check_mass_leakage(d, grid);
  BochnerReport rep;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point x = grid.node(k);
    const double rho = d.density(x);
    if (!(rho > 0.0)) continue;
    const double w = grid.weight(k) * rho;
    const Point g = u.grad(x);
    const Mat h = u.hess(x);
    const double lu = h.trace() - d.grad_psi(x).dot(g);
    rep.l_squared += w * lu * lu;
    rep.hessian_hs += w * h.squaredNorm();
    rep.curvature += w * g.dot(d.hess_psi(x) * g);
  }
  const double diff = std::abs(rep.l_squared - rep.hessian_hs - rep.curvature);
  rep.residual = rep.l_squared > 0.0 ? diff / rep.l_squared : diff;
  return rep;
}

EigenDirectionReport eigen_direction_check(const DiscreteOperator& op, const SpectralResult& sr) {
  EigenDirectionReport rep;
  const Vec& f = sr.eigenfunction;
  const int n = op.dim();
  rep.lambda = sr.lambda;
  rep.grad_integral = op.gradient_integral(f);
  rep.moment = Point(n);
  Mat cov(n, n);
  const double z = op.total_mass();
  std::vector<Vec> xs;
  for (int a = 0; a < n; ++a) {
    xs.push_back(op.coordinate(a));
    xs.back().array() -= op.mean(xs.back());
  }
  for (int a = 0; a < n; ++a) {
    rep.moment[a] = op.inner(f, xs[a]) / z;
    for (int b = 0; b < n; ++b) cov(a, b) = op.inner(xs[a], xs[b]) / z;
  }
  // f is normalized in L2 of the lattice measure, whose total mass is z.
  const Point grad = rep.grad_integral / z;
  const double fnorm = op.inner(f, f) / z;
  rep.grad_sq = grad.squaredNorm() / fnorm;
  rep.moment_term = sr.lambda * sr.lambda * rep.moment.squaredNorm() / fnorm;
  rep.curvature_term = op.hessian_form(f) / z / fnorm / sr.lambda;
  rep.cov_term = sr.lambda * sr.lambda * sym_max_eigenvalue(cov);
  rep.identity_residual = std::abs(rep.grad_sq - rep.moment_term) / std::max(rep.grad_sq, 1e-300);
  rep.slack_a = rep.grad_sq - rep.curvature_term;
  rep.slack_c = rep.cov_term - rep.grad_sq;
  return rep;
}

LichnerowiczReport lichnerowicz_check(const Density& d, const SpectralResult& sr) {
  LichnerowiczReport rep;
  rep.t = d.uniform_convexity();
  if (!(rep.t > 0.0)) throw Error("lichnerowicz check needs a uniformly log-concave density");
  rep.lambda = sr.lambda;
  rep.c_p = 1.0 / sr.lambda;
  rep.cov_op = moment_report(d).op_norm;
  rep.middle = std::sqrt(rep.cov_op / rep.t);
  rep.upper = 1.0 / rep.t;
  rep.slack_left = rep.middle - rep.c_p;
  rep.slack_right = rep.upper - rep.middle;
  return rep;
}

namespace {

struct PinnedSolver {
  int pin = 0;
  Eigen::SimplicialLDLT<SpMat> ldlt;
};

std::shared_ptr<PinnedSolver> pinned_solver(const DiscreteOperator& op) {
  auto ps = std::make_shared<PinnedSolver>();
  const int n = op.size();
  op.mass().maxCoeff(&ps->pin);
  std::vector<Eigen::Triplet<double>> trips;
  const SpMat& k = op.stiffness();
  auto red = [&](int i) { return i < ps->pin ? i : i - 1; };
  for (int c = 0; c < k.outerSize(); ++c)
    for (SpMat::InnerIterator it(k, c); it; ++it)
      if (it.row() != ps->pin && it.col() != ps->pin) trips.emplace_back(red(it.row()), red(it.col()), it.value());
  SpMat kr(n - 1, n - 1);
  kr.setFromTriplets(trips.begin(), trips.end());
  ps->ldlt.compute(kr);
  if (ps->ldlt.info() != Eigen::Success) throw SingularSolve("the mean-zero restriction of K is singular");
  return ps;
}

HMinusOne solve_pinned(const DiscreteOperator& op, const PinnedSolver& ps, const Vec& f) {
  const int n = op.size();
  HMinusOne out;
  Vec fc = f.array() - op.mean(f);
  const Vec rhs = fc.cwiseProduct(op.mass());
  Vec rr(n - 1);
  for (int i = 0, r = 0; i < n; ++i)
    if (i != ps.pin) rr[r++] = rhs[i];
  const Vec gr = ps.ldlt.solve(rr);
  if (ps.ldlt.info() != Eigen::Success) throw SingularSolve("H^-1 solve failed");
  Vec g(n);
  for (int i = 0, r = 0; i < n; ++i) g[i] = i == ps.pin ? 0.0 : gr[r++];
  g.array() -= op.mean(g);
  const double z = op.total_mass();
  out.norm_sq = op.inner(g, fc) / z;
  out.l2_sq = op.inner(fc, fc) / z;
  out.potential = std::move(g);
  return out;
}

}  // namespace

HMinusOne h_minus_one(const DiscreteOperator& op, const Vec& f) {
  const auto ps = pinned_solver(op);
  return solve_pinned(op, *ps, f);
}

double h_minus_one_norm(const DiscreteOperator& op, const std::function<double(const Point&)>& f) {
  return std::sqrt(std::max(0.0, h_minus_one(op, op.sample(f)).norm_sq));
}

DualReport dual_identities_check(const DiscreteOperator& op, const TestFunction& f) {
  const auto ps = pinned_solver(op);
  const int n = op.dim();
  const Density& d = op.density();
  DualReport rep;
  rep.n = n;
  std::vector<Point> gpsi(op.size());
  Vec psi(op.size());
  for (int i = 0; i < op.size(); ++i) {
    gpsi[i] = d.grad_psi(op.node(i));
    psi[i] = d.psi(op.node(i));
  }
  for (int a = 0; a < n; ++a) {
    Vec v(op.size());
    for (int i = 0; i < op.size(); ++i) v[i] = gpsi[i][a];
    rep.dual_sum += solve_pinned(op, *ps, v).norm_sq;
  }
  rep.varentropy = op.variance(psi);

  // Remove the linear part so that int grad f dmu = 0.
  std::vector<Point> gf(op.size());
  Point c = Point::Zero(n);
  for (int i = 0; i < op.size(); ++i) {
    gf[i] = f.grad(op.node(i));
    c += op.mass()[i] * gf[i];
  }
  c /= op.total_mass();
  Vec fv(op.size());
  for (int i = 0; i < op.size(); ++i) fv[i] = f.value(op.node(i)) - c.dot(op.node(i));
  rep.test_variance = op.variance(fv);
  for (int a = 0; a < n; ++a) {
    Vec v(op.size());
    for (int i = 0; i < op.size(); ++i) v[i] = gf[i][a] - c[a];
    rep.test_dual += solve_pinned(op, *ps, v).norm_sq;
  }
  return rep;
}

CubeRootReport cube_root_bound_check(const DiscreteOperator& op, const SpectralResult& sr) {
  const auto ps = pinned_solver(op);
  const int n = op.dim();
  CubeRootReport rep;
  rep.t = op.density().uniform_convexity();
  rep.lambda = sr.lambda;
  std::vector<Vec> xs, gs;
  for (int a = 0; a < n; ++a) {
    xs.push_back(op.coordinate(a));
    xs.back().array() -= op.mean(xs.back());
    gs.push_back(solve_pinned(op, *ps, xs.back()).potential);
  }
  Mat g(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) g(a, b) = op.inner(gs[a], xs[b]) / op.total_mass();
  rep.r = sym_max_eigenvalue(Mat(0.5 * (g + g.transpose())));
  rep.bound = std::cbrt(rep.t / rep.r);
  rep.slack = rep.lambda - rep.bound;
  return rep;
}

PoincareReport poincare_random_check(const DiscreteOperator& op, const SpectralResult& sr, int count,
                                     std::uint64_t seed) {
  PoincareReport rep;
  rep.functions = count;
  rep.worst_slack = kInf;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double ls = op.density().length_scale();
  const int n = op.dim();
  const double z = op.total_mass();
  for (int k = 0; k < count; ++k) {
    // Random trigonometric-plus-quadratic function on the density's scale.
    Point w1(n), w2(n), q(n);
    for (int a = 0; a < n; ++a) {
      w1[a] = normal(rng) / ls;
      w2[a] = 2.0 * normal(rng) / ls;
      q[a] = normal(rng) / (ls * ls);
    }
    const double p1 = normal(rng), p2 = normal(rng), c1 = normal(rng), c2 = normal(rng);
    const Vec f = op.sample([&](const Point& x) {
      return c1 * std::sin(w1.dot(x) + p1) + c2 * std::cos(w2.dot(x) + p2) + 0.1 * q.dot(x.cwiseAbs2());
    });
    const double var = op.variance(f);
    const double en = op.energy(f, f) / z;
    rep.worst_slack = std::min(rep.worst_slack, en / sr.lambda - var);
  }
  const double var = op.variance(sr.eigenfunction);
  const double en = op.energy(sr.eigenfunction, sr.eigenfunction) / z;
  rep.eigen_equality_rel = std::abs(en / sr.lambda - var) / var;
  return rep;
}

}  // namespace lclab
