#pragma once

#include "lclab/density.hpp"
#include "lclab/quadrature.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <string>
#include <vector>

namespace lclab {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

struct OperatorOptions {
  /// Drop lattice nodes where the density vanishes (staircase approximation of
  /// a non-box support with zero-flux walls). Otherwise such nodes are an error.
  bool mask_outside_support = false;
};

/// -L on a lattice, assembled as a weighted graph Laplacian K = D^T C D with
/// the mass matrix M = diag(w_i rho_i). Edge measures are h * (transverse
/// trapezoid weight) * rho(midpoint), so u^T K v is a quadrature of
/// int <grad u, grad v> dmu and the discrete integration by parts
/// <(-L) u, v>_M = u^T K v holds by construction.
class DiscreteOperator {
 public:
  struct Edge {
    int i, j;  // active node indices, j = i + e_axis
    int axis;
    double h;
    double nu;  // edge measure
    Point mid;
  };

  DiscreteOperator(const Density& d, const Grid& grid, OperatorOptions opts = {});

  const Density& density() const { return d_; }
  const Grid& grid() const { return grid_; }
  int size() const { return static_cast<int>(active_.size()); }
  int dim() const { return grid_.dim(); }
  Point node(int i) const { return grid_.node(active_[i]); }
  std::size_t flat_index(int i) const { return active_[i]; }
  const Vec& mass() const { return mass_; }
  const SpMat& stiffness() const { return k_; }
  const std::vector<Edge>& edges() const { return edges_; }
  double total_mass() const { return mass_.sum(); }

  Vec sample(const std::function<double(const Point&)>& f) const;
  Vec coordinate(int axis) const;
  Vec constant(double c = 1.0) const { return Vec::Constant(size(), c); }

  /// L u = -M^{-1} K u.
  Vec apply_l(const Vec& u) const;
  double inner(const Vec& u, const Vec& v) const;
  double energy(const Vec& u, const Vec& v) const;
  double mean(const Vec& u) const;
  double variance(const Vec& u) const;
  /// int grad u dmu, edge based: component a equals energy(u, x_a).
  Point gradient_integral(const Vec& u) const;
  /// int <hess(psi) grad u, grad u> dmu: axis terms on edges, mixed terms from
  /// centred nodal gradients.
  double hessian_form(const Vec& u) const;
  /// Nodal gradient by centred differences (one-sided at walls).
  std::vector<Point> nodal_gradient(const Vec& u) const;

 private:
  Density d_;
  Grid grid_;
  std::vector<std::size_t> active_;
  std::vector<int> index_of_;  // grid flat -> active index or -1
  Vec mass_;
  SpMat k_;
  std::vector<Edge> edges_;
};

struct SpectralResult {
  double lambda = 0.0;              // first non-zero eigenvalue of -L
  double c_p = 0.0;                 // 1 / lambda
  Vec eigenfunction;                // M-normalized, M-mean zero
  double residual = 0.0;            // ||(-L) f - lambda f||_{L2(mu)}
  double lambda_symmetrized = 0.0;  // from M^{-1/2} K M^{-1/2}
  double lambda_direct = 0.0;       // from the pencil (K, M)
  int iterations = 0;
  std::string method;
};

struct EigenOptions {
  double tol = 1e-10;
  int max_iterations = 2000;
  int block = 6;
  /// Also solve the other form for the cross-check fields.
  bool cross_check = true;
};

/// Sturm bisection on the symmetrized tridiagonal form in 1D; shift-invert
/// subspace iteration with the constant mode deflated otherwise.
SpectralResult spectral_gap(const DiscreteOperator& op, const EigenOptions& opts = {});
SpectralResult spectral_gap(const Density& d, const Grid& grid, const EigenOptions& opts = {});

/// Smallest non-zero eigenvalue of the pencil (K, M) by subspace iteration.
double direct_gap(const DiscreteOperator& op, const EigenOptions& opts = {});
/// Same for the symmetric matrix M^{-1/2} K M^{-1/2}.
double symmetrized_gap(const DiscreteOperator& op, const EigenOptions& opts = {});

/// A smooth function with analytic first and second derivatives.
struct TestFunction {
  std::string name;
  std::function<double(const Point&)> value;
  std::function<Point(const Point&)> grad;
  std::function<Mat(const Point&)> hess;
};

TestFunction linear_function(const Point& theta, double shift = 0.0);
/// sum_i c_i x_i^2 + <l, x>.
TestFunction quadratic_function(const Point& diag, const Point& lin);
/// Natural cubic spline through nodal values of a 1D lattice function.
TestFunction spline_function(const DiscreteOperator& op, const Vec& values, std::string name = "spline");

struct BochnerReport {
  double l_squared = 0.0;     // int (Lu)^2 dmu
  double hessian_hs = 0.0;    // int ||hess u||_HS^2 dmu
  double curvature = 0.0;     // int <hess(psi) grad u, grad u> dmu
  double residual = 0.0;      // |lhs - rhs| / lhs (absolute when lhs is 0)
};

/// Integrated Bochner identity by lattice quadrature (rule of the grid).
BochnerReport bochner_residual(const Density& d, const TestFunction& u, const Grid& grid);

struct EigenDirectionReport {
  double lambda = 0.0;
  Point grad_integral;         // int grad f dmu
  Point moment;                // int f x dmu
  double grad_sq = 0.0;        // |int grad f|^2
  double curvature_term = 0.0; // (1/lambda) int <hess psi grad f, grad f>
  double moment_term = 0.0;    // lambda^2 |int f x|^2
  double cov_term = 0.0;       // lambda^2 ||Cov||_op
  double identity_residual = 0.0;  // relative
  double slack_a = 0.0;        // grad_sq - curvature_term
  double slack_c = 0.0;        // cov_term - grad_sq
};

EigenDirectionReport eigen_direction_check(const DiscreteOperator& op, const SpectralResult& sr);

struct LichnerowiczReport {
  double t = 0.0;
  double lambda = 0.0;
  double cov_op = 0.0;
  double c_p = 0.0;      // 1/lambda
  double middle = 0.0;   // sqrt(||Cov|| / t)
  double upper = 0.0;    // 1/t
  double slack_left = 0.0;
  double slack_right = 0.0;
};

LichnerowiczReport lichnerowicz_check(const Density& d, const SpectralResult& sr);

/// ||f - mean||^2 in H^{-1}(mu): solves K g = M f on the mean-zero subspace.
struct HMinusOne {
  double norm_sq = 0.0;
  double l2_sq = 0.0;  // ||f - mean||^2_{L2}
  Vec potential;       // g with (-L) g = f, mean zero
};
HMinusOne h_minus_one(const DiscreteOperator& op, const Vec& f);
double h_minus_one_norm(const DiscreteOperator& op, const std::function<double(const Point&)>& f);

struct DualReport {
  double dual_sum = 0.0;        // sum_i ||d_i psi||^2_{H^-1}
  double n = 0.0;
  double varentropy = 0.0;      // Var(psi)
  double test_variance = 0.0;   // Var(f) for the supplied f after linear correction
  double test_dual = 0.0;       // sum_i ||d_i f||^2_{H^-1}
};

/// (a) the dual identity for grad psi, (b) the H^{-1} inequality for f with
/// its linear part removed so that int grad f dmu = 0, (c) varentropy.
DualReport dual_identities_check(const DiscreteOperator& op, const TestFunction& f);

struct CubeRootReport {
  double t = 0.0;
  double lambda = 0.0;
  double r = 0.0;       // sup over unit theta of ||<x - b, theta>||^2_{H^-1}
  double bound = 0.0;   // (t / R)^{1/3}
  double slack = 0.0;   // lambda - bound
};

CubeRootReport cube_root_bound_check(const DiscreteOperator& op, const SpectralResult& sr);

struct PoincareReport {
  double worst_slack = 0.0;          // min over f of E(f,f)/lambda - Var(f)
  double eigen_equality_rel = 0.0;   // for the eigenfunction
  int functions = 0;
};

/// Discrete Poincare inequality for `count` random smooth test functions.
PoincareReport poincare_random_check(const DiscreteOperator& op, const SpectralResult& sr, int count,
                                     std::uint64_t seed);

}  // namespace lclab
