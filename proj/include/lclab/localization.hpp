#pragma once

#include "lclab/density.hpp"
#include "lclab/quadrature.hpp"
#include "lclab/spectral.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace lclab {

/// Log density and gradient of the potential cached on a lattice. Tilted
/// moments only change a linear-plus-quadratic term in log space, so every
/// posterior query is a single weighted sum over the cached nodes.
class PosteriorTable {
 public:
  PosteriorTable(const Density& d, const Grid& grid);

  struct Moments {
    Point a;       // barycenter of the tilt
    Mat cov;       // covariance of the tilt
    double log_z;  // log int exp(<theta,x> - t|x|^2/2) rho(x) dx
  };

  const Density& density() const { return d_; }
  const Grid& grid() const { return grid_; }
  int dim() const { return d_.dim(); }
  std::size_t size() const { return x_.size(); }
  const Point& node(std::size_t k) const { return x_[k]; }
  const Point& grad_psi(std::size_t k) const { return gpsi_[k]; }

  Moments moments(double t, const Point& theta) const;
  double log_normalizer(double t, const Point& theta) const;
  /// Normalized tilt weights at the cached nodes (sum to one).
  std::vector<double> weights(double t, const Point& theta) const;
  /// p_{t,theta}(x).
  double tilted_density(double t, const Point& theta, const Point& x) const;

 private:
  Density d_;
  Grid grid_;
  std::vector<Point> x_;
  std::vector<double> logw_;  // log quadrature weight + log rho
  std::vector<Point> gpsi_;
};

/// Lattice for posterior queries: Simpson, 1201 points per axis in 1D (161 in
/// 2D, 41 in 3D) over the effective box.
Grid posterior_grid(const Density& d);

/// Barycenter and covariance of tilt(d, t, theta) by lattice quadrature.
PosteriorTable::Moments posterior_moments(const Density& d, double t, const Point& theta, const Grid& grid);

enum class Scheme {
  Representation,  // theta_t = t X + W_t at the grid times, exact in law
  Euler,           // Euler-Maruyama on d theta = dW + a(t, theta) dt
  CoupledEuler,    // Euler driven by the innovations of the representation path
};
std::string scheme_name(Scheme s);

struct TiltPath {
  std::vector<double> times;
  std::vector<Point> theta;
  std::vector<Point> a;
  std::vector<Mat> cov;
  Scheme scheme = Scheme::Representation;
  std::uint64_t seed = 0;
};

/// Largest step accepted by the Euler schemes.
inline constexpr double kMaxStep = 0.1;

/// One path on `steps` uniform steps of [0, T]. The generator seeded with
/// `seed` draws X first and then the Brownian increments, so every scheme
/// sees the same X and W for the same seed.
TiltPath simulate_path(const PosteriorTable& table, Sampler& sampler, double horizon, int steps, Scheme scheme,
                       std::uint64_t seed);
TiltPath simulate_path(const Density& d, double horizon, int steps, Scheme scheme, std::uint64_t seed);

/// Writes t, theta, a and the row-major covariance per time.
void write_path_csv(const std::string& path, const TiltPath& p);

/// Mean with its standard error.
struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};
Estimate estimate(const std::vector<double>& values);

struct ProbeResult {
  Point x;
  double rho = 0.0;
  Estimate p_t;
  double z = 0.0;
};

struct MartingaleReport {
  double horizon = 0.0;
  std::vector<ProbeResult> probes;
  double max_z = 0.0;
  double max_t_cov = 0.0;  // max over paths and times of t ||A_t||_op
  std::size_t paths = 0;
};

struct PathOptions {
  std::size_t paths = 10000;
  int steps = 10;  // recorded times per path
  std::uint64_t seed = 1;
  int workers = 0;  // 0: worker_count()
};

/// E p_T(x) = rho(x) at each probe, and t ||A_t||_op <= 1 along every path.
MartingaleReport martingale_check(const PosteriorTable& table, const std::vector<Point>& probes, double horizon,
                                  const PathOptions& opts);

/// Probe points at interior quantiles of the first marginal.
std::vector<Point> default_probes(const Density& d, int count);

struct SandwichReport {
  double t = 0.0;
  double lambda0 = 0.0;
  double var0 = 0.0;          // Var_mu(f)
  Estimate mean_var_t;        // E Var_{p_t}(f)
  double factor = 0.0;        // 2 + t / lambda0
  double slack_lower = 0.0;   // var0 - E Var_t
  double slack_upper = 0.0;   // factor E Var_t - var0
  bool holds = false;         // both within 3 SE
};

SandwichReport variance_sandwich_check(const PosteriorTable& table, const std::function<double(const Point&)>& f,
                                       double t, double lambda0, const PathOptions& opts);

struct MonotoneReport {
  std::vector<double> times;
  std::vector<Estimate> mean_var;
  std::vector<Estimate> increments;  // per-path Var_{t_{k+1}} - Var_{t_k}
  double max_increment_z = 0.0;
  bool holds = false;                 // every increment <= 3 SE
};

/// E Var_{p_t}(f) along a time grid, with paired per-path differences.
MonotoneReport variance_monotonicity(const PosteriorTable& table, const std::function<double(const Point&)>& f,
                                     const std::vector<double>& times, const PathOptions& opts);

struct LocalizedBochnerReport {
  double t = 0.0;
  double lhs = 0.0;       // int (Lu)^2 dmu + t int |grad u|^2 dmu
  Estimate rhs;           // E int (L_t u)^2 dmu_t
  double z = 0.0;
  double max_path_deviation = 0.0;  // max |per-path value - lhs|
};

LocalizedBochnerReport localized_bochner_check(const PosteriorTable& table, const TestFunction& u, double t,
                                               const PathOptions& opts);

struct RestartReport {
  double t = 0.0;
  double lambda0 = 0.0;
  std::size_t paths = 0;
  double worst_upper_slack = 0.0;  // min over paths of lambda_t - sqrt(t / ||A_t||)
  double worst_lower_slack = 0.0;  // min over paths of sqrt(t / ||A_t||) - t
  Estimate lambda_t;
  Estimate sqrt_cov_over_t;        // E sqrt(||A_t|| / t)
  Estimate cov_op;                 // E ||A_t||_op
  double ratio = 0.0;              // (1 / lambda0) / E sqrt(||A_t|| / t)
};

/// Per-path eigen-solves of the tilted density on its own lattice.
RestartReport spectral_restart_check(const PosteriorTable& table, double t, double lambda0, const PathOptions& opts,
                                     int lattice_points = 2001);

struct SchemeReport {
  double horizon = 0.0;
  int steps = 0;
  double max_coupled_gap = 0.0;  // max |theta_T^euler - theta_T^repr| on innovation-coupled paths
  Estimate repr_mean, euler_mean;
  double repr_var = 0.0, euler_var = 0.0;
  double repr_var_se = 0.0, euler_var_se = 0.0;
  double mean_z = 0.0, var_z = 0.0;
};

/// Representation against Euler: pathwise on `coupled_paths` innovation-coupled
/// paths, and in law (first coordinate mean and variance) on independent paths.
SchemeReport scheme_agreement_check(const PosteriorTable& table, double horizon, int steps, std::size_t coupled_paths,
                                    const PathOptions& opts);

}  // namespace lclab
