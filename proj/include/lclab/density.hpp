#pragma once

#include "lclab/region.hpp"
#include "lclab/types.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lclab {

namespace detail {
class DensityNode;
struct NormalizerCache;
}  // namespace detail

enum class DensityKind {
  Gaussian,
  UniformBox,
  Exponential,
  UniformPolytope,
  UniformBall,
  Product,
  Tilt,
  Affine,
  Convolution,
};

/// Law gamma_s shifted to `mean`: covariance s * Id.
struct GaussianParams {
  Point mean;
  double s = 1.0;
};

/// A log-concave probability density rho = exp(-psi) from a closed catalog.
///
/// Immutable and cheap to copy; the normalizing constant is computed on first
/// use (closed form where available, otherwise support-clipped Gauss-Legendre
/// quadrature) and published once.
class Density {
 public:
  explicit Density(std::shared_ptr<const detail::DensityNode> node);

  int dim() const;
  DensityKind kind() const;

  /// -psi(x) with the normalizing constant included; -inf outside the support.
  double log_density(const Point& x) const;
  double density(const Point& x) const;
  /// psi(x), +inf outside the support.
  double psi(const Point& x) const;
  /// psi up to an additive constant (the raw potential of the node).
  double potential(const Point& x) const;
  Point grad_psi(const Point& x) const;
  Mat hess_psi(const Point& x) const;

  const Support& support() const;
  /// Box holding all but a negligible (< 1e-20 relative) part of the mass,
  /// clipped to the support.
  Box effective_box() const;
  /// Characteristic length used to size quadrature panels.
  double length_scale() const;

  /// Largest known t with hess psi >= t Id on the support.
  double uniform_convexity() const;
  /// Known upper bound on hess psi (infinite when none, e.g. bounded support).
  double hessian_upper_bound() const;

  /// log of the integral of exp(-potential).
  double log_normalizer() const;
  bool log_normalizer_known() const;

  std::optional<GaussianParams> as_gaussian() const;
  std::string describe() const;

  const detail::DensityNode& node() const { return *node_; }
  const std::shared_ptr<const detail::DensityNode>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<const detail::DensityNode> node_;
  std::shared_ptr<detail::NormalizerCache> cache_;
};

// Catalog constructors.
Density gaussian(int dim, double s, std::optional<Point> mean = std::nullopt);
Density uniform_box(const Box& box);
/// exp(-(x+1)) on [-1, inf): mean 0, variance 1.
Density centered_exponential();
Density uniform_polytope(int dim, std::vector<Halfspace> halfspaces);
Density uniform_ball(const Point& center, double radius);
Density product(const std::vector<Density>& factors);
/// Law of A X + b for X with density d.
Density affine_image(const Density& d, const Mat& a, const Point& b);

/// p(x) proportional to exp(<theta, x> - t |x|^2 / 2) rho(x).
/// Throws DivergentNormalizer when t = 0 and the tilt is not integrable.
Density tilt(const Density& d, double t, const Point& theta);
/// rho * gamma_s.
Density convolve_gaussian(const Density& d, double s);
/// (rho * gamma_delta) gamma_{1/delta}, normalized; smooth and positive on
/// all of space with delta <= hess psi <= delta + 1/delta.
Density regularize(const Density& d, double delta);

/// Region covering the support intersected with the effective box.
Region support_region(const Density& d);
/// Quadrature rule sized to the density's length scale and dimension.
RegionRule default_region_rule(const Density& d);

/// Minimum over the given points of the smallest Hessian eigenvalue.
double min_hessian_eigenvalue(const Density& d, const std::vector<Point>& points);
double max_hessian_eigenvalue(const Density& d, const std::vector<Point>& points);

/// Deterministic probe points strictly inside the effective support.
std::vector<Point> probe_points(const Density& d, int per_axis);

}  // namespace lclab
