#pragma once

#include "lclab/density.hpp"

#include <mutex>

namespace lclab::detail {

struct NormalizerCache {
  std::once_flag once;
  double log_z = 0.0;
};

class DensityNode {
 public:
  virtual ~DensityNode() = default;

  virtual DensityKind kind() const = 0;
  virtual int dim() const = 0;
  /// Potential up to an additive constant; +inf outside the support.
  virtual double potential(const Point& x) const = 0;
  virtual Point grad(const Point& x) const = 0;
  virtual Mat hess(const Point& x) const = 0;
  virtual Box effective_box() const = 0;
  virtual double length_scale() const = 0;
  virtual double uniform_convexity() const = 0;
  virtual double hessian_upper_bound() const { return kInf; }
  virtual std::optional<double> closed_log_normalizer() const { return std::nullopt; }
  virtual std::string describe() const = 0;

  const Support& support() const { return support_; }

 protected:
  Support support_;
};

class GaussianNode final : public DensityNode {
 public:
  GaussianNode(Point mean, double s);
  DensityKind kind() const override { return DensityKind::Gaussian; }
  int dim() const override { return static_cast<int>(mean_.size()); }
  double potential(const Point& x) const override;
  Point grad(const Point& x) const override;
  Mat hess(const Point& x) const override;
  Box effective_box() const override;
  double length_scale() const override;
  double uniform_convexity() const override { return 1.0 / s_; }
  double hessian_upper_bound() const override { return 1.0 / s_; }
  std::optional<double> closed_log_normalizer() const override { return 0.0; }
  std::string describe() const override;

  const Point& mean() const { return mean_; }
  double s() const { return s_; }

 private:
  Point mean_;
  double s_;
};

class UniformBoxNode final : public DensityNode {
 public:
  explicit UniformBoxNode(Box box);
  DensityKind kind() const override { return DensityKind::UniformBox; }
  int dim() const override { return box_.dim(); }
  double potential(const Point& x) const override;
  Point grad(const Point& x) const override;
  Mat hess(const Point& x) const override;
  Box effective_box() const override { return box_; }
  double length_scale() const override;
  double uniform_convexity() const override { return 0.0; }
  std::optional<double> closed_log_normalizer() const override { return 0.0; }
  std::string describe() const override;

  const Box& box() const { return box_; }

 private:
  Box box_;
  double log_volume_;
};

class ExponentialNode final : public DensityNode {
 public:
  ExponentialNode();
  DensityKind kind() const override { return DensityKind::Exponential; }
  int dim() const override { return 1; }
  double potential(const Point& x) const override;
  Point grad(const Point& x) const override;
  Mat hess(const Point& x) const override;
  Box effective_box() const override;
  double length_scale() const override { return 1.0; }
  double uniform_convexity() const override { return 0.0; }
  std::optional<double> closed_log_normalizer() const override { return 0.0; }
  std::string describe() const override { return "exponential"; }
};

/// Uniform law on a polytope (half-space list) or a Euclidean ball.
class UniformRegionNode final : public DensityNode {
 public:
  UniformRegionNode(int dim, std::vector<Halfspace> hs);
  UniformRegionNode(Point center, double radius);
  DensityKind kind() const override {
    return support_.ball ? DensityKind::UniformBall : DensityKind::UniformPolytope;
  }
  int dim() const override { return support_.dim; }
  double potential(const Point& x) const override;
  Point grad(const Point& x) const override;
  Mat hess(const Point& x) const override;
  Box effective_box() const override { return bbox_; }
  double length_scale() const override;
  double uniform_convexity() const override { return 0.0; }
  std::optional<double> closed_log_normalizer() const override { return 0.0; }
  std::string describe() const override;

  double volume() const { return volume_; }

 private:
  Box bbox_;
  double volume_ = 0.0;
};

class ProductNode final : public DensityNode {
 public:
  explicit ProductNode(std::vector<Density> factors);
  DensityKind kind() const override { return DensityKind::Product; }
  int dim() const override { return dim_; }
  double potential(const Point& x) const override;
  Point grad(const Point& x) const override;
  Mat hess(const Point& x) const override;
  Box effective_box() const override;
  double length_scale() const override;
  double uniform_convexity() const override;
  double hessian_upper_bound() const override;
  std::optional<double> closed_log_normalizer() const override;
  std::string describe() const override;

  const std::vector<Density>& factors() const { return factors_; }
  const std::vector<int>& offsets() const { return offsets_; }

 private:
  std::vector<Density> factors_;
  std::vector<int> offsets_;
  int dim_ = 0;
};

class TiltNode final : public DensityNode {
 public:
  TiltNode(Density base, double t, Point theta);
  DensityKind kind() const override { return DensityKind::Tilt; }
  int dim() const override { return base_.dim(); }
  double potential(const Point& x) const override;
  Point grad(const Point& x) const override;
  Mat hess(const Point& x) const override;
  Box effective_box() const override { return box_; }
  double length_scale() const override;
  double uniform_convexity() const override { return base_.uniform_convexity() + t_; }
  double hessian_upper_bound() const override { return base_.hessian_upper_bound() + t_; }
  std::string describe() const override;

  const Density& base() const { return base_; }
  double t() const { return t_; }
  const Point& theta() const { return theta_; }

 private:
  Density base_;
  double t_;
  Point theta_;
  Box box_;
};

/// Law of A X + b.
class AffineNode final : public DensityNode {
 public:
  AffineNode(Density base, Mat a, Point b);
  DensityKind kind() const override { return DensityKind::Affine; }
  int dim() const override { return base_.dim(); }
  double potential(const Point& x) const override;
  Point grad(const Point& x) const override;
  Mat hess(const Point& x) const override;
  Box effective_box() const override { return box_; }
  double length_scale() const override;
  double uniform_convexity() const override;
  double hessian_upper_bound() const override;
  std::optional<double> closed_log_normalizer() const override;
  std::string describe() const override;

  const Density& base() const { return base_; }
  const Mat& a() const { return a_; }
  const Point& b() const { return b_; }

 private:
  Density base_;
  Mat a_;
  Mat a_inv_;
  Point b_;
  double log_det_;
  Box box_;
};

/// rho * gamma_s evaluated by quadrature over the base density.
class ConvolutionNode final : public DensityNode {
 public:
  ConvolutionNode(Density base, double s);
  DensityKind kind() const override { return DensityKind::Convolution; }
  int dim() const override { return base_.dim(); }
  double potential(const Point& x) const override;
  Point grad(const Point& x) const override;
  Mat hess(const Point& x) const override;
  Box effective_box() const override { return box_; }
  double length_scale() const override;
  double uniform_convexity() const override;
  double hessian_upper_bound() const override;
  std::optional<double> closed_log_normalizer() const override { return 0.0; }
  std::string describe() const override;

  const Density& base() const { return base_; }
  double s() const { return s_; }

  struct Posterior {
    double log_integral = -kInf;  // log (rho * gamma_s)(x)
    Point mean;
    Mat cov;
  };
  /// Moments of the law proportional to rho(y) gamma_s(x - y).
  Posterior posterior(const Point& x) const;

 private:
  Density base_;
  double s_;
  Box box_;
};

/// Shrinks a candidate box to the lattice cells where the potential is within
/// `drop` of its minimum.
Box trim_box(const DensityNode& node, const Box& candidate, double drop);

}  // namespace lclab::detail
