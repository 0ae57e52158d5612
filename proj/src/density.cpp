#include "density_nodes.hpp"

#include "lclab/errors.hpp"
#include "lclab/util.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lclab {

using detail::AffineNode;
using detail::ConvolutionNode;
using detail::DensityNode;
using detail::ExponentialNode;
using detail::GaussianNode;
using detail::ProductNode;
using detail::TiltNode;
using detail::UniformBoxNode;
using detail::UniformRegionNode;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

Mat identity(int n) { return Mat::Identity(n, n); }

Box bbox_of(const std::vector<Point>& pts) {
  Box b{pts.front(), pts.front()};
  for (const auto& p : pts) {
    b.lo = b.lo.cwiseMin(p);
    b.hi = b.hi.cwiseMax(p);
  }
  return b;
}

Box expand(const Box& b, double margin) {
  Box r = b;
  r.lo.array() -= margin;
  r.hi.array() += margin;
  return r;
}

std::vector<Point> box_corners(const Box& b) {
  const int n = b.dim();
  std::vector<Point> out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    Point p(n);
    for (int i = 0; i < n; ++i) p[i] = (mask >> i) & 1 ? b.hi[i] : b.lo[i];
    out.push_back(p);
  }
  return out;
}

/// Bounding box of the support when bounded.
std::optional<Box> support_bbox(const Support& s) {
  if (s.kind == Support::Kind::AllSpace) return std::nullopt;
  if (s.ball) {
    return Box{s.ball->center.array() - s.ball->radius, s.ball->center.array() + s.ball->radius};
  }
  if (!bounded_polytope(s.dim, s.halfspaces)) return std::nullopt;
  Region r{s.dim, s.halfspaces, std::nullopt};
  auto vs = r.vertices();
  if (vs.empty()) return std::nullopt;
  return bbox_of(vs);
}

// Clips a box to the support: the bounding box when the support is bounded,
// otherwise the coordinate half-spaces of an unbounded polytope.
Box clip_to_support(Box b, const Support& s) {
  if (auto sb = support_bbox(s)) return b.intersect(*sb);
  if (s.kind == Support::Kind::AllSpace || s.ball) return b;
  for (const auto& h : s.halfspaces) {
    int axis = -1;
    for (int i = 0; i < h.normal.size(); ++i) {
      if (h.normal[i] == 0.0) continue;
      if (axis >= 0) {
        axis = -2;
        break;
      }
      axis = i;
    }
    if (axis < 0) continue;
    const double v = h.offset / h.normal[axis];
    if (h.normal[axis] > 0.0) b.hi[axis] = std::min(b.hi[axis], v);
    else b.lo[axis] = std::max(b.lo[axis], v);
  }
  return b;
}

}  // namespace

// ---------------------------------------------------------------------------
// Nodes

namespace detail {

GaussianNode::GaussianNode(Point mean, double s) : mean_(std::move(mean)), s_(s) {
  if (!(s_ > 0.0)) throw Error("gaussian: s must be positive");
  support_ = Support::all_space(dim());
}

double GaussianNode::potential(const Point& x) const {
  return (x - mean_).squaredNorm() / (2.0 * s_) + 0.5 * dim() * (kLog2Pi + std::log(s_));
}
Point GaussianNode::grad(const Point& x) const { return (x - mean_) / s_; }
Mat GaussianNode::hess(const Point&) const { return identity(dim()) / s_; }
Box GaussianNode::effective_box() const {
  const double r = 10.0 * std::sqrt(s_);
  return Box{mean_.array() - r, mean_.array() + r};
}
double GaussianNode::length_scale() const { return std::sqrt(s_); }
std::string GaussianNode::describe() const {
  std::string out = "gaussian:s=" + fmt_num(s_);
  if (dim() > 1) out += ",n=" + std::to_string(dim());
  if (!mean_.isZero(0.0)) out += ",mean=" + fmt_point(mean_, true);
  return out;
}

UniformBoxNode::UniformBoxNode(Box box) : box_(std::move(box)) {
  if (box_.empty()) throw Error("uniform box must have nonempty interior");
  support_ = Support::box(box_);
  log_volume_ = std::log(box_.volume());
}
double UniformBoxNode::potential(const Point& x) const {
  return box_.contains(x) ? log_volume_ : kInf;
}
Point UniformBoxNode::grad(const Point&) const { return Point::Zero(dim()); }
Mat UniformBoxNode::hess(const Point&) const { return Mat::Zero(dim(), dim()); }
double UniformBoxNode::length_scale() const { return (box_.hi - box_.lo).minCoeff(); }
std::string UniformBoxNode::describe() const {
  std::string out = "uniform:box=";
  for (int i = 0; i < dim(); ++i) {
    if (i) out += 'x';
    out += "[" + fmt_num(box_.lo[i]) + "," + fmt_num(box_.hi[i]) + "]";
  }
  return out;
}

ExponentialNode::ExponentialNode() {
  Point e = Point::Ones(1);
  support_ = Support::polytope(1, {{-e, 1.0}});
}
double ExponentialNode::potential(const Point& x) const { return x[0] >= -1.0 ? x[0] + 1.0 : kInf; }
Point ExponentialNode::grad(const Point&) const { return Point::Ones(1); }
Mat ExponentialNode::hess(const Point&) const { return Mat::Zero(1, 1); }
Box ExponentialNode::effective_box() const {
  // exp(-60) relative tail; the long window also keeps truncation effects on
  // spectral quantities small.
  return make_box({{-1.0, 59.0}});
}

UniformRegionNode::UniformRegionNode(int dim, std::vector<Halfspace> hs) {
  support_ = Support::polytope(dim, std::move(hs));
  if (!bounded_polytope(dim, support_.halfspaces)) throw Error("polytope is unbounded");
  Region region{dim, support_.halfspaces, std::nullopt};
  auto vs = region.vertices();
  if (static_cast<int>(vs.size()) < dim + 1) throw Error("polytope is empty");
  bbox_ = bbox_of(vs);
  RegionRule rule{8, 1, kInf};
  volume_ = integrate_region(region, rule, [](const Point&) { return 1.0; });
  if (!(volume_ > 0.0)) throw Error("polytope has empty interior");
}
UniformRegionNode::UniformRegionNode(Point center, double radius) {
  if (!(radius > 0.0)) throw Error("ball radius must be positive");
  support_ = Support::euclidean_ball(center, radius);
  const int n = static_cast<int>(center.size());
  bbox_ = Box{center.array() - radius, center.array() + radius};
  const double pi = std::numbers::pi;
  volume_ = n == 1 ? 2 * radius : n == 2 ? pi * radius * radius : 4.0 / 3.0 * pi * std::pow(radius, 3);
}
double UniformRegionNode::potential(const Point& x) const {
  return support_.contains(x) ? std::log(volume_) : kInf;
}
Point UniformRegionNode::grad(const Point&) const { return Point::Zero(dim()); }
Mat UniformRegionNode::hess(const Point&) const { return Mat::Zero(dim(), dim()); }
double UniformRegionNode::length_scale() const { return (bbox_.hi - bbox_.lo).minCoeff(); }
std::string UniformRegionNode::describe() const {
  if (support_.ball) {
    std::string out = "uniform:ball=" + fmt_num(support_.ball->radius) + ",n=" + std::to_string(dim());
    if (!support_.ball->center.isZero(0.0)) out += ",center=" + fmt_point(support_.ball->center);
    return out;
  }
  std::string out = "uniform:halfspaces=[";
  for (std::size_t i = 0; i < support_.halfspaces.size(); ++i) {
    if (i) out += ',';
    const auto& h = support_.halfspaces[i];
    out += '[';
    for (int k = 0; k < dim(); ++k) out += fmt_num(h.normal[k]) + ",";
    out += fmt_num(h.offset) + "]";
  }
  return out + "]";
}

ProductNode::ProductNode(std::vector<Density> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw Error("product needs at least one factor");
  std::vector<Halfspace> hs;
  bool bounded_any = false;
  for (const auto& f : factors_) {
    offsets_.push_back(dim_);
    dim_ += f.dim();
  }
  if (dim_ > kMaxDim) throw UnsupportedDensity("product dimension exceeds 3");
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    const auto& s = factors_[k].support();
    if (s.ball && factors_[k].dim() > 1) throw UnsupportedDensity("ball factor inside a product");
    if (s.kind != Support::Kind::AllSpace) bounded_any = true;
    auto lift = [&](const Halfspace& h) {
      Point n = Point::Zero(dim_);
      n.segment(offsets_[k], factors_[k].dim()) = h.normal;
      hs.push_back({n, h.offset});
    };
    for (const auto& h : s.halfspaces) lift(h);
    if (s.ball) {
      // 1D ball is an interval.
      Point e = Point::Ones(1);
      lift({e, s.ball->center[0] + s.ball->radius});
      lift({-e, -(s.ball->center[0] - s.ball->radius)});
    }
  }
  support_ = bounded_any ? Support::polytope(dim_, std::move(hs)) : Support::all_space(dim_);
}
double ProductNode::potential(const Point& x) const {
  double v = 0.0;
  for (std::size_t k = 0; k < factors_.size(); ++k)
    v += factors_[k].psi(x.segment(offsets_[k], factors_[k].dim()));
  return v;
}
Point ProductNode::grad(const Point& x) const {
  Point g(dim_);
  for (std::size_t k = 0; k < factors_.size(); ++k)
    g.segment(offsets_[k], factors_[k].dim()) =
        factors_[k].grad_psi(x.segment(offsets_[k], factors_[k].dim()));
  return g;
}
Mat ProductNode::hess(const Point& x) const {
  Mat h = Mat::Zero(dim_, dim_);
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    const int o = offsets_[k], d = factors_[k].dim();
    h.block(o, o, d, d) = factors_[k].hess_psi(x.segment(o, d));
  }
  return h;
}
Box ProductNode::effective_box() const {
  Box b{Point(dim_), Point(dim_)};
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    const Box fb = factors_[k].effective_box();
    b.lo.segment(offsets_[k], factors_[k].dim()) = fb.lo;
    b.hi.segment(offsets_[k], factors_[k].dim()) = fb.hi;
  }
  return b;
}
double ProductNode::length_scale() const {
  double s = kInf;
  for (const auto& f : factors_) s = std::min(s, f.length_scale());
  return s;
}
double ProductNode::uniform_convexity() const {
  double t = kInf;
  for (const auto& f : factors_) t = std::min(t, f.uniform_convexity());
  return t;
}
double ProductNode::hessian_upper_bound() const {
  double t = 0.0;
  for (const auto& f : factors_) t = std::max(t, f.hessian_upper_bound());
  return t;
}
// Factors are normalized, so the product is too.
std::optional<double> ProductNode::closed_log_normalizer() const { return 0.0; }
std::string ProductNode::describe() const {
  std::string out = "product:";
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    if (k) out += ',';
    out += "(" + factors_[k].describe() + ")";
  }
  return out;
}

TiltNode::TiltNode(Density base, double t, Point theta)
    : base_(std::move(base)), t_(t), theta_(std::move(theta)) {
  support_ = base_.support();
  Box cand = base_.effective_box();
  if (t_ > 0.0) {
    const Point c = theta_ / t_;
    const double r = 12.0 / std::sqrt(t_);
    Box win{c.array() - r, c.array() + r};
    // Mass sits where both factors are non-negligible; the union is a safe
    // starting point for the trim below.
    Box uni{cand.lo.cwiseMin(win.lo), cand.hi.cwiseMax(win.hi)};
    cand = clip_to_support(uni, support_);
  } else if (!support_bbox(support_)) {
    cand = clip_to_support(expand(cand, 0.5 * (cand.hi - cand.lo).maxCoeff()), support_);
  }
  box_ = trim_box(*this, cand, 60.0);
}
double TiltNode::potential(const Point& x) const {
  const double b = base_.potential(x);
  if (!std::isfinite(b)) return kInf;
  return b - theta_.dot(x) + 0.5 * t_ * x.squaredNorm();
}
Point TiltNode::grad(const Point& x) const { return base_.grad_psi(x) - theta_ + t_ * x; }
Mat TiltNode::hess(const Point& x) const { return base_.hess_psi(x) + t_ * identity(dim()); }
double TiltNode::length_scale() const {
  double s = base_.length_scale();
  if (t_ > 0.0) s = std::min(s, 1.0 / std::sqrt(t_ + base_.uniform_convexity()));
  return s;
}
std::string TiltNode::describe() const {
  return "tilt:base=(" + base_.describe() + "),t=" + fmt_num(t_) + ",theta=" + fmt_point(theta_, true);
}

AffineNode::AffineNode(Density base, Mat a, Point b)
    : base_(std::move(base)), a_(std::move(a)), b_(std::move(b)) {
  const int n = base_.dim();
  Eigen::FullPivLU<Mat> lu(a_);
  if (lu.rank() < n) throw SingularCovariance("affine map is singular");
  a_inv_ = lu.inverse();
  log_det_ = std::log(std::abs(a_.determinant()));
  const Support& bs = base_.support();
  if (bs.ball) {
    const Mat ata = a_.transpose() * a_;
    const double k2 = ata(0, 0);
    if (!(ata - k2 * identity(n)).isZero(1e-10 * k2))
      throw UnsupportedDensity("affine image of a ball must be a similarity");
    support_ = Support::euclidean_ball(a_ * bs.ball->center + b_, std::sqrt(k2) * bs.ball->radius);
  } else if (bs.kind == Support::Kind::AllSpace) {
    support_ = Support::all_space(n);
  } else {
    std::vector<Halfspace> hs;
    for (const auto& h : bs.halfspaces) {
      // <h, A^{-1}(y - b)> <= c
      Point nn = a_inv_.transpose() * h.normal;
      hs.push_back({nn, h.offset + nn.dot(b_)});
    }
    support_ = Support::polytope(n, std::move(hs));
  }
  std::vector<Point> corners;
  for (const auto& c : box_corners(base_.effective_box())) corners.push_back(a_ * c + b_);
  box_ = bbox_of(corners);
  box_ = clip_to_support(box_, support_);
}
double AffineNode::potential(const Point& y) const {
  return base_.potential(a_inv_ * (y - b_)) + log_det_;
}
Point AffineNode::grad(const Point& y) const {
  return a_inv_.transpose() * base_.grad_psi(a_inv_ * (y - b_));
}
Mat AffineNode::hess(const Point& y) const {
  return a_inv_.transpose() * base_.hess_psi(a_inv_ * (y - b_)) * a_inv_;
}
double AffineNode::length_scale() const {
  Eigen::JacobiSVD<Mat> svd(a_);
  return base_.length_scale() * svd.singularValues().minCoeff();
}
double AffineNode::uniform_convexity() const {
  Eigen::JacobiSVD<Mat> svd(a_inv_);
  const double smin = svd.singularValues().minCoeff();
  return base_.uniform_convexity() * smin * smin;
}
double AffineNode::hessian_upper_bound() const {
  Eigen::JacobiSVD<Mat> svd(a_inv_);
  const double smax = svd.singularValues().maxCoeff();
  return base_.hessian_upper_bound() * smax * smax;
}
std::optional<double> AffineNode::closed_log_normalizer() const {
  if (!base_.log_normalizer_known()) return std::nullopt;
  return base_.log_normalizer();
}
std::string AffineNode::describe() const {
  std::string out = "affine:base=(" + base_.describe() + "),A=[";
  for (int i = 0; i < a_.rows(); ++i) {
    if (i) out += ',';
    out += fmt_point(a_.row(i).transpose());
  }
  return out + "],b=" + fmt_point(b_);
}

ConvolutionNode::ConvolutionNode(Density base, double s) : base_(std::move(base)), s_(s) {
  if (!(s_ > 0.0)) throw Error("convolution: s must be positive");
  support_ = Support::all_space(base_.dim());
  box_ = expand(base_.effective_box(), 10.0 * std::sqrt(s_));
}

ConvolutionNode::Posterior ConvolutionNode::posterior(const Point& x) const {
  const int n = dim();
  const double sigma = std::sqrt(s_);
  const Box bb = base_.effective_box();
  Box win{Point(n), Point(n)};
  for (int i = 0; i < n; ++i) {
    const double c = std::clamp(x[i], bb.lo[i], bb.hi[i]);
    win.lo[i] = std::max(bb.lo[i], c - 12.0 * sigma);
    win.hi[i] = std::min(bb.hi[i], c + 12.0 * sigma);
  }
  const double log_z = base_.log_normalizer();
  std::vector<Point> ys;
  std::vector<double> ls;
  auto add = [&](const Point& y, double w) {
    const double pot = base_.potential(y);
    if (!std::isfinite(pot) || w <= 0.0) return;
    ys.push_back(y);
    ls.push_back(std::log(w) - pot - log_z - (x - y).squaredNorm() / (2.0 * s_));
  };
  if (n == 1) {
    const auto& g = gauss_legendre(20);
    const double a = win.lo[0], b = win.hi[0];
    const int panels = std::max(2, static_cast<int>(std::ceil((b - a) / (0.5 * sigma))));
    const double h = (b - a) / panels;
    Point y(1);
    for (int p = 0; p < panels; ++p)
      for (std::size_t k = 0; k < g.nodes.size(); ++k) {
        y[0] = a + h * (p + 0.5 * (g.nodes[k] + 1.0));
        add(y, 0.5 * h * g.weights[k]);
      }
  } else {
    Region region{n, box_halfspaces(win), std::nullopt};
    const Support& bs = base_.support();
    for (const auto& hsp : bs.halfspaces) region.halfspaces.push_back(hsp);
    region.ball = bs.ball;
    RegionRule rule{8, 2, sigma};
    for_each_region_node(region, rule, add);
  }
  Posterior post;
  post.mean = Point::Zero(n);
  post.cov = Mat::Zero(n, n);
  if (ls.empty()) return post;
  const double lmax = *std::max_element(ls.begin(), ls.end());
  double sum = 0.0;
  for (double l : ls) sum += std::exp(l - lmax);
  post.log_integral = lmax + std::log(sum) - 0.5 * n * (kLog2Pi + std::log(s_));
  for (std::size_t k = 0; k < ys.size(); ++k) post.mean += std::exp(ls[k] - lmax) / sum * ys[k];
  for (std::size_t k = 0; k < ys.size(); ++k) {
    const Point d = ys[k] - post.mean;
    post.cov += std::exp(ls[k] - lmax) / sum * d * d.transpose();
  }
  return post;
}
double ConvolutionNode::potential(const Point& x) const { return -posterior(x).log_integral; }
Point ConvolutionNode::grad(const Point& x) const { return (x - posterior(x).mean) / s_; }
Mat ConvolutionNode::hess(const Point& x) const {
  return identity(dim()) / s_ - posterior(x).cov / (s_ * s_);
}
double ConvolutionNode::length_scale() const {
  return std::min(base_.length_scale(), std::sqrt(s_)) + 0.0;
}
double ConvolutionNode::uniform_convexity() const {
  const double t = base_.uniform_convexity();
  return t > 0.0 ? 1.0 / (1.0 / t + s_) : 0.0;
}
double ConvolutionNode::hessian_upper_bound() const {
  return std::min(1.0 / s_, base_.hessian_upper_bound());
}
std::string ConvolutionNode::describe() const {
  return "convolve:base=(" + base_.describe() + "),s=" + fmt_num(s_);
}

Box trim_box(const DensityNode& node, const Box& candidate, double drop) {
  const int n = candidate.dim();
  const int m = n == 1 ? 1024 : n == 2 ? 128 : 40;
  const int total = static_cast<int>(std::pow(m, n));
  std::vector<double> vals(total);
  Point h = (candidate.hi - candidate.lo) / m;
  double vmin = kInf;
  Point x(n);
  for (int idx = 0; idx < total; ++idx) {
    int r = idx;
    for (int i = 0; i < n; ++i) {
      x[i] = candidate.lo[i] + (r % m + 0.5) * h[i];
      r /= m;
    }
    vals[idx] = node.potential(x);
    vmin = std::min(vmin, vals[idx]);
  }
  if (!std::isfinite(vmin)) return candidate;
  std::vector<int> lo(n, m), hi(n, -1);
  for (int idx = 0; idx < total; ++idx) {
    if (!(vals[idx] <= vmin + drop)) continue;
    int r = idx;
    for (int i = 0; i < n; ++i) {
      const int c = r % m;
      lo[i] = std::min(lo[i], c);
      hi[i] = std::max(hi[i], c);
      r /= m;
    }
  }
  Box out = candidate;
  for (int i = 0; i < n; ++i) {
    out.lo[i] = std::max(candidate.lo[i], candidate.lo[i] + (lo[i] - 1) * h[i]);
    out.hi[i] = std::min(candidate.hi[i], candidate.lo[i] + (hi[i] + 2) * h[i]);
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Density

Density::Density(std::shared_ptr<const DensityNode> node)
    : node_(std::move(node)), cache_(std::make_shared<detail::NormalizerCache>()) {}

int Density::dim() const { return node_->dim(); }
DensityKind Density::kind() const { return node_->kind(); }
double Density::potential(const Point& x) const { return node_->potential(x); }
double Density::psi(const Point& x) const { return node_->potential(x) + log_normalizer(); }
double Density::log_density(const Point& x) const { return -psi(x); }
double Density::density(const Point& x) const { return std::exp(log_density(x)); }
Point Density::grad_psi(const Point& x) const { return node_->grad(x); }
Mat Density::hess_psi(const Point& x) const { return node_->hess(x); }
const Support& Density::support() const { return node_->support(); }
Box Density::effective_box() const { return node_->effective_box(); }
double Density::length_scale() const { return node_->length_scale(); }
double Density::uniform_convexity() const { return node_->uniform_convexity(); }
double Density::hessian_upper_bound() const { return node_->hessian_upper_bound(); }
bool Density::log_normalizer_known() const { return node_->closed_log_normalizer().has_value(); }
std::string Density::describe() const { return node_->describe(); }

double Density::log_normalizer() const {
  std::call_once(cache_->once, [this] {
    if (auto z = node_->closed_log_normalizer()) {
      cache_->log_z = *z;
      return;
    }
    const Region region = support_region(*this);
    const RegionRule rule = default_region_rule(*this);
    // Shift by the potential at the box centre-ish minimum to avoid underflow.
    double pmin = kInf;
    std::vector<std::pair<Point, double>> nodes;
    for_each_region_node(region, rule, [&](const Point& u, double w) {
      const double p = node_->potential(u);
      if (std::isfinite(p)) {
        nodes.emplace_back(u, w);
        pmin = std::min(pmin, p);
      }
    });
    if (!std::isfinite(pmin)) throw DivergentNormalizer("density has no mass: " + describe());
    double acc = 0.0;
    for (const auto& [u, w] : nodes) acc += w * std::exp(-(node_->potential(u) - pmin));
    cache_->log_z = std::log(acc) - pmin;
  });
  return cache_->log_z;
}

std::optional<GaussianParams> Density::as_gaussian() const {
  if (const auto* g = dynamic_cast<const GaussianNode*>(node_.get()))
    return GaussianParams{g->mean(), g->s()};
  return std::nullopt;
}

Region support_region(const Density& d) {
  const Support& s = d.support();
  Region r{d.dim(), s.halfspaces, s.ball};
  for (const auto& h : box_halfspaces(d.effective_box())) r.halfspaces.push_back(h);
  return r;
}

RegionRule default_region_rule(const Density& d) {
  const double ls = d.length_scale();
  switch (d.dim()) {
    case 1:
      return RegionRule{16, 2, 0.5 * ls};
    case 2:
      return RegionRule{12, 2, ls};
    default:
      return RegionRule{8, 2, 1.5 * ls};
  }
}

// ---------------------------------------------------------------------------
// Catalog

Density gaussian(int dim, double s, std::optional<Point> mean) {
  if (dim < 1 || dim > kMaxDim) throw UnsupportedDensity("gaussian dimension must be 1..3");
  return Density(std::make_shared<GaussianNode>(mean.value_or(Point::Zero(dim)), s));
}

Density uniform_box(const Box& box) { return Density(std::make_shared<UniformBoxNode>(box)); }

Density centered_exponential() { return Density(std::make_shared<ExponentialNode>()); }

Density uniform_polytope(int dim, std::vector<Halfspace> halfspaces) {
  return Density(std::make_shared<UniformRegionNode>(dim, std::move(halfspaces)));
}

Density uniform_ball(const Point& center, double radius) {
  return Density(std::make_shared<UniformRegionNode>(center, radius));
}

Density product(const std::vector<Density>& factors) {
  if (factors.size() == 1) return factors.front();
  std::vector<Density> flat;
  for (const auto& f : factors) {
    if (const auto* p = dynamic_cast<const ProductNode*>(f.node_ptr().get())) {
      for (const auto& g : p->factors()) flat.push_back(g);
    } else {
      flat.push_back(f);
    }
  }
  return Density(std::make_shared<ProductNode>(std::move(flat)));
}

Density affine_image(const Density& d, const Mat& a, const Point& b) {
  const int n = d.dim();
  if (a.rows() != n || a.cols() != n || b.size() != n) throw Error("affine map has wrong shape");
  if (auto g = d.as_gaussian()) {
    const Mat aat = a * a.transpose();
    const double k2 = aat(0, 0);
    if ((aat - k2 * Mat::Identity(n, n)).isZero(1e-12 * k2))
      return gaussian(n, g->s * k2, Point(a * g->mean + b));
  }
  if (d.kind() == DensityKind::UniformPolytope) {
    Eigen::FullPivLU<Mat> lu(a);
    if (lu.rank() < n) throw SingularCovariance("affine map is singular");
    const Mat ainv_t = lu.inverse().transpose();
    std::vector<Halfspace> hs;
    for (const auto& h : d.support().halfspaces) {
      const Point nn = ainv_t * h.normal;
      hs.push_back({nn, h.offset + nn.dot(b)});
    }
    return uniform_polytope(n, std::move(hs));
  }
  if (d.kind() == DensityKind::UniformBall) {
    // Near-similarities (e.g. from a numerically isotropized ball) are snapped.
    const Mat ata = a.transpose() * a;
    const double k2 = ata.trace() / n;
    if ((ata - k2 * Mat::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-8 * k2)
      return uniform_ball(Point(a * d.support().ball->center + b), std::sqrt(k2) * d.support().ball->radius);
  }
  if (const auto* u = dynamic_cast<const UniformBoxNode*>(d.node_ptr().get())) {
    const Mat off = a - Mat(a.diagonal().asDiagonal());
    if (off.isZero(0.0)) {
      Box nb{Point(n), Point(n)};
      for (int i = 0; i < n; ++i) {
        const double p = a(i, i) * u->box().lo[i] + b[i];
        const double q = a(i, i) * u->box().hi[i] + b[i];
        nb.lo[i] = std::min(p, q);
        nb.hi[i] = std::max(p, q);
      }
      return uniform_box(nb);
    }
  }
  if (const auto* af = dynamic_cast<const AffineNode*>(d.node_ptr().get()))
    return affine_image(af->base(), Mat(a * af->a()), Point(a * af->b() + b));
  return Density(std::make_shared<AffineNode>(d, a, b));
}

namespace {

bool tilt_integrable(const Density& d, const Point& theta) {
  if (theta.isZero(0.0)) return true;
  if (d.uniform_convexity() > 0.0) return true;
  if (d.support().kind == Support::Kind::Ball) return true;
  if (support_bbox(d.support())) return true;
  switch (d.kind()) {
    case DensityKind::Exponential:
      return theta[0] < 1.0;
    case DensityKind::Product: {
      const auto* p = static_cast<const ProductNode*>(d.node_ptr().get());
      for (std::size_t k = 0; k < p->factors().size(); ++k)
        if (!tilt_integrable(p->factors()[k], theta.segment(p->offsets()[k], p->factors()[k].dim())))
          return false;
      return true;
    }
    case DensityKind::Tilt: {
      const auto* t = static_cast<const TiltNode*>(d.node_ptr().get());
      return t->t() > 0.0 || tilt_integrable(t->base(), Point(theta + t->theta()));
    }
    case DensityKind::Convolution:
      return tilt_integrable(static_cast<const ConvolutionNode*>(d.node_ptr().get())->base(), theta);
    default:
      return false;
  }
}

}  // namespace

Density tilt(const Density& d, double t, const Point& theta) {
  if (t < 0.0) throw Error("tilt: t must be nonnegative");
  if (theta.size() != d.dim()) throw Error("tilt: theta has wrong dimension");
  if (t == 0.0 && theta.isZero(0.0)) return d;
  if (t == 0.0 && !tilt_integrable(d, theta))
    throw DivergentNormalizer("tilt with t = 0 is not integrable for " + d.describe());
  if (auto g = d.as_gaussian()) {
    const double prec = 1.0 / g->s + t;
    return gaussian(d.dim(), 1.0 / prec, Point((g->mean / g->s + theta) / prec));
  }
  if (const auto* tn = dynamic_cast<const TiltNode*>(d.node_ptr().get()))
    return tilt(tn->base(), tn->t() + t, Point(tn->theta() + theta));
  if (const auto* p = dynamic_cast<const ProductNode*>(d.node_ptr().get())) {
    std::vector<Density> fs;
    for (std::size_t k = 0; k < p->factors().size(); ++k) {
      const auto& f = p->factors()[k];
      fs.push_back(tilt(f, t, theta.segment(p->offsets()[k], f.dim())));
    }
    return product(fs);
  }
  return Density(std::make_shared<TiltNode>(d, t, theta));
}

Density convolve_gaussian(const Density& d, double s) {
  if (!(s > 0.0)) throw Error("convolve_gaussian: s must be positive");
  if (auto g = d.as_gaussian()) return gaussian(d.dim(), g->s + s, g->mean);
  if (const auto* p = dynamic_cast<const ProductNode*>(d.node_ptr().get())) {
    std::vector<Density> fs;
    for (const auto& f : p->factors()) fs.push_back(convolve_gaussian(f, s));
    return product(fs);
  }
  return Density(std::make_shared<ConvolutionNode>(d, s));
}

Density regularize(const Density& d, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error("regularize: delta must lie in (0, 1)");
  return tilt(convolve_gaussian(d, delta), delta, Point::Zero(d.dim()));
}

double min_hessian_eigenvalue(const Density& d, const std::vector<Point>& points) {
  double m = kInf;
  for (const auto& x : points) m = std::min(m, sym_min_eigenvalue(d.hess_psi(x)));
  return m;
}

double max_hessian_eigenvalue(const Density& d, const std::vector<Point>& points) {
  double m = -kInf;
  for (const auto& x : points) m = std::max(m, sym_max_eigenvalue(d.hess_psi(x)));
  return m;
}

std::vector<Point> probe_points(const Density& d, int per_axis) {
  const Box b = d.effective_box();
  const int n = d.dim();
  std::vector<Point> out;
  int total = 1;
  for (int i = 0; i < n; ++i) total *= per_axis;
  for (int idx = 0; idx < total; ++idx) {
    Point x(n);
    int r = idx;
    for (int i = 0; i < n; ++i) {
      // Interior points, avoiding the far tails where evaluations underflow.
      const double frac = (r % per_axis + 0.5) / per_axis;
      const double c = 0.5 * (b.lo[i] + b.hi[i]);
      const double half = 0.5 * (b.hi[i] - b.lo[i]);
      x[i] = c + half * (2.0 * frac - 1.0) * 0.6;
      r /= per_axis;
    }
    if (d.support().contains(x, -1e-9)) out.push_back(x);
  }
  return out;
}

}  // namespace lclab
