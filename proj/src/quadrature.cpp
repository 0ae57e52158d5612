#include "lclab/quadrature.hpp"

#include "density_nodes.hpp"
#include "lclab/errors.hpp"
#include "lclab/util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace lclab {

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(Box box, std::vector<int> points_per_axis, QuadRule rule)
    : box_(std::move(box)), n_(std::move(points_per_axis)), rule_(rule) {
  const int d = box_.dim();
  if (d < 1 || d > kMaxDim) throw Error("grid dimension must be 1..3");
  if (static_cast<int>(n_.size()) != d) throw Error("grid: one point count per axis required");
  size_ = 1;
  for (int i = 0; i < d; ++i) {
    const int n = n_[i];
    const double lo = box_.lo[i], hi = box_.hi[i];
    if (!(hi > lo)) throw Error("grid: empty axis");
    if (n < 2) throw Error("grid: need at least two points per axis");
    std::vector<double> x(n), w(n);
    switch (rule_) {
      case QuadRule::Trapezoid: {
        const double h = (hi - lo) / (n - 1);
        for (int k = 0; k < n; ++k) {
          x[k] = lo + k * h;
          w[k] = h;
        }
        w.front() = w.back() = 0.5 * h;
        break;
      }
      case QuadRule::Simpson: {
        if (n % 2 == 0) throw Error("grid: Simpson rule needs an odd point count");
        const double h = (hi - lo) / (n - 1);
        for (int k = 0; k < n; ++k) {
          x[k] = lo + k * h;
          w[k] = (k == 0 || k == n - 1) ? h / 3 : (k % 2 ? 4 * h / 3 : 2 * h / 3);
        }
        break;
      }
      case QuadRule::Gauss: {
        const auto& g = gauss_legendre(n);
        for (int k = 0; k < n; ++k) {
          x[k] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * g.nodes[k];
          w[k] = 0.5 * (hi - lo) * g.weights[k];
        }
        break;
      }
    }
    nodes_.push_back(std::move(x));
    weights_.push_back(std::move(w));
    stride_.push_back(size_);
    size_ *= static_cast<std::size_t>(n);
  }
}

double Grid::spacing(int axis) const {
  if (rule_ == QuadRule::Gauss) throw Error("grid: Gauss axes are not uniform");
  return (box_.hi[axis] - box_.lo[axis]) / (n_[axis] - 1);
}

std::vector<int> Grid::unflatten(std::size_t flat) const {
  std::vector<int> idx(dim());
  for (int i = 0; i < dim(); ++i) {
    idx[i] = static_cast<int>(flat % n_[i]);
    flat /= n_[i];
  }
  return idx;
}

std::size_t Grid::flatten(const std::vector<int>& idx) const {
  std::size_t f = 0;
  for (int i = 0; i < dim(); ++i) f += stride_[i] * idx[i];
  return f;
}

Point Grid::node(std::size_t flat) const {
  Point x(dim());
  for (int i = 0; i < dim(); ++i) {
    x[i] = nodes_[i][flat % n_[i]];
    flat /= n_[i];
  }
  return x;
}

double Grid::weight(std::size_t flat) const {
  double w = 1.0;
  for (int i = 0; i < dim(); ++i) {
    w *= weights_[i][flat % n_[i]];
    flat /= n_[i];
  }
  return w;
}

Grid Grid::refined() const {
  std::vector<int> n2;
  for (int n : n_) n2.push_back(2 * (n - 1) + 1);
  return Grid(box_, n2, rule_);
}

std::string Grid::describe() const {
  std::string out = "grid:box=";
  for (int i = 0; i < dim(); ++i) {
    if (i) out += 'x';
    out += "[" + fmt_num(box_.lo[i]) + "," + fmt_num(box_.hi[i]) + "]";
  }
  out += ",n=";
  for (int i = 0; i < dim(); ++i) {
    if (i) out += 'x';
    out += std::to_string(n_[i]);
  }
  if (rule_ == QuadRule::Simpson) out += ",rule=simpson";
  if (rule_ == QuadRule::Gauss) out += ",rule=gauss";
  return out;
}

Grid default_grid(const Density& d, QuadRule rule) {
  static constexpr int kPoints[] = {4001, 401, 61};
  return Grid(d.effective_box(), std::vector<int>(d.dim(), kPoints[d.dim() - 1]), rule);
}

std::vector<double> density_on_grid(const Density& d, const Grid& grid) {
  std::vector<double> rho(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) rho[k] = d.density(grid.node(k));
  return rho;
}

void check_mass_leakage(const Density& d, const Grid& grid, double rel_tol) {
  const int n = grid.dim();
  double vmax = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) vmax = std::max(vmax, d.density(grid.node(k)));
  if (!(vmax > 0.0)) throw MassLeakage("density vanishes on the grid: " + d.describe());
  const Box& b = grid.box();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto idx = grid.unflatten(k);
    for (int i = 0; i < n; ++i) {
      const bool at_lo = idx[i] == 0, at_hi = idx[i] == grid.shape()[i] - 1;
      if (!at_lo && !at_hi) continue;
      Point x = grid.node(k);
      const double step = (b.hi[i] - b.lo[i]) / (grid.shape()[i] - 1);
      x[i] += at_lo ? -step : step;
      if (d.density(x) > rel_tol * vmax)
        throw MassLeakage("grid " + grid.describe() + " truncates the mass of " + d.describe());
    }
  }
}

double integrate(const std::function<double(const Point&)>& f, const Density& d, const Grid& grid) {
  check_mass_leakage(d, grid);
  double acc = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point x = grid.node(k);
    const double rho = d.density(x);
    if (rho > 0.0) acc += grid.weight(k) * rho * f(x);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Sampler

namespace detail {

struct SamplerPlan {
  enum class Kind { Gaussian, Box, Ball, Simplex, Reject, Exponential, Product, Affine, Table, Cells };
  Kind kind = Kind::Gaussian;
  int dim = 1;
  Point mean;
  double sd = 1.0;
  Box box;
  double radius = 0.0;
  std::vector<Point> vertices;
  std::vector<Halfspace> halfspaces;
  std::vector<SamplerPlan> children;
  std::vector<int> offsets;
  Mat a;
  // 1D table: nodes and CDF values.
  std::vector<double> xs, cdf;
  // Lattice cells: lower corner, cell size, cells per axis.
  Point cell_lo, cell_h;
  std::vector<int> cell_shape;
  std::discrete_distribution<std::size_t> cells;
};

}  // namespace detail

namespace {

using detail::SamplerPlan;
using PlanKind = SamplerPlan::Kind;

constexpr int kTablePoints = 20001;

SamplerPlan table_plan(const Density& d) {
  SamplerPlan p;
  p.kind = PlanKind::Table;
  const Box b = d.effective_box();
  const int n = kTablePoints;
  const double h = (b.hi[0] - b.lo[0]) / (n - 1);
  p.xs.resize(n);
  std::vector<double> rho(n);
  for (int k = 0; k < n; ++k) {
    p.xs[k] = b.lo[0] + k * h;
    rho[k] = d.density(Point::Constant(1, p.xs[k]));
  }
  p.cdf.assign(n, 0.0);
  for (int k = 1; k < n; ++k) p.cdf[k] = p.cdf[k - 1] + 0.5 * h * (rho[k - 1] + rho[k]);
  const double total = p.cdf.back();
  if (!(total > 0.0)) throw UnsupportedDensity("cannot tabulate " + d.describe());
  for (double& c : p.cdf) c /= total;
  return p;
}

SamplerPlan cells_plan(const Density& d) {
  SamplerPlan p;
  p.kind = PlanKind::Cells;
  p.dim = d.dim();
  const Box b = d.effective_box();
  const int m = d.dim() == 2 ? 400 : 64;
  p.cell_shape.assign(d.dim(), m);
  p.cell_lo = b.lo;
  p.cell_h = (b.hi - b.lo) / m;
  std::size_t total = 1;
  for (int i = 0; i < d.dim(); ++i) total *= m;
  std::vector<double> mass(total);
  for (std::size_t c = 0; c < total; ++c) {
    Point x(d.dim());
    std::size_t r = c;
    for (int i = 0; i < d.dim(); ++i) {
      x[i] = b.lo[i] + (static_cast<double>(r % m) + 0.5) * p.cell_h[i];
      r /= m;
    }
    mass[c] = d.density(x);
  }
  p.cells = std::discrete_distribution<std::size_t>(mass.begin(), mass.end());
  p.halfspaces = d.support().halfspaces;
  if (d.support().ball) {
    p.mean = d.support().ball->center;
    p.radius = d.support().ball->radius;
  }
  return p;
}

SamplerPlan make_plan(const Density& d) {
  using detail::AffineNode;
  using detail::ProductNode;
  using detail::UniformBoxNode;
  SamplerPlan p;
  p.dim = d.dim();
  if (auto g = d.as_gaussian()) {
    p.kind = PlanKind::Gaussian;
    p.mean = g->mean;
    p.sd = std::sqrt(g->s);
    return p;
  }
  switch (d.kind()) {
    case DensityKind::UniformBox:
      p.kind = PlanKind::Box;
      p.box = static_cast<const UniformBoxNode&>(d.node()).box();
      return p;
    case DensityKind::Exponential:
      p.kind = PlanKind::Exponential;
      return p;
    case DensityKind::UniformBall:
      p.kind = PlanKind::Ball;
      p.mean = d.support().ball->center;
      p.radius = d.support().ball->radius;
      return p;
    case DensityKind::UniformPolytope: {
      Region r{d.dim(), d.support().halfspaces, std::nullopt};
      p.vertices = r.vertices();
      p.halfspaces = d.support().halfspaces;
      p.box = d.effective_box();
      p.kind = static_cast<int>(p.vertices.size()) == d.dim() + 1 ? PlanKind::Simplex : PlanKind::Reject;
      return p;
    }
    case DensityKind::Product: {
      const auto& pn = static_cast<const ProductNode&>(d.node());
      p.kind = PlanKind::Product;
      for (const auto& f : pn.factors()) p.children.push_back(make_plan(f));
      p.offsets = pn.offsets();
      return p;
    }
    case DensityKind::Affine: {
      const auto& an = static_cast<const AffineNode&>(d.node());
      p.kind = PlanKind::Affine;
      p.children.push_back(make_plan(an.base()));
      p.a = an.a();
      p.mean = an.b();
      return p;
    }
    default:
      return d.dim() == 1 ? table_plan(d) : cells_plan(d);
  }
}

Point draw_plan(SamplerPlan& p, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = p.dim;
  switch (p.kind) {
    case PlanKind::Gaussian: {
      Point x(n);
      for (int i = 0; i < n; ++i) x[i] = p.mean[i] + p.sd * normal(rng);
      return x;
    }
    case PlanKind::Box: {
      Point x(n);
      for (int i = 0; i < n; ++i) x[i] = p.box.lo[i] + (p.box.hi[i] - p.box.lo[i]) * unif(rng);
      return x;
    }
    case PlanKind::Exponential: {
      std::exponential_distribution<double> ex(1.0);
      return Point::Constant(1, ex(rng) - 1.0);
    }
    case PlanKind::Ball: {
      Point dir(n);
      do {
        for (int i = 0; i < n; ++i) dir[i] = normal(rng);
      } while (dir.norm() == 0.0);
      dir /= dir.norm();
      return p.mean + p.radius * std::pow(unif(rng), 1.0 / n) * dir;
    }
    case PlanKind::Simplex: {
      // Dirichlet(1,..,1) barycentric weights.
      std::exponential_distribution<double> ex(1.0);
      std::vector<double> e(p.vertices.size());
      double sum = 0.0;
      for (double& v : e) sum += (v = ex(rng));
      Point x = Point::Zero(n);
      for (std::size_t k = 0; k < e.size(); ++k) x += e[k] / sum * p.vertices[k];
      return x;
    }
    case PlanKind::Reject: {
      for (;;) {
        Point x(n);
        for (int i = 0; i < n; ++i) x[i] = p.box.lo[i] + (p.box.hi[i] - p.box.lo[i]) * unif(rng);
        bool inside = true;
        for (const auto& h : p.halfspaces) inside = inside && h.violation(x) <= 0.0;
        if (inside) return x;
      }
    }
    case PlanKind::Product: {
      int total = 0;
      for (const auto& c : p.children) total += c.dim;
      Point x(total);
      for (std::size_t k = 0; k < p.children.size(); ++k)
        x.segment(p.offsets[k], p.children[k].dim) = draw_plan(p.children[k], rng);
      return x;
    }
    case PlanKind::Affine:
      return p.a * draw_plan(p.children.front(), rng) + p.mean;
    case PlanKind::Table: {
      const double u = unif(rng);
      auto it = std::upper_bound(p.cdf.begin(), p.cdf.end(), u);
      std::size_t k = std::clamp<std::size_t>(it - p.cdf.begin(), 1, p.cdf.size() - 1);
      const double c0 = p.cdf[k - 1], c1 = p.cdf[k];
      const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
      return Point::Constant(1, p.xs[k - 1] + frac * (p.xs[k] - p.xs[k - 1]));
    }
    case PlanKind::Cells: {
      for (;;) {
        std::size_t c = p.cells(rng);
        Point x(n);
        for (int i = 0; i < n; ++i) {
          x[i] = p.cell_lo[i] + (static_cast<double>(c % p.cell_shape[i]) + unif(rng)) * p.cell_h[i];
          c /= p.cell_shape[i];
        }
        // Jitter may leave a curved or slanted support in boundary cells.
        bool inside = true;
        for (const auto& h : p.halfspaces) inside = inside && h.violation(x) <= 0.0;
        if (p.radius > 0.0) inside = inside && (x - p.mean).norm() <= p.radius;
        if (inside) return x;
      }
    }
  }
  return Point();
}

}  // namespace

Sampler::Sampler(Density d, std::uint64_t master_seed)
    : Sampler(d, master_seed, std::make_shared<detail::SamplerPlan>(make_plan(d))) {}

Sampler::Sampler(Density d, std::uint64_t seed, std::shared_ptr<detail::SamplerPlan> plan)
    : d_(std::move(d)), seed_(seed), rng_(seed), plan_(std::move(plan)) {}

Point Sampler::draw() { return draw_plan(*plan_, rng_); }

Point Sampler::draw(std::mt19937_64& rng) { return draw_plan(*plan_, rng); }

std::vector<Point> Sampler::sample(std::size_t count) {
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(draw());
  return out;
}

Sampler Sampler::stream(std::uint64_t worker_index) const {
  // Plans hold a stateful distribution object, so each stream gets its own copy.
  return Sampler(d_, derive_seed(seed_, worker_index), std::make_shared<detail::SamplerPlan>(*plan_));
}

void write_samples_csv(const std::string& path, const std::vector<Point>& pts) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  const int n = pts.empty() ? 1 : static_cast<int>(pts.front().size());
  for (int i = 0; i < n; ++i) out << (i ? ",x" : "x") << i + 1;
  out << '\n';
  for (const auto& p : pts) {
    for (int i = 0; i < p.size(); ++i) out << (i ? "," : "") << fmt_num(p[i]);
    out << '\n';
  }
}

}  // namespace lclab
