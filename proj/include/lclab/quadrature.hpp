#pragma once

#include "lclab/density.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace lclab {

namespace detail {
struct SamplerPlan;
}

enum class QuadRule { Trapezoid, Simpson, Gauss };

/// Tensor lattice over a box with per-axis quadrature weights.
class Grid {
 public:
  Grid(Box box, std::vector<int> points_per_axis, QuadRule rule = QuadRule::Trapezoid);

  int dim() const { return box_.dim(); }
  const Box& box() const { return box_; }
  QuadRule rule() const { return rule_; }
  const std::vector<int>& shape() const { return n_; }
  std::size_t size() const { return size_; }

  /// Spacing of a uniform axis (trapezoid and Simpson rules).
  double spacing(int axis) const;
  const std::vector<double>& axis_nodes(int axis) const { return nodes_[axis]; }
  const std::vector<double>& axis_weights(int axis) const { return weights_[axis]; }

  Point node(std::size_t flat) const;
  double weight(std::size_t flat) const;
  /// Multi-index of a flat index; axis 0 varies fastest.
  std::vector<int> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::vector<int>& idx) const;
  std::size_t stride(int axis) const { return stride_[axis]; }

  /// Same box, points per axis 2(n-1)+1.
  Grid refined() const;
  std::string describe() const;

 private:
  Box box_;
  std::vector<int> n_;
  QuadRule rule_;
  std::vector<std::vector<double>> nodes_;
  std::vector<std::vector<double>> weights_;
  std::vector<std::size_t> stride_;
  std::size_t size_ = 0;
};

/// 4001 points per axis in 1D (401 in 2D, 61 in 3D) over the effective box.
Grid default_grid(const Density& d, QuadRule rule = QuadRule::Trapezoid);

/// Normalized density values at the grid nodes (zero outside the support).
std::vector<double> density_on_grid(const Density& d, const Grid& grid);

/// Throws MassLeakage when the density one step outside a boundary node
/// exceeds `rel_tol` times the maximum on the grid.
void check_mass_leakage(const Density& d, const Grid& grid, double rel_tol = 1e-10);

/// Integral of f against the normalized density.
double integrate(const std::function<double(const Point&)>& f, const Density& d, const Grid& grid);

/// Draws i.i.d. points from a catalog density.
///
/// Gaussians, boxes, balls, simplices and the exponential are sampled
/// directly; products and affine images by composition; other 1D densities by
/// inverse CDF on a fine table; other 2D/3D densities by drawing a lattice cell
/// in proportion to its mass and jittering uniformly inside it.
class Sampler {
 public:
  Sampler(Density d, std::uint64_t master_seed);

  const Density& density() const { return d_; }
  std::uint64_t seed() const { return seed_; }

  Point draw();
  /// Draw using an external generator. Plans keep no state between draws, so
  /// the result depends only on `rng`.
  Point draw(std::mt19937_64& rng);
  std::vector<Point> sample(std::size_t count);
  /// Independent stream for a worker, derived from (master_seed, index).
  Sampler stream(std::uint64_t worker_index) const;

 private:
  Sampler(Density d, std::uint64_t seed, std::shared_ptr<detail::SamplerPlan> plan);

  Density d_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  std::shared_ptr<detail::SamplerPlan> plan_;
};

/// Writes "x1,..,xn" rows with a header.
void write_samples_csv(const std::string& path, const std::vector<Point>& pts);

}  // namespace lclab
