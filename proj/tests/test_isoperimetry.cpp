#include "doctest.h"

#include "lclab/isoperimetry.hpp"
#include "lclab/moments.hpp"

#include <cmath>
#include <numbers>

using namespace lclab;

namespace {
const double kPi = std::numbers::pi;
Grid line(double lo, double hi, int points) { return Grid(make_box({{lo, hi}}), {points}); }
}  // namespace

TEST_CASE("cheeger 1d: closed forms") {
  const auto g = cheeger_1d(gaussian(1, 1.0), line(-8, 8, 4001));
  CHECK(g.psi == doctest::Approx(std::sqrt(kPi / 2)).epsilon(1e-6));
  CHECK(std::abs(g.offset) <= 1e-4);
  CHECK(g.exact);
  const Density e = centered_exponential();
  CHECK(cheeger_1d(e, default_grid(e)).psi == doctest::Approx(1.0).epsilon(1e-6));
  const Density u = uniform_box(make_box({{0, 1}}));
  const auto ur = cheeger_1d(u, line(0, 1, 4001));
  CHECK(ur.psi == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("cheeger 1d: stable under refinement") {
  const Density d = tilt(uniform_box(make_box({{-1, 1}})), 2.0, Point::Constant(1, 0.5));
  const double a = cheeger_1d(d, line(-1, 1, 401)).psi;
  const double b = cheeger_1d(d, line(-1, 1, 801)).psi;
  CHECK(std::abs(a - b) <= 2.0 / 400);
}

TEST_CASE("half-space profile: gaussian plane matches the line") {
  const auto rep = halfspace_profile(gaussian(2, 1.0), direction_set(2, 16));
  CHECK(rep.infimum == doctest::Approx(std::sqrt(2 / kPi)).epsilon(2e-3));
  CHECK_FALSE(rep.exact);
}

TEST_CASE("half-space profile: product with an exponential") {
  const Density d = product({gaussian(1, 1.0), centered_exponential()});
  const auto rep = halfspace_profile(d, direction_set(2, 16));
  CHECK(rep.infimum <= std::min(std::sqrt(2 / kPi), 1.0) + 1e-3);
  CHECK(rep.infimum > 0.0);
}

TEST_CASE("half-space profile never beats the 1d constant") {
  const Density g = gaussian(1, 1.0);
  const auto exact = cheeger_1d(g, line(-8, 8, 4001));
  const auto hs = halfspace_profile(g, direction_set(1, 2));
  CHECK(hs.psi <= exact.psi + 1e-9);
}

TEST_CASE("buser sandwich: 1d witnesses") {
  {
    const Density g = gaussian(1, 1.0);
    const Grid grid = line(-8, 8, 4001);
    const auto rep = buser_sandwich_check(cheeger_1d(g, grid), spectral_gap(g, grid));
    CHECK(rep.ratio == doctest::Approx(kPi / 2).epsilon(1e-3));
    CHECK(rep.holds);
  }
  {
    const Density e = centered_exponential();
    const Grid grid = default_grid(e);
    const auto rep = buser_sandwich_check(cheeger_1d(e, grid), spectral_gap(e, grid));
    CHECK(std::abs(rep.ratio - 0.25) <= 1e-2);
    CHECK(rep.holds);
  }
  {
    const Density u = uniform_box(make_box({{0, 1}}));
    const Grid grid = line(0, 1, 4001);
    const auto rep = buser_sandwich_check(cheeger_1d(u, grid), spectral_gap(u, grid));
    CHECK(rep.ratio == doctest::Approx(kPi * kPi / 4).epsilon(1e-3));
    CHECK(rep.holds);
  }
}

TEST_CASE("buser sandwich: isotropized triangle uses the one-sided test") {
  const Density tri = isotropize(uniform_polytope(2, {{Point(Eigen::Vector2d(-1, 0)), 0.0},
                                                      {Point(Eigen::Vector2d(0, -1)), 0.0},
                                                      {Point(Eigen::Vector2d(1, 1)), 1.0}}));
  const auto iso = halfspace_profile(tri, direction_set(2, 24), ProfileOptions{48, 50});
  CHECK(std::isfinite(iso.psi));
  CHECK(iso.psi > 0.0);
  const Box b = tri.effective_box();
  const DiscreteOperator op(tri, Grid(b, {121, 121}), OperatorOptions{true});
  const auto rep = buser_sandwich_check(iso, spectral_gap(op));
  CHECK_FALSE(rep.exact);
  CHECK(rep.holds);
}

TEST_CASE("lipschitz witnesses") {
  const Point one = Point::Constant(1, 1.0);
  {
    const DiscreteOperator op(gaussian(1, 1.0), line(-8, 8, 4001));
    const auto rep = lipschitz_variance_ratio(op, spectral_gap(op), direction_set(1, 2));
    CHECK(rep.ratio == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(rep.worst_poincare_slack >= -1e-8);
  }
  {
    const double s3 = std::sqrt(3.0);
    const DiscreteOperator op(uniform_box(make_box({{-s3, s3}})), line(-s3, s3, 4001));
    const auto rep = lipschitz_variance_ratio(op, spectral_gap(op), direction_set(1, 2), {{one, 0.0}});
    CHECK(rep.ratio == doctest::Approx(kPi * kPi / 12).epsilon(1e-3));
    CHECK(rep.worst_poincare_slack >= -1e-8);
  }
  {
    const Density e = centered_exponential();
    const DiscreteOperator op(e, default_grid(e));
    const auto rep = lipschitz_variance_ratio(op, spectral_gap(op), direction_set(1, 2));
    CHECK(std::abs(rep.ratio - 0.25) <= 5e-3);
    CHECK(rep.worst_poincare_slack >= -1e-8);
  }
}
