#include "doctest.h"

#include "lclab/errors.hpp"
#include "lclab/moments.hpp"

#include <cmath>
#include <numbers>

using namespace lclab;

namespace {

Density triangle() {
  Point e1(2), e2(2), d(2);
  e1 << -1, 0;
  e2 << 0, -1;
  d << 1, 1;
  return uniform_polytope(2, {{e1, 0.0}, {e2, 0.0}, {d, 1.0}});
}

}  // namespace

TEST_CASE("moment reports of simple members") {
  auto g2 = moment_report(gaussian(2, 1.0));
  CHECK(g2.barycenter.norm() < 1e-8);
  CHECK((g2.covariance - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(g2.op_norm == doctest::Approx(1.0).epsilon(1e-8));

  auto u = uniform_box(make_box({{-1, 1}}));
  CHECK(moment_report(u).covariance(0, 0) == doctest::Approx(1.0 / 3).epsilon(1e-8));
  CHECK(moment_report(u, Grid(make_box({{-1, 1}}), {4001}, QuadRule::Simpson)).covariance(0, 0) ==
        doctest::Approx(1.0 / 3).epsilon(1e-8));

  auto t = tilt(gaussian(1, 1.0), 1.0, Point::Constant(1, 1.0));
  auto tr = moment_report(t, default_grid(t));
  CHECK(tr.barycenter[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(tr.covariance(0, 0) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("isotropize catalog members") {
  std::vector<Density> ds{uniform_box(make_box({{0, 1}})), gaussian(1, 1.0), uniform_box(make_box({{0, 2}, {0, 1}})),
                          centered_exponential(), triangle(), tilt(triangle(), 2.0, Point::Constant(2, 0.5)),
                          uniform_ball(Point::Constant(3, 1.0), 0.5)};
  for (const auto& d : ds) {
    INFO(d.describe());
    auto mr = moment_report(isotropize(d));
    CHECK(mr.barycenter.norm() < 1e-6);
    CHECK((mr.covariance - Mat::Identity(d.dim(), d.dim())).cwiseAbs().maxCoeff() < 1e-6);
  }
  auto iso = isotropize(uniform_box(make_box({{0, 1}})));
  CHECK(iso.effective_box().hi[0] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
}

TEST_CASE("affine equivariance of covariance") {
  auto d = triangle();
  Mat a(2, 2);
  a << 2.0, 0.5, -0.3, 1.2;
  Point v(2);
  v << 0.7, -1.1;
  const Mat c0 = moment_report(d).covariance;
  const Mat c1 = moment_report(affine_image(d, a, v)).covariance;
  CHECK((c1 - a * c0 * a.transpose()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("central sections lie in the isotropic interval") {
  const double r3 = std::sqrt(3.0);
  CHECK(central_section(uniform_box(make_box({{-r3, r3}})), Point::Constant(1, 1.0)) ==
        doctest::Approx(kSectionLower).epsilon(1e-12));
  for (int n = 1; n <= 3; ++n) {
    Point dir = Point::Ones(n) / std::sqrt(double(n));
    CHECK(central_section(gaussian(n, 1.0), dir) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-8));
  }
  const double e = central_section(isotropize(centered_exponential()), Point::Constant(1, 1.0));
  CHECK(e >= kSectionLower);
  CHECK(e <= kSectionUpper);
  for (const auto& d : {isotropize(triangle()), isotropize(uniform_box(make_box({{0, 1}, {0, 1}, {0, 1}})))}) {
    for (const auto& u : direction_set(d.dim(), 32)) {
      const double s = central_section(d, u);
      CHECK(s >= kSectionLower - 1e-6);
      CHECK(s <= kSectionUpper + 1e-6);
    }
  }
}

TEST_CASE("half-space masses through the barycenter") {
  CHECK(halfspace_mass(gaussian(2, 1.0), direction_set(2, 7)[3]) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(halfspace_mass(centered_exponential(), Point::Constant(1, 1.0)) ==
        doctest::Approx(kGrunbaumLower).epsilon(1e-10));
  auto iso = isotropize(triangle());
  double lo = 1.0, hi = 0.0;
  for (const auto& u : direction_set(2, 32)) {
    const double m = halfspace_mass(iso, u);
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  CHECK(lo >= kGrunbaumLower - 1e-6);
  CHECK(hi <= kGrunbaumUpper + 1e-6);
  // The triangle's extreme is (2/3)^2 = 4/9 on the side of a vertex.
  CHECK(lo == doctest::Approx(4.0 / 9).epsilon(1e-3));
}

TEST_CASE("third moment tensor") {
  CHECK(kappa_functional(gaussian(2, 1.0)) < 1e-10);
  CHECK(kappa_functional(centered_exponential()) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("direction sets are unit vectors") {
  for (int n = 2; n <= 3; ++n)
    for (const auto& u : direction_set(n, 64)) CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-14));
}
