#include "doctest.h"

#include "lclab/density.hpp"
#include "lclab/errors.hpp"

#include <cmath>
#include <numbers>

using namespace lclab;

namespace {
Point p1(double x) { return Point::Constant(1, x); }
}  // namespace

TEST_CASE("log density of catalog members") {
  CHECK(gaussian(1, 1.0).log_density(p1(0)) == doctest::Approx(-0.918938533204673).epsilon(1e-14));
  const double r3 = std::sqrt(3.0);
  auto u = uniform_box(make_box({{-r3, r3}}));
  CHECK(u.log_density(p1(0)) == doctest::Approx(-std::log(2 * r3)).epsilon(1e-14));
  CHECK(u.log_density(p1(2)) == -kInf);
  auto e = centered_exponential();
  CHECK(e.log_density(p1(0)) == doctest::Approx(-1.0));
  CHECK(e.log_density(p1(-1.5)) == -kInf);
}

TEST_CASE("tilt simplifications") {
  auto g = tilt(gaussian(1, 1.0), 1.0, p1(1.0));
  auto gp = g.as_gaussian();
  REQUIRE(gp);
  CHECK(gp->s == doctest::Approx(0.5));
  CHECK(gp->mean[0] == doctest::Approx(0.5));

  auto u = uniform_box(make_box({{-1, 1}}));
  auto same = tilt(u, 0.0, p1(0.0));
  CHECK(same.node_ptr() == u.node_ptr());

  auto t1 = tilt(tilt(u, 0.3, p1(0.2)), 0.5, p1(-0.1));
  auto t2 = tilt(u, 0.8, p1(0.1));
  for (double x : {-0.9, -0.2, 0.4, 0.95})
    CHECK(t1.log_density(p1(x)) - t2.log_density(p1(x)) == doctest::Approx(0.0).epsilon(1e-10).scale(1));
}

TEST_CASE("tilt normalizer by quadrature") {
  auto u = uniform_box(make_box({{-1, 1}}));
  auto t = tilt(u, 1.0, p1(0.0));
  // Z = (1/2) int_{-1}^{1} exp(-x^2/2) dx
  const double z = 0.5 * std::sqrt(2 * std::numbers::pi) * std::erf(1.0 / std::sqrt(2.0));
  CHECK(t.log_normalizer() == doctest::Approx(std::log(z)).epsilon(1e-12));
  CHECK(t.uniform_convexity() == doctest::Approx(1.0));
}

TEST_CASE("divergent tilt is rejected") {
  CHECK_THROWS_AS(tilt(centered_exponential(), 0.0, p1(1.5)), DivergentNormalizer);
  CHECK_NOTHROW(tilt(centered_exponential(), 0.0, p1(0.5)));
  CHECK_NOTHROW(tilt(centered_exponential(), 0.0, p1(-3.0)));
}

TEST_CASE("tilted half-line boxes stay inside the support") {
  const auto t = tilt(centered_exponential(), 0.5, p1(0.3));
  CHECK(t.effective_box().lo[0] >= -1.0);
  CHECK(t.density(p1(t.effective_box().lo[0])) > 0.0);
  const auto a = affine_image(centered_exponential(), Mat::Constant(1, 1, 2.0), p1(1.0));
  CHECK(a.effective_box().lo[0] >= -1.0);
}

TEST_CASE("regularized gaussian") {
  auto r = regularize(gaussian(1, 1.0), 0.1);
  auto g = r.as_gaussian();
  REQUIRE(g);
  CHECK(g->s == doctest::Approx(1.1 / 1.11).epsilon(1e-14));
  CHECK(r.hess_psi(p1(0.3))(0, 0) == doctest::Approx(1.00909).epsilon(1e-5));
}

TEST_CASE("regularized uniform has full support and bounded hessian") {
  auto r = regularize(uniform_box(make_box({{-1, 1}})), 0.05);
  CHECK(r.density(p1(2.0)) > 0.0);
  for (double x : {-3.0, -1.0, 0.0, 0.5, 1.2, 2.0}) {
    const double h = r.hess_psi(p1(x))(0, 0);
    CHECK(h >= 0.05 - 1e-9);
    CHECK(h <= 0.05 + 20.0 + 1e-9);
  }
}

TEST_CASE("convolution of a uniform interval") {
  const double s = 0.5;
  auto c = convolve_gaussian(uniform_box(make_box({{-1, 1}})), s);
  for (double x : {-2.0, -0.7, 0.0, 1.3}) {
    // (1/2)(Phi((x+1)/sigma) - Phi((x-1)/sigma))
    const double sg = std::sqrt(s);
    const double v = 0.25 * (std::erf((x + 1) / (sg * std::sqrt(2.0))) - std::erf((x - 1) / (sg * std::sqrt(2.0))));
    CHECK(c.density(p1(x)) == doctest::Approx(v).epsilon(1e-12));
    const double h = c.hess_psi(p1(x))(0, 0);
    CHECK(h >= -1e-10);
    CHECK(h <= 1.0 / s + 1e-10);
  }
  CHECK(c.hessian_upper_bound() == doctest::Approx(2.0));
}

TEST_CASE("convolution of a gaussian stays gaussian") {
  auto c = convolve_gaussian(gaussian(2, 0.7), 1.3);
  REQUIRE(c.as_gaussian());
  CHECK(c.as_gaussian()->s == doctest::Approx(2.0));
  CHECK(c.uniform_convexity() == doctest::Approx(0.5));
}

TEST_CASE("polytope and ball normalizers") {
  Point e1(2), e2(2), d(2);
  e1 << -1, 0;
  e2 << 0, -1;
  d << 1, 1;
  auto tri = uniform_polytope(2, {{e1, 0.0}, {e2, 0.0}, {d, 1.0}});
  CHECK(tri.log_density(Point::Constant(2, 0.2)) == doctest::Approx(std::log(2.0)));
  auto ball = uniform_ball(Point::Zero(3), 1.0);
  CHECK(ball.density(Point::Zero(3)) == doctest::Approx(3.0 / (4.0 * std::numbers::pi)));
  CHECK_THROWS(uniform_polytope(2, {{e1, 0.0}, {e2, 0.0}}));
}
