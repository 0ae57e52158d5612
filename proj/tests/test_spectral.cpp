#include "doctest.h"

#include "lclab/errors.hpp"
#include "lclab/moments.hpp"
#include "lclab/spectral.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace lclab;

namespace {
Grid line(double lo, double hi, int points) { return Grid(make_box({{lo, hi}}), {points}); }
const double kS3 = std::sqrt(3.0);
const double kPi2Over12 = std::numbers::pi * std::numbers::pi / 12.0;
Density unit_interval_uniform() { return uniform_box(make_box({{-kS3, kS3}})); }
Density truncated_gaussian() { return tilt(uniform_box(make_box({{-1, 1}})), 1.0, Point::Zero(1)); }
Point p1(double x) { return Point::Constant(1, x); }
}  // namespace

TEST_CASE("operator: L x = -x for the standard gaussian") {
  const DiscreteOperator op(gaussian(1, 1.0), line(-8, 8, 4001));
  const Vec lx = op.apply_l(op.coordinate(0));
  // Second order: the flux scheme's leading error is h^2 (x^3 - 3x) / 24.
  // Interior nodes only, since the zero-flux wall perturbs the last cell.
  const double h = op.grid().spacing(0);
  double worst = 0.0;
  for (int i = 0; i < op.size(); ++i) {
    const double x = op.node(i)[0];
    if (std::abs(x) < 7.0) worst = std::max(worst, std::abs(lx[i] + x) / (h * h * (1.0 + std::abs(x * x * x))));
  }
  CHECK(worst <= 1.0 / 12.0);
}

TEST_CASE("operator: constants are in the kernel") {
  for (const auto& d : {gaussian(1, 1.0), unit_interval_uniform(), centered_exponential()}) {
    const DiscreteOperator op(d, default_grid(d));
    CHECK(op.apply_l(op.constant()).cwiseAbs().maxCoeff() <= 1e-12);
  }
  const Density g2 = gaussian(2, 0.7);
  const DiscreteOperator op2(g2, Grid(make_box({{-6, 6}, {-6, 6}}), {81, 81}));
  CHECK(op2.apply_l(op2.constant()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("operator: discrete integration by parts over random pairs") {
  const Density d = product({gaussian(1, 1.0), unit_interval_uniform()});
  const DiscreteOperator op(d, Grid(make_box({{-7, 7}, {-kS3, kS3}}), {61, 41}));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    Vec u(op.size()), v(op.size());
    for (int i = 0; i < op.size(); ++i) {
      u[i] = nd(rng);
      v[i] = nd(rng);
    }
    const double lhs = -op.inner(op.apply_l(u), v);
    const double rhs = op.energy(u, v);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("operator: vanishing density is rejected unless masked") {
  const Density ball = uniform_ball(Point::Zero(2), 1.0);
  const Grid g(make_box({{-1.2, 1.2}, {-1.2, 1.2}}), {25, 25});
  CHECK_THROWS_AS(DiscreteOperator(ball, g), NonPositiveDensity);
  const DiscreteOperator op(ball, g, OperatorOptions{true});
  CHECK(op.size() < 25 * 25);
  CHECK(op.apply_l(op.constant()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("spectral gap: hermite oracle") {
  const DiscreteOperator op(gaussian(1, 1.0), line(-8, 8, 4001));
  const SpectralResult sr = spectral_gap(op);
  CHECK(std::abs(sr.lambda - 1.0) <= 1e-3);
  CHECK(sr.residual <= 1e-8 * sr.lambda);
  CHECK(std::abs(op.mean(sr.eigenfunction)) <= 1e-10);
  CHECK(op.inner(sr.eigenfunction, sr.eigenfunction) == doctest::Approx(1.0).epsilon(1e-12));
  // Eigenfunction proportional to x.
  const Vec x = op.coordinate(0);
  const double corr = op.inner(sr.eigenfunction, x) / std::sqrt(op.inner(x, x));
  CHECK(corr >= 1.0 - 1e-6);
  CHECK(std::abs(sr.lambda_direct - sr.lambda) <= 1e-6 * sr.lambda);
}

TEST_CASE("spectral gap: doubling the lattice agrees with the hermite value") {
  const double coarse = spectral_gap(gaussian(1, 1.0), line(-8, 8, 4001)).lambda;
  const double fine = spectral_gap(gaussian(1, 1.0), line(-8, 8, 8001)).lambda;
  CHECK(std::abs(coarse - 1.0) <= 1e-3);
  CHECK(std::abs(fine - 1.0) <= 1e-3);
  CHECK(std::abs(fine - coarse) <= 1e-4);
}

TEST_CASE("spectral gap: neumann interval") {
  const Density u = unit_interval_uniform();
  const SpectralResult sr = spectral_gap(u, line(-kS3, kS3, 4001));
  CHECK(std::abs(sr.lambda - kPi2Over12) <= 1e-3);
  CHECK(std::abs(sr.lambda_direct - sr.lambda) <= 1e-6 * sr.lambda);
  CHECK(sr.residual <= 1e-8 * sr.lambda);
}

TEST_CASE("spectral gap: scaled gaussians and the exponential") {
  for (double s : {0.25, 2.0}) {
    const double r = 10.0 * std::sqrt(s);
    CHECK(std::abs(spectral_gap(gaussian(1, s), line(-r, r, 4001)).lambda - 1.0 / s) <= 1e-3 / s);
  }
  // On a window of length L with zero-flux walls the exponential has the
  // isolated gap 1/4 + (pi/L)^2 above the continuous spectrum's edge 1/4.
  const Density e = centered_exponential();
  const Grid g = default_grid(e);
  const double len = g.box().hi[0] - g.box().lo[0];
  const SpectralResult sr = spectral_gap(e, g);
  CHECK(std::abs(sr.lambda - (0.25 + std::numbers::pi * std::numbers::pi / (len * len))) <= 1e-4);
  CHECK(sr.lambda > 0.25);
}

TEST_CASE("spectral gap: two-dimensional product tensorizes") {
  const Density d = product({gaussian(1, 1.0), unit_interval_uniform()});
  const DiscreteOperator op(d, Grid(make_box({{-8, 8}, {-kS3, kS3}}), {161, 61}));
  const SpectralResult sr = spectral_gap(op);
  CHECK(std::abs(sr.lambda - kPi2Over12) <= 2e-3);
  CHECK(std::abs(sr.lambda_symmetrized - sr.lambda_direct) <= 1e-6 * sr.lambda);
  CHECK(sr.residual <= 1e-8 * sr.lambda);
  CHECK(std::abs(op.mean(sr.eigenfunction)) <= 1e-10);
}

TEST_CASE("bochner: gaussian closed forms") {
  const Density g = gaussian(1, 1.0);
  const Grid grid = line(-10, 10, 4001);
  const BochnerReport a = bochner_residual(g, linear_function(p1(1.0)), grid);
  CHECK(a.l_squared == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(a.hessian_hs == doctest::Approx(0.0));
  CHECK(a.curvature == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(a.residual <= 1e-6);
  const BochnerReport b = bochner_residual(g, quadratic_function(p1(1.0), p1(0.0)), grid);
  CHECK(b.l_squared == doctest::Approx(8.0).epsilon(1e-6));
  CHECK(b.hessian_hs == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(b.curvature == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(b.residual <= 1e-6);
}

TEST_CASE("bochner: eigenfunction of a regularized interval") {
  const Density d = regularize(unit_interval_uniform(), 0.3);
  const Grid grid = default_grid(d);
  const DiscreteOperator op(d, grid);
  const SpectralResult sr = spectral_gap(op);
  const TestFunction u = spline_function(op, sr.eigenfunction);
  const BochnerReport rep = bochner_residual(d, u, grid);
  CHECK(rep.l_squared > 0.0);
  CHECK(rep.residual <= 1e-4);
}

TEST_CASE("eigen directions: gaussian and interval") {
  {
    const DiscreteOperator op(gaussian(1, 1.0), line(-8, 8, 4001));
    const auto rep = eigen_direction_check(op, spectral_gap(op));
    CHECK(rep.grad_sq == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(rep.curvature_term == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(rep.moment_term == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(rep.identity_residual <= 1e-6);
    CHECK(rep.slack_c >= -1e-6);
  }
  for (const auto& [d, lo, hi] : {std::tuple{unit_interval_uniform(), -kS3, kS3},
                                  std::tuple{truncated_gaussian(), -1.0, 1.0}}) {
    const DiscreteOperator op(d, line(lo, hi, 4001));
    const auto rep = eigen_direction_check(op, spectral_gap(op));
    CHECK(rep.identity_residual <= 1e-6);
    CHECK(rep.slack_a >= -1e-6);
    CHECK(rep.slack_c >= -1e-6);
  }
}

TEST_CASE("lichnerowicz: gaussian equality and truncated improvement") {
  for (double s : {0.5, 1.0, 2.0}) {
    const double r = 10.0 * std::sqrt(s);
    const Density g = gaussian(1, s);
    const auto rep = lichnerowicz_check(g, spectral_gap(g, line(-r, r, 4001)));
    CHECK(std::abs(rep.slack_left) <= 1e-3 * rep.upper);
    CHECK(std::abs(rep.slack_right) <= 1e-3 * rep.upper);
  }
  const Density tg = truncated_gaussian();
  const auto rep = lichnerowicz_check(tg, spectral_gap(tg, line(-1, 1, 4001)));
  CHECK(rep.slack_left >= -1e-3);
  CHECK(rep.slack_right >= -1e-3);
  CHECK(rep.c_p <= 0.9 * rep.upper);
  CHECK(rep.lambda >= std::sqrt(rep.t / rep.cov_op) - 1e-3);

  const Density tu = tilt(uniform_box(make_box({{-1, 1}})), 2.0, Point::Zero(1));
  const auto r2 = lichnerowicz_check(tu, spectral_gap(tu, line(-1, 1, 4001)));
  CHECK(r2.slack_left >= -1e-3);
  CHECK(r2.slack_right >= -1e-3);
}

TEST_CASE("H^-1 norms: hermite oracles") {
  const DiscreteOperator op(gaussian(1, 1.0), line(-8, 8, 4001));
  const auto a = h_minus_one(op, op.coordinate(0));
  CHECK(a.norm_sq == doctest::Approx(1.0).epsilon(1e-3));
  const auto b = h_minus_one(op, op.sample([](const Point& x) { return x[0] * x[0] - 1.0; }));
  CHECK(b.norm_sq == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(h_minus_one_norm(op, [](const Point&) { return 0.0; }) == 0.0);
  const double lambda = spectral_gap(op).lambda;
  CHECK(lambda * b.norm_sq <= b.l2_sq * (1.0 + 1e-9));
}

TEST_CASE("dual identities and varentropy") {
  {
    const DiscreteOperator op(gaussian(1, 1.0), line(-10, 10, 4001));
    const auto rep = dual_identities_check(op, quadratic_function(p1(1.0), p1(0.0)));
    CHECK(std::abs(rep.dual_sum - 1.0) <= 1e-3);
    CHECK(rep.test_variance == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(rep.test_dual == doctest::Approx(4.0).epsilon(1e-3));
    CHECK(rep.varentropy <= rep.n + 1e-3);
  }
  {
    const Density d = gaussian(2, 0.5);
    const DiscreteOperator op(d, Grid(make_box({{-7, 7}, {-7, 7}}), {141, 141}));
    const auto rep = dual_identities_check(op, quadratic_function(Point::Constant(2, 1.0), Point::Zero(2)));
    CHECK(std::abs(rep.dual_sum - 2.0) <= 2e-3);
    CHECK(rep.test_variance <= rep.test_dual + 1e-6);
  }
  {
    const Density d = regularize(unit_interval_uniform(), 0.3);
    const DiscreteOperator op(d, default_grid(d));
    const auto rep = dual_identities_check(op, quadratic_function(p1(1.0), p1(0.5)));
    CHECK(std::abs(rep.dual_sum - 1.0) <= 1e-3);
    CHECK(rep.test_variance <= rep.test_dual + 1e-6);
    CHECK(rep.varentropy <= 1.0 + 1e-3);
  }
  {
    const Density e = centered_exponential();
    const DiscreteOperator op(e, default_grid(e));
    CHECK(std::abs(dual_identities_check(op, linear_function(p1(1.0))).varentropy - 1.0) <= 1e-2);
  }
}

TEST_CASE("cube-root bound") {
  for (double s : {1.0, 0.5}) {
    const double r = 10.0 * std::sqrt(s);
    const DiscreteOperator op(gaussian(1, s), line(-r, r, 4001));
    const auto rep = cube_root_bound_check(op, spectral_gap(op));
    CHECK(rep.r == doctest::Approx(s * s).epsilon(1e-3));
    CHECK(std::abs(rep.slack) <= 1e-3 / s);
  }
  const DiscreteOperator op(truncated_gaussian(), line(-1, 1, 4001));
  const auto rep = cube_root_bound_check(op, spectral_gap(op));
  CHECK(rep.slack > 0.0);
}

TEST_CASE("poincare inequality for random test functions") {
  for (const auto& d : {gaussian(1, 1.0), unit_interval_uniform(), centered_exponential(), truncated_gaussian()}) {
    const DiscreteOperator op(d, default_grid(d));
    const auto sr = spectral_gap(op);
    const auto rep = poincare_random_check(op, sr, 20, 7);
    CHECK(rep.worst_slack >= -1e-8);
    CHECK(rep.eigen_equality_rel <= 1e-6);
    CHECK(std::abs(sr.lambda_direct - sr.lambda_symmetrized) <= 1e-6 * sr.lambda);
  }
}
