#include "doctest.h"

#include "lclab/moments.hpp"
#include "lclab/slicing.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace lclab;

namespace {
const double kPi = std::numbers::pi;
Point v3(double x, double y, double z) {
  Point p(3);
  p << x, y, z;
  return p;
}
Point v2(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}
ConvexBody unit_cube() { return make_box_body(make_box({{0, 1}, {0, 1}, {0, 1}})); }
}  // namespace

TEST_CASE("sections of the unit cube") {
  const ConvexBody c = unit_cube();
  CHECK(c.volume == doctest::Approx(1.0));
  CHECK(section_volume(c, v3(1, 0, 0), 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  const Point d = v3(1, 1, 0) / std::sqrt(2.0);
  CHECK(std::abs(section_volume(c, d, d.dot(v3(0.5, 0.5, 0.5))) - std::sqrt(2.0)) <= 1e-9);
  CHECK(section_volume(c, v3(1, 0, 0), 1.5) == 0.0);
}

TEST_CASE("cube diagonal section against a monte carlo slab") {
  const ConvexBody c = unit_cube();
  const Point d = v3(1, 1, 0) / std::sqrt(2.0);
  const double o = d.dot(v3(0.5, 0.5, 0.5));
  const double half = 0.01;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 400000;
  int hits = 0;
  for (int i = 0; i < n; ++i)
    if (std::abs(d.dot(v3(u(rng), u(rng), u(rng))) - o) <= half) ++hits;
  const double est = hits / (2.0 * half * n);
  const double se = std::sqrt(hits) / (2.0 * half * n);
  CHECK(std::abs(est - std::sqrt(2.0)) <= 4 * se + 1e-3);
}

TEST_CASE("volume-one balls match closed forms") {
  const double r3 = std::cbrt(3.0 / (4.0 * kPi));
  const ConvexBody b3 = make_ball_body(Point::Zero(3), r3);
  CHECK(b3.volume == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(section_volume(b3, v3(0, 0, 1), 0.0) - kPi * r3 * r3) <= 1e-9);
  CHECK(std::abs(section_volume(b3, v3(0, 0.6, 0.8), 0.3) - kPi * (r3 * r3 - 0.09)) <= 1e-9);
  const double r2 = 1.0 / std::sqrt(kPi);
  const ConvexBody b2 = make_ball_body(Point::Zero(2), r2);
  CHECK(std::abs(section_volume(b2, v2(1, 0), 0.0) - 2.0 / std::sqrt(kPi)) <= 1e-9);
}

TEST_CASE("polytope volumes") {
  CHECK(regular_simplex_body(3).volume == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(regular_simplex_body(2).volume == doctest::Approx(1.0).epsilon(1e-12));
  // Octahedron |x|+|y|+|z| <= 1 has volume 4/3.
  std::vector<Halfspace> hs;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) hs.push_back({v3(sx, sy, sz), 1.0});
  const ConvexBody oct = make_hpolytope_body(3, hs);
  CHECK(oct.vertices.size() == 6);
  CHECK(oct.volume == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS(make_hpolytope_body(3, {{v3(1, 0, 0), 1.0}}));
}

TEST_CASE("fubini recovers the volume") {
  const std::vector<ConvexBody> bodies{unit_cube(), regular_simplex_body(3), regular_simplex_body(2),
                                       make_ball_body(Point::Zero(3), 0.7), make_ball_body(v2(0.3, -0.2), 1.3)};
  for (const auto& k : bodies) {
    for (const auto& u : direction_set(k.dim, 7)) {
      CHECK(std::abs(fubini_volume(k, u) - k.volume) <= 1e-8 * k.volume);
    }
  }
}

TEST_CASE("brunn-minkowski concavity and continuity") {
  for (const auto& k : {unit_cube(), regular_simplex_body(3), make_ball_body(Point::Zero(3), 1.0),
                        regular_simplex_body(2)}) {
    for (const auto& u : direction_set(k.dim, 5)) {
      CHECK(brunn_minkowski_defect(k, u) <= 1e-9);
      double diam = 0.0;
      if (k.is_polytope()) {
        for (const auto& a : k.vertices)
          for (const auto& b : k.vertices) diam = std::max(diam, (a - b).norm());
      } else {
        diam = 2 * k.radius;
      }
      // Derivative of a section volume is bounded by the perimeter-type
      // quantity pi * diam^(n-2) * (n-1) in dimensions 2 and 3, away from the ends.
      CHECK(section_lipschitz_estimate(k, u) <= kPi * std::pow(diam, k.dim - 2) * (k.dim - 1) * 4);
    }
  }
}

TEST_CASE("best section search") {
  const ConvexBody cube = normalize_volume(make_box_body(make_box({{-2, 2}, {-2, 2}, {-2, 2}})));
  const BestSection bc = best_section(cube, 64, 9);
  CHECK(bc.value >= 1.0 - 1e-12);
  CHECK(bc.value <= std::sqrt(2.0) + 1e-9);
  CHECK(std::abs(section_volume(cube, bc.query) - bc.value) <= 1e-12);

  const ConvexBody disc = normalize_volume(make_ball_body(v2(1, 1), 2.0));
  CHECK(best_section(disc, 16, 9).value == doctest::Approx(2.0 / std::sqrt(kPi)).epsilon(1e-9));

  const ConvexBody simplex = regular_simplex_body(3);
  const BestSection bs = best_section(simplex, 64, 9);
  CHECK(std::abs(section_volume(simplex, bs.query) - bs.value) <= 1e-9);
  CHECK(bs.value > 0.0);
}

TEST_CASE("bodies as densities") {
  const Density cube = body_to_density(unit_cube());
  const MomentReport iso = moment_report(isotropize(cube));
  CHECK(iso.is_isotropic);
  const Density icube = isotropize(cube);
  for (const auto& u : direction_set(3, 64)) {
    const double s = central_section(icube, u);
    CHECK(s >= kSectionLower - 1e-6);
    CHECK(s <= kSectionUpper + 1e-6);
  }
  const Density ball = body_to_density(make_ball_body(v3(0.2, 0, 0), 1.0));
  CHECK(halfspace_mass(ball, v3(1, 0, 0), 0.2) == doctest::Approx(0.5).epsilon(1e-9));
}
