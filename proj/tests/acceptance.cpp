// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.
//
// Usage: acceptance <path to the lclab binary>. The binary is needed only for
// the determinism criterion, which runs verify-all twice.

#include "lclab/isoperimetry.hpp"
#include "lclab/localization.hpp"
#include "lclab/moments.hpp"
#include "lclab/slicing.hpp"
#include "lclab/spectral.hpp"
#include "lclab/transforms.hpp"
#include "lclab/util.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace lclab;

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt3 = std::sqrt(3.0);

struct Outcome {
  bool pass = true;
  std::string detail;

  /// Records a named comparison; any failing one fails the criterion.
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += "[violated] " + what + "; ";
    }
  }
  void note(const std::string& s) { detail += s + "; "; }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Density interval(double lo, double hi) { return uniform_box(make_box({{lo, hi}})); }

/// Catalog of one-dimensional members shared by several criteria.
std::vector<std::pair<std::string, Density>> catalog_1d() {
  return {
      {"gaussian s=1", gaussian(1, 1.0)},
      {"gaussian s=0.5", gaussian(1, 0.5)},
      {"uniform [-sqrt3,sqrt3]", interval(-kSqrt3, kSqrt3)},
      {"exponential", centered_exponential()},
      {"tilted uniform t=1", tilt(interval(-1, 1), 1.0, Point::Zero(1))},
      {"tilted uniform t=2", tilt(interval(-1, 1), 2.0, Point::Constant(1, 0.5))},
      {"tilted exponential", tilt(centered_exponential(), 0.5, Point::Constant(1, 0.3))},
      {"smoothed exponential", convolve_gaussian(centered_exponential(), 0.5)},
      {"regularized uniform", regularize(interval(-1, 1), 0.3)},
  };
}

OperatorOptions options_for(const Density& d) {
  const auto k = d.support().kind;
  return OperatorOptions{k != Support::Kind::AllSpace && k != Support::Kind::Box};
}

// 1. Spectral gaps against closed forms on 4001-point lattices.
Outcome criterion_spectral_oracles() {
  Outcome o;
  constexpr double kTol = 1e-3, kSeconds = 5.0;
  const std::pair<Density, double> cases[] = {{gaussian(1, 1.0), 1.0}, {interval(-kSqrt3, kSqrt3), kPi * kPi / 12}};
  for (const auto& [d, exact] : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    const Grid g = default_grid(d);
    const double lambda = spectral_gap(d, g).lambda;
    const double secs = seconds_since(t0);
    o.note(d.describe() + ": lambda=" + num(lambda) + " exact=" + num(exact) + " in " + num(secs) + "s on " +
           std::to_string(g.size()) + " points");
    o.expect(g.size() == 4001, "lattice has 4001 points");
    o.expect(std::abs(lambda - exact) <= kTol, "lambda within 1e-3");
    o.expect(secs < kSeconds, "runtime below 5 s");
  }
  return o;
}

// 2. Integrated Bochner identity.
Outcome criterion_bochner() {
  Outcome o;
  constexpr double kTol = 1e-4;
  const Density g1 = gaussian(1, 1.0);
  const auto xsq = quadratic_function(Point::Ones(1), Point::Zero(1));
  const auto g1_rep = bochner_residual(g1, xsq, default_grid(g1));
  o.note("gaussian x^2: " + num(g1_rep.l_squared) + " = " + num(g1_rep.hessian_hs) + " + " + num(g1_rep.curvature));
  o.expect(std::abs(g1_rep.l_squared - 8.0) <= 8 * kTol, "int (Lu)^2 = 8");
  o.expect(std::abs(g1_rep.hessian_hs - 4.0) <= 4 * kTol, "int |hess u|^2 = 4");
  o.expect(std::abs(g1_rep.curvature - 4.0) <= 4 * kTol, "int |grad u|^2 = 4");

  const Density g2 = gaussian(2, 0.5);
  const Density sm = convolve_gaussian(centered_exponential(), 0.5);
  const Density rg = regularize(interval(-1, 1), 0.3);
  const Density pr = product({gaussian(1, 1.0), regularize(interval(-1, 1), 0.3)});
  Point mix(2);
  mix << 0.5, 1.0;
  const std::vector<std::tuple<std::string, Density, TestFunction>> pairs = {
      {"gaussian x^2", g1, xsq},
      {"gaussian x", g1, linear_function(Point::Ones(1))},
      {"gaussian 2D quadratic", g2, quadratic_function(mix, Point::Constant(2, 0.2))},
      {"smoothed exponential x^2", sm, xsq},
      {"smoothed exponential x", sm, linear_function(Point::Ones(1))},
      {"regularized uniform x^2+x", rg, quadratic_function(Point::Ones(1), Point::Ones(1))},
      {"product quadratic", pr, quadratic_function(mix, Point::Zero(2))},
  };
  int count = 0;
  double worst = 0.0;
  for (const auto& [name, d, u] : pairs) {
    const Grid g = d.dim() == 1 ? default_grid(d) : Grid(d.effective_box(), {401, 401});
    const double r = bochner_residual(d, u, g).residual;
    worst = std::max(worst, r);
    o.expect(r <= kTol, name + " residual " + num(r));
    ++count;
  }
  o.note(std::to_string(count) + " pairs, worst relative residual " + num(worst));
  o.expect(count >= 6, "at least 6 pairs");
  return o;
}

// 3. Improved Lichnerowicz chain.
Outcome criterion_lichnerowicz() {
  Outcome o;
  constexpr double kSlack = -1e-3, kEquality = 1e-3, kImprovement = 0.10;
  int members = 0;
  for (const auto& [name, d] : catalog_1d()) {
    if (!(d.uniform_convexity() > 0)) continue;
    const auto r = lichnerowicz_check(d, spectral_gap(d, default_grid(d)));
    ++members;
    o.expect(r.slack_left >= kSlack && r.slack_right >= kSlack,
             name + " chain " + num(r.c_p) + " <= " + num(r.middle) + " <= " + num(r.upper));
  }
  const Density g2 = gaussian(2, 0.5);
  const auto r2 = lichnerowicz_check(g2, spectral_gap(g2, Grid(g2.effective_box(), {201, 201})));
  ++members;
  o.expect(r2.slack_left >= kSlack && r2.slack_right >= kSlack, "2D gaussian chain");
  o.note(std::to_string(members) + " uniformly convex members");

  const Density g = gaussian(1, 0.5);
  const auto rg = lichnerowicz_check(g, spectral_gap(g, default_grid(g)));
  o.note("gaussian s=0.5: " + num(rg.c_p) + ", " + num(rg.middle) + ", " + num(rg.upper));
  o.expect(std::abs(rg.c_p - rg.upper) <= kEquality && std::abs(rg.middle - rg.upper) <= kEquality,
           "gaussian equality");

  const Density tg = tilt(interval(-1, 1), 1.0, Point::Zero(1));
  const auto rt = lichnerowicz_check(tg, spectral_gap(tg, default_grid(tg)));
  const double improvement = 1.0 - rt.c_p / rt.upper;
  o.note("truncated gaussian: 1/lambda=" + num(rt.c_p) + " vs 1/t=" + num(rt.upper) + ", improvement " +
         num(100 * improvement) + "%");
  o.expect(improvement >= kImprovement, "truncated gaussian improves on 1/t by 10%");
  return o;
}

// 4. Eigenfunction identity and inequalities on the 1D catalog.
Outcome criterion_eigen_direction() {
  Outcome o;
  constexpr double kIdentity = 1e-6, kSlack = -1e-4;
  double worst = 0.0, worst_slack = kInf;
  for (const auto& [name, d] : catalog_1d()) {
    const DiscreteOperator op(d, default_grid(d), options_for(d));
    const auto r = eigen_direction_check(op, spectral_gap(op));
    worst = std::max(worst, r.identity_residual);
    worst_slack = std::min({worst_slack, r.slack_a, r.slack_c});
    o.expect(r.identity_residual <= kIdentity, name + " identity residual " + num(r.identity_residual));
    o.expect(r.slack_a >= kSlack && r.slack_c >= kSlack,
             name + " slacks " + num(r.slack_a) + ", " + num(r.slack_c));
  }
  o.note("worst identity residual " + num(worst) + ", worst slack " + num(worst_slack));
  return o;
}

// 5. Section and half-space bounds for isotropic members.
Outcome criterion_sections_grunbaum() {
  Outcome o;
  constexpr double kTol = 1e-6;
  std::vector<std::pair<std::string, Density>> members = catalog_1d();
  members.emplace_back("2D gaussian", gaussian(2, 0.5));
  members.emplace_back("gaussian x uniform", product({gaussian(1, 1.0), interval(-1, 1)}));
  members.emplace_back("square", body_to_density(make_box_body(make_box({{0, 1}, {0, 1}}))));
  members.emplace_back("triangle", body_to_density(regular_simplex_body(2)));
  members.emplace_back("disc", body_to_density(make_ball_body(Point::Zero(2), 1.0)));
  members.emplace_back("cube", body_to_density(make_box_body(make_box({{0, 1}, {0, 1}, {0, 1}}))));
  members.emplace_back("tetrahedron", body_to_density(regular_simplex_body(3)));
  double smin = kInf, smax = -kInf, hmin = kInf, hmax = -kInf;
  for (const auto& [name, d] : members) {
    const Density iso = isotropize(d);
    const int n = d.dim();
    for (const auto& u : direction_set(n, n == 1 ? 2 : (n == 2 ? 16 : 24))) {
      const double s = central_section(iso, u), h = halfspace_mass(iso, u, 0.0);
      smin = std::min(smin, s);
      smax = std::max(smax, s);
      hmin = std::min(hmin, h);
      hmax = std::max(hmax, h);
      o.expect(s >= kSectionLower - kTol && s <= kSectionUpper + kTol, name + " section " + num(s));
      o.expect(h >= kGrunbaumLower - kTol && h <= kGrunbaumUpper + kTol, name + " half-space " + num(h));
    }
  }
  o.note(std::to_string(members.size()) + " members: sections in [" + num(smin) + ", " + num(smax) +
         "], half-spaces in [" + num(hmin) + ", " + num(hmax) + "]");
  const double w_section = central_section(isotropize(interval(-1, 1)), Point::Ones(1));
  const double w_half = halfspace_mass(isotropize(centered_exponential()), Point::Ones(1), 0.0);
  o.note("interval section " + num(w_section) + ", exponential half-line " + num(w_half));
  o.expect(std::abs(w_section - kSectionLower) <= kTol, "interval witness 1/sqrt(12)");
  o.expect(std::abs(w_half - kGrunbaumLower) <= kTol, "exponential witness 1/e");
  return o;
}

// 6. Cheeger-Buser sandwich in 1D.
Outcome criterion_cheeger_buser() {
  Outcome o;
  constexpr double kTol = 1e-2;
  for (const auto& [name, d] : catalog_1d()) {
    const Grid g = default_grid(d);
    const auto b = buser_sandwich_check(cheeger_1d(d, g), spectral_gap(d, g));
    o.expect(b.holds, name + " ratio " + num(b.ratio));
    if (name == "exponential") {
      o.note("exponential ratio " + num(b.ratio));
      o.expect(std::abs(b.ratio - 0.25) <= kTol, "exponential ratio 1/4");
    }
    if (name == "gaussian s=1") {
      o.note("gaussian ratio " + num(b.ratio));
      o.expect(std::abs(b.ratio - kPi / 2) <= kTol, "gaussian ratio pi/2");
    }
  }
  return o;
}

// 7. Martingale, covariance bound and variance sandwich under localization.
Outcome criterion_localization() {
  Outcome o;
  constexpr double kZ = 3.0, kCov = 1e-6, kHorizon = 0.5, kSeconds = 300.0;
  constexpr std::size_t kPaths = 10000;
  const auto t0 = std::chrono::steady_clock::now();
  const std::pair<std::string, Density> bases[] = {
      {"gaussian", gaussian(1, 1.0)}, {"uniform", interval(-kSqrt3, kSqrt3)}, {"exponential", centered_exponential()}};
  std::uint64_t seed = 20;
  for (const auto& [name, d] : bases) {
    const PosteriorTable table(d, posterior_grid(d));
    PathOptions opts;
    opts.paths = kPaths;
    opts.seed = ++seed;
    const auto m = martingale_check(table, default_probes(d, 5), kHorizon, opts);
    o.note(name + ": max z " + num(m.max_z) + ", max t||A|| " + num(m.max_t_cov));
    o.expect(m.probes.size() == 5 && m.paths == kPaths, name + " uses 5 probes and 10^4 paths");
    o.expect(m.max_z <= kZ, name + " martingale z");
    o.expect(m.max_t_cov <= 1.0 + kCov, name + " covariance bound");

    const double lambda0 = spectral_gap(d, default_grid(d)).lambda;
    opts.seed = ++seed;
    const auto s = variance_sandwich_check(table, linear_function(Point::Ones(1)).value, kHorizon, lambda0, opts);
    const double se = s.mean_var_t.se;
    o.expect(s.slack_lower >= -kZ * se && s.slack_upper >= -kZ * s.factor * se,
             name + " sandwich " + num(s.mean_var_t.mean) + " <= " + num(s.var0) + " <= " +
                 num(s.factor * s.mean_var_t.mean));
    if (name == "gaussian") {
      o.note("gaussian sandwich " + num(s.mean_var_t.mean) + " <= " + num(s.var0) + " <= " +
             num(s.factor * s.mean_var_t.mean));
      o.expect(std::abs(s.mean_var_t.mean - 2.0 / 3.0) <= 1e-6, "gaussian E Var_t = 2/3");
      o.expect(std::abs(s.var0 - 1.0) <= 1e-6, "gaussian Var = 1");
      o.expect(std::abs(s.factor * s.mean_var_t.mean - 5.0 / 3.0) <= 1e-3, "gaussian upper side 5/3");
    }
  }
  const double secs = seconds_since(t0);
  o.note("runtime " + num(secs) + "s");
  o.expect(secs < kSeconds, "runtime below 5 min");
  return o;
}

// 8. Localized Bochner formula.
Outcome criterion_localized_bochner() {
  Outcome o;
  constexpr double kExact = 1e-6, kZ = 3.0, kHorizon = 0.5;
  PathOptions opts;
  opts.paths = 1000;
  opts.seed = 81;
  const Density g = gaussian(1, 1.0);
  const auto rg = localized_bochner_check(PosteriorTable(g, posterior_grid(g)), linear_function(Point::Ones(1)),
                                          kHorizon, opts);
  o.note("gaussian u=x: lhs " + num(rg.lhs) + ", rhs " + num(rg.rhs.mean));
  o.expect(std::abs(rg.lhs - 1.5) <= kExact && std::abs(rg.rhs.mean - 1.5) <= kExact, "gaussian both sides 1.5");
  o.expect(rg.max_path_deviation <= kExact, "gaussian pathwise value 1.5");

  const Density sm = convolve_gaussian(centered_exponential(), 0.5);
  opts.seed = 82;
  const auto rs = localized_bochner_check(PosteriorTable(sm, posterior_grid(sm)),
                                          quadratic_function(Point::Ones(1), Point::Zero(1)), kHorizon, opts);
  o.note("smoothed exponential u=x^2: lhs " + num(rs.lhs) + ", rhs " + num(rs.rhs.mean) + " +- " + num(rs.rhs.se) +
         ", z " + num(rs.z));
  o.expect(rs.rhs.n == 1000, "10^3 paths");
  o.expect(std::abs(rs.rhs.mean - rs.lhs) <= kZ * rs.rhs.se, "non-gaussian within 3 SE");
  return o;
}

// 9. H^-1 identities, varentropy and the cube-root bound.
Outcome criterion_h_minus_one() {
  Outcome o;
  constexpr double kDual = 1e-3, kVarentropy = 1e-2, kCubeRoot = 1e-3;
  const std::pair<std::string, Density> smooth[] = {
      {"gaussian", gaussian(1, 1.0)},
      {"smoothed exponential", convolve_gaussian(centered_exponential(), 0.5)},
      {"regularized uniform", regularize(interval(-1, 1), 0.3)},
      {"2D gaussian", gaussian(2, 0.5)},
  };
  for (const auto& [name, d] : smooth) {
    const Grid g = d.dim() == 1 ? default_grid(d) : Grid(d.effective_box(), {201, 201});
    const DiscreteOperator op(d, g);
    const auto r = dual_identities_check(op, quadratic_function(Point::Ones(d.dim()), Point::Zero(d.dim())));
    o.note(name + ": dual sum " + num(r.dual_sum) + " (n=" + num(r.n) + ")");
    o.expect(std::abs(r.dual_sum - r.n) <= kDual * r.n, name + " dual identity");
    o.expect(r.test_variance <= r.test_dual * (1 + kDual), name + " H^-1 inequality");
  }
  for (const auto& [name, d] : catalog_1d()) {
    const DiscreteOperator op(d, default_grid(d), options_for(d));
    const double v = op.variance(op.sample([&](const Point& x) { return d.psi(x); }));
    o.expect(v <= 1.0 + kDual, name + " varentropy " + num(v));
    if (name == "exponential") {
      o.note("exponential varentropy " + num(v));
      o.expect(std::abs(v - 1.0) <= kVarentropy, "exponential varentropy equals n");
    }
  }
  for (double s : {1.0, 0.5}) {
    const Density g = gaussian(1, s);
    const DiscreteOperator op(g, default_grid(g));
    const auto r = cube_root_bound_check(op, spectral_gap(op));
    o.note("gaussian s=" + num(s) + ": lambda " + num(r.lambda) + ", bound " + num(r.bound));
    o.expect(std::abs(r.lambda - r.bound) <= kCubeRoot, "gaussian cube-root equality");
  }
  for (const auto& [name, d] : catalog_1d()) {
    if (!(d.uniform_convexity() > 0)) continue;
    const DiscreteOperator op(d, default_grid(d), options_for(d));
    const auto r = cube_root_bound_check(op, spectral_gap(op));
    o.expect(r.slack >= -kCubeRoot, name + " cube-root bound");
  }
  return o;
}

// 10. Gaussian shuffle, regularization and convolution convexity.
Outcome criterion_transforms() {
  Outcome o;
  constexpr double kShuffle = 1e-8, kHessian = 1e-6, kExact = 1e-12;
  const Grid line(make_box({{-12.0, 12.0}}), {24001});
  const std::tuple<std::string, std::function<double(double)>, double, double> triples[] = {
      {"constant", [](double) { return 1.0; }, 0.7, 1.3},
      {"bump", [](double y) { return std::exp(-y * y / 0.8); }, 0.5, 2.0},
      {"indicator", [](double y) { return (y >= 0.0 && y <= 1.0) ? 1.0 : 0.0; }, 1.0, 1.0},
  };
  for (const auto& [name, f, s, t] : triples) {
    const double disc = gaussian_shuffle_check(f, s, t, line).discrepancy;
    o.note(name + " shuffle " + num(disc));
    o.expect(disc <= kShuffle, name + " shuffle discrepancy");
  }
  const std::pair<Density, double> reg[] = {{interval(-1, 1), 0.3},
                                            {centered_exponential(), 0.25},
                                            {uniform_box(make_box({{-1, 1}, {-0.5, 0.5}})), 0.4}};
  int probed = 0;
  for (const auto& [base, delta] : reg) {
    const Density r = regularize(base, delta);
    const auto pts = probe_points(r, base.dim() == 1 ? 21 : 5);
    probed += static_cast<int>(pts.size());
    const double lo = min_hessian_eigenvalue(r, pts), hi = max_hessian_eigenvalue(r, pts);
    o.expect(lo >= delta - kHessian && hi <= delta + 1.0 / delta + kHessian,
             base.describe() + " hessian in [" + num(lo) + ", " + num(hi) + "]");
  }
  o.note(std::to_string(probed) + " probed points");
  for (const auto& [a, s] : {std::pair{1.0, 0.5}, std::pair{0.25, 2.0}, std::pair{2.0, 0.1}}) {
    const Density c = convolve_gaussian(gaussian(1, a), s);
    const double est = uniform_convexity_estimate(c, default_grid(c));
    o.expect(std::abs(c.uniform_convexity() - 1.0 / (a + s)) <= kExact &&
                 std::abs(est - 1.0 / (a + s)) <= kExact,
             "convolution parameter 1/(" + num(a) + "+" + num(s) + ")");
  }
  return o;
}

// 11. Slicing geometry.
Outcome criterion_slicing() {
  Outcome o;
  constexpr double kSection = 1e-9, kFubini = 1e-8;
  const ConvexBody square = make_box_body(make_box({{-0.5, 0.5}, {-0.5, 0.5}}));
  const double diag = section_volume(square, Point::Ones(2).normalized(), 0.0);
  o.note("cube diagonal section " + num(diag));
  o.expect(std::abs(diag - std::sqrt(2.0)) <= kSection, "cube diagonal section sqrt(2)");
  for (int n : {2, 3}) {
    const ConvexBody ball = normalize_volume(make_ball_body(Point::Zero(n), 1.0));
    const double unit = n == 2 ? 2.0 : kPi;
    double worst = 0.0;
    for (const auto& u : direction_set(n, 5)) {
      for (double f : {0.0, 0.25, 0.5, 0.9}) {
        const double off = f * ball.radius;
        const double exact = unit * std::pow(ball.radius * ball.radius - off * off, 0.5 * (n - 1));
        worst = std::max(worst, std::abs(section_volume(ball, u, off) - exact));
      }
    }
    o.note("volume-one ball n=" + std::to_string(n) + " worst section error " + num(worst));
    o.expect(std::abs(ball.volume - 1.0) <= kSection && worst <= kSection, "ball sections n=" + std::to_string(n));
  }
  const std::vector<std::pair<std::string, ConvexBody>> bodies = {
      {"square", square},
      {"cube", make_box_body(make_box({{0, 1}, {0, 2}, {0, 3}}))},
      {"disc", make_ball_body(Point::Zero(2), 1.3)},
      {"ball", make_ball_body(Point::Zero(3), 0.7)},
      {"triangle", regular_simplex_body(2)},
      {"tetrahedron", regular_simplex_body(3)},
  };
  double worst = 0.0;
  for (const auto& [name, k] : bodies) {
    for (const auto& u : direction_set(k.dim, 7)) {
      worst = std::max(worst, std::abs(fubini_volume(k, u) - k.volume) / k.volume);
    }
  }
  o.note("worst Fubini relative error " + num(worst));
  o.expect(worst <= kFubini, "Fubini volume recovery");
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 12. Two verify-all runs with the same seed write identical reports.
Outcome criterion_determinism(const std::string& cli) {
  Outcome o;
  if (cli.empty()) {
    o.expect(false, "path to the lclab binary not given");
    return o;
  }
  const auto base = std::filesystem::temp_directory_path() / "lclab_acceptance";
  std::filesystem::remove_all(base);
  std::vector<std::filesystem::path> dirs = {base / "run1", base / "run2"};
  for (const auto& d : dirs) {
    const std::string cmd = "\"" + cli + "\" verify-all --seed 1 --format json,csv,svg -q --out \"" + d.string() +
                            "\" > \"" + (base / (d.filename().string() + ".log")).string() + "\" 2>&1";
    std::filesystem::create_directories(base);
    const int rc = std::system(cmd.c_str());
    o.expect(rc == 0, "verify-all exit status " + std::to_string(rc));
  }
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
    const auto other = dirs[1] / entry.path().filename();
    ++files;
    o.expect(std::filesystem::exists(other) && slurp(entry.path()) == slurp(other),
             entry.path().filename().string() + " identical");
  }
  std::size_t files2 = 0;
  for ([[maybe_unused]] const auto& entry : std::filesystem::directory_iterator(dirs[1])) ++files2;
  o.expect(files == files2 && files >= 3, "same file set");
  o.note(std::to_string(files) + " files compared byte for byte");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"spectral oracles", criterion_spectral_oracles},
      {"Bochner identity", criterion_bochner},
      {"improved Lichnerowicz", criterion_lichnerowicz},
      {"eigenfunction identity", criterion_eigen_direction},
      {"section and half-space bounds", criterion_sections_grunbaum},
      {"Cheeger-Buser", criterion_cheeger_buser},
      {"localization martingale and sandwich", criterion_localization},
      {"localized Bochner", criterion_localized_bochner},
      {"H^-1, varentropy, cube-root", criterion_h_minus_one},
      {"shuffle, regularization, convolution", criterion_transforms},
      {"slicing geometry", criterion_slicing},
      {"determinism", [&] { return criterion_determinism(cli); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    if (!out.pass) ++failed;
    std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << " (" << criteria[i].first << ", "
              << num(seconds_since(t0)) << "s): " << out.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
