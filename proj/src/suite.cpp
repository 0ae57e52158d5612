#include "lclab/errors.hpp"
#include "lclab/isoperimetry.hpp"
#include "lclab/localization.hpp"
#include "lclab/moments.hpp"
#include "lclab/report.hpp"
#include "lclab/spectral.hpp"
#include "lclab/specs.hpp"
#include "lclab/transforms.hpp"
#include "lclab/util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <optional>
#include <set>

namespace lclab {

std::vector<std::string> all_checks() {
  return {"best_section", "bochner",    "brunn_minkowski", "buser",       "convolve",     "cube_root",
          "dual",         "eigen_direction", "fubini",     "grunbaum",    "kappa",        "lichnerowicz",
          "lipschitz",    "localized_bochner", "martingale", "monotone",  "regularize",   "restart",
          "sandwich",     "scheme",     "section_oracle",  "sections",    "shuffle",      "spectral",
          "uniform_convexity", "varentropy"};
}

std::vector<std::string> check_group(const std::string& group) {
  if (group == "spectral") {
    return {"spectral", "bochner", "eigen_direction", "lichnerowicz", "dual", "varentropy", "cube_root",
            "uniform_convexity"};
  }
  if (group == "isoperimetry") return {"buser", "lipschitz", "sections", "grunbaum", "kappa"};
  if (group == "localize") return {"martingale", "sandwich", "monotone", "localized_bochner", "restart", "scheme"};
  if (group == "slice") return {"section_oracle", "fubini", "brunn_minkowski", "best_section"};
  if (group == "verify-all") return all_checks();
  throw SpecParseError("unknown check group '" + group + "'");
}

namespace {

struct Subject {
  std::string spec;
  Density d;
  std::optional<ConvexBody> body;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string slug(const std::string& s) {
  std::string o;
  for (char c : s) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-';
    if (keep) {
      o += c;
    } else if (!o.empty() && o.back() != '_') {
      o += '_';
    }
  }
  while (!o.empty() && o.back() == '_') o.pop_back();
  return o;
}

bool full_support(const Density& d) { return d.support().kind == Support::Kind::AllSpace; }

/// Densities evaluated without a convolution quadrature.
bool convolution_free(const Density& d) { return d.describe().find("convolve:") == std::string::npos; }

/// Per-subject state with the lattice, operator and eigenpair built on demand.
class Context {
 public:
  Context(const SuiteConfig& cfg, const Subject& s, int inner_workers)
      : cfg_(cfg), s_(s), inner_workers_(inner_workers) {}

  const SuiteConfig& cfg() const { return cfg_; }
  const Subject& subject() const { return s_; }
  const Density& d() const { return s_.d; }
  int dim() const { return s_.d.dim(); }
  double tol(const std::string& name) const { return cfg_.tolerances.at(name); }

  const Grid& grid() {
    if (!grid_) grid_ = suite_grid(d());
    return *grid_;
  }
  Grid suite_grid(const Density& d) const {
    for (const auto& g : cfg_.grids) {
      Grid grid = parse_grid(g);
      if (grid.dim() == d.dim()) return grid;
    }
    if (d.dim() == 1) return default_grid(d);
    return Grid(d.effective_box(), std::vector<int>(d.dim(), d.dim() == 2 ? 201 : 41));
  }
  static OperatorOptions operator_options(const Density& d) {
    const auto k = d.support().kind;
    return OperatorOptions{k != Support::Kind::AllSpace && k != Support::Kind::Box};
  }
  const DiscreteOperator& op() {
    if (!op_) op_ = std::make_unique<DiscreteOperator>(d(), grid(), operator_options(d()));
    return *op_;
  }
  const SpectralResult& sr() {
    if (!sr_) sr_ = spectral_gap(op());
    return *sr_;
  }
  const PosteriorTable& table() {
    if (!table_) table_ = std::make_unique<PosteriorTable>(d(), posterior_grid(d()));
    return *table_;
  }

  PathOptions path_options(std::size_t paths, const std::string& id) const {
    PathOptions o;
    o.paths = paths;
    o.steps = 10;
    o.seed = derive_seed(cfg_.seed, fnv1a64(id));
    o.workers = inner_workers_;
    return o;
  }

  std::string id(const std::string& check, const std::string& variant) const {
    std::string i = check + "/" + s_.spec;
    if (!variant.empty()) i += "/" + variant;
    return i;
  }

  CheckRecord& record(const std::string& check, const std::string& variant, const std::string& anchor,
                      CheckMode mode) {
    CheckRecord r;
    r.id = id(check, variant);
    r.check = check;
    r.anchor = anchor;
    r.subject = s_.spec;
    r.mode = mode;
    std::string canon = r.id + "|seed=" + std::to_string(cfg_.seed) + "|paths=" + std::to_string(cfg_.paths) + "," +
                        std::to_string(cfg_.small_paths);
    for (const auto& g : cfg_.grids) canon += "|" + g;
    r.digest = hex64(fnv1a64(canon));
    out.push_back(std::move(r));
    return out.back();
  }

  /// Asserted record: passes when slack >= -tolerance.
  CheckRecord& asserted(const std::string& check, const std::string& variant, const std::string& anchor, double slack,
                        const std::string& tol_name, std::vector<std::pair<std::string, double>> values,
                        std::vector<std::pair<std::string, double>> bounds = {}, double tol_scale = 1.0) {
    CheckRecord& r = record(check, variant, anchor, CheckMode::Assert);
    r.slack = slack;
    r.tolerance_name = tol_name;
    r.tolerance = tol(tol_name) * tol_scale;
    r.values = std::move(values);
    r.bounds = std::move(bounds);
    r.passed = slack >= -r.tolerance;
    if (!r.passed) {
      r.message = anchor + " violated: slack " + fmt_num(slack) + " below -" + tol_name + " = -" +
                  fmt_num(r.tolerance);
    }
    return r;
  }

  CheckRecord& observed(const std::string& check, const std::string& variant, const std::string& anchor,
                        std::vector<std::pair<std::string, double>> values,
                        std::vector<std::pair<std::string, double>> bounds = {}) {
    CheckRecord& r = record(check, variant, anchor, CheckMode::Observe);
    r.values = std::move(values);
    r.bounds = std::move(bounds);
    r.slack = std::nan("");
    return r;
  }

  std::vector<CheckRecord> out;
  std::vector<Figure> figures;

 private:
  const SuiteConfig& cfg_;
  const Subject& s_;
  int inner_workers_;
  std::optional<Grid> grid_;
  std::unique_ptr<DiscreteOperator> op_;
  std::optional<SpectralResult> sr_;
  std::unique_ptr<PosteriorTable> table_;
};

/// Monte Carlo mean against a target: allowed band is z_max standard errors
/// plus an absolute floor for cases where the estimate is deterministic.
double mc_slack(const Context& c, double diff, double se) { return c.tol("z_max") * se - std::abs(diff); }

// ------------------------------------------------------------ spectral group

void check_spectral(Context& c) {
  const auto& sr = c.sr();
  const auto& op = c.op();
  const char* anchor = "Spectral gap of the weighted Laplacian";
  c.observed("spectral", "gap", anchor,
             {{"lambda", sr.lambda}, {"c_p", sr.c_p}, {"nodes", static_cast<double>(op.size())}});
  c.asserted("spectral", "residual", anchor, -sr.residual / sr.lambda, "eigen_residual",
             {{"residual", sr.residual}, {"lambda", sr.lambda}});
  const double cross = std::max(std::abs(sr.lambda_direct - sr.lambda), std::abs(sr.lambda_symmetrized - sr.lambda)) /
                       sr.lambda;
  c.asserted("spectral", "cross_check", anchor, -cross, "eigen_cross_check",
             {{"lambda", sr.lambda}, {"lambda_direct", sr.lambda_direct}, {"lambda_symmetrized", sr.lambda_symmetrized}});
  const auto pr = poincare_random_check(op, sr, 20, derive_seed(c.cfg().seed, fnv1a64(c.id("spectral", "poincare"))));
  c.asserted("spectral", "poincare", "Poincare inequality", pr.worst_slack, "poincare",
             {{"worst_slack", pr.worst_slack}, {"functions", static_cast<double>(pr.functions)}});
  c.asserted("spectral", "poincare_equality", "Poincare inequality", -pr.eigen_equality_rel, "poincare_equality",
             {{"eigen_equality_rel", pr.eigen_equality_rel}});
  std::optional<double> exact;
  if (auto g = c.d().as_gaussian()) exact = 1.0 / g->s;
  if (c.d().kind() == DensityKind::UniformBox && c.dim() == 1) {
    const Box b = c.d().effective_box();
    exact = std::pow(std::numbers::pi / (b.hi[0] - b.lo[0]), 2);
  }
  if (exact) {
    const double rel = std::abs(sr.lambda - *exact) / *exact;
    c.asserted("spectral", "oracle", anchor, -rel, "spectral_oracle", {{"lambda", sr.lambda}, {"relative_error", rel}},
               {{"exact", *exact}});
  }
}

void check_bochner(Context& c) {
  const char* anchor = "Integrated Bochner formula";
  const int n = c.dim();
  Point e1 = Point::Zero(n);
  e1[0] = 1.0;
  std::vector<TestFunction> fs;
  fs.push_back(linear_function(e1));
  fs.back().name = "x1";
  fs.push_back(quadratic_function(e1, Point::Zero(n)));
  fs.back().name = "x1_squared";
  fs.push_back(quadratic_function(Point::Constant(n, 0.5), Point::Constant(n, 0.3)));
  fs.back().name = "quadratic_mixed";
  if (n == 1) fs.push_back(spline_function(c.op(), c.sr().eigenfunction, "eigenfunction"));
  for (const auto& u : fs) {
    const auto br = bochner_residual(c.d(), u, c.grid());
    c.asserted("bochner", u.name, anchor, -br.residual, "bochner",
               {{"l_squared", br.l_squared}, {"hessian_hs", br.hessian_hs}, {"curvature", br.curvature},
                {"residual", br.residual}});
  }
}

void check_eigen_direction(Context& c) {
  const auto r = eigen_direction_check(c.op(), c.sr());
  const char* anchor = "Eigenfunction gradient identity";
  c.asserted("eigen_direction", "identity", anchor, -r.identity_residual, "eigen_identity",
             {{"grad_sq", r.grad_sq}, {"moment_term", r.moment_term}, {"residual", r.identity_residual}});
  c.asserted("eigen_direction", "curvature_side", anchor, r.slack_a, "eigen_inequality",
             {{"grad_sq", r.grad_sq}, {"curvature_term", r.curvature_term}});
  c.asserted("eigen_direction", "covariance_side", anchor, r.slack_c, "eigen_inequality",
             {{"grad_sq", r.grad_sq}, {"cov_term", r.cov_term}});
}

void check_lichnerowicz(Context& c) {
  const auto r = lichnerowicz_check(c.d(), c.sr());
  const char* anchor = "Improved Lichnerowicz inequality";
  c.asserted("lichnerowicz", "chain", anchor, std::min(r.slack_left, r.slack_right), "lichnerowicz",
             {{"c_p", r.c_p}, {"middle", r.middle}, {"upper", r.upper}, {"t", r.t}},
             {{"slack_left", r.slack_left}, {"slack_right", r.slack_right}});
  c.observed("lichnerowicz", "improvement", anchor, {{"improvement", 1.0 - r.c_p / r.upper}});
}

void check_dual(Context& c) {
  const int n = c.dim();
  const auto f = quadratic_function(Point::Constant(n, 1.0), Point::Zero(n));
  const auto r = dual_identities_check(c.op(), f);
  const char* anchor = "Dual identity for the gradient of the potential";
  c.asserted("dual", "identity", anchor, -std::abs(r.dual_sum - r.n), "dual", {{"dual_sum", r.dual_sum}},
             {{"n", r.n}}, r.n);
  c.asserted("dual", "h_minus_one", "H^-1 variance inequality", r.test_dual - r.test_variance, "dual",
             {{"variance", r.test_variance}, {"dual", r.test_dual}});
}

void check_varentropy(Context& c) {
  const auto& op = c.op();
  const Density& d = c.d();
  const double v = op.variance(op.sample([&](const Point& x) { return d.psi(x); }));
  c.asserted("varentropy", "", "Varentropy bound", c.dim() - v, "varentropy", {{"varentropy", v}},
             {{"n", static_cast<double>(c.dim())}}, c.dim());
}

void check_cube_root(Context& c) {
  const auto r = cube_root_bound_check(c.op(), c.sr());
  c.asserted("cube_root", "", "Cube-root spectral gap bound", r.slack, "cube_root",
             {{"lambda", r.lambda}, {"r", r.r}, {"t", r.t}}, {{"bound", r.bound}});
}

void check_uniform_convexity(Context& c) {
  const double t = c.d().uniform_convexity();
  const double est = uniform_convexity_estimate(c.d(), c.grid());
  c.asserted("uniform_convexity", "", "Uniform convexity of the potential", est - t, "convexity",
             {{"estimate", est}}, {{"t", t}}, std::max(1.0, t));
}

// ------------------------------------------------------------ isoperimetry group

void check_buser(Context& c) {
  const auto& sr = c.sr();
  IsoperimetricReport iso = c.dim() == 1 ? cheeger_1d(c.d(), c.grid())
                                         : halfspace_profile(c.d(), direction_set(c.dim(), 16));
  const auto b = buser_sandwich_check(iso, sr, c.tol("buser"));
  const char* anchor = "Cheeger-Buser inequalities";
  const double slack = b.exact ? std::min(b.ratio - b.lower, b.upper - b.ratio) : b.upper - b.ratio;
  c.asserted("buser", b.exact ? "sandwich" : "upper", anchor, slack, "buser",
             {{"psi", b.psi}, {"c_p", b.c_p}, {"ratio", b.ratio}}, {{"lower", b.lower}, {"upper", b.upper}});
  c.observed("buser", "cheeger", "Isoperimetric constant", {{"psi", iso.psi}, {"offset", iso.offset}});
}

void check_lipschitz(Context& c) {
  const auto r = lipschitz_variance_ratio(c.op(), c.sr(), direction_set(c.dim(), c.dim() == 1 ? 2 : 8));
  const char* anchor = "Variance of Lipschitz functions";
  c.asserted("lipschitz", "poincare", anchor, r.worst_poincare_slack, "lipschitz",
             {{"worst_slack", r.worst_poincare_slack}});
  c.observed("lipschitz", "ratio", anchor, {{"sup_variance", r.sup_variance}, {"c_p", r.c_p}, {"ratio", r.ratio}});
}

std::vector<Point> section_directions(int dim) { return direction_set(dim, dim == 1 ? 2 : (dim == 2 ? 16 : 24)); }

void check_sections(Context& c) {
  const Density iso = isotropize(c.d());
  double lo = kInf, hi = -kInf;
  for (const auto& u : section_directions(c.dim())) {
    const double v = central_section(iso, u);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  c.asserted("sections", "", "Hensley-Fradelizi section bounds",
             std::min(lo - kSectionLower, kSectionUpper - hi), "section", {{"min", lo}, {"max", hi}},
             {{"lower", kSectionLower}, {"upper", kSectionUpper}});
}

void check_grunbaum(Context& c) {
  const Density iso = isotropize(c.d());
  double lo = kInf, hi = -kInf;
  for (const auto& u : section_directions(c.dim())) {
    const double v = halfspace_mass(iso, u, 0.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  c.asserted("grunbaum", "", "Grunbaum half-space bounds", std::min(lo - kGrunbaumLower, kGrunbaumUpper - hi),
             "grunbaum", {{"min", lo}, {"max", hi}}, {{"lower", kGrunbaumLower}, {"upper", kGrunbaumUpper}});
}

void check_kappa(Context& c) {
  const Density iso = isotropize(c.d());
  const DiscreteOperator op(iso, c.suite_grid(iso), Context::operator_options(iso));
  EigenOptions eo;
  eo.cross_check = false;
  const double c_p = spectral_gap(op, eo).c_p;
  const double k = kappa_functional(iso);
  const double bound = 2.0 * std::sqrt(c_p);
  c.asserted("kappa", "", "Third moment tensor bound", bound - k, "kappa", {{"kappa", k}, {"c_p", c_p}},
             {{"bound", bound}});
}

// ------------------------------------------------------------ localization group

constexpr double kHorizon = 0.5;

Point first_axis(int n) {
  Point e = Point::Zero(n);
  e[0] = 1.0;
  return e;
}

void check_martingale(Context& c) {
  const std::string id = c.id("martingale", "probes");
  const auto r = martingale_check(c.table(), default_probes(c.d(), 5), kHorizon, c.path_options(c.cfg().paths, id));
  double slack = kInf;
  for (const auto& p : r.probes) slack = std::min(slack, mc_slack(c, p.p_t.mean - p.rho, p.p_t.se));
  c.asserted("martingale", "probes", "Martingale property of the tilt density", slack, "mc_floor",
             {{"max_z", r.max_z}, {"paths", static_cast<double>(r.paths)}, {"horizon", r.horizon}},
             {{"z_max", c.tol("z_max")}});
  c.asserted("martingale", "covariance", "Covariance bound under localization", 1.0 - r.max_t_cov, "cov_bound",
             {{"max_t_cov", r.max_t_cov}}, {{"bound", 1.0}});
}

void check_sandwich(Context& c) {
  const std::string id = c.id("sandwich", "");
  const TestFunction f = linear_function(first_axis(c.dim()));
  const auto r = variance_sandwich_check(c.table(), f.value, kHorizon, c.sr().lambda,
                                         c.path_options(c.cfg().paths, id));
  const double se = r.mean_var_t.se;
  const double slack = std::min(r.slack_lower + c.tol("z_max") * se, r.slack_upper + c.tol("z_max") * r.factor * se);
  c.asserted("sandwich", "", "Variance sandwich under localization", slack, "mc_floor",
             {{"var0", r.var0}, {"mean_var_t", r.mean_var_t.mean}, {"se", se}, {"factor", r.factor}},
             {{"lower", r.mean_var_t.mean}, {"upper", r.factor * r.mean_var_t.mean}});
}

void check_monotone(Context& c) {
  const std::string id = c.id("monotone", "");
  const auto f = quadratic_function(first_axis(c.dim()), Point::Zero(c.dim()));
  const auto r = variance_monotonicity(c.table(), f.value, {0.0, 0.25, 0.5, 1.0}, c.path_options(c.cfg().paths, id));
  double slack = kInf;
  for (const auto& inc : r.increments) slack = std::min(slack, c.tol("z_max") * inc.se - inc.mean);
  std::vector<std::pair<std::string, double>> vals;
  for (std::size_t k = 0; k < r.times.size(); ++k) vals.emplace_back("var_t" + fmt_num(r.times[k]), r.mean_var[k].mean);
  c.asserted("monotone", "", "Expected variance decreases under localization", slack, "mc_floor", vals);
}

void check_localized_bochner(Context& c) {
  const int n = c.dim();
  std::vector<TestFunction> us = {linear_function(first_axis(n)), quadratic_function(first_axis(n), Point::Zero(n))};
  us[0].name = "x1";
  us[1].name = "x1_squared";
  for (const auto& u : us) {
    const std::string id = c.id("localized_bochner", u.name);
    const auto r = localized_bochner_check(c.table(), u, kHorizon, c.path_options(c.cfg().small_paths, id));
    c.asserted("localized_bochner", u.name, "Localized Bochner formula", mc_slack(c, r.rhs.mean - r.lhs, r.rhs.se),
               "mc_floor", {{"lhs", r.lhs}, {"rhs", r.rhs.mean}, {"se", r.rhs.se}, {"z", r.z}});
  }
}

void check_restart(Context& c) {
  const std::string id = c.id("restart", "");
  const auto r = spectral_restart_check(c.table(), kHorizon, c.sr().lambda,
                                        c.path_options(std::max<std::size_t>(2, c.cfg().small_paths / 10), id), 1001);
  const char* anchor = "Spectral gap along localization paths";
  c.asserted("restart", "chain", anchor, std::min(r.worst_upper_slack, r.worst_lower_slack), "restart",
             {{"worst_upper_slack", r.worst_upper_slack}, {"worst_lower_slack", r.worst_lower_slack},
              {"paths", static_cast<double>(r.paths)}});
  c.observed("restart", "ratio", anchor,
             {{"ratio", r.ratio}, {"mean_lambda_t", r.lambda_t.mean}, {"mean_cov_op", r.cov_op.mean},
              {"mean_sqrt_cov_over_t", r.sqrt_cov_over_t.mean}});
}

void check_scheme(Context& c) {
  const std::string id = c.id("scheme", "");
  const auto r = scheme_agreement_check(c.table(), kHorizon, 50, 200, c.path_options(c.cfg().small_paths, id));
  const char* anchor = "Exact-law representation against the Euler scheme";
  const double zmax = c.tol("z_max");
  const double slack = std::min(zmax * std::hypot(r.repr_mean.se, r.euler_mean.se) - std::abs(r.repr_mean.mean - r.euler_mean.mean),
                                zmax * std::hypot(r.repr_var_se, r.euler_var_se) - std::abs(r.repr_var - r.euler_var));
  c.asserted("scheme", "law", anchor, slack, "mc_floor",
             {{"repr_mean", r.repr_mean.mean}, {"euler_mean", r.euler_mean.mean}, {"repr_var", r.repr_var},
              {"euler_var", r.euler_var}, {"mean_z", r.mean_z}, {"var_z", r.var_z}});
  c.observed("scheme", "coupled_gap", anchor, {{"max_coupled_gap", r.max_coupled_gap}, {"steps", 50.0}});
}

// ------------------------------------------------------------ transforms

void check_regularize(Context& c) {
  constexpr double delta = 0.25;
  const Density r = regularize(c.d(), delta);
  const auto pts = probe_points(r, 9);
  const double lo = min_hessian_eigenvalue(r, pts), hi = max_hessian_eigenvalue(r, pts);
  c.asserted("regularize", "", "Hessian bounds of the regularized potential",
             std::min(lo - delta, delta + 1.0 / delta - hi), "regularize_hessian",
             {{"min_hessian", lo}, {"max_hessian", hi}, {"points", static_cast<double>(pts.size())}},
             {{"lower", delta}, {"upper", delta + 1.0 / delta}});
}

void check_convolve(Context& c) {
  constexpr double s = 0.5;
  const auto g = c.d().as_gaussian();
  const Density conv = convolve_gaussian(c.d(), s);
  const double exact = 1.0 / (g->s + s);
  const double param = conv.uniform_convexity();
  const double est = uniform_convexity_estimate(conv, c.suite_grid(conv));
  c.asserted("convolve", "", "Uniform convexity after Gaussian convolution",
             -std::max(std::abs(param - exact), std::abs(est - exact)), "convolve",
             {{"parameter", param}, {"estimate", est}}, {{"exact", exact}});
}

void check_shuffle(Context& c) {
  const Grid g(make_box({{-12.0, 12.0}}), {24001});
  struct Triple {
    std::string name;
    std::function<double(double)> f;
    double s, t;
  };
  const std::vector<Triple> triples = {
      {"constant", [](double) { return 1.0; }, 0.7, 1.3},
      {"bump", [](double y) { return std::exp(-y * y / 0.8); }, 0.5, 2.0},
      {"indicator", [](double y) { return (y >= 0.0 && y <= 1.0) ? 1.0 : 0.0; }, 1.0, 1.0},
  };
  for (const auto& tr : triples) {
    const auto r = gaussian_shuffle_check(tr.f, tr.s, tr.t, g);
    c.asserted("shuffle", tr.name, "Gaussian shuffle identity", -r.discrepancy, "shuffle",
               {{"discrepancy", r.discrepancy}, {"scale", r.scale}, {"s", tr.s}, {"t", tr.t}});
  }
}

// ------------------------------------------------------------ bodies

bool unit_cube(const ConvexBody& k) {
  if (k.kind != ConvexBody::Kind::Box) return false;
  for (const auto& v : k.vertices) {
    if ((v.cwiseAbs() - Point::Constant(k.dim, 0.5)).cwiseAbs().maxCoeff() > 1e-15) return false;
  }
  return true;
}

void check_section_oracle(Context& c) {
  const ConvexBody& k = *c.subject().body;
  const char* anchor = "Closed-form sections of cubes and balls";
  std::vector<std::pair<std::string, double>> vals, bounds;
  double worst = 0.0;
  auto compare = [&](const std::string& name, const Point& u, double o, double exact) {
    const double v = section_volume(k, u.normalized(), o);
    vals.emplace_back(name, v);
    bounds.emplace_back(name, exact);
    worst = std::max(worst, std::abs(v - exact));
  };
  if (unit_cube(k)) {
    const Point diag = Point::Ones(k.dim);
    compare("axis", first_axis(k.dim), 0.0, 1.0);
    compare("diagonal", diag, 0.0, k.dim == 2 ? std::sqrt(2.0) : 0.75 * std::sqrt(3.0));
  } else if (k.kind == ConvexBody::Kind::Ball) {
    const Point u = direction_set(k.dim, 5)[1];
    const double unit = k.dim == 2 ? 2.0 : std::numbers::pi;
    for (double f : {0.0, 0.3, 0.7}) {
      const double o = f * k.radius;
      compare("offset_" + fmt_num(f), u, u.dot(k.center) + o,
              unit * std::pow(k.radius * k.radius - o * o, 0.5 * (k.dim - 1)));
    }
  } else {
    return;
  }
  c.asserted("section_oracle", "", anchor, -worst, "section_oracle", vals, bounds);
}

void check_fubini(Context& c) {
  const ConvexBody& k = *c.subject().body;
  double worst = 0.0;
  for (const auto& u : direction_set(k.dim, 5)) worst = std::max(worst, std::abs(fubini_volume(k, u) - k.volume) / k.volume);
  c.asserted("fubini", "", "Fubini volume recovery", -worst, "fubini", {{"relative_error", worst}},
             {{"volume", k.volume}});
}

void check_brunn_minkowski(Context& c) {
  const ConvexBody& k = *c.subject().body;
  double worst = -kInf;
  for (const auto& u : direction_set(k.dim, 5)) worst = std::max(worst, brunn_minkowski_defect(k, u));
  c.asserted("brunn_minkowski", "", "Brunn concavity of sections", -worst, "brunn_minkowski",
             {{"max_second_difference", worst}});
}

void check_best_section(Context& c) {
  const ConvexBody k = normalize_volume(*c.subject().body);
  const auto b = best_section(k, k.dim == 2 ? 64 : 48, 16);
  std::vector<std::pair<std::string, double>> vals = {{"value", b.value}, {"offset", b.query.offset}};
  for (int i = 0; i < k.dim; ++i) vals.emplace_back("u" + std::to_string(i + 1), b.query.normal[i]);
  c.observed("best_section", "", "Largest hyperplane section of a volume-one body", vals);
  if (c.cfg().figures) {
    c.figures.push_back(section_sweep_figure(k, direction_set(k.dim, k.dim == 2 ? 4 : 6), 101,
                                             "sweep_" + slug(c.subject().spec)));
  }
}

// ------------------------------------------------------------ dispatch

struct CheckDef {
  std::string name;
  std::function<bool(const Subject&)> applies;
  std::function<void(Context&)> run;
  std::string anchor;
};

const std::vector<CheckDef>& registry() {
  auto dim_le = [](int n) { return [n](const Subject& s) { return s.d.dim() <= n; }; };
  auto one_d = [](const Subject& s) { return s.d.dim() == 1; };
  auto convex = [](const Subject& s) { return s.d.dim() <= 2 && s.d.uniform_convexity() > 0; };
  auto smooth = [](const Subject& s) { return s.d.dim() <= 2 && full_support(s.d); };
  auto body = [](const Subject& s) { return s.body.has_value(); };
  static const std::vector<CheckDef> defs = {
      {"spectral", dim_le(2), check_spectral, "Spectral gap of the weighted Laplacian"},
      {"bochner", smooth, check_bochner, "Integrated Bochner formula"},
      {"eigen_direction", one_d, check_eigen_direction, "Eigenfunction gradient identity"},
      {"lichnerowicz", convex, check_lichnerowicz, "Improved Lichnerowicz inequality"},
      {"dual", smooth, check_dual, "Dual identity for the gradient of the potential"},
      {"varentropy", dim_le(2), check_varentropy, "Varentropy bound"},
      {"cube_root", convex, check_cube_root, "Cube-root spectral gap bound"},
      {"uniform_convexity", convex, check_uniform_convexity, "Uniform convexity of the potential"},
      {"buser", dim_le(2), check_buser, "Cheeger-Buser inequalities"},
      {"lipschitz", dim_le(2), check_lipschitz, "Variance of Lipschitz functions"},
      {"sections", dim_le(3), check_sections, "Hensley-Fradelizi section bounds"},
      {"grunbaum", dim_le(3), check_grunbaum, "Grunbaum half-space bounds"},
      {"kappa", dim_le(2), check_kappa, "Third moment tensor bound"},
      {"martingale", one_d, check_martingale, "Martingale property of the tilt density"},
      {"sandwich", one_d, check_sandwich, "Variance sandwich under localization"},
      {"monotone", one_d, check_monotone, "Expected variance decreases under localization"},
      {"localized_bochner", [](const Subject& s) { return s.d.dim() == 1 && full_support(s.d); },
       check_localized_bochner, "Localized Bochner formula"},
      {"restart", one_d, check_restart, "Spectral gap along localization paths"},
      {"scheme", one_d, check_scheme, "Exact-law representation against the Euler scheme"},
      {"regularize", [](const Subject& s) { return s.d.dim() == 1 && !s.body && convolution_free(s.d); },
       check_regularize,
       "Hessian bounds of the regularized potential"},
      {"convolve", [](const Subject& s) { return s.d.as_gaussian().has_value(); }, check_convolve,
       "Uniform convexity after Gaussian convolution"},
      {"section_oracle", body, check_section_oracle, "Closed-form sections of cubes and balls"},
      {"fubini", body, check_fubini, "Fubini volume recovery"},
      {"brunn_minkowski", body, check_brunn_minkowski, "Brunn concavity of sections"},
      {"best_section", body, check_best_section, "Largest hyperplane section of a volume-one body"},
  };
  return defs;
}

void run_guarded(Context& c, const CheckDef& def) {
  const std::size_t before = c.out.size();
  const auto start = std::chrono::steady_clock::now();
  try {
    def.run(c);
  } catch (const std::exception& e) {
    c.out.resize(before);
    CheckRecord& r = c.record(def.name, "error", def.anchor, CheckMode::Assert);
    r.passed = false;
    r.slack = std::nan("");
    r.message = def.anchor + " could not be evaluated: " + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (std::size_t i = before; i < c.out.size(); ++i) c.out[i].runtime = secs;
}

void add_figures(Context& c, const std::set<std::string>& selected) {
  if (!c.cfg().figures || c.dim() != 1 || c.subject().body || !selected.count("martingale")) return;
  const std::uint64_t seed = derive_seed(c.cfg().seed, fnv1a64("figure/" + c.subject().spec));
  Figure cov = covariance_figure(c.d(), 1.0, 20, 20, seed);
  cov.name = "covariance_" + slug(c.subject().spec);
  c.figures.push_back(std::move(cov));
  Figure gap = gap_figure(c.d(), 1.0, 10, 5, seed);
  gap.name = "gap_" + slug(c.subject().spec);
  c.figures.push_back(std::move(gap));
}

}  // namespace

SuiteReport run_suite(const SuiteConfig& cfg) {
  validate_config(cfg);
  std::set<std::string> selected;
  for (const auto& c : cfg.checks) {
    if (c == "all") {
      for (const auto& a : all_checks()) selected.insert(a);
    } else {
      selected.insert(c);
    }
  }
  std::vector<Subject> subjects;
  for (const auto& s : cfg.densities) subjects.push_back({s, parse_density(s), std::nullopt});
  for (const auto& s : cfg.bodies) {
    const ConvexBody k = parse_body(s);
    subjects.push_back({s, body_to_density(k), k});
  }
  // The shuffle check has no subject; it runs once under a fixed label.
  const bool shuffle = selected.count("shuffle") > 0;
  const Subject shuffle_subject{"gaussian-shuffle", gaussian(1, 1.0), std::nullopt};

  const std::size_t tasks = subjects.size() + (shuffle ? 1 : 0);
  const int workers = std::max(1, std::min<int>(worker_count(), static_cast<int>(std::max<std::size_t>(1, tasks))));
  const int inner = workers > 1 ? 1 : 0;
  std::vector<std::vector<CheckRecord>> recs(tasks);
  std::vector<std::vector<Figure>> figs(tasks);
  parallel_for(tasks, workers, [&](std::size_t i, int) {
    if (i == subjects.size()) {
      Context c(cfg, shuffle_subject, inner);
      run_guarded(c, {"shuffle", nullptr, check_shuffle, "Gaussian shuffle identity"});
      recs[i] = std::move(c.out);
      return;
    }
    Context c(cfg, subjects[i], inner);
    for (const auto& def : registry()) {
      if (selected.count(def.name) && def.applies(subjects[i])) run_guarded(c, def);
    }
    try {
      add_figures(c, selected);
    } catch (const std::exception&) {
      // Figures are illustrations; a subject that cannot be plotted is skipped.
    }
    recs[i] = std::move(c.out);
    figs[i] = std::move(c.figures);
  });

  SuiteReport rep;
  rep.seed = cfg.seed;
  for (auto& r : recs) rep.records.insert(rep.records.end(), r.begin(), r.end());
  for (auto& f : figs) rep.figures.insert(rep.figures.end(), f.begin(), f.end());
  std::sort(rep.records.begin(), rep.records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(rep.figures.begin(), rep.figures.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return rep;
}

}  // namespace lclab
