#include "lclab/localization.hpp"

#include "lclab/errors.hpp"
#include "lclab/util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace lclab {

// ---------------------------------------------------------------------------
// Posterior table

PosteriorTable::PosteriorTable(const Density& d, const Grid& grid) : d_(d), grid_(grid) {
  if (grid.dim() != d.dim()) throw Error("grid and density dimensions differ");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point x = grid.node(k);
    const double w = grid.weight(k);
    if (!(w > 0.0)) continue;
    const double lr = d.log_density(x);
    if (!std::isfinite(lr)) continue;
    x_.push_back(x);
    logw_.push_back(std::log(w) + lr);
    gpsi_.push_back(d.grad_psi(x));
  }
  if (x_.empty()) throw NonPositiveDensity("density vanishes on every node of " + grid.describe());
}

namespace {

/// Exponents of the tilted weights and their maximum.
double tilt_exponents(const std::vector<Point>& x, const std::vector<double>& logw, double t, const Point& theta,
                      std::vector<double>& e) {
  e.resize(x.size());
  double m = -kInf;
  for (std::size_t k = 0; k < x.size(); ++k) {
    e[k] = logw[k] + theta.dot(x[k]) - 0.5 * t * x[k].squaredNorm();
    m = std::max(m, e[k]);
  }
  return m;
}

}  // namespace

std::vector<double> PosteriorTable::weights(double t, const Point& theta) const {
  std::vector<double> e;
  const double m = tilt_exponents(x_, logw_, t, theta, e);
  double s = 0.0;
  for (double& v : e) {
    v = std::exp(v - m);
    s += v;
  }
  for (double& v : e) v /= s;
  return e;
}

double PosteriorTable::log_normalizer(double t, const Point& theta) const {
  std::vector<double> e;
  const double m = tilt_exponents(x_, logw_, t, theta, e);
  double s = 0.0;
  for (double v : e) s += std::exp(v - m);
  return m + std::log(s);
}

PosteriorTable::Moments PosteriorTable::moments(double t, const Point& theta) const {
  std::vector<double> e;
  const double m = tilt_exponents(x_, logw_, t, theta, e);
  const int n = dim();
  // Accumulate about the heaviest node to limit cancellation.
  const std::size_t ref = static_cast<std::size_t>(std::max_element(e.begin(), e.end()) - e.begin());
  const Point& x0 = x_[ref];
  double s = 0.0;
  Point s1 = Point::Zero(n);
  Mat s2 = Mat::Zero(n, n);
  for (std::size_t k = 0; k < x_.size(); ++k) {
    const double w = std::exp(e[k] - m);
    const Point y = x_[k] - x0;
    s += w;
    s1 += w * y;
    s2 += w * y * y.transpose();
  }
  Moments out;
  const Point dm = s1 / s;
  out.a = x0 + dm;
  out.cov = s2 / s - dm * dm.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  out.log_z = m + std::log(s);
  return out;
}

double PosteriorTable::tilted_density(double t, const Point& theta, const Point& x) const {
  const double lr = d_.log_density(x);
  if (!std::isfinite(lr)) return 0.0;
  if (t == 0.0 && theta.isZero(0.0)) return std::exp(lr);  // no tilt
  return std::exp(lr + theta.dot(x) - 0.5 * t * x.squaredNorm() - log_normalizer(t, theta));
}

Grid posterior_grid(const Density& d) {
  const int n = d.dim();
  const int pts = n == 1 ? 1201 : (n == 2 ? 161 : 41);
  return Grid(d.effective_box(), std::vector<int>(n, pts), QuadRule::Simpson);
}

PosteriorTable::Moments posterior_moments(const Density& d, double t, const Point& theta, const Grid& grid) {
  if (t < 0.0) throw Error("tilt time must be nonnegative");
  if (t == 0.0 && theta.norm() > 0.0) (void)tilt(d, t, theta);  // throws when not integrable
  return PosteriorTable(d, grid).moments(t, theta);
}

// ---------------------------------------------------------------------------
// Paths

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Representation:
      return "representation";
    case Scheme::Euler:
      return "euler";
    case Scheme::CoupledEuler:
      return "coupled-euler";
  }
  return "unknown";
}

TiltPath simulate_path(const PosteriorTable& table, Sampler& sampler, double horizon, int steps, Scheme scheme,
                       std::uint64_t seed) {
  if (horizon < 0.0) throw Error("horizon must be nonnegative");
  const int n = table.dim();
  TiltPath p;
  p.scheme = scheme;
  p.seed = seed;
  std::mt19937_64 rng(seed);
  const Point x = sampler.draw(rng);
  auto record = [&](double t, const Point& th) {
    const auto m = table.moments(t, th);
    p.times.push_back(t);
    p.theta.push_back(th);
    p.a.push_back(m.a);
    p.cov.push_back(m.cov);
    return m.a;
  };
  if (horizon == 0.0) {
    record(0.0, Point::Zero(n));
    return p;
  }
  if (steps <= 0) throw StepSizeError("a positive horizon needs at least one step");
  const double dt = horizon / steps;
  if (dt > kMaxStep)
    throw StepSizeError("step " + fmt_num(dt) + " exceeds the cap " + fmt_num(kMaxStep) + "; use more steps");
  std::normal_distribution<double> normal;
  const double sq = std::sqrt(dt);
  Point w = Point::Zero(n);
  Point th = Point::Zero(n);
  Point th_ref = Point::Zero(n);  // representation path driving the coupled scheme
  Point a = record(0.0, th);
  Point a_ref = a;
  for (int k = 0; k < steps; ++k) {
    Point dw(n);
    for (int i = 0; i < n; ++i) dw[i] = sq * normal(rng);
    const double t_next = (k + 1 == steps) ? horizon : dt * (k + 1);
    switch (scheme) {
      case Scheme::Representation:
        w += dw;
        th = t_next * x + w;
        break;
      case Scheme::Euler:
        th += a * dt + dw;
        break;
      case Scheme::CoupledEuler: {
        // Innovation increment of the representation path: dW + (X - a) dt.
        const Point innovation = dw + (x - a_ref) * dt;
        th += a * dt + innovation;
        w += dw;
        th_ref = t_next * x + w;
        break;
      }
    }
    a = record(t_next, th);
    if (scheme == Scheme::CoupledEuler) a_ref = table.moments(t_next, th_ref).a;
  }
  return p;
}

TiltPath simulate_path(const Density& d, double horizon, int steps, Scheme scheme, std::uint64_t seed) {
  const PosteriorTable table(d, posterior_grid(d));
  Sampler sampler(d, seed);
  return simulate_path(table, sampler, horizon, steps, scheme, seed);
}

void write_path_csv(const std::string& path, const TiltPath& p) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  const int n = p.theta.empty() ? 1 : static_cast<int>(p.theta.front().size());
  out << "t";
  for (int i = 0; i < n; ++i) out << ",theta" << i + 1;
  for (int i = 0; i < n; ++i) out << ",a" << i + 1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out << ",A" << i + 1 << j + 1;
  out << "\n";
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    out << fmt_num(p.times[k]);
    for (int i = 0; i < n; ++i) out << "," << fmt_num(p.theta[k][i]);
    for (int i = 0; i < n; ++i) out << "," << fmt_num(p.a[k][i]);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out << "," << fmt_num(p.cov[k](i, j));
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Monte Carlo checks

Estimate estimate(const std::vector<double>& values) {
  Estimate e;
  e.n = values.size();
  if (e.n == 0) return e;
  double s = 0.0;
  for (double v : values) s += v;
  e.mean = s / e.n;
  if (e.n > 1) {
    double q = 0.0;
    for (double v : values) q += (v - e.mean) * (v - e.mean);
    e.se = std::sqrt(q / (e.n - 1) / e.n);
  }
  return e;
}

namespace {

double z_score(double diff, double se) {
  if (se > 0.0) return std::abs(diff) / se;
  return diff == 0.0 ? 0.0 : kInf;
}

/// One sampler stream per worker; draws depend only on the per-path generator.
struct Workers {
  int count;
  std::vector<Sampler> samplers;
  Workers(const Density& d, const PathOptions& opts) : count(opts.workers > 0 ? opts.workers : worker_count()) {
    Sampler base(d, opts.seed);
    for (int w = 0; w < count; ++w) samplers.push_back(base.stream(w));
  }
};

/// theta_t = t X + W_t at the requested increasing times, X drawn first.
std::vector<Point> representation_at(Sampler& sampler, std::mt19937_64& rng, const std::vector<double>& times) {
  const Point x = sampler.draw(rng);
  std::normal_distribution<double> normal;
  Point w = Point::Zero(x.size());
  double prev = 0.0;
  std::vector<Point> out;
  for (double t : times) {
    const double sq = std::sqrt(t - prev);
    for (int i = 0; i < w.size(); ++i) w[i] += sq * normal(rng);
    prev = t;
    out.push_back(t * x + w);
  }
  return out;
}

double weighted_variance(const std::vector<double>& w, const std::vector<double>& f) {
  double m = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) m += w[k] * f[k];
  double v = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) v += w[k] * (f[k] - m) * (f[k] - m);
  return v;
}

std::vector<double> tabulate(const PosteriorTable& table, const std::function<double(const Point&)>& f) {
  std::vector<double> v(table.size());
  for (std::size_t k = 0; k < table.size(); ++k) v[k] = f(table.node(k));
  return v;
}

}  // namespace

std::vector<Point> default_probes(const Density& d, int count) {
  const PosteriorTable table(d, posterior_grid(d));
  const auto m = table.moments(0.0, Point::Zero(d.dim()));
  const double sd = std::sqrt(m.cov(0, 0));
  std::vector<Point> out;
  for (int k = 0; k < count; ++k) {
    const double s = count == 1 ? 0.0 : -0.8 + 1.6 * k / (count - 1);
    Point x = m.a;
    x[0] += s * sd;
    out.push_back(x);
  }
  return out;
}

MartingaleReport martingale_check(const PosteriorTable& table, const std::vector<Point>& probes, double horizon,
                                  const PathOptions& opts) {
  const Density& d = table.density();
  Workers workers(d, opts);
  const std::size_t np = opts.paths;
  std::vector<std::vector<double>> values(probes.size(), std::vector<double>(np));
  std::vector<double> tcov(np, 0.0);
  parallel_for(np, workers.count, [&](std::size_t i, int w) {
    const TiltPath p = simulate_path(table, workers.samplers[w], horizon, horizon > 0 ? opts.steps : 0,
                                     Scheme::Representation, derive_seed(opts.seed, i));
    for (std::size_t k = 0; k < p.times.size(); ++k)
      if (p.times[k] > 0.0) tcov[i] = std::max(tcov[i], p.times[k] * sym_max_eigenvalue(p.cov[k]));
    const Point& th = p.theta.back();
    const bool untilted = horizon == 0.0;
    const double log_z = untilted ? 0.0 : table.log_normalizer(horizon, th);
    for (std::size_t j = 0; j < probes.size(); ++j) {
      const Point& x = probes[j];
      const double lr = d.log_density(x);
      values[j][i] = std::isfinite(lr) ? std::exp(lr + th.dot(x) - 0.5 * horizon * x.squaredNorm() - log_z) : 0.0;
    }
  });
  MartingaleReport rep;
  rep.horizon = horizon;
  rep.paths = np;
  for (std::size_t j = 0; j < probes.size(); ++j) {
    ProbeResult pr;
    pr.x = probes[j];
    pr.rho = d.density(probes[j]);
    pr.p_t = estimate(values[j]);
    pr.z = z_score(pr.p_t.mean - pr.rho, pr.p_t.se);
    rep.max_z = std::max(rep.max_z, pr.z);
    rep.probes.push_back(pr);
  }
  for (double v : tcov) rep.max_t_cov = std::max(rep.max_t_cov, v);
  return rep;
}

SandwichReport variance_sandwich_check(const PosteriorTable& table, const std::function<double(const Point&)>& f,
                                       double t, double lambda0, const PathOptions& opts) {
  const std::vector<double> fv = tabulate(table, f);
  Workers workers(table.density(), opts);
  std::vector<double> vars(opts.paths);
  parallel_for(opts.paths, workers.count, [&](std::size_t i, int w) {
    std::mt19937_64 rng(derive_seed(opts.seed, i));
    const Point th = representation_at(workers.samplers[w], rng, {t}).back();
    vars[i] = weighted_variance(table.weights(t, th), fv);
  });
  SandwichReport rep;
  rep.t = t;
  rep.lambda0 = lambda0;
  rep.var0 = weighted_variance(table.weights(0.0, Point::Zero(table.dim())), fv);
  rep.mean_var_t = estimate(vars);
  rep.factor = 2.0 + t / lambda0;
  rep.slack_lower = rep.var0 - rep.mean_var_t.mean;
  rep.slack_upper = rep.factor * rep.mean_var_t.mean - rep.var0;
  const double se = rep.mean_var_t.se;
  rep.holds = rep.slack_lower >= -3.0 * se - 1e-12 && rep.slack_upper >= -3.0 * rep.factor * se - 1e-12;
  return rep;
}

MonotoneReport variance_monotonicity(const PosteriorTable& table, const std::function<double(const Point&)>& f,
                                     const std::vector<double>& times, const PathOptions& opts) {
  if (times.empty() || !std::is_sorted(times.begin(), times.end()) || times.front() < 0.0)
    throw Error("monotonicity times must be nonnegative and increasing");
  const std::vector<double> fv = tabulate(table, f);
  Workers workers(table.density(), opts);
  const std::size_t nt = times.size();
  std::vector<std::vector<double>> vars(nt, std::vector<double>(opts.paths));
  parallel_for(opts.paths, workers.count, [&](std::size_t i, int w) {
    std::mt19937_64 rng(derive_seed(opts.seed, i));
    const auto th = representation_at(workers.samplers[w], rng, times);
    for (std::size_t k = 0; k < nt; ++k) vars[k][i] = weighted_variance(table.weights(times[k], th[k]), fv);
  });
  MonotoneReport rep;
  rep.times = times;
  rep.holds = true;
  for (std::size_t k = 0; k < nt; ++k) rep.mean_var.push_back(estimate(vars[k]));
  for (std::size_t k = 0; k + 1 < nt; ++k) {
    std::vector<double> diff(opts.paths);
    for (std::size_t i = 0; i < opts.paths; ++i) diff[i] = vars[k + 1][i] - vars[k][i];
    const Estimate e = estimate(diff);
    rep.increments.push_back(e);
    const double z = e.mean <= 0.0 ? 0.0 : z_score(e.mean, e.se);
    rep.max_increment_z = std::max(rep.max_increment_z, z);
    if (z > 3.0) rep.holds = false;
  }
  return rep;
}

LocalizedBochnerReport localized_bochner_check(const PosteriorTable& table, const TestFunction& u, double t,
                                               const PathOptions& opts) {
  const std::size_t m = table.size();
  std::vector<double> lap(m);
  std::vector<Point> gu(m);
  for (std::size_t k = 0; k < m; ++k) {
    lap[k] = u.hess(table.node(k)).trace();
    gu[k] = u.grad(table.node(k));
  }
  LocalizedBochnerReport rep;
  rep.t = t;
  {
    const auto w0 = table.weights(0.0, Point::Zero(table.dim()));
    for (std::size_t k = 0; k < m; ++k) {
      const double lu = lap[k] - table.grad_psi(k).dot(gu[k]);
      rep.lhs += w0[k] * (lu * lu + t * gu[k].squaredNorm());
    }
  }
  Workers workers(table.density(), opts);
  std::vector<double> vals(opts.paths);
  parallel_for(opts.paths, workers.count, [&](std::size_t i, int w) {
    std::mt19937_64 rng(derive_seed(opts.seed, i));
    const Point th = representation_at(workers.samplers[w], rng, {t}).back();
    const auto wt = table.weights(t, th);
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      // grad psi_t = grad psi + t x - theta.
      const Point g = table.grad_psi(k) + t * table.node(k) - th;
      const double lu = lap[k] - g.dot(gu[k]);
      acc += wt[k] * lu * lu;
    }
    vals[i] = acc;
  });
  rep.rhs = estimate(vals);
  rep.z = z_score(rep.rhs.mean - rep.lhs, rep.rhs.se);
  for (double v : vals) rep.max_path_deviation = std::max(rep.max_path_deviation, std::abs(v - rep.lhs));
  return rep;
}

RestartReport spectral_restart_check(const PosteriorTable& table, double t, double lambda0, const PathOptions& opts,
                                     int lattice_points) {
  if (!(t > 0.0)) throw Error("restart check needs a positive time");
  const Density& d = table.density();
  if (d.dim() > 2) throw UnsupportedDensity("per-path eigen-solves are limited to one and two dimensions");
  Workers workers(d, opts);
  const std::size_t np = opts.paths;
  std::vector<double> lam(np), cov(np), upper(np), lower(np), ratio_terms(np);
  parallel_for(np, workers.count, [&](std::size_t i, int w) {
    std::mt19937_64 rng(derive_seed(opts.seed, i));
    const Point th = representation_at(workers.samplers[w], rng, {t}).back();
    const double a_op = sym_max_eigenvalue(table.moments(t, th).cov);
    const Density dt = tilt(d, t, th);
    const int pts = d.dim() == 1 ? lattice_points : std::max(41, static_cast<int>(std::sqrt(lattice_points)) * 2 + 1);
    const DiscreteOperator op(dt, Grid(dt.effective_box(), std::vector<int>(d.dim(), pts)), OperatorOptions{true});
    EigenOptions eo;
    eo.cross_check = false;
    lam[i] = spectral_gap(op, eo).lambda;
    cov[i] = a_op;
    const double mid = std::sqrt(t / a_op);
    upper[i] = lam[i] - mid;
    lower[i] = mid - t;
    ratio_terms[i] = std::sqrt(a_op / t);
  });
  RestartReport rep;
  rep.t = t;
  rep.lambda0 = lambda0;
  rep.paths = np;
  rep.worst_upper_slack = *std::min_element(upper.begin(), upper.end());
  rep.worst_lower_slack = *std::min_element(lower.begin(), lower.end());
  rep.lambda_t = estimate(lam);
  rep.sqrt_cov_over_t = estimate(ratio_terms);
  rep.cov_op = estimate(cov);
  rep.ratio = (1.0 / lambda0) / rep.sqrt_cov_over_t.mean;
  return rep;
}

SchemeReport scheme_agreement_check(const PosteriorTable& table, double horizon, int steps, std::size_t coupled_paths,
                                    const PathOptions& opts) {
  const Density& d = table.density();
  Workers workers(d, opts);
  SchemeReport rep;
  rep.horizon = horizon;
  rep.steps = steps;
  std::vector<double> gaps(coupled_paths);
  parallel_for(coupled_paths, workers.count, [&](std::size_t i, int w) {
    const std::uint64_t s = derive_seed(opts.seed, i);
    const TiltPath r = simulate_path(table, workers.samplers[w], horizon, steps, Scheme::Representation, s);
    const TiltPath e = simulate_path(table, workers.samplers[w], horizon, steps, Scheme::CoupledEuler, s);
    gaps[i] = (r.theta.back() - e.theta.back()).cwiseAbs().maxCoeff();
  });
  for (double g : gaps) rep.max_coupled_gap = std::max(rep.max_coupled_gap, g);

  // Independent noise for the in-law comparison.
  const std::uint64_t euler_seed = derive_seed(opts.seed, 0xe01e5ULL);
  std::vector<double> repr(opts.paths), euler(opts.paths);
  parallel_for(opts.paths, workers.count, [&](std::size_t i, int w) {
    std::mt19937_64 rng(derive_seed(opts.seed, i));
    repr[i] = representation_at(workers.samplers[w], rng, {horizon}).back()[0];
    const TiltPath e =
        simulate_path(table, workers.samplers[w], horizon, steps, Scheme::Euler, derive_seed(euler_seed, i));
    euler[i] = e.theta.back()[0];
  });
  auto var_and_se = [](const std::vector<double>& v, double mean, double& var, double& se) {
    const double n = static_cast<double>(v.size());
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
      const double c = (x - mean) * (x - mean);
      m2 += c;
      m4 += c * c;
    }
    var = m2 / (n - 1);
    se = std::sqrt(std::max(0.0, m4 / n - (m2 / n) * (m2 / n)) / n);
  };
  rep.repr_mean = estimate(repr);
  rep.euler_mean = estimate(euler);
  var_and_se(repr, rep.repr_mean.mean, rep.repr_var, rep.repr_var_se);
  var_and_se(euler, rep.euler_mean.mean, rep.euler_var, rep.euler_var_se);
  rep.mean_z = z_score(rep.repr_mean.mean - rep.euler_mean.mean, std::hypot(rep.repr_mean.se, rep.euler_mean.se));
  rep.var_z = z_score(rep.repr_var - rep.euler_var, std::hypot(rep.repr_var_se, rep.euler_var_se));
  return rep;
}

}  // namespace lclab
