#include "lclab/report.hpp"

#include "lclab/errors.hpp"
#include "lclab/localization.hpp"
#include "lclab/spectral.hpp"
#include "lclab/specs.hpp"
#include "lclab/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace lclab {

using ojson = nlohmann::ordered_json;

bool CheckRecord::operator==(const CheckRecord& o) const {
  auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
  auto same_pairs = [&](const auto& x, const auto& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].first != y[i].first || !same(x[i].second, y[i].second)) return false;
    }
    return true;
  };
  return id == o.id && check == o.check && anchor == o.anchor && subject == o.subject && digest == o.digest &&
         mode == o.mode && passed == o.passed && same_pairs(values, o.values) && same_pairs(bounds, o.bounds) &&
         same(slack, o.slack) && tolerance_name == o.tolerance_name && same(tolerance, o.tolerance) &&
         message == o.message;
}

bool SuiteReport::all_passed() const { return failures() == 0; }

std::size_t SuiteReport::failures() const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const CheckRecord& r) {
    return r.mode == CheckMode::Assert && !r.passed;
  }));
}

std::map<std::string, double> default_tolerances() {
  return {
      {"eigen_residual", 1e-8},    // relative residual of the eigenpair
      {"eigen_cross_check", 1e-6}, // symmetrized and pencil solves agree
      {"spectral_oracle", 1e-3},   // closed-form gaps
      {"poincare", 1e-8},          // discrete Poincare slack
      {"poincare_equality", 1e-6}, // equality for the eigenfunction
      {"bochner", 1e-4},           // relative residual
      {"eigen_identity", 1e-6},
      {"eigen_inequality", 1e-4},
      {"lichnerowicz", 1e-3},
      {"dual", 1e-3},              // relative to the dimension
      {"varentropy", 1e-3},
      {"cube_root", 1e-3},
      {"section", 1e-6},
      {"grunbaum", 1e-6},
      {"kappa", 1e-6},
      {"buser", 1e-3},
      {"lipschitz", 1e-8},
      {"convexity", 1e-9},
      {"regularize_hessian", 1e-6},
      {"convolve", 1e-12},
      {"shuffle", 1e-8},
      {"z_max", 3.0},              // standard errors allowed for Monte Carlo means
      {"mc_floor", 1e-6},          // absolute floor for deterministic Monte Carlo cases
      {"cov_bound", 1e-6},
      {"restart", 1e-3},
      {"section_oracle", 1e-9},
      {"fubini", 1e-8},
      {"brunn_minkowski", 1e-9},
  };
}

SuiteConfig SuiteConfig::catalog() {
  SuiteConfig c;
  c.densities = {
      "gaussian:s=1",
      "uniform:box=[-1.7320508075688772,1.7320508075688772]",
      "exponential",
      "tilt:base=(uniform:box=[-1,1]),t=2",
      "tilt:base=(exponential),t=0.5,theta=0.3",
      "convolve:base=(exponential),s=0.5",
      "regularize:base=(uniform:box=[-1,1]),delta=0.3",
      "gaussian:n=2,s=0.5",
      "product:(gaussian:s=1),(uniform:box=[-1,1])",
  };
  c.bodies = {
      "body:cube:n=2",  "body:cube:n=3",      "body:ball:n=2,volume=1",
      "body:ball:n=3,volume=1", "body:simplex:n=2", "body:simplex:n=3",
  };
  c.checks = {"all"};
  c.figures = true;
  return c;
}

// ---------------------------------------------------------------- config

namespace {

[[noreturn]] void config_fail(const std::string& why) { throw SpecParseError("config: " + why); }

std::vector<std::string> string_list(const nlohmann::json& j, const std::string& key) {
  if (!j.is_array()) config_fail("'" + key + "' must be a list of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) config_fail("'" + key + "' must be a list of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::uint64_t unsigned_value(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    config_fail("'" + key + "' must be a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

}  // namespace

SuiteConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    config_fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) config_fail("top level must be an object");
  SuiteConfig c;
  c.checks.clear();
  c.figures = false;
  for (const auto& [key, v] : j.items()) {
    if (key == "densities") {
      c.densities = string_list(v, key);
    } else if (key == "bodies") {
      c.bodies = string_list(v, key);
    } else if (key == "grids") {
      c.grids = string_list(v, key);
    } else if (key == "checks") {
      c.checks = string_list(v, key);
      c.checks_given = true;
    } else if (key == "formats") {
      c.formats = string_list(v, key);
    } else if (key == "paths") {
      c.paths = unsigned_value(v, key);
    } else if (key == "small_paths") {
      c.small_paths = unsigned_value(v, key);
    } else if (key == "seed") {
      c.seed = unsigned_value(v, key);
    } else if (key == "out") {
      if (!v.is_string()) config_fail("'out' must be a string");
      c.out = v.get<std::string>();
    } else if (key == "figures") {
      if (!v.is_boolean()) config_fail("'figures' must be true or false");
      c.figures = v.get<bool>();
    } else if (key == "tolerances") {
      if (!v.is_object()) config_fail("'tolerances' must be an object");
      for (const auto& [name, tol] : v.items()) {
        if (!c.tolerances.count(name)) config_fail("unknown tolerance '" + name + "'");
        if (!tol.is_number() || !(tol.get<double>() >= 0)) config_fail("tolerance '" + name + "' must be >= 0");
        c.tolerances[name] = tol.get<double>();
      }
    } else {
      config_fail("unknown key '" + key + "'");
    }
  }
  validate_config(c);
  return c;
}

SuiteConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecParseError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void validate_config(const SuiteConfig& cfg) {
  for (const auto& s : cfg.densities) (void)parse_density(s);
  for (const auto& s : cfg.bodies) (void)parse_body(s);
  for (const auto& s : cfg.grids) (void)parse_grid(s);
  const auto known = all_checks();
  for (const auto& c : cfg.checks) {
    if (c != "all" && std::find(known.begin(), known.end(), c) == known.end()) {
      config_fail("unknown check '" + c + "'");
    }
  }
  for (const auto& f : cfg.formats) {
    if (f != "json" && f != "csv" && f != "svg") config_fail("unknown format '" + f + "'");
  }
  if (cfg.paths < 2 || cfg.small_paths < 2) config_fail("path counts must be at least 2");
}

// ---------------------------------------------------------------- json

namespace {

ojson num_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double json_num(const ojson& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::nan("");
  }
  throw SpecParseError("report: expected a number");
}

ojson pairs_json(const std::vector<std::pair<std::string, double>>& v) {
  ojson o = ojson::object();
  for (const auto& [k, x] : v) o[k] = num_json(x);
  return o;
}

std::vector<std::pair<std::string, double>> json_pairs(const ojson& o) {
  std::vector<std::pair<std::string, double>> v;
  for (const auto& [k, x] : o.items()) v.emplace_back(k, json_num(x));
  return v;
}

std::string mode_name(CheckMode m) { return m == CheckMode::Assert ? "assert" : "observe"; }

std::string status_name(const CheckRecord& r) {
  if (r.mode == CheckMode::Observe) return "observe";
  return r.passed ? "pass" : "fail";
}

}  // namespace

std::string report_json(const SuiteReport& r) {
  ojson root;
  root["seed"] = r.seed;
  root["failures"] = r.failures();
  ojson recs = ojson::array();
  for (const auto& c : r.records) {
    ojson o;
    o["id"] = c.id;
    o["check"] = c.check;
    o["anchor"] = c.anchor;
    o["subject"] = c.subject;
    o["digest"] = c.digest;
    o["mode"] = mode_name(c.mode);
    o["status"] = status_name(c);
    o["slack"] = num_json(c.slack);
    o["tolerance_name"] = c.tolerance_name;
    o["tolerance"] = num_json(c.tolerance);
    o["values"] = pairs_json(c.values);
    o["bounds"] = pairs_json(c.bounds);
    o["message"] = c.message;
    recs.push_back(std::move(o));
  }
  root["records"] = std::move(recs);
  return root.dump(2) + "\n";
}

SuiteReport report_from_json(const std::string& text) {
  SuiteReport r;
  try {
    const ojson root = ojson::parse(text);
    r.seed = root.at("seed").get<std::uint64_t>();
    for (const auto& o : root.at("records")) {
      CheckRecord c;
      c.id = o.at("id").get<std::string>();
      c.check = o.at("check").get<std::string>();
      c.anchor = o.at("anchor").get<std::string>();
      c.subject = o.at("subject").get<std::string>();
      c.digest = o.at("digest").get<std::string>();
      c.mode = o.at("mode").get<std::string>() == "assert" ? CheckMode::Assert : CheckMode::Observe;
      c.passed = o.at("status").get<std::string>() != "fail";
      c.slack = json_num(o.at("slack"));
      c.tolerance_name = o.at("tolerance_name").get<std::string>();
      c.tolerance = json_num(o.at("tolerance"));
      c.values = json_pairs(o.at("values"));
      c.bounds = json_pairs(o.at("bounds"));
      c.message = o.at("message").get<std::string>();
      r.records.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SpecParseError(std::string("report: ") + e.what());
  }
  return r;
}

// ---------------------------------------------------------------- csv

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string joined_pairs(const std::vector<std::pair<std::string, double>>& v) {
  std::string s;
  for (const auto& [k, x] : v) {
    if (!s.empty()) s += ';';
    s += k + "=" + fmt_num(x);
  }
  return s;
}

}  // namespace

std::string report_csv(const SuiteReport& r) {
  std::string out = "seed,id,check,anchor,subject,digest,mode,status,slack,tolerance_name,tolerance,values,bounds,message\n";
  for (const auto& c : r.records) {
    const std::vector<std::string> f = {std::to_string(r.seed), c.id, c.check, c.anchor, c.subject, c.digest,
                                        mode_name(c.mode), status_name(c), fmt_num(c.slack), c.tolerance_name,
                                        fmt_num(c.tolerance), joined_pairs(c.values), joined_pairs(c.bounds),
                                        c.message};
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) out += ',';
      out += csv_field(f[i]);
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------- svg

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string tick(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::string figure_svg(const Figure& f, std::uint64_t seed) {
  constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  double x0 = kInf, x1 = -kInf, y0 = 0.0, y1 = -kInf;
  for (const auto& s : f.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  y1 += 0.05 * (y1 - y0);
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  s += "<title>" + xml_escape(f.title) + "</title>\n";
  s += "<desc>seed=" + std::to_string(seed) + "</desc>\n";
  s += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  s += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + xml_escape(f.title) + "</text>\n";
  s += "<g stroke=\"black\" stroke-width=\"1\">\n";
  s += "<line x1=\"" + fixed(L, 2) + "\" y1=\"" + fixed(H - B, 2) + "\" x2=\"" + fixed(W - R, 2) + "\" y2=\"" +
       fixed(H - B, 2) + "\"/>\n";
  s += "<line x1=\"" + fixed(L, 2) + "\" y1=\"" + fixed(T, 2) + "\" x2=\"" + fixed(L, 2) + "\" y2=\"" +
       fixed(H - B, 2) + "\"/>\n";
  s += "</g>\n<g font-size=\"11\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    s += "<text x=\"" + fixed(px(xv), 2) + "\" y=\"" + fixed(H - B + 16, 2) + "\" text-anchor=\"middle\">" +
         tick(xv) + "</text>\n";
    s += "<text x=\"" + fixed(L - 6, 2) + "\" y=\"" + fixed(py(yv) + 4, 2) + "\" text-anchor=\"end\">" + tick(yv) +
         "</text>\n";
  }
  s += "<text x=\"" + fixed((L + W - R) / 2, 2) + "\" y=\"" + fixed(H - 12, 2) + "\" text-anchor=\"middle\">" +
       xml_escape(f.xlabel) + "</text>\n";
  s += "<text x=\"16\" y=\"" + fixed((T + H - B) / 2, 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       fixed((T + H - B) / 2, 2) + ")\">" + xml_escape(f.ylabel) + "</text>\n";
  s += "</g>\n";
  int colour = 0;
  for (const auto& ser : f.series) {
    std::string pts;
    for (std::size_t i = 0; i < ser.x.size(); ++i) {
      if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) continue;
      if (!pts.empty()) pts += ' ';
      pts += fixed(px(ser.x[i]), 2) + "," + fixed(py(ser.y[i]), 2);
    }
    const std::string stroke = ser.reference ? "black" : kPalette[colour++ % 10];
    s += "<polyline class=\"" + std::string(ser.reference ? "reference" : "series") + "\" data-label=\"" +
         xml_escape(ser.label) + "\" fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
         (ser.reference ? "2" : "1") + "\"" + (ser.reference ? " stroke-dasharray=\"6 4\"" : "") + " points=\"" +
         pts + "\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

// ---------------------------------------------------------------- files

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + p.string() + "'");
}

}  // namespace

std::vector<std::string> emit_report(const SuiteReport& r, const std::vector<std::string>& formats,
                                     const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
  std::vector<std::string> written;
  const std::filesystem::path base(dir);
  for (const auto& fmt : formats) {
    if (fmt == "json") {
      write_file(base / "report.json", report_json(r));
      written.push_back((base / "report.json").string());
    } else if (fmt == "csv") {
      write_file(base / "report.csv", report_csv(r));
      written.push_back((base / "report.csv").string());
    } else if (fmt == "svg") {
      for (const auto& f : r.figures) {
        const auto p = base / (f.name + ".svg");
        write_file(p, figure_svg(f, r.seed));
        written.push_back(p.string());
      }
    } else {
      throw SpecParseError("unknown format '" + fmt + "'");
    }
  }
  return written;
}

// ---------------------------------------------------------------- figures

Figure covariance_figure(const Density& d, double horizon, int steps, int paths, std::uint64_t seed) {
  const PosteriorTable table(d, posterior_grid(d));
  Sampler sampler(d, seed);
  Figure f;
  f.title = "Covariance of the tilted measure along localization paths";
  f.xlabel = "t";
  f.ylabel = "||A_t||_op";
  double ymax = 0.0;
  for (int i = 0; i < paths; ++i) {
    const TiltPath p = simulate_path(table, sampler, horizon, steps, Scheme::Representation, derive_seed(seed, i));
    Series s;
    s.label = "path " + std::to_string(i);
    for (std::size_t k = 0; k < p.times.size(); ++k) {
      s.x.push_back(p.times[k]);
      s.y.push_back(sym_max_eigenvalue(p.cov[k]));
      ymax = std::max(ymax, s.y.back());
    }
    f.series.push_back(std::move(s));
  }
  // The envelope 1/t starts where it enters the plotted range.
  Series env;
  env.label = "1/t";
  env.reference = true;
  const double t_start = std::max(horizon / 200, 1.0 / (1.5 * std::max(ymax, 1.0 / horizon)));
  for (int k = 0; k <= 200; ++k) {
    const double t = t_start + (horizon - t_start) * k / 200;
    env.x.push_back(t);
    env.y.push_back(1.0 / t);
  }
  f.series.push_back(std::move(env));
  return f;
}

Figure gap_figure(const Density& d, double horizon, int steps, int paths, std::uint64_t seed) {
  if (d.dim() != 1) throw UnsupportedDensity("gap trajectories are computed for 1D densities");
  const PosteriorTable table(d, posterior_grid(d));
  Sampler sampler(d, seed);
  Figure f;
  f.title = "Spectral gap of the tilted measure along localization paths";
  f.xlabel = "t";
  f.ylabel = "lambda_t";
  EigenOptions eo;
  eo.cross_check = false;
  for (int i = 0; i < paths; ++i) {
    const TiltPath p = simulate_path(table, sampler, horizon, steps, Scheme::Representation, derive_seed(seed, i));
    Series s;
    s.label = "path " + std::to_string(i);
    for (std::size_t k = 0; k < p.times.size(); ++k) {
      const Density dt = tilt(d, p.times[k], p.theta[k]);
      const DiscreteOperator op(dt, Grid(dt.effective_box(), {2001}), OperatorOptions{true});
      s.x.push_back(p.times[k]);
      s.y.push_back(spectral_gap(op, eo).lambda);
    }
    f.series.push_back(std::move(s));
  }
  Series ref;
  ref.label = "lambda = t";
  ref.reference = true;
  ref.x = {0.0, horizon};
  ref.y = {0.0, horizon};
  f.series.push_back(std::move(ref));
  return f;
}

namespace {

std::vector<double> sweep_offsets(const ConvexBody& k, const Point& u, int offsets) {
  const auto [lo, hi] = k.support_interval(u);
  std::vector<double> o;
  for (int j = 0; j < offsets; ++j) o.push_back(lo + (j + 0.5) / offsets * (hi - lo));
  return o;
}

}  // namespace

Figure section_sweep_figure(const ConvexBody& k, const std::vector<Point>& directions, int offsets,
                            const std::string& name) {
  Figure f;
  f.name = name;
  f.title = "Hyperplane sections of " + k.describe();
  f.xlabel = "offset";
  f.ylabel = "section volume";
  for (const auto& u : directions) {
    Series s;
    s.label = "u=" + fmt_point(u);
    for (double o : sweep_offsets(k, u, offsets)) {
      s.x.push_back(o);
      s.y.push_back(section_volume(k, u, o));
    }
    f.series.push_back(std::move(s));
  }
  return f;
}

std::string direction_sweep_csv(const ConvexBody& k, const std::vector<Point>& directions, int offsets) {
  std::string out = "direction";
  for (int i = 0; i < k.dim; ++i) out += ",u" + std::to_string(i + 1);
  out += ",offset,section\n";
  for (std::size_t d = 0; d < directions.size(); ++d) {
    const Point& u = directions[d];
    for (double o : sweep_offsets(k, u, offsets)) {
      out += std::to_string(d);
      for (int i = 0; i < k.dim; ++i) out += "," + fmt_num(u[i]);
      out += "," + fmt_num(o) + "," + fmt_num(section_volume(k, u, o)) + "\n";
    }
  }
  return out;
}

}  // namespace lclab
