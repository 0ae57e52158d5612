#include "lclab/specs.hpp"

#include "lclab/errors.hpp"
#include "lclab/moments.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

namespace lclab {

namespace {

[[noreturn]] void fail(std::string_view spec, const std::string& why) {
  throw SpecParseError("bad spec '" + std::string(spec) + "': " + why);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_parens(std::string_view spec, const std::string& s) {
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') return trim(std::string_view(s).substr(1, s.size() - 2));
  if (!s.empty() && (s.front() == '(' || s.back() == ')')) fail(spec, "unbalanced parentheses in '" + s + "'");
  return s;
}

double parse_number(std::string_view spec, const std::string& text) {
  std::string t = trim(text);
  if (!t.empty() && t.front() == '+') t.erase(0, 1);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) fail(spec, "not a number: '" + text + "'");
  return v;
}

int parse_int(std::string_view spec, const std::string& text) {
  const double v = parse_number(spec, text);
  if (v != std::floor(v) || v < 0 || v > 1e9) fail(spec, "not a count: '" + text + "'");
  return static_cast<int>(v);
}

std::vector<double> parse_list(std::string_view spec, const std::string& text) {
  const std::string t = trim(text);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') return {parse_number(spec, t)};
  std::vector<double> out;
  for (const auto& item : split_top_level(std::string_view(t).substr(1, t.size() - 2), ',')) {
    out.push_back(parse_number(spec, item));
  }
  return out;
}

Point to_point(const std::vector<double>& v) {
  Point p(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<int>(i)] = v[i];
  return p;
}

std::vector<std::vector<double>> parse_rows(std::string_view spec, const std::string& text) {
  const std::string t = trim(text);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') return {{parse_number(spec, t)}};
  const auto items = split_top_level(std::string_view(t).substr(1, t.size() - 2), ',');
  if (items.empty() || trim(items.front()).empty() || trim(items.front()).front() != '[') {
    return {parse_list(spec, t)};
  }
  std::vector<std::vector<double>> rows;
  for (const auto& it : items) rows.push_back(parse_list(spec, it));
  return rows;
}

Box parse_box(std::string_view spec, const std::string& text) {
  const auto axes = split_top_level(text, 'x');
  if (axes.empty() || static_cast<int>(axes.size()) > kMaxDim) fail(spec, "box needs 1 to 3 intervals");
  Box b{Point(static_cast<int>(axes.size())), Point(static_cast<int>(axes.size()))};
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const auto iv = parse_list(spec, axes[i]);
    if (iv.size() != 2 || !(iv[0] < iv[1])) fail(spec, "interval '" + trim(axes[i]) + "' must be [lo,hi] with lo < hi");
    b.lo[static_cast<int>(i)] = iv[0];
    b.hi[static_cast<int>(i)] = iv[1];
  }
  return b;
}

/// key=value arguments with usage tracking so leftovers are reported.
class Args {
 public:
  Args(std::string_view spec, std::string_view rest) : spec_(spec) {
    if (trim(rest).empty()) return;
    for (const auto& item : split_top_level(rest, ',')) {
      const std::string it = trim(item);
      if (it.empty()) fail(spec_, "empty argument");
      int depth = 0;
      std::size_t eq = std::string::npos;
      for (std::size_t i = 0; i < it.size(); ++i) {
        const char c = it[i];
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') --depth;
        if (c == '=' && depth == 0) {
          eq = i;
          break;
        }
      }
      if (eq == std::string::npos) {
        positional_.push_back(it);
      } else {
        const std::string key = trim(std::string_view(it).substr(0, eq));
        if (kv_.count(key)) fail(spec_, "duplicate key '" + key + "'");
        kv_[key] = trim(std::string_view(it).substr(eq + 1));
      }
    }
  }

  bool has(const std::string& k) const { return kv_.count(k) > 0; }
  std::string str(const std::string& k) {
    if (!has(k)) fail(spec_, "missing '" + k + "'");
    used_.insert(k);
    return kv_.at(k);
  }
  double num(const std::string& k) { return parse_number(spec_, str(k)); }
  double num(const std::string& k, double def) { return has(k) ? num(k) : def; }
  int count(const std::string& k, int def) { return has(k) ? parse_int(spec_, str(k)) : def; }
  Point vec(const std::string& k) { return to_point(parse_list(spec_, str(k))); }
  const std::vector<std::string>& positional() const { return positional_; }

  /// Rejects keys nobody asked for and stray positional items.
  void finish(bool positional_allowed = false) const {
    for (const auto& [k, v] : kv_) {
      if (!used_.count(k)) fail(spec_, "unknown key '" + k + "'");
    }
    if (!positional_allowed && !positional_.empty()) fail(spec_, "unexpected item '" + positional_.front() + "'");
  }

 private:
  std::string_view spec_;
  std::map<std::string, std::string> kv_;
  std::vector<std::string> positional_;
  std::set<std::string> used_;
};

std::pair<std::string, std::string> split_head(std::string_view spec) {
  const std::string s = trim(spec);
  const auto parts = split_top_level(s, ':');
  if (parts.empty() || trim(parts.front()).empty()) fail(spec, "empty spec");
  const std::string head = trim(parts.front());
  const std::string rest = parts.size() > 1 ? s.substr(s.find(':', 0) + 1) : std::string();
  return {head, rest};
}

std::vector<Halfspace> halfspaces_from_rows(std::string_view spec, const std::vector<std::vector<double>>& rows,
                                            int& dim) {
  std::vector<Halfspace> hs;
  for (const auto& r : rows) {
    if (r.size() < 2 || r.size() > kMaxDim + 1) fail(spec, "half-space rows are [normal..., offset]");
    const int n = static_cast<int>(r.size()) - 1;
    if (dim == 0) dim = n;
    if (n != dim) fail(spec, "half-space rows disagree on dimension");
    Halfspace h{to_point(std::vector<double>(r.begin(), r.end() - 1)), r.back()};
    const double len = h.normal.norm();
    if (!(len > 0)) fail(spec, "zero half-space normal");
    h.normal /= len;
    h.offset /= len;
    hs.push_back(h);
  }
  return hs;
}

std::vector<Halfspace> load_hpoly_file(std::string_view spec, const std::string& path, int& dim) {
  std::ifstream in(path);
  if (!in) fail(spec, "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(spec, "invalid JSON in '" + path + "': " + e.what());
  }
  if (!j.is_object()) fail(spec, "'" + path + "' must hold an object");
  for (const auto& [k, v] : j.items()) {
    if (k != "dim" && k != "halfspaces") fail(spec, "unknown key '" + k + "' in '" + path + "'");
  }
  if (!j.contains("halfspaces") || !j["halfspaces"].is_array()) fail(spec, "'" + path + "' needs a halfspaces array");
  std::vector<std::vector<double>> rows;
  for (const auto& h : j["halfspaces"]) {
    if (!h.is_object() || !h.contains("normal") || !h.contains("offset") || h.size() != 2) {
      fail(spec, "half-spaces in '" + path + "' are {\"normal\": [...], \"offset\": c}");
    }
    auto row = h["normal"].get<std::vector<double>>();
    row.push_back(h["offset"].get<double>());
    rows.push_back(row);
  }
  if (j.contains("dim")) dim = j["dim"].get<int>();
  return halfspaces_from_rows(spec, rows, dim);
}

ConvexBody parse_body_impl(std::string_view spec) {
  std::string s = trim(spec);
  if (s.rfind("body:", 0) != 0) fail(spec, "body specs start with 'body:'");
  const auto [kind, rest] = split_head(std::string_view(s).substr(5));
  Args a(spec, rest);
  ConvexBody k;
  if (kind == "cube") {
    const int n = a.count("n", 2);
    if (n < 1 || n > kMaxDim) fail(spec, "dimension must be 1 to 3");
    Box b{Point::Constant(n, -0.5), Point::Constant(n, 0.5)};
    k = make_box_body(b);
  } else if (kind == "box") {
    k = make_box_body(parse_box(spec, a.str("box")));
  } else if (kind == "ball") {
    const int n = a.has("center") ? static_cast<int>(a.vec("center").size()) : a.count("n", 2);
    Point c = Point::Zero(n);
    if (a.has("center")) c = a.vec("center");
    if (a.has("n") && a.count("n", n) != n) fail(spec, "center and n disagree");
    const double r = a.num("r", 1.0);
    if (!(r > 0)) fail(spec, "radius must be positive");
    k = make_ball_body(c, r);
  } else if (kind == "simplex") {
    if (a.has("v")) {
      std::vector<Point> v;
      for (const auto& row : parse_rows(spec, a.str("v"))) v.push_back(to_point(row));
      k = make_simplex_body(v);
    } else {
      k = regular_simplex_body(a.count("n", 2));
    }
  } else if (kind == "hpoly") {
    int dim = 0;
    std::vector<Halfspace> hs;
    if (a.has("file")) {
      hs = load_hpoly_file(spec, a.str("file"), dim);
    } else {
      hs = halfspaces_from_rows(spec, parse_rows(spec, a.str("h")), dim);
    }
    k = make_hpolytope_body(dim, hs);
  } else {
    fail(spec, "unknown body kind '" + kind + "'");
  }
  if (a.has("volume")) {
    if (a.num("volume") != 1.0) fail(spec, "only volume=1 is supported");
    k = normalize_volume(k);
  }
  a.finish();
  return k;
}

Density parse_density_impl(std::string_view spec) {
  if (is_body_spec(spec)) return body_to_density(parse_body_impl(spec));
  const auto [kind, rest] = split_head(spec);
  Args a(spec, rest);
  auto base = [&]() { return parse_density(strip_parens(spec, a.str("base"))); };
  Density d = [&]() -> Density {
    if (kind == "gaussian") {
      const double s = a.num("s", 1.0);
      if (a.has("mean")) {
        const Point m = a.vec("mean");
        if (a.has("n") && a.count("n", 1) != m.size()) fail(spec, "mean and n disagree");
        return gaussian(static_cast<int>(m.size()), s, m);
      }
      return gaussian(a.count("n", 1), s);
    }
    if (kind == "uniform") return uniform_box(parse_box(spec, a.str("box")));
    if (kind == "exponential") return centered_exponential();
    if (kind == "ball") {
      const int n = a.has("center") ? static_cast<int>(a.vec("center").size()) : a.count("n", 2);
      const Point c = a.has("center") ? a.vec("center") : Point(Point::Zero(n));
      if (a.has("n") && a.count("n", n) != n) fail(spec, "center and n disagree");
      return uniform_ball(c, a.num("r", 1.0));
    }
    if (kind == "simplex") return body_to_density(regular_simplex_body(a.count("n", 2)));
    if (kind == "product") {
      std::vector<Density> f;
      for (const auto& p : a.positional()) f.push_back(parse_density(strip_parens(spec, p)));
      if (f.size() < 2) fail(spec, "product needs at least two factors");
      return product(f);
    }
    if (kind == "tilt") {
      Density b = base();
      const double t = a.num("t", 0.0);
      Point th = a.has("theta") ? a.vec("theta") : Point(Point::Zero(b.dim()));
      if (th.size() != b.dim()) fail(spec, "theta has the wrong dimension");
      return tilt(b, t, th);
    }
    if (kind == "convolve") {
      Density b = base();
      return convolve_gaussian(b, a.num("s"));
    }
    if (kind == "regularize") {
      Density b = base();
      return regularize(b, a.num("delta"));
    }
    if (kind == "isotropize") return isotropize(base());
    if (kind == "affine") {
      Density b = base();
      const int n = b.dim();
      Mat m = Mat::Identity(n, n);
      if (a.has("a")) {
        const auto rows = parse_rows(spec, a.str("a"));
        if (rows.size() == 1 && rows[0].size() == 1) {
          m *= rows[0][0];
        } else {
          if (static_cast<int>(rows.size()) != n) fail(spec, "matrix has the wrong shape");
          for (int i = 0; i < n; ++i) {
            if (static_cast<int>(rows[i].size()) != n) fail(spec, "matrix has the wrong shape");
            for (int j = 0; j < n; ++j) m(i, j) = rows[i][j];
          }
        }
      }
      Point sh = a.has("b") ? a.vec("b") : Point(Point::Zero(n));
      if (sh.size() != n) fail(spec, "shift has the wrong dimension");
      return affine_image(b, m, sh);
    }
    fail(spec, "unknown density kind '" + kind + "'");
  }();
  a.finish(kind == "product");
  return d;
}

Grid parse_grid_impl(std::string_view spec) {
  const auto [kind, rest] = split_head(spec);
  if (kind != "grid") fail(spec, "grid specs start with 'grid:'");
  Args a(spec, rest);
  const Box box = parse_box(spec, a.str("box"));
  std::vector<int> n;
  for (double v : parse_list(spec, a.has("n") ? a.str("n") : std::string("101"))) {
    if (v != std::floor(v) || v < 3) fail(spec, "point counts are integers >= 3");
    n.push_back(static_cast<int>(v));
  }
  if (n.size() == 1) n.assign(box.dim(), n.front());
  if (static_cast<int>(n.size()) != box.dim()) fail(spec, "one point count per axis");
  QuadRule rule = QuadRule::Trapezoid;
  if (a.has("rule")) {
    const std::string r = a.str("rule");
    if (r == "trapezoid") {
      rule = QuadRule::Trapezoid;
    } else if (r == "simpson") {
      rule = QuadRule::Simpson;
    } else if (r == "gauss") {
      rule = QuadRule::Gauss;
    } else {
      fail(spec, "unknown rule '" + r + "'");
    }
  }
  a.finish();
  return Grid(box, n, rule);
}

template <class F>
auto guarded(std::string_view spec, F&& f) {
  try {
    return f();
  } catch (const SpecParseError&) {
    throw;
  } catch (const std::exception& e) {
    fail(spec, e.what());
  }
}

}  // namespace

std::vector<std::string> split_top_level(std::string_view s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') {
      if (--depth < 0) fail(s, "unbalanced brackets");
    }
    if (c == sep && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (depth != 0) fail(s, "unbalanced brackets");
  out.push_back(cur);
  return out;
}

bool is_body_spec(std::string_view spec) { return trim(spec).rfind("body:", 0) == 0; }

Density parse_density(std::string_view spec) {
  return guarded(spec, [&] { return parse_density_impl(spec); });
}

ConvexBody parse_body(std::string_view spec) {
  return guarded(spec, [&] { return parse_body_impl(spec); });
}

Grid parse_grid(std::string_view spec) {
  return guarded(spec, [&] { return parse_grid_impl(spec); });
}

}  // namespace lclab
