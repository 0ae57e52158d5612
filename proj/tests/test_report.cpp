#include "doctest.h"

#include "lclab/errors.hpp"
#include "lclab/moments.hpp"
#include "lclab/report.hpp"
#include "lclab/specs.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lclab;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

std::string config_error(const std::string& json) {
  try {
    config_from_json(json);
  } catch (const SpecParseError& e) {
    return e.what();
  }
  return {};
}

SuiteConfig small_config() {
  SuiteConfig c;
  c.densities = {"gaussian:s=1", "exponential"};
  c.bodies = {"body:cube:n=2"};
  c.checks = {"spectral", "martingale", "section_oracle", "fubini"};
  c.paths = 400;
  c.small_paths = 100;
  c.seed = 7;
  return c;
}

}  // namespace

TEST_CASE("config parsing rejects unknown keys and bad specs") {
  CHECK(config_error(R"({"densities": ["gaussian:s=1"], "sede": 3})").find("unknown key 'sede'") !=
        std::string::npos);
  CHECK(config_error(R"({"densities": ["normal:s=1"]})").find("normal:s=1") != std::string::npos);
  CHECK(config_error(R"({"checks": ["bogus"]})").find("bogus") != std::string::npos);
  CHECK(config_error(R"({"tolerances": {"nope": 1}})").find("nope") != std::string::npos);
  CHECK(config_error(R"({"paths": -4})").find("paths") != std::string::npos);
  CHECK(config_error("[1, 2]").find("object") != std::string::npos);
  CHECK(config_error("{").find("invalid JSON") != std::string::npos);

  const auto c = config_from_json(
      R"({"densities": ["gaussian:s=1"], "checks": ["spectral"], "seed": 11, "paths": 500,
          "tolerances": {"bochner": 1e-5}, "out": "x", "formats": ["json"]})");
  CHECK(c.seed == 11);
  CHECK(c.paths == 500);
  CHECK(c.tolerances.at("bochner") == 1e-5);
  CHECK(c.tolerances.at("z_max") == 3.0);
  CHECK(c.checks_given);
}

TEST_CASE("an empty check selection yields no records") {
  auto c = config_from_json(R"({"densities": ["gaussian:s=1"], "checks": []})");
  const auto r = run_suite(c);
  CHECK(r.records.empty());
  CHECK(r.all_passed());
}

TEST_CASE("lichnerowicz over the catalog passes") {
  SuiteConfig c = SuiteConfig::catalog();
  c.bodies.clear();
  c.checks = {"lichnerowicz"};
  c.figures = false;
  const auto r = run_suite(c);
  REQUIRE(r.records.size() >= 8);
  for (const auto& rec : r.records) {
    CHECK_MESSAGE(rec.passed, rec.id);
    CHECK(rec.anchor == "Improved Lichnerowicz inequality");
  }
}

TEST_CASE("records are sorted, anchored and reproducible") {
  const auto a = run_suite(small_config());
  REQUIRE(!a.records.empty());
  for (std::size_t i = 1; i < a.records.size(); ++i) CHECK(a.records[i - 1].id < a.records[i].id);
  for (const auto& r : a.records) {
    CHECK(!r.anchor.empty());
    CHECK(r.digest.size() == 16);
    CHECK(r.passed);
  }
  const auto b = run_suite(small_config());
  CHECK(report_json(a) == report_json(b));
  CHECK(report_csv(a) == report_csv(b));

  // A different worker count leaves the output unchanged.
  setenv("LCLAB_WORKERS", "3", 1);
  const auto w = run_suite(small_config());
  unsetenv("LCLAB_WORKERS");
  CHECK(report_json(a) == report_json(w));

  auto other = small_config();
  other.seed = 8;
  CHECK(report_json(run_suite(other)) != report_json(a));
}

TEST_CASE("json reports round-trip") {
  auto rep = run_suite(small_config());
  CheckRecord odd;
  odd.id = "zz/synthetic";
  odd.check = "synthetic";
  odd.anchor = "Synthetic record";
  odd.subject = "none, \"quoted\"";
  odd.digest = "0123456789abcdef";
  odd.mode = CheckMode::Observe;
  odd.values = {{"inf", kInf}, {"neg", -kInf}, {"nan", std::nan("")}, {"tiny", 5e-324}, {"third", 1.0 / 3.0}};
  odd.slack = std::nan("");
  rep.records.push_back(odd);
  const auto back = report_from_json(report_json(rep));
  CHECK(back.seed == rep.seed);
  REQUIRE(back.records.size() == rep.records.size());
  for (std::size_t i = 0; i < rep.records.size(); ++i) CHECK(back.records[i] == rep.records[i]);
  CHECK(report_json(back) == report_json(rep));
}

TEST_CASE("csv reports carry the seed on every row") {
  const auto rep = run_suite(small_config());
  const std::string csv = report_csv(rep);
  CHECK(count(csv, "\n") == rep.records.size() + 1);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("seed,id,", 0) == 0);
  while (std::getline(in, line)) CHECK(line.rfind("7,", 0) == 0);
}

TEST_CASE("failed assertions name the anchor and the tolerance") {
  auto c = small_config();
  c.checks = {"martingale"};
  c.densities = {"exponential"};
  c.bodies.clear();
  c.tolerances["z_max"] = 0.0;
  c.tolerances["mc_floor"] = 0.0;
  const auto r = run_suite(c);
  bool saw_failure = false;
  for (const auto& rec : r.records) {
    if (rec.passed) continue;
    saw_failure = true;
    CHECK(rec.message.find(rec.anchor) != std::string::npos);
    CHECK(rec.message.find("mc_floor") != std::string::npos);
  }
  CHECK(saw_failure);
  CHECK(!r.all_passed());
}

TEST_CASE("direction sweep csv has one row per direction and offset") {
  const auto k = parse_body("body:cube:n=3");
  const auto dirs = direction_set(3, 7);
  const std::string csv = direction_sweep_csv(k, dirs, 13);
  CHECK(count(csv, "\n") == 7 * 13 + 1);
  CHECK(csv.rfind("direction,u1,u2,u3,offset,section\n", 0) == 0);
}

TEST_CASE("covariance figure has one polyline per path and the envelope") {
  const Figure f = covariance_figure(gaussian(1, 1.0), 1.0, 10, 6, 3);
  const std::string svg = figure_svg(f, 3);
  CHECK(count(svg, "<polyline") == 7);
  CHECK(count(svg, "class=\"reference\"") == 1);
  CHECK(count(svg, "data-label=\"1/t\"") == 1);
  CHECK(svg.find("seed=3") != std::string::npos);
  // Gaussian tilts have deterministic covariance 1/(1+t), below the envelope.
  for (std::size_t k = 0; k < f.series[0].x.size(); ++k) {
    CHECK(f.series[0].y[k] == doctest::Approx(1.0 / (1.0 + f.series[0].x[k])).epsilon(1e-6));
  }
  CHECK(figure_svg(f, 3) == svg);
}

TEST_CASE("gap figure follows the gaussian closed form") {
  const Figure f = gap_figure(gaussian(1, 1.0), 0.5, 5, 2, 5);
  REQUIRE(f.series.size() == 3);
  for (std::size_t k = 0; k < f.series[0].x.size(); ++k) {
    CHECK(f.series[0].y[k] == doctest::Approx(1.0 + f.series[0].x[k]).epsilon(1e-3));
  }
}

TEST_CASE("emit_report writes the requested files") {
  const auto dir = (std::filesystem::temp_directory_path() / "lclab_report_test").string();
  std::filesystem::remove_all(dir);
  SuiteReport rep = run_suite(small_config());
  rep.figures.push_back(section_sweep_figure(parse_body("body:cube:n=2"), direction_set(2, 3), 21, "sweep"));
  const auto files = emit_report(rep, {"json", "csv", "svg"}, dir);
  CHECK(files.size() == 3);
  for (const auto& f : files) CHECK(std::filesystem::exists(f));
  std::ifstream in(dir + "/report.json");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == report_json(rep));
  CHECK_THROWS_AS(emit_report(rep, {"json"}, "/proc/lclab/forbidden"), IoError);
}
