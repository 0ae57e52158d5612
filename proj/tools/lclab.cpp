// Command-line driver: runs check groups and writes JSON, CSV and SVG reports.
//
// Exit status: 0 when every asserted check passes, 1 when any fails, 2 for
// usage, config or spec errors. LCLAB_WORKERS sets the worker thread count.

#include "lclab/errors.hpp"
#include "lclab/moments.hpp"
#include "lclab/report.hpp"
#include "lclab/specs.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> formats;
  std::vector<std::string> densities;
  std::vector<std::string> bodies;
  std::vector<std::string> grids;
  std::vector<std::string> checks;
  std::optional<std::size_t> paths;
  std::optional<std::size_t> small_paths;
  bool figures = false;
  bool quiet = false;
  bool timings = false;
  int sweep_directions = 8;
  int sweep_offsets = 50;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seed, "master seed (overrides the config)");
  sub->add_option("--out", o.out, "output directory (overrides the config)");
  sub->add_option("--format", o.formats, "json, csv and/or svg")->delimiter(',');
  sub->add_option("--density", o.densities, "density spec, repeatable");
  sub->add_option("--body", o.bodies, "convex body spec, repeatable");
  sub->add_option("--grid", o.grids, "grid spec, repeatable");
  sub->add_option("--checks", o.checks, "checks to run instead of the group default")->delimiter(',');
  sub->add_option("--paths", o.paths, "Monte Carlo paths for scalar checks");
  sub->add_option("--small-paths", o.small_paths, "paths for per-path functionals");
  sub->add_flag("--figures", o.figures, "also build SVG figures");
  sub->add_flag("-q,--quiet", o.quiet, "print only the summary line");
  sub->add_flag("--timings", o.timings, "print wall time per check and subject (not written to reports)");
}

lclab::SuiteConfig build_config(const std::string& group, const Options& o) {
  lclab::SuiteConfig cfg;
  if (!o.config.empty()) {
    cfg = lclab::load_config(o.config);
    if (!cfg.checks_given) cfg.checks = lclab::check_group(group);
  } else {
    const auto cat = lclab::SuiteConfig::catalog();
    cfg.checks = lclab::check_group(group);
    if (o.densities.empty() && o.bodies.empty()) {
      cfg.densities = cat.densities;
      cfg.bodies = cat.bodies;
      cfg.figures = group == "verify-all" || group == "localize" || group == "slice";
    }
  }
  if (!o.densities.empty() || !o.bodies.empty()) {
    cfg.densities = o.densities;
    cfg.bodies = o.bodies;
  }
  if (!o.grids.empty()) cfg.grids = o.grids;
  if (!o.checks.empty()) cfg.checks = o.checks;
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.out = o.out;
  if (!o.formats.empty()) cfg.formats = o.formats;
  if (o.paths) cfg.paths = *o.paths;
  if (o.small_paths) cfg.small_paths = *o.small_paths;
  if (o.figures) cfg.figures = true;
  lclab::validate_config(cfg);
  return cfg;
}

void write_sweeps(const lclab::SuiteConfig& cfg, const Options& o) {
  for (const auto& spec : cfg.bodies) {
    const auto k = lclab::normalize_volume(lclab::parse_body(spec));
    std::string name;
    for (char c : spec) name += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    const auto path = std::filesystem::path(cfg.out) / ("sweep_" + name + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw lclab::IoError("cannot write '" + path.string() + "'");
    out << lclab::direction_sweep_csv(k, lclab::direction_set(k.dim, o.sweep_directions), o.sweep_offsets);
  }
}

int run(const std::string& group, const Options& o) {
  const lclab::SuiteConfig cfg = build_config(group, o);
  const lclab::SuiteReport rep = lclab::run_suite(cfg);
  const auto written = lclab::emit_report(rep, cfg.formats, cfg.out);
  if (group == "slice" && std::find(cfg.formats.begin(), cfg.formats.end(), "csv") != cfg.formats.end()) {
    write_sweeps(cfg, o);
  }
  if (!o.quiet) {
    for (const auto& r : rep.records) {
      const char* status = r.mode == lclab::CheckMode::Observe ? "OBSERVE" : (r.passed ? "PASS" : "FAIL");
      std::cout << status << ' ' << r.id;
      if (!r.passed) std::cout << "  (" << r.message << ')';
      std::cout << '\n';
    }
  }
  if (o.timings) {
    // Records of one check and subject share the group's wall time.
    std::map<std::string, double> seen;
    for (const auto& r : rep.records) seen[r.check + "/" + r.subject] = r.runtime;
    for (const auto& [k, t] : seen) std::cout << "TIME " << t << "s " << k << '\n';
  }
  std::cout << rep.records.size() << " records, " << rep.failures() << " failed, seed " << rep.seed << ", output in "
            << cfg.out << '\n';
  return rep.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for log-concave measures: spectral gaps, isoperimetry, localization, slicing"};
  app.require_subcommand(1);
  Options o;
  struct Group {
    const char* name;
    const char* help;
  };
  const Group groups[] = {
      {"spectral", "spectral gap, Bochner, Lichnerowicz and H^-1 checks"},
      {"isoperimetry", "Cheeger-Buser, Lipschitz, section and half-space checks"},
      {"localize", "stochastic localization checks"},
      {"slice", "hyperplane sections of convex bodies"},
      {"verify-all", "every check on the catalog"},
  };
  for (const auto& g : groups) {
    auto* sub = app.add_subcommand(g.name, g.help);
    add_common(sub, o);
    if (std::string(g.name) == "slice") {
      sub->add_option("--sweep-directions", o.sweep_directions, "directions in the sweep CSV")->check(CLI::PositiveNumber);
      sub->add_option("--sweep-offsets", o.sweep_offsets, "offsets per direction in the sweep CSV")
          ->check(CLI::PositiveNumber);
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  const std::string group = app.get_subcommands().front()->get_name();
  try {
    return run(group, o);
  } catch (const lclab::SpecParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const lclab::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
