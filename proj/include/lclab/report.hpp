#pragma once

#include "lclab/slicing.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace lclab {

/// Asserted records test an inequality or identity and can fail. Observe
/// records carry ratios against constants that have no quantified value.
enum class CheckMode { Assert, Observe };

struct CheckRecord {
  std::string id;       // check/subject/variant, unique within a run
  std::string check;
  std::string anchor;   // the named result the record exercises
  std::string subject;  // density, body or parameter spec
  std::string digest;   // hex digest of the canonical inputs and seed
  CheckMode mode = CheckMode::Assert;
  bool passed = true;   // observe records always pass
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::pair<std::string, double>> bounds;
  double slack = 0.0;   // positive when the assertion holds with room
  std::string tolerance_name;
  double tolerance = 0.0;  // passes when slack >= -tolerance
  std::string message;     // for failures: anchor and violated tolerance
  double runtime = 0.0;    // seconds; never written to reports

  bool operator==(const CheckRecord& o) const;
};

/// One curve of a figure.
struct Series {
  std::string label;
  std::vector<double> x, y;
  bool reference = false;  // envelope or bound curve, drawn dashed
};

struct Figure {
  std::string name;  // file stem
  std::string title, xlabel, ylabel;
  std::vector<Series> series;
};

struct SuiteReport {
  std::uint64_t seed = 0;
  std::vector<CheckRecord> records;  // sorted by id
  std::vector<Figure> figures;       // sorted by name

  bool all_passed() const;
  std::size_t failures() const;
};

/// Tolerances every asserted check draws from, overridable by name.
std::map<std::string, double> default_tolerances();

/// Run settings. Parsing rejects unknown keys.
struct SuiteConfig {
  std::vector<std::string> densities;
  std::vector<std::string> bodies;
  std::vector<std::string> grids;   // first grid of matching dimension wins
  std::vector<std::string> checks;  // empty selects nothing; "all" expands
  bool checks_given = false;        // the config named its checks
  std::size_t paths = 10000;        // scalar Monte Carlo checks
  std::size_t small_paths = 1000;   // per-path functionals and eigen-solves
  std::uint64_t seed = 1;
  std::string out = "lclab-out";
  std::vector<std::string> formats = {"json", "csv"};
  std::map<std::string, double> tolerances = default_tolerances();
  bool figures = false;

  /// Catalog used by verify-all when no config is given.
  static SuiteConfig catalog();
};

/// Throws SpecParseError naming the key or spec at fault.
SuiteConfig config_from_json(const std::string& text);
SuiteConfig load_config(const std::string& path);
/// Validates every density, body and grid spec and check name.
void validate_config(const SuiteConfig& cfg);

std::vector<std::string> all_checks();
/// Checks a CLI subcommand runs.
std::vector<std::string> check_group(const std::string& group);

/// Runs the selected checks on every subject they apply to. Subjects run in
/// parallel; Monte Carlo seeds derive from the master seed and the record id,
/// so results do not depend on scheduling or on which other checks ran.
SuiteReport run_suite(const SuiteConfig& cfg);

std::string report_json(const SuiteReport& r);
SuiteReport report_from_json(const std::string& text);
std::string report_csv(const SuiteReport& r);
std::string figure_svg(const Figure& f, std::uint64_t seed);

/// Writes report.json, report.csv and one SVG per figure for the requested
/// formats into `dir`; returns the written paths. Throws IoError with the path.
std::vector<std::string> emit_report(const SuiteReport& r, const std::vector<std::string>& formats,
                                     const std::string& dir);

/// Figure of t -> ||A_t||_op on `paths` localization paths with the 1/t
/// envelope.
Figure covariance_figure(const Density& d, double horizon, int steps, int paths, std::uint64_t seed);
/// Figure of t -> lambda_t along localization paths with the line lambda = t.
Figure gap_figure(const Density& d, double horizon, int steps, int paths, std::uint64_t seed);
/// Section volume against offset, one curve per direction.
Figure section_sweep_figure(const ConvexBody& k, const std::vector<Point>& directions, int offsets,
                            const std::string& name);

/// Rows direction,u1..un,offset,section: directions x offsets rows after the
/// header, offsets evenly spaced inside each support interval.
std::string direction_sweep_csv(const ConvexBody& k, const std::vector<Point>& directions, int offsets);

}  // namespace lclab
