#pragma once

// Experiment runner behind the conelab CLI: configuration, initial-condition
// presets, one entry point per verification suite, and report/CSV/SVG output.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "conelab/ch_dynamics.hpp"
#include "conelab/cone_lift.hpp"
#include "conelab/peakon.hpp"

namespace conelab {

/// Named preset plus numeric parameters, written "name" or
/// "name:key=value,key=value".
struct IcSpec {
  std::string name = "sin3";
  std::map<std::string, double> params;

  static IcSpec parse(const std::string& text);
  std::string str() const;
};

struct RunConfig {
  std::string command;
  int n = 256;
  /// Unset values take the subcommand's own default.
  std::optional<double> dt;
  std::optional<double> T;
  double alpha = 0.5;
  double gravity = 1.0;
  std::optional<IcSpec> ic;
  std::vector<double> radii{0.5, 1.0, 2.0};
  std::filesystem::path out;
  std::uint64_t seed = 1;
  /// Multiplies every "<=" threshold and divides every ">=" one.
  double tol_scale = 1.0;

  // peakon-run / figure1
  double p0 = 1.0;
  double q0 = 1.0;
  /// figure1 snapshot times as fractions of the detected collision time.
  std::vector<double> times{0.0, 0.4, 0.8, 0.95};

  // curvature-scan
  std::string metric = "ch-cone";
  int d = 1;
  int samples = 1000;

  // sweep
  std::string identity = "consistency";
  std::vector<int> resolutions;
  std::vector<double> dts;
  std::string stencil = "centered4";
};

/// Throws InvalidArgument on nonpositive numbers, unknown commands or presets.
void validate(const RunConfig& c);

/// Flat JSON object whose keys mirror the long flag names.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
nlohmann::json config_to_json(const RunConfig& c);

const std::vector<std::string>& subcommands();
const std::vector<std::string>& preset_names();

using InitialState = std::variant<CHState, CH2State, PeakonEnsemble>;

/// sin{k}, gaussian-bump, two-peakon, antisymmetric-collision, ch2-stratified.
/// Grid-based presets are sampled on grid; peakon presets use a circle kernel
/// of the grid's length.
InitialState preset_ic(const IcSpec& ic, const Grid1D& grid, double alpha, double gravity);

struct Check {
  std::string name;
  double value;
  double threshold;
  /// "<=" or ">=".
  std::string relation;
  bool pass;
};

struct Report {
  std::string command;
  nlohmann::json data = nlohmann::json::object();
  std::vector<Check> checks;
  /// Non-empty when the command could not run to completion.
  std::string error;

  bool pass() const;
  void check_le(const std::string& name, double value, double threshold, double scale = 1.0);
  void check_ge(const std::string& name, double value, double threshold, double scale = 1.0);
  nlohmann::json to_json() const;
};

/// Runs one subcommand, writing its artifacts into c.out.
Report run_command(const RunConfig& c);

/// Runs the command (or every suite for "all"), writes report.json and
/// returns the process exit status: 0 iff every threshold passed.
int run(const RunConfig& c);

/// Minimal SVG document: one panel per frame, one closed polyline per radius.
std::string figure1_svg(const std::vector<Figure1Frame>& frames);

}  // namespace conelab
