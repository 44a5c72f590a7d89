// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tissuefe/pipeline.hpp"

namespace tissuefe {

inline constexpr const char* kVersion = "1.0.0";

/// Invalid or inconsistent scenario configuration (CLI exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ActivationSchedule {
  enum class Profile { sin2, constant, samples };
  Profile profile = Profile::sin2;  // beta(s) = sin^2(pi s)
  double beta = 1.0;                // constant profile
  std::vector<double> samples;      // one beta per schedule point
};

struct LoadSchedule {
  enum class Kind { none, uniaxial, equibiaxial, pressure };
  enum class Profile { constant, linear, sin2, samples };
  Kind kind = Kind::none;
  Profile profile = Profile::constant;
  int axis = 0;                  // uniaxial: 0 fiber, 1 cross-fiber
  double base = 1.0;             // stretch, or pressure in kPa
  double amplitude = 0.0;        // linear: base + amplitude s; sin2: base + amplitude sin^2(pi s)
  std::vector<double> samples;   // one value per schedule point
};

struct TableSpec {
  std::vector<double> a_over_D{0.10, 0.15, 0.20};
  std::vector<double> T0_kPa{5.0, 15.0, 25.0, 35.0, 45.0};
  double stretch = 1.2;
  double beta = 1.0;
  bool include_unconstrained = true;
};

struct VerifyThresholds {
  double l2 = 1e-8;
  double linf = 1e-8;
};

struct ScenarioConfig {
  std::string name;
  enum class Mode { sweep, table };
  Mode mode = Mode::sweep;

  Geometry geometry = Geometry::slab;
  Vec3d extent_cm{1.0, 1.0, 0.1};  // slab (Lx, Ly, Lz); cylinder (R_int, R_ext, L)
  double sector_rad = 0.0;         // cylinder only
  bool rigid_top = true;           // cylinder only
  std::array<int, 3> divisions{1, 1, 1};

  MaterialParams material;
  int points = 21;                 // schedule samples over s in [0, 1]
  ActivationSchedule activation;
  LoadSchedule load;
  TableSpec table;                 // mode == table
  SolverConfig solver;
  bool coupling = true;
  std::string output_dir = "out";
  VerifyThresholds verify;

  /// Throws ConfigError.
  void validate() const;
  Specimen specimen() const;
  std::vector<SchedulePoint> schedule() const;
};

std::vector<std::string> builtin_scenarios();
std::string builtin_description(const std::string& name);
/// Throws ConfigError for unknown names.
ScenarioConfig builtin_scenario(const std::string& name);

/// Overlays `j` on `base`. Unknown keys and type mismatches throw ConfigError.
ScenarioConfig config_from_json(const nlohmann::json& j, ScenarioConfig base);
nlohmann::json config_to_json(const ScenarioConfig& config);

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::string> units;
  std::vector<std::vector<double>> rows;

  void add_column(std::string name, std::string unit);
  void add_row(std::vector<double> row);
  /// "# units:" line, header line, then one line per row at 17 significant digits.
  std::string to_csv() const;
};

struct RunResult {
  ResultTable table;
  nlohmann::json manifest;
  bool converged = true;
  std::string failure;
};

RunResult run_scenario(const ScenarioConfig& config);

struct VerifyCase {
  std::string label;
  double l2 = 0.0;
  double linf = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::vector<VerifyCase> cases;
  bool pass = true;
  std::string failure;  // solve failure, if any
  ResultTable table;
};

/// Runs FE and oracle side by side. Throws ConfigError when the scenario
/// has no oracle (coupled cylinder).
VerifyReport verify_scenario(const ScenarioConfig& config);

/// Writes results.csv and manifest.json into `dir` (created if missing).
void write_outputs(const std::string& dir, const ResultTable& table,
                   const nlohmann::json& manifest);

std::string format_number(double v);

}  // namespace tissuefe
