// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tissuefe/scenario.hpp"

namespace {

using namespace tissuefe;

constexpr int kExitThreshold = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolve = 3;

struct Options {
  std::string scenario;
  std::string config_path;
  std::string out_dir;
  std::string mesh;
  std::string export_mesh;
  bool no_coupling = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--scenario", o.scenario, "built-in scenario name (see list-scenarios)");
  cmd->add_option("--config", o.config_path, "JSON overrides, see schema/scenario.schema.json")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_flag("--no-coupling", o.no_coupling, "disable the collagen coupling constraint");
  cmd->add_option("--mesh", o.mesh, "mesh divisions nx,ny,nz (cylinder: nr,nphi,nz)");
  cmd->add_option("--export-mesh", o.export_mesh, "write the reference mesh as JSON");
}

std::array<int, 3> parse_mesh(const std::string& text) {
  std::array<int, 3> n{};
  std::istringstream is(text);
  std::string part;
  int i = 0;
  while (std::getline(is, part, ',')) {
    if (i == 3) throw ConfigError("--mesh expects three comma-separated integers");
    std::size_t used = 0;
    try {
      n[i] = std::stoi(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size()) throw ConfigError("--mesh: invalid integer '" + part + "'");
    ++i;
  }
  if (i != 3) throw ConfigError("--mesh expects three comma-separated integers");
  return n;
}

ScenarioConfig resolve(const Options& o) {
  nlohmann::json overrides;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    try {
      overrides = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(o.config_path + ": " + e.what());
    }
  }
  std::string name = o.scenario;
  if (name.empty() && overrides.is_object() && overrides.contains("scenario") &&
      overrides["scenario"].is_string())
    name = overrides["scenario"].get<std::string>();
  if (name.empty()) throw ConfigError("no scenario given (use --scenario or a config 'scenario' key)");
  if (!o.scenario.empty() && overrides.is_object() && overrides.contains("scenario") &&
      overrides["scenario"] != o.scenario)
    throw ConfigError("--scenario disagrees with the config 'scenario' key");

  ScenarioConfig c = builtin_scenario(name);
  if (!overrides.is_null()) c = config_from_json(overrides, c);
  if (o.no_coupling) c.coupling = false;
  if (!o.mesh.empty()) c.divisions = parse_mesh(o.mesh);
  if (!o.out_dir.empty()) c.output_dir = o.out_dir;
  c.validate();
  return c;
}

void export_mesh(const ScenarioConfig& c, const std::string& path) {
  if (path.empty()) return;
  std::ofstream out(path);
  out << mesh_to_json(c.specimen().mesh) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path);
}

int simulate(const Options& o) {
  const ScenarioConfig c = resolve(o);
  export_mesh(c, o.export_mesh);
  const RunResult r = run_scenario(c);
  write_outputs(c.output_dir, r.table, r.manifest);
  std::printf("%s: %zu rows written to %s\n", c.name.c_str(), r.table.rows.size(),
              c.output_dir.c_str());
  if (!r.converged) {
    std::fprintf(stderr, "solve failed: %s\n", r.failure.c_str());
    return kExitSolve;
  }
  return 0;
}

int verify(const Options& o) {
  const ScenarioConfig c = resolve(o);
  export_mesh(c, o.export_mesh);
  const VerifyReport r = verify_scenario(c);
  for (const auto& vc : r.cases)
    std::printf("%-4s %-40s L2 %.3e  Linf %.3e\n", vc.pass ? "ok" : "FAIL", vc.label.c_str(), vc.l2,
                vc.linf);
  std::printf("thresholds: L2 <= %.1e, Linf <= %.1e\n", c.verify.l2, c.verify.linf);
  if (!o.out_dir.empty()) {
    nlohmann::json manifest{{"code_version", std::string("tissuefe ") + kVersion},
                            {"config", config_to_json(c)},
                            {"pass", r.pass}};
    if (!r.failure.empty()) manifest["failure"] = r.failure;
    write_outputs(c.output_dir, r.table, manifest);
  }
  if (!r.failure.empty()) {
    std::fprintf(stderr, "solve failed: %s\n", r.failure.c_str());
    return kExitSolve;
  }
  std::printf("%s\n", r.pass ? "PASS" : "FAIL");
  return r.pass ? 0 : kExitThreshold;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-element solver for active transversely isotropic soft tissue"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Options sim_opts, ver_opts;
  auto* sim = app.add_subcommand("simulate", "run a scenario and write results.csv and manifest.json");
  add_common(sim, sim_opts);
  auto* ver = app.add_subcommand("verify", "compare the FE solution against the semi-analytic oracle");
  add_common(ver, ver_opts);
  auto* list = app.add_subcommand("list-scenarios", "print the built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*list) {
      for (const auto& name : builtin_scenarios())
        std::printf("%-24s %s\n", name.c_str(), builtin_description(name).c_str());
      return 0;
    }
    if (*sim) return simulate(sim_opts);
    return verify(ver_opts);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolve;
  }
}
