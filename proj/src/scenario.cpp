// SPDX-License-Identifier: Apache-2.0

#include "tissuefe/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "tissuefe/oracle.hpp"

namespace tissuefe {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- parsing

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
bool read(const json& j, const std::string& key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return false;
  try {
    out = it->template get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + key + "' in " + where + " has the wrong type");
  }
  return true;
}

template <typename E>
E parse_enum(const std::string& value, const std::vector<std::pair<std::string, E>>& options,
             const std::string& what) {
  for (const auto& [name, e] : options)
    if (name == value) return e;
  std::string list;
  for (const auto& [name, e] : options) list += (list.empty() ? "" : ", ") + name;
  throw ConfigError("invalid " + what + " '" + value + "' (expected one of: " + list + ")");
}

template <typename E>
std::string enum_name(E e, const std::vector<std::pair<std::string, E>>& options) {
  for (const auto& [name, v] : options)
    if (v == e) return name;
  return "?";
}

const std::vector<std::pair<std::string, Geometry>> kGeometries{{"slab", Geometry::slab},
                                                                {"cylinder", Geometry::cylinder}};
const std::vector<std::pair<std::string, ActivationSchedule::Profile>> kActivationProfiles{
    {"sin2", ActivationSchedule::Profile::sin2},
    {"constant", ActivationSchedule::Profile::constant},
    {"samples", ActivationSchedule::Profile::samples}};
const std::vector<std::pair<std::string, LoadSchedule::Kind>> kLoadKinds{
    {"none", LoadSchedule::Kind::none},
    {"uniaxial", LoadSchedule::Kind::uniaxial},
    {"equibiaxial", LoadSchedule::Kind::equibiaxial},
    {"pressure", LoadSchedule::Kind::pressure}};
const std::vector<std::pair<std::string, LoadSchedule::Profile>> kLoadProfiles{
    {"constant", LoadSchedule::Profile::constant},
    {"linear", LoadSchedule::Profile::linear},
    {"sin2", LoadSchedule::Profile::sin2},
    {"samples", LoadSchedule::Profile::samples}};
const std::vector<std::pair<std::string, int>> kAxes{{"fiber", 0}, {"cross_fiber", 1}};
const std::vector<std::pair<std::string, SolverBackend>> kBackends{
    {"powell_hybrid", SolverBackend::powell_hybrid},
    {"newton_line_search", SolverBackend::newton_line_search}};
const std::vector<std::pair<std::string, ScenarioConfig::Mode>> kModes{
    {"sweep", ScenarioConfig::Mode::sweep}, {"table", ScenarioConfig::Mode::table}};

// sin(pi s) with the argument folded into [0, 1/2] so integer s give exact zeros.
double sin_pi(double s) {
  double r = std::fmod(std::abs(s), 2.0);
  const double sign = (s < 0.0) != (r > 1.0) ? -1.0 : 1.0;
  if (r > 1.0) r -= 1.0;
  if (r > 0.5) r = 1.0 - r;
  return sign * std::sin(std::numbers::pi * r);
}

bool is_pressure(const LoadSchedule& l) { return l.kind == LoadSchedule::Kind::pressure; }

std::string load_prefix(const LoadSchedule& l) { return is_pressure(l) ? "pressure" : "stretch"; }
std::string load_suffix(const LoadSchedule& l) { return is_pressure(l) ? "_kPa" : ""; }

}  // namespace

// ---------------------------------------------------------------- config

void ScenarioConfig::validate() const {
  const auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (extent_cm.minCoeff() <= 0.0 || !extent_cm.allFinite()) fail("geometry extents must be positive");
  if (geometry == Geometry::cylinder) {
    if (!(extent_cm(1) > extent_cm(0))) fail("cylinder requires R_int_cm < R_ext_cm");
    if (!(sector_rad > 0.0 && sector_rad <= 2.0 * std::numbers::pi))
      fail("sector_rad must lie in (0, 2 pi]");
  }
  for (int d : divisions)
    if (d < 1) fail("mesh divisions must be >= 1");
  try {
    material.validate();
    solver.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (!(verify.l2 > 0.0 && verify.linf > 0.0)) fail("verify thresholds must be positive");

  if (mode == Mode::table) {
    if (geometry != Geometry::slab) fail("table mode requires the slab geometry");
    if (table.a_over_D.empty() || table.T0_kPa.empty()) fail("table rows and columns must be non-empty");
    for (double a : table.a_over_D)
      if (!(a > 0.0 && a < 0.25)) fail("table a_over_D entries must lie in (0, 0.25)");
    for (double t : table.T0_kPa)
      if (!std::isfinite(t)) fail("table T0_kPa entries must be finite");
    if (!(table.stretch > 0.0)) fail("table stretch must be positive");
    if (!(table.beta >= 0.0 && table.beta <= 1.0)) fail("table beta must lie in [0, 1]");
    return;
  }

  if (points < 1) fail("schedule points must be >= 1");
  if (activation.profile == ActivationSchedule::Profile::samples &&
      static_cast<int>(activation.samples.size()) != points)
    fail("activation samples must have one entry per schedule point");
  if (activation.profile == ActivationSchedule::Profile::constant &&
      !(activation.beta >= 0.0 && activation.beta <= 1.0))
    fail("activation beta must lie in [0, 1]");
  for (double b : activation.samples)
    if (!(b >= 0.0 && b <= 1.0)) fail("activation samples must lie in [0, 1]");

  if (load.profile == LoadSchedule::Profile::samples &&
      static_cast<int>(load.samples.size()) != points)
    fail("load samples must have one entry per schedule point");
  switch (load.kind) {
    case LoadSchedule::Kind::none:
      break;
    case LoadSchedule::Kind::uniaxial:
    case LoadSchedule::Kind::equibiaxial:
      if (geometry != Geometry::slab) fail("stretch loads require the slab geometry");
      break;
    case LoadSchedule::Kind::pressure:
      if (geometry != Geometry::cylinder) fail("pressure loads require the cylinder geometry");
      break;
  }
  for (const SchedulePoint& p : schedule()) {
    if (!(p.beta >= 0.0 && p.beta <= 1.0)) fail("activation schedule leaves [0, 1]");
    if (is_pressure(load) && !(p.load.pressure >= 0.0 && std::isfinite(p.load.pressure)))
      fail("pressure schedule must be finite and non-negative");
    if ((load.kind == LoadSchedule::Kind::uniaxial || load.kind == LoadSchedule::Kind::equibiaxial) &&
        !(p.load.stretch > 0.0 && std::isfinite(p.load.stretch)))
      fail("stretch schedule must be positive");
  }
}

Specimen ScenarioConfig::specimen() const {
  const auto& e = extent_cm;
  if (geometry == Geometry::slab)
    return Specimen::slab(e(0), e(1), e(2), divisions[0], divisions[1], divisions[2]);
  return Specimen::cylinder(e(0), e(1), e(2), divisions[0], divisions[1], divisions[2],
                            sector_rad, rigid_top);
}

std::vector<SchedulePoint> ScenarioConfig::schedule() const {
  std::vector<SchedulePoint> out;
  for (int k = 0; k < points; ++k) {
    SchedulePoint p;
    p.s = points == 1 ? 0.0 : static_cast<double>(k) / (points - 1);
    const double sin2 = std::pow(sin_pi(p.s), 2);
    switch (activation.profile) {
      case ActivationSchedule::Profile::sin2: p.beta = sin2; break;
      case ActivationSchedule::Profile::constant: p.beta = activation.beta; break;
      case ActivationSchedule::Profile::samples: p.beta = activation.samples[k]; break;
    }
    double v = load.base;
    switch (load.profile) {
      case LoadSchedule::Profile::constant: break;
      case LoadSchedule::Profile::linear: v = load.base + load.amplitude * p.s; break;
      case LoadSchedule::Profile::sin2: v = load.base + load.amplitude * sin2; break;
      case LoadSchedule::Profile::samples: v = load.samples[k]; break;
    }
    switch (load.kind) {
      case LoadSchedule::Kind::none: p.load = LoadCase::none(); break;
      case LoadSchedule::Kind::uniaxial: p.load = LoadCase::uniaxial(load.axis, v); break;
      case LoadSchedule::Kind::equibiaxial: p.load = LoadCase::equibiaxial(v); break;
      case LoadSchedule::Kind::pressure: p.load = LoadCase::internal_pressure(v); break;
    }
    out.push_back(p);
  }
  return out;
}

std::vector<std::string> builtin_scenarios() {
  return {"free-contraction", "uniaxial", "equibiaxial-table", "cylinder-autoregulation",
          "cylinder-inflation"};
}

std::string builtin_description(const std::string& name) {
  if (name == "free-contraction")
    return "slab 1 x 1 x 0.1 cm, beta(s) = sin^2(pi s), no load (states A and C coincide)";
  if (name == "uniaxial")
    return "slab, beta = 1, stretch along the fiber from 1.0 to 1.4 after free contraction";
  if (name == "equibiaxial-table")
    return "slab, beta = 1, equibiaxial stretch 1.2 over the a/D x T0 grid plus the unconstrained row";
  if (name == "cylinder-autoregulation")
    return "cylinder sector, beta(s) = sin^2(pi s) with P = 8 + 10 sin^2(pi s) kPa";
  if (name == "cylinder-inflation")
    return "passive, uncoupled cylinder sector at P = 0, 8, 18 kPa (oracle comparison)";
  throw ConfigError("unknown scenario '" + name + "'");
}

ScenarioConfig builtin_scenario(const std::string& name) {
  builtin_description(name);
  ScenarioConfig c;
  c.name = name;
  c.output_dir = "out/" + name;
  if (name == "free-contraction") return c;
  if (name == "uniaxial") {
    c.activation = {ActivationSchedule::Profile::constant, 1.0, {}};
    c.load.kind = LoadSchedule::Kind::uniaxial;
    c.load.profile = LoadSchedule::Profile::linear;
    c.load.base = 1.0;
    c.load.amplitude = 0.4;
    return c;
  }
  if (name == "equibiaxial-table") {
    c.mode = ScenarioConfig::Mode::table;
    return c;
  }
  c.geometry = Geometry::cylinder;
  c.extent_cm = Vec3d(0.2, 0.35, 2.0);
  c.sector_rad = std::numbers::pi / 8.0;
  c.divisions = {8, 1, 2};
  c.load.kind = LoadSchedule::Kind::pressure;
  if (name == "cylinder-autoregulation") {
    c.load.profile = LoadSchedule::Profile::sin2;
    c.load.base = 8.0;
    c.load.amplitude = 10.0;
    return c;
  }
  // cylinder-inflation
  c.points = 3;
  c.coupling = false;
  c.activation = {ActivationSchedule::Profile::constant, 0.0, {}};
  c.load.profile = LoadSchedule::Profile::samples;
  c.load.samples = {0.0, 8.0, 18.0};
  c.verify = {1e-6, 1e-6};
  return c;
}

ScenarioConfig config_from_json(const json& j, ScenarioConfig c) {
  check_keys(j, {"scenario", "mode", "geometry", "mesh", "material", "schedule", "activation",
                 "load", "table", "solver", "coupling", "output_dir", "verify"},
             "config");
  read(j, "scenario", c.name, "config");
  std::string s;
  if (read(j, "mode", s, "config")) c.mode = parse_enum(s, kModes, "mode");
  read(j, "coupling", c.coupling, "config");
  read(j, "output_dir", c.output_dir, "config");

  if (auto it = j.find("geometry"); it != j.end()) {
    const json& g = *it;
    std::string kind = enum_name(c.geometry, kGeometries);
    if (g.is_object()) read(g, "kind", kind, "geometry");
    c.geometry = parse_enum(kind, kGeometries, "geometry kind");
    if (c.geometry == Geometry::slab) {
      check_keys(g, {"kind", "Lx_cm", "Ly_cm", "Lz_cm"}, "geometry");
      read(g, "Lx_cm", c.extent_cm(0), "geometry");
      read(g, "Ly_cm", c.extent_cm(1), "geometry");
      read(g, "Lz_cm", c.extent_cm(2), "geometry");
    } else {
      check_keys(g, {"kind", "R_int_cm", "R_ext_cm", "L_cm", "sector_rad", "rigid_top"}, "geometry");
      read(g, "R_int_cm", c.extent_cm(0), "geometry");
      read(g, "R_ext_cm", c.extent_cm(1), "geometry");
      read(g, "L_cm", c.extent_cm(2), "geometry");
      read(g, "sector_rad", c.sector_rad, "geometry");
      read(g, "rigid_top", c.rigid_top, "geometry");
    }
  }
  if (auto it = j.find("mesh"); it != j.end()) {
    check_keys(*it, {"divisions"}, "mesh");
    read(*it, "divisions", c.divisions, "mesh");
  }
  if (auto it = j.find("material"); it != j.end()) {
    const json& m = *it;
    check_keys(m, {"C1p_kPa", "C2p", "C3p", "C4p", "C1a_kPa", "C2a_kPa", "C3a_kPa", "C4a_kPa",
                   "T0_kPa", "a_over_D"},
               "material");
    auto& p = c.material;
    read(m, "C1p_kPa", p.C1p, "material");
    read(m, "C2p", p.C2p, "material");
    read(m, "C3p", p.C3p, "material");
    read(m, "C4p", p.C4p, "material");
    read(m, "C1a_kPa", p.C1a, "material");
    read(m, "C2a_kPa", p.C2a, "material");
    read(m, "C3a_kPa", p.C3a, "material");
    read(m, "C4a_kPa", p.C4a, "material");
    read(m, "T0_kPa", p.T0, "material");
    read(m, "a_over_D", p.aOverD, "material");
  }
  if (auto it = j.find("schedule"); it != j.end()) {
    check_keys(*it, {"points"}, "schedule");
    read(*it, "points", c.points, "schedule");
  }
  if (auto it = j.find("activation"); it != j.end()) {
    check_keys(*it, {"profile", "beta", "samples"}, "activation");
    if (read(*it, "profile", s, "activation"))
      c.activation.profile = parse_enum(s, kActivationProfiles, "activation profile");
    read(*it, "beta", c.activation.beta, "activation");
    read(*it, "samples", c.activation.samples, "activation");
  }
  if (auto it = j.find("load"); it != j.end()) {
    const json& l = *it;
    if (!l.is_object()) throw ConfigError("load must be a JSON object");
    if (read(l, "kind", s, "load")) c.load.kind = parse_enum(s, kLoadKinds, "load kind");
    const std::string pre = load_prefix(c.load), suf = load_suffix(c.load);
    std::set<std::string> keys{"kind", "profile"};
    if (c.load.kind != LoadSchedule::Kind::none)
      keys.insert({pre + "_base" + suf, pre + "_amplitude" + suf, pre + "_samples" + suf});
    if (c.load.kind == LoadSchedule::Kind::uniaxial) keys.insert("axis");
    check_keys(l, keys, "load (kind " + enum_name(c.load.kind, kLoadKinds) + ")");
    if (read(l, "profile", s, "load")) c.load.profile = parse_enum(s, kLoadProfiles, "load profile");
    if (read(l, "axis", s, "load")) c.load.axis = parse_enum(s, kAxes, "load axis");
    read(l, pre + "_base" + suf, c.load.base, "load");
    read(l, pre + "_amplitude" + suf, c.load.amplitude, "load");
    read(l, pre + "_samples" + suf, c.load.samples, "load");
  }
  if (auto it = j.find("table"); it != j.end()) {
    check_keys(*it, {"a_over_D", "T0_kPa", "stretch", "beta", "include_unconstrained"}, "table");
    read(*it, "a_over_D", c.table.a_over_D, "table");
    read(*it, "T0_kPa", c.table.T0_kPa, "table");
    read(*it, "stretch", c.table.stretch, "table");
    read(*it, "beta", c.table.beta, "table");
    read(*it, "include_unconstrained", c.table.include_unconstrained, "table");
  }
  if (auto it = j.find("solver"); it != j.end()) {
    check_keys(*it, {"tolerance", "max_iterations", "fd_step", "continuation_steps", "backend",
                     "jacobian_threads"},
               "solver");
    auto& sv = c.solver;
    read(*it, "tolerance", sv.tolerance, "solver");
    read(*it, "max_iterations", sv.max_iterations, "solver");
    read(*it, "fd_step", sv.fd_step, "solver");
    read(*it, "continuation_steps", sv.continuation_steps, "solver");
    read(*it, "jacobian_threads", sv.jacobian_threads, "solver");
    if (read(*it, "backend", s, "solver")) sv.backend = parse_enum(s, kBackends, "solver backend");
  }
  if (auto it = j.find("verify"); it != j.end()) {
    check_keys(*it, {"l2_threshold", "linf_threshold"}, "verify");
    read(*it, "l2_threshold", c.verify.l2, "verify");
    read(*it, "linf_threshold", c.verify.linf, "verify");
  }
  return c;
}

json config_to_json(const ScenarioConfig& c) {
  json j;
  j["scenario"] = c.name;
  j["mode"] = enum_name(c.mode, kModes);
  if (c.geometry == Geometry::slab) {
    j["geometry"] = {{"kind", "slab"},
                     {"Lx_cm", c.extent_cm(0)},
                     {"Ly_cm", c.extent_cm(1)},
                     {"Lz_cm", c.extent_cm(2)}};
  } else {
    j["geometry"] = {{"kind", "cylinder"},          {"R_int_cm", c.extent_cm(0)},
                     {"R_ext_cm", c.extent_cm(1)},  {"L_cm", c.extent_cm(2)},
                     {"sector_rad", c.sector_rad},  {"rigid_top", c.rigid_top}};
  }
  j["mesh"] = {{"divisions", c.divisions}};
  const auto& p = c.material;
  j["material"] = {{"C1p_kPa", p.C1p}, {"C2p", p.C2p},         {"C3p", p.C3p},
                   {"C4p", p.C4p},     {"C1a_kPa", p.C1a},     {"C2a_kPa", p.C2a},
                   {"C3a_kPa", p.C3a}, {"C4a_kPa", p.C4a},     {"T0_kPa", p.T0},
                   {"a_over_D", p.aOverD}};
  j["coupling"] = c.coupling;
  j["solver"] = {{"tolerance", c.solver.tolerance},
                 {"max_iterations", c.solver.max_iterations},
                 {"fd_step", c.solver.fd_step},
                 {"continuation_steps", c.solver.continuation_steps},
                 {"backend", enum_name(c.solver.backend, kBackends)},
                 {"jacobian_threads", c.solver.jacobian_threads}};
  j["output_dir"] = c.output_dir;
  j["verify"] = {{"l2_threshold", c.verify.l2}, {"linf_threshold", c.verify.linf}};
  if (c.mode == ScenarioConfig::Mode::table) {
    j["table"] = {{"a_over_D", c.table.a_over_D},
                  {"T0_kPa", c.table.T0_kPa},
                  {"stretch", c.table.stretch},
                  {"beta", c.table.beta},
                  {"include_unconstrained", c.table.include_unconstrained}};
    return j;
  }
  j["schedule"] = {{"points", c.points}};
  j["activation"] = {{"profile", enum_name(c.activation.profile, kActivationProfiles)}};
  if (c.activation.profile == ActivationSchedule::Profile::constant)
    j["activation"]["beta"] = c.activation.beta;
  if (c.activation.profile == ActivationSchedule::Profile::samples)
    j["activation"]["samples"] = c.activation.samples;
  json l = {{"kind", enum_name(c.load.kind, kLoadKinds)}};
  if (c.load.kind != LoadSchedule::Kind::none) {
    const std::string pre = load_prefix(c.load), suf = load_suffix(c.load);
    l["profile"] = enum_name(c.load.profile, kLoadProfiles);
    if (c.load.profile == LoadSchedule::Profile::samples) {
      l[pre + "_samples" + suf] = c.load.samples;
    } else {
      l[pre + "_base" + suf] = c.load.base;
      if (c.load.profile != LoadSchedule::Profile::constant)
        l[pre + "_amplitude" + suf] = c.load.amplitude;
    }
    if (c.load.kind == LoadSchedule::Kind::uniaxial) l["axis"] = enum_name(c.load.axis, kAxes);
  }
  j["load"] = l;
  return j;
}

// ---------------------------------------------------------------- tables

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ResultTable::add_column(std::string name, std::string unit) {
  columns.push_back(std::move(name));
  units.push_back(std::move(unit));
}

void ResultTable::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw std::logic_error("result row width mismatch");
  rows.push_back(std::move(row));
}

std::string ResultTable::to_csv() const {
  std::ostringstream os;
  os << "# units: ";
  for (std::size_t i = 0; i < units.size(); ++i) os << (i ? "," : "") << units[i];
  os << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
    os << '\n';
  }
  return os.str();
}

void write_outputs(const std::string& dir, const ResultTable& table, const json& manifest) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(std::filesystem::path(dir) / "results.csv", std::ios::binary);
  csv << table.to_csv();
  std::ofstream man(std::filesystem::path(dir) / "manifest.json", std::ios::binary);
  man << manifest.dump(2) << '\n';
  if (!csv || !man) throw std::runtime_error("failed to write outputs to " + dir);
}

// ---------------------------------------------------------------- running

namespace {

json report_json(const SolveReport& r) {
  return {{"converged", r.converged},
          {"iterations", r.iterations},
          {"residual_norm", r.residual_norm},
          {"message", r.message}};
}

double mean(const Eigen::VectorXd& v) { return v.size() ? v.mean() : 0.0; }

json base_manifest(const ScenarioConfig& c) {
  return {{"code_version", std::string("tissuefe ") + kVersion},
          {"config", config_to_json(c)},
          {"units", {{"length", "cm"}, {"stress", "kPa"}, {"pressure", "kPa"}, {"angle", "rad"}}}};
}

RunResult run_sweep(const ScenarioConfig& c) {
  RunResult out;
  const Specimen specimen = c.specimen();
  const bool cyl = c.geometry == Geometry::cylinder;
  auto& t = out.table;
  t.add_column("s", "1");
  t.add_column("beta", "1");
  if (c.load.kind != LoadSchedule::Kind::none)
    t.add_column(is_pressure(c.load) ? "pressure" : "stretch", is_pressure(c.load) ? "kPa" : "1");
  for (const char* n : {"lambda_f", "lambda_cf", "lambda_cfp"}) t.add_column(n, "1");
  for (const char* n : {"sigma_11", "sigma_22", "sigma_33"}) t.add_column(n, "kPa");
  if (cyl)
    for (const char* n : {"r_int", "r_ext", "height"}) t.add_column(n, "cm");
  t.add_column("volume_ratio", "1");
  t.add_column("q_mean_A", "kPa");
  t.add_column("p_mean_C", "kPa");
  t.add_column("residual_A", "mixed");
  t.add_column("residual_C", "mixed");

  const SweepResult sweep =
      continuation_sweep(specimen, c.material, c.coupling, c.schedule(), c.solver);
  json points = json::array();
  for (const SweepPoint& sp : sweep.points) {
    const Observables& o = sp.state_c.observables;
    std::vector<double> row{sp.point.s, sp.point.beta};
    if (c.load.kind != LoadSchedule::Kind::none)
      row.push_back(is_pressure(c.load) ? sp.point.load.pressure : sp.point.load.stretch);
    for (double v : {o.lambda_f, o.lambda_cf, o.lambda_cfp, o.sigma_11, o.sigma_22, o.sigma_33})
      row.push_back(v);
    if (cyl)
      for (double v : {o.r_int, o.r_ext, o.height}) row.push_back(v);
    row.push_back(o.deformed_volume / o.reference_volume);
    row.push_back(mean(sp.state_a.state.q));
    row.push_back(mean(sp.state_c.state.p));
    row.push_back(sp.state_a.residual_norm);
    row.push_back(sp.state_c.residual_norm);
    t.add_row(std::move(row));
    points.push_back({{"s", sp.point.s},
                      {"beta", sp.point.beta},
                      {"state_A", report_json(sp.state_a)},
                      {"state_C", report_json(sp.state_c)}});
  }
  out.manifest = base_manifest(c);
  out.manifest["points"] = points;
  if (sweep.failed_at) {
    out.converged = false;
    out.failure = "s = " + format_number(*sweep.failed_at) + ": " + sweep.failure;
  }
  out.manifest["status"] = out.converged ? "converged" : "failed";
  if (!out.converged) out.manifest["failure"] = out.failure;
  return out;
}

struct TableCell {
  double a_over_D;
  bool coupling;
  double T0;
  SolveReport state_a, state_c;
};

std::vector<TableCell> table_cells(const ScenarioConfig& c, std::string& failure) {
  std::vector<TableCell> cells;
  const Specimen specimen = c.specimen();
  std::vector<std::pair<double, bool>> rows;
  for (double a : c.table.a_over_D) rows.push_back({a, true});
  if (c.table.include_unconstrained) rows.push_back({c.material.aOverD, false});
  for (const auto& [a, coupling] : rows) {
    for (double T0 : c.table.T0_kPa) {
      MaterialParams m = c.material;
      m.aOverD = a;
      m.T0 = T0;
      TableCell cell{a, coupling, T0, {}, {}};
      cell.state_a = solve_state_A(specimen, m, c.table.beta, coupling, c.solver);
      if (!cell.state_a.converged) {
        failure = "state A at a/D = " + format_number(a) + ", T0 = " + format_number(T0) + ": " +
                  cell.state_a.message;
        return cells;
      }
      cell.state_c = solve_state_C(specimen, m, c.table.beta, cell.state_a.tensions,
                                   LoadCase::equibiaxial(c.table.stretch), cell.state_a.state,
                                   c.solver);
      if (!cell.state_c.converged) {
        failure = "state C at a/D = " + format_number(a) + ", T0 = " + format_number(T0) + ": " +
                  cell.state_c.message;
        return cells;
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

RunResult run_table(const ScenarioConfig& c) {
  RunResult out;
  auto& t = out.table;
  t.add_column("a_over_D", "1");
  t.add_column("coupling", "1");
  t.add_column("T0", "kPa");
  t.add_column("sigma_11", "kPa");
  t.add_column("sigma_22", "kPa");
  t.add_column("ratio_22_11", "percent");
  for (const char* n : {"lambda_f_A", "lambda_cf_A", "lambda_cfp_A"}) t.add_column(n, "1");
  t.add_column("residual_A", "mixed");
  t.add_column("residual_C", "mixed");
  std::string failure;
  const auto cells = table_cells(c, failure);
  json entries = json::array();
  for (const TableCell& cell : cells) {
    const Observables& o = cell.state_c.observables;
    const Observables& a = cell.state_a.observables;
    t.add_row({cell.a_over_D, cell.coupling ? 1.0 : 0.0, cell.T0, o.sigma_11, o.sigma_22,
               100.0 * o.sigma_22 / o.sigma_11, a.lambda_f, a.lambda_cf, a.lambda_cfp,
               cell.state_a.residual_norm, cell.state_c.residual_norm});
    entries.push_back({{"a_over_D", cell.a_over_D},
                       {"coupling", cell.coupling},
                       {"T0_kPa", cell.T0},
                       {"state_A", report_json(cell.state_a)},
                       {"state_C", report_json(cell.state_c)}});
  }
  out.manifest = base_manifest(c);
  out.manifest["cells"] = entries;
  out.converged = failure.empty();
  out.failure = failure;
  out.manifest["status"] = out.converged ? "converged" : "failed";
  if (!out.converged) out.manifest["failure"] = failure;
  return out;
}

// ---------------------------------------------------------------- verify

struct DofError {
  double l2 = 0.0, linf = 0.0;
  void add(double d) {
    l2 += d * d;
    linf = std::max(linf, std::abs(d));
  }
  void finish() { l2 = std::sqrt(l2); }
};

DofError slab_error(const Mesh& mesh, const DofState& fe, const HomogeneousSolution& o,
                    bool with_q) {
  DofError e;
  for (int n = 0; n < mesh.node_count(); ++n)
    for (int a = 0; a < 3; ++a) e.add(fe.nodal(3 * n + a) - o.lambda(a) * mesh.nodes[n](a));
  for (int k = 0; k < fe.p.size(); ++k) e.add(fe.p(k) - o.p);
  if (with_q)
    for (int k = 0; k < fe.q.size(); ++k) e.add(fe.q(k) - o.q);
  e.finish();
  return e;
}

DofError cylinder_error(const Mesh& mesh, const DofState& fe, const CylinderSolution& o) {
  DofError e;
  for (int n = 0; n < mesh.node_count(); ++n) {
    const Vec3d& X = mesh.nodes[n];
    e.add(fe.nodal(3 * n) - o.radius_at(X(0)));
    e.add(fe.nodal(3 * n + 1) - X(1));
    e.add(fe.nodal(3 * n + 2) - o.lambda_z * X(2));
  }
  e.finish();
  return e;
}

SlabScenario slab_scenario(const LoadCase& l) {
  switch (l.kind) {
    case LoadCase::Kind::uniaxial: return SlabScenario::uniaxial(l.axis, l.stretch);
    case LoadCase::Kind::equibiaxial: return SlabScenario::equibiaxial(l.stretch);
    default: return SlabScenario::free_contraction();
  }
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& config) {
  config.validate();
  return config.mode == ScenarioConfig::Mode::table ? run_table(config) : run_sweep(config);
}

VerifyReport verify_scenario(const ScenarioConfig& c) {
  c.validate();
  VerifyReport rep;
  auto& t = rep.table;
  const auto record = [&](std::string label, const DofError& e, std::vector<double> row) {
    VerifyCase vc{std::move(label), e.l2, e.linf, e.l2 <= c.verify.l2 && e.linf <= c.verify.linf};
    rep.pass = rep.pass && vc.pass;
    row.insert(row.end(), {e.l2, e.linf, vc.pass ? 1.0 : 0.0});
    t.add_row(std::move(row));
    rep.cases.push_back(std::move(vc));
  };

  if (c.mode == ScenarioConfig::Mode::table) {
    for (const char* n : {"a_over_D", "coupling", "T0"}) t.add_column(n, n[0] == 'T' ? "kPa" : "1");
    t.add_column("l2_error", "mixed");
    t.add_column("linf_error", "mixed");
    t.add_column("pass", "1");
    const auto cells = table_cells(c, rep.failure);
    const Specimen specimen = c.specimen();
    for (const TableCell& cell : cells) {
      MaterialParams m = c.material;
      m.aOverD = cell.a_over_D;
      m.T0 = cell.T0;
      const auto o = slab_solve(SlabScenario::equibiaxial(c.table.stretch), c.table.beta, m,
                                cell.coupling);
      record("a/D " + format_number(cell.a_over_D) + (cell.coupling ? "" : " (no coupling)") +
                 ", T0 " + format_number(cell.T0),
             slab_error(specimen.mesh, cell.state_c.state, o, false),
             {cell.a_over_D, cell.coupling ? 1.0 : 0.0, cell.T0});
    }
    if (!rep.failure.empty()) rep.pass = false;
    return rep;
  }

  const auto schedule = c.schedule();
  const bool cyl = c.geometry == Geometry::cylinder;
  if (cyl && c.coupling)
    for (const auto& p : schedule)
      if (p.beta != 0.0)
        throw ConfigError(
            "the coupled cylinder has no semi-analytic oracle; rerun with --no-coupling or beta = 0");

  t.add_column("s", "1");
  t.add_column("beta", "1");
  t.add_column("load", is_pressure(c.load) ? "kPa" : "1");
  t.add_column("l2_error", cyl ? "cm" : "mixed");
  t.add_column("linf_error", cyl ? "cm" : "mixed");
  t.add_column("pass", "1");
  const Specimen specimen = c.specimen();
  const SweepResult sweep = continuation_sweep(specimen, c.material, c.coupling, schedule, c.solver);
  for (const SweepPoint& sp : sweep.points) {
    const double load_value = is_pressure(c.load) ? sp.point.load.pressure : sp.point.load.stretch;
    const std::string label = "s " + format_number(sp.point.s) + ", beta " +
                              format_number(sp.point.beta);
    if (cyl) {
      CylinderGeometry g{c.extent_cm(0), c.extent_cm(1), c.extent_cm(2)};
      const auto o = cylinder_solve(g, sp.point.load.pressure, sp.point.beta, c.material);
      record(label, cylinder_error(specimen.mesh, sp.state_c.state, o),
             {sp.point.s, sp.point.beta, load_value});
    } else if (sp.point.load.kind == LoadCase::Kind::none) {
      const auto o = slab_solve(SlabScenario::free_contraction(), sp.point.beta, c.material,
                                c.coupling);
      record(label, slab_error(specimen.mesh, sp.state_a.state, o, c.coupling),
             {sp.point.s, sp.point.beta, load_value});
    } else {
      const auto o = slab_solve(slab_scenario(sp.point.load), sp.point.beta, c.material, c.coupling);
      record(label, slab_error(specimen.mesh, sp.state_c.state, o, false),
             {sp.point.s, sp.point.beta, load_value});
    }
  }
  if (sweep.failed_at) {
    rep.pass = false;
    rep.failure = "s = " + format_number(*sweep.failed_at) + ": " + sweep.failure;
  }
  return rep;
}

}  // namespace tissuefe
