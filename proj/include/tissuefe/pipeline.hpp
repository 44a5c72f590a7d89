// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tissuefe/assembly.hpp"
#include "tissuefe/solver.hpp"

namespace tissuefe {

enum class Geometry { slab, cylinder };

/// A meshed specimen together with the constraints that remove its rigid
/// modes. Slab: x = 0 on xmin, y = 0 on ymin, z = 0 on zmin. Cylinder
/// sector: both phi faces held on their reference half-planes, z = 0 on the
/// bottom and, with `rigid_top`, the top face tied to one axial unknown
/// carrying zero net force.
struct Specimen {
  Geometry geometry = Geometry::slab;
  Mesh mesh;
  Vec3d extent = Vec3d::Ones();  // slab (Lx, Ly, Lz); cylinder (R_int, R_ext, L)
  bool rigid_top = true;

  static Specimen slab(double Lx, double Ly, double Lz, int nx = 1, int ny = 1, int nz = 1);
  static Specimen cylinder(double R_int, double R_ext, double L, int nr, int nphi, int nz,
                           double sector_angle, bool rigid_top = true);

  EssentialConditions symmetry_conditions() const;
};

/// Loading of the state-C solve. Stretches are prescribed on the slab faces
/// opposite the symmetry planes; pressure acts on the cylinder's inner face.
struct LoadCase {
  enum class Kind { none, uniaxial, equibiaxial, pressure };
  Kind kind = Kind::none;
  int axis = 0;          // uniaxial: 0 = fiber, 1 = cross-fiber
  double stretch = 1.0;  // relative to the reference length
  double pressure = 0.0; // kPa

  static LoadCase none() { return {}; }
  static LoadCase uniaxial(int axis, double stretch) { return {Kind::uniaxial, axis, stretch, 0.0}; }
  static LoadCase equibiaxial(double stretch) { return {Kind::equibiaxial, 0, stretch, 0.0}; }
  static LoadCase internal_pressure(double p) { return {Kind::pressure, 0, 1.0, p}; }
};

struct Observables {
  double lambda_f = 1.0;    // volume mean of sqrt(C11)
  double lambda_cf = 1.0;   // volume mean of sqrt(C22)
  double lambda_cfp = 1.0;  // volume mean of sqrt(C33), through-thickness / radial
  double sigma_11 = 0.0;    // volume mean physical Cauchy stress, kPa
  double sigma_22 = 0.0;
  double sigma_33 = 0.0;
  double r_int = 0.0;       // cylinder, cm
  double r_ext = 0.0;
  double height = 0.0;      // cylinder top, cm
  double reference_volume = 0.0;
  double deformed_volume = 0.0;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;
  DofState state;
  ElementTensions tensions;  // state A: computed from the solution; state C: those applied
  Observables observables;
  std::string message;
};

Observables compute_observables(const Specimen& specimen, const DofState& state,
                                const AssemblyInput& input);

/// Free contraction at activation `beta` (state A). Continuation in beta
/// starts from `warm` (solution at `warm_beta`) or from the reference state.
SolveReport solve_state_A(const Specimen& specimen, const MaterialParams& params, double beta,
                          bool coupling, const SolverConfig& config,
                          const DofState* warm = nullptr, double warm_beta = 0.0);

/// Loaded state C at activation `beta` with frozen `tensions`. The load is
/// ramped from the free-contraction configuration `start` (an equilibrium of
/// the unloaded state-C system) to its full value.
SolveReport solve_state_C(const Specimen& specimen, const MaterialParams& params, double beta,
                          const ElementTensions& tensions, const LoadCase& load,
                          const DofState& start, const SolverConfig& config);

struct SchedulePoint {
  double s = 0.0;
  double beta = 0.0;
  LoadCase load;
};

struct SweepPoint {
  SchedulePoint point;
  SolveReport state_a;
  SolveReport state_c;
};

struct SweepResult {
  std::vector<SweepPoint> points;  // converged points, in schedule order
  std::optional<double> failed_at; // s of the first failing point
  std::string failure;
};

/// Runs state A then state C at every schedule point, warm-starting state A
/// from the previous point.
SweepResult continuation_sweep(const Specimen& specimen, const MaterialParams& params,
                               bool coupling, const std::vector<SchedulePoint>& schedule,
                               const SolverConfig& config);

}  // namespace tissuefe
