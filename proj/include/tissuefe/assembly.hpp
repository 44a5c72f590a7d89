// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tissuefe/constitutive.hpp"
#include "tissuefe/mesh.hpp"

namespace tissuefe {

/// Nodal deformed world coordinates (3 per node, node-major) plus the
/// element-constant multipliers. q is empty unless the coupling constraint
/// is part of the system.
struct DofState {
  Eigen::VectorXd nodal;
  Eigen::VectorXd p;
  Eigen::VectorXd q;

  /// Undeformed configuration with zero multipliers.
  static DofState reference(const Mesh& mesh, bool with_q);
  Vec3d node(int id) const { return nodal.segment<3>(3 * id); }
};

/// Essential conditions on nodal world coordinates. A dof is either fixed to
/// a value, tied into a group sharing one unknown (rigid plate), or free.
struct EssentialConditions {
  std::vector<std::uint8_t> fixed;
  Eigen::VectorXd value;
  std::vector<int> group;
  int group_count = 0;

  static EssentialConditions none(const Mesh& mesh);

  void fix(int node, int component, double v);
  /// Fixes a component of every node of a face set to its reference value.
  void fix_to_reference(const Mesh& mesh, const std::string& label, int component);
  void fix_set(const Mesh& mesh, const std::string& label, int component, double v);
  /// Ties a component of every node of a face set to one shared unknown.
  int tie(const Mesh& mesh, const std::string& label, int component);

  bool is_fixed(int dof) const { return fixed[dof] != 0; }
};

enum class LoadKind { traction_reference, follower_pressure };

/// Surface load on a face set. For follower_pressure, `magnitude` is the
/// pressure (kPa) pushing along the inward normal of the deformed face. For
/// traction_reference, `magnitude * direction` gives the contravariant world
/// components s^a of a traction per unit undeformed area.
struct BoundaryLoad {
  std::string face_set;
  LoadKind kind = LoadKind::follower_pressure;
  double magnitude = 0.0;
  Vec3d direction = Vec3d::Zero();
};

/// Coupling tensions frozen at every quadrature point of every element.
using ElementTensions = std::vector<std::array<PseudoActiveTensions<double>, kQuadraturePoints>>;

ElementTensions zero_tensions(const Mesh& mesh);

/// Kinematics at one quadrature point of one element.
struct PointKinematics {
  Vec3d reference_point;
  Vec3d deformed_point;
  Eigen::Matrix<double, kNodesPerElement, 1> N;
  Eigen::Matrix<double, kNodesPerElement, 3> dN_dX;
  double dV;  // quadrature weight times reference Jacobian
  KinematicState<double> state;
};

/// Throws InvertedElementError carrying the element id.
PointKinematics point_kinematics(const Mesh& mesh, const Eigen::VectorXd& nodal, int element,
                                 int qp);

/// Unreduced residual blocks. `nodal` holds
///   int P^IJ Phi_J^a nabla_I(psi_n) dV - (1 - delta_AH) int s^a psi_n dA
/// for every node and world component (3 * node + a), `incompressibility`
/// holds int (det C - 1) dV / V_e and `constraint` int h dV / V_e (state A with
/// coupling only; empty otherwise).
struct ResidualBlocks {
  Eigen::VectorXd nodal;
  Eigen::VectorXd incompressibility;
  Eigen::VectorXd constraint;
};

struct AssemblyInput {
  const Mesh* mesh = nullptr;
  MaterialParams params;
  ActivationState activation;
  bool coupling = true;                    // q unknowns and h rows in state A
  const ElementTensions* tensions = nullptr;  // state C; null means zero
  std::vector<BoundaryLoad> loads;
};

ResidualBlocks assemble_residual(const AssemblyInput& input, const DofState& dofs);

/// Equivalent nodal loads (3 * node + a rows, covariant test components) of a
/// follower pressure on a face set at the configuration `nodal`. The vector
/// is the right-hand side of the equilibrium rows, i.e. it is subtracted
/// from the internal-force residual.
Eigen::VectorXd apply_follower_pressure(const Mesh& mesh, const Eigen::VectorXd& nodal,
                                        const std::string& face_set, double pressure);

/// Equivalent nodal loads of a constant traction per undeformed area.
Eigen::VectorXd apply_reference_traction(const Mesh& mesh, const std::string& face_set,
                                         const Vec3d& traction);

/// Coupling tensions at every quadrature point from a converged state-A
/// configuration and its element multipliers q.
ElementTensions compute_tensions(const Mesh& mesh, const DofState& state_a, double aOverD);

/// Square system over the free unknowns.
///
/// Unknown / row ordering:
///   1. free nodal dofs in ascending global index 3 * node + component
///   2. one unknown per tie group (row = sum of the tied nodal rows)
///   3. p per element (incompressibility rows)
///   4. q per element, state A with coupling only (constraint rows)
class MixedSystem {
 public:
  MixedSystem(AssemblyInput input, EssentialConditions bc);

  int size() const { return size_; }
  int free_nodal_count() const { return static_cast<int>(free_dofs_.size()); }
  bool has_q() const { return with_q_; }

  Eigen::VectorXd pack(const DofState& state) const;
  /// Fixed dofs take their prescribed values.
  DofState unpack(const Eigen::VectorXd& x) const;
  Eigen::VectorXd residual(const Eigen::VectorXd& x) const;
  /// Reduces unassembled blocks to the system rows.
  Eigen::VectorXd reduce(const ResidualBlocks& blocks) const;

  const AssemblyInput& input() const { return input_; }
  const EssentialConditions& conditions() const { return bc_; }

 private:
  AssemblyInput input_;
  EssentialConditions bc_;
  std::vector<int> free_dofs_;
  std::vector<std::vector<int>> group_dofs_;
  bool with_q_;
  int size_;
};

}  // namespace tissuefe
