// SPDX-License-Identifier: Apache-2.0

#include "tissuefe/assembly.hpp"

#include <stdexcept>

namespace tissuefe {

DofState DofState::reference(const Mesh& mesh, bool with_q) {
  DofState s;
  s.nodal.resize(3 * mesh.node_count());
  for (int n = 0; n < mesh.node_count(); ++n) s.nodal.segment<3>(3 * n) = mesh.nodes[n];
  s.p = Eigen::VectorXd::Zero(mesh.element_count());
  if (with_q) s.q = Eigen::VectorXd::Zero(mesh.element_count());
  return s;
}

EssentialConditions EssentialConditions::none(const Mesh& mesh) {
  EssentialConditions bc;
  const int n = 3 * mesh.node_count();
  bc.fixed.assign(n, 0);
  bc.value = Eigen::VectorXd::Zero(n);
  bc.group.assign(n, -1);
  return bc;
}

void EssentialConditions::fix(int node, int component, double v) {
  const int dof = 3 * node + component;
  if (group[dof] >= 0) throw std::invalid_argument("dof is already tied into a group");
  fixed[dof] = 1;
  value[dof] = v;
}

void EssentialConditions::fix_to_reference(const Mesh& mesh, const std::string& label,
                                           int component) {
  for (int n : mesh.node_set(label)) fix(n, component, mesh.nodes[n](component));
}

void EssentialConditions::fix_set(const Mesh& mesh, const std::string& label, int component,
                                  double v) {
  for (int n : mesh.node_set(label)) fix(n, component, v);
}

int EssentialConditions::tie(const Mesh& mesh, const std::string& label, int component) {
  const int g = group_count++;
  for (int n : mesh.node_set(label)) {
    const int dof = 3 * n + component;
    if (fixed[dof]) throw std::invalid_argument("cannot tie a fixed dof");
    group[dof] = g;
  }
  return g;
}

ElementTensions zero_tensions(const Mesh& mesh) {
  return ElementTensions(mesh.element_count());
}

PointKinematics point_kinematics(const Mesh& mesh, const Eigen::VectorXd& nodal, int element,
                                 int qp) {
  const auto& rule = gauss_rule()[qp];
  const ShapeValues sv = shape_eval(rule.xi);
  const auto& conn = mesh.elements[element];

  PointKinematics pk;
  pk.N = sv.N;
  pk.reference_point.setZero();
  pk.deformed_point.setZero();
  Mat3d dTheta = Mat3d::Zero();
  for (int n = 0; n < kNodesPerElement; ++n) {
    const Vec3d& X = mesh.nodes[conn[n]];
    pk.reference_point += sv.N(n) * X;
    dTheta += X * sv.dN.row(n);
  }
  const Mat3d dX_dxi = body_frame_map(mesh.chart, pk.reference_point) * dTheta;
  const double det0 = dX_dxi.determinant();
  if (!(det0 > 0.0))
    throw InvertedElementError("element " + std::to_string(element) +
                                   " has non-positive reference Jacobian",
                               element);
  pk.dN_dX = sv.dN * dX_dxi.inverse();
  pk.dV = rule.weight * det0;

  Mat3d dtheta_dX = Mat3d::Zero();
  for (int n = 0; n < kNodesPerElement; ++n) {
    const Vec3d theta = nodal.segment<3>(3 * conn[n]);
    pk.deformed_point += sv.N(n) * theta;
    dtheta_dX += theta * pk.dN_dX.row(n);
  }
  try {
    pk.state = strain_state(deformation_gradient(dtheta_dX), mesh.chart, pk.deformed_point);
  } catch (const std::domain_error&) {
    throw InvertedElementError("element " + std::to_string(element) + " left the chart", element);
  } catch (const InvertedElementError&) {
    throw InvertedElementError("element " + std::to_string(element) + " is inverted", element);
  }
  return pk;
}

ResidualBlocks assemble_residual(const AssemblyInput& input, const DofState& dofs) {
  const Mesh& mesh = *input.mesh;
  const MaterialParams& m = input.params;
  const double beta = input.activation.beta;
  const bool state_a = input.activation.free_contraction;
  const bool with_q = state_a && input.coupling;
  const int ne = mesh.element_count();

  ResidualBlocks r;
  r.nodal = Eigen::VectorXd::Zero(3 * mesh.node_count());
  r.incompressibility = Eigen::VectorXd::Zero(ne);
  if (with_q) r.constraint = Eigen::VectorXd::Zero(ne);

  const PseudoActiveTensions<double> no_tension{};
  for (int e = 0; e < ne; ++e) {
    const auto& conn = mesh.elements[e];
    const double p = dofs.p(e);
    const double q = with_q ? dofs.q(e) : 0.0;
    double Ve = 0.0;
    for (int qp = 0; qp < kQuadraturePoints; ++qp) {
      const PointKinematics pk = point_kinematics(mesh, dofs.nodal, e, qp);
      const KinematicState<double>& k = pk.state;
      Mat3d P;
      if (state_a) {
        P = pk2_state_A(k, MultiplierPair<double>{p, q}, beta, m);
      } else {
        const auto& t = input.tensions ? (*input.tensions)[e][qp] : no_tension;
        P = pk2_state_C(k, p, beta, t, m);
      }
      // A(a, I) = P^IJ Phi_J^a; tau^ab = A Phi^T.
      const Mat3d A = k.phi * P;
      const Mat3d tau = A * k.phi.transpose();
      const auto gamma = covariant_gradient_coefficients(mesh.chart, pk.deformed_point);
      Vec3d correction;
      for (int a = 0; a < 3; ++a) correction(a) = gamma[a].cwiseProduct(tau).sum();

      for (int n = 0; n < kNodesPerElement; ++n) {
        const Vec3d row = A * pk.dN_dX.row(n).transpose() - pk.N(n) * correction;
        r.nodal.segment<3>(3 * conn[n]) += pk.dV * row;
      }
      r.incompressibility(e) += pk.dV * (k.I3 - 1.0);
      if (with_q) r.constraint(e) += pk.dV * constraint_h(k.I4, k.I6, m.aOverD);
      Ve += pk.dV;
    }
    r.incompressibility(e) /= Ve;
    if (with_q) r.constraint(e) /= Ve;
  }

  if (!state_a) {
    for (const BoundaryLoad& load : input.loads) {
      if (load.kind == LoadKind::follower_pressure)
        r.nodal -= apply_follower_pressure(mesh, dofs.nodal, load.face_set, load.magnitude);
      else
        r.nodal -= apply_reference_traction(mesh, load.face_set, load.magnitude * load.direction);
    }
  }
  return r;
}

namespace {

struct FaceGeometry {
  Vec3d theta;
  Mat3d basis;   // g_a as columns
  Vec3d normal;  // outward, scaled by the area element
};

FaceGeometry face_geometry(const Mesh& mesh, const Eigen::VectorXd& nodal, const FaceRef& f,
                           const ShapeValues& sv) {
  const int axis = f.local_face / 2;
  const int a = (axis + 1) % 3, b = (axis + 2) % 3;
  const double side = (f.local_face % 2) ? 1.0 : -1.0;
  const auto& conn = mesh.elements[f.element];
  FaceGeometry g;
  g.theta.setZero();
  Mat3d dtheta = Mat3d::Zero();
  for (int n = 0; n < kNodesPerElement; ++n) {
    const Vec3d th = nodal.segment<3>(3 * conn[n]);
    g.theta += sv.N(n) * th;
    dtheta += th * sv.dN.row(n);
  }
  if (mesh.chart.kind == ChartKind::cylindrical && !(g.theta(0) > 0.0))
    throw InvertedElementError("face left the chart", f.element);
  g.basis = covariant_basis(mesh.chart, g.theta);
  const Mat3d dy = g.basis * dtheta;
  g.normal = dy.col(a).cross(dy.col(b));
  const double len = g.normal.norm();
  if (!(len > 1e-300) || !std::isfinite(len))
    throw InvertedElementError("degenerate face geometry", f.element);
  if (side * g.normal.dot(dy.col(axis)) < 0.0) g.normal = -g.normal;
  return g;
}

}  // namespace

Eigen::VectorXd apply_follower_pressure(const Mesh& mesh, const Eigen::VectorXd& nodal,
                                        const std::string& face_set, double pressure) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(3 * mesh.node_count());
  const auto& faces = mesh.faces(face_set);
  if (pressure == 0.0) return load;
  for (const FaceRef& f : faces) {
    const auto& conn = mesh.elements[f.element];
    for (const auto& qp : face_gauss_rule(f.local_face)) {
      const ShapeValues sv = shape_eval(qp.xi);
      const FaceGeometry g = face_geometry(mesh, nodal, f, sv);
      // traction t = -P n; contravariant components t . g^a.
      const Vec3d t_contra = g.basis.inverse() * (-pressure * g.normal);
      for (int local : face_nodes(f.local_face))
        load.segment<3>(3 * conn[local]) += qp.weight * sv.N(local) * t_contra;
    }
  }
  return load;
}

Eigen::VectorXd apply_reference_traction(const Mesh& mesh, const std::string& face_set,
                                         const Vec3d& traction) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(3 * mesh.node_count());
  Eigen::VectorXd reference(3 * mesh.node_count());
  for (int n = 0; n < mesh.node_count(); ++n) reference.segment<3>(3 * n) = mesh.nodes[n];
  for (const FaceRef& f : mesh.faces(face_set)) {
    const auto& conn = mesh.elements[f.element];
    for (const auto& qp : face_gauss_rule(f.local_face)) {
      const ShapeValues sv = shape_eval(qp.xi);
      const double dA = face_geometry(mesh, reference, f, sv).normal.norm();
      for (int local : face_nodes(f.local_face))
        load.segment<3>(3 * conn[local]) += qp.weight * sv.N(local) * dA * traction;
    }
  }
  return load;
}

ElementTensions compute_tensions(const Mesh& mesh, const DofState& state_a, double aOverD) {
  ElementTensions t(mesh.element_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double q = state_a.q.size() ? state_a.q(e) : 0.0;
    for (int qp = 0; qp < kQuadraturePoints; ++qp) {
      const PointKinematics pk = point_kinematics(mesh, state_a.nodal, e, qp);
      t[e][qp] = pseudo_active_tensions(q, pk.state.I4, pk.state.I6, aOverD);
    }
  }
  return t;
}

MixedSystem::MixedSystem(AssemblyInput input, EssentialConditions bc)
    : input_(std::move(input)), bc_(std::move(bc)) {
  if (!input_.mesh) throw std::invalid_argument("MixedSystem requires a mesh");
  const int ndof = 3 * input_.mesh->node_count();
  if (static_cast<int>(bc_.fixed.size()) != ndof)
    throw std::invalid_argument("essential conditions do not match the mesh");
  group_dofs_.resize(bc_.group_count);
  for (int d = 0; d < ndof; ++d) {
    if (bc_.fixed[d]) continue;
    if (bc_.group[d] >= 0)
      group_dofs_[bc_.group[d]].push_back(d);
    else
      free_dofs_.push_back(d);
  }
  for (const auto& g : group_dofs_)
    if (g.empty()) throw std::invalid_argument("empty tie group");
  with_q_ = input_.activation.free_contraction && input_.coupling;
  const int ne = input_.mesh->element_count();
  size_ = static_cast<int>(free_dofs_.size()) + bc_.group_count + ne * (with_q_ ? 2 : 1);
}

Eigen::VectorXd MixedSystem::pack(const DofState& state) const {
  const int ne = input_.mesh->element_count();
  Eigen::VectorXd x(size_);
  int i = 0;
  for (int d : free_dofs_) x(i++) = state.nodal(d);
  for (const auto& g : group_dofs_) x(i++) = state.nodal(g.front());
  x.segment(i, ne) = state.p;
  i += ne;
  if (with_q_) x.segment(i, ne) = state.q.size() ? state.q : Eigen::VectorXd::Zero(ne);
  return x;
}

DofState MixedSystem::unpack(const Eigen::VectorXd& x) const {
  const int ne = input_.mesh->element_count();
  DofState s;
  s.nodal = bc_.value;
  int i = 0;
  for (int d : free_dofs_) s.nodal(d) = x(i++);
  for (const auto& g : group_dofs_) {
    for (int d : g) s.nodal(d) = x(i);
    ++i;
  }
  s.p = x.segment(i, ne);
  i += ne;
  if (with_q_) s.q = x.segment(i, ne);
  return s;
}

Eigen::VectorXd MixedSystem::reduce(const ResidualBlocks& blocks) const {
  const int ne = input_.mesh->element_count();
  Eigen::VectorXd r(size_);
  int i = 0;
  for (int d : free_dofs_) r(i++) = blocks.nodal(d);
  for (const auto& g : group_dofs_) {
    double sum = 0.0;
    for (int d : g) sum += blocks.nodal(d);
    r(i++) = sum;
  }
  r.segment(i, ne) = blocks.incompressibility;
  i += ne;
  if (with_q_) r.segment(i, ne) = blocks.constraint;
  return r;
}

Eigen::VectorXd MixedSystem::residual(const Eigen::VectorXd& x) const {
  return reduce(assemble_residual(input_, unpack(x)));
}

}  // namespace tissuefe
