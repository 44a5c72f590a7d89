// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "tissuefe/assembly.hpp"
#include "tissuefe/oracle.hpp"
#include "tissuefe/pipeline.hpp"

using namespace tissuefe;

namespace {

DofState homogeneous(const Mesh& mesh, const Vec3d& lambda, double p, double q, bool with_q) {
  DofState s = DofState::reference(mesh, with_q);
  for (int n = 0; n < mesh.node_count(); ++n) s.nodal.segment<3>(3 * n) = lambda.cwiseProduct(mesh.nodes[n]);
  s.p.setConstant(p);
  if (with_q) s.q.setConstant(q);
  return s;
}

AssemblyInput input_for(const Mesh& mesh, double beta, bool state_a, bool coupling) {
  AssemblyInput in;
  in.mesh = &mesh;
  in.activation = {beta, state_a};
  in.coupling = coupling;
  return in;
}

bool on_set(const Mesh& mesh, const std::string& set, int node) {
  const auto ids = mesh.node_set(set);
  return std::binary_search(ids.begin(), ids.end(), node);
}

}  // namespace

TEST(SlabMesh, Counts) {
  const Mesh a = build_slab_mesh(1, 1, 0.1, 1, 1, 1);
  EXPECT_EQ(a.node_count(), 8);
  EXPECT_EQ(a.element_count(), 1);
  const Mesh b = build_slab_mesh(1, 1, 0.1, 2, 2, 1);
  EXPECT_EQ(b.node_count(), 18);
  EXPECT_EQ(b.element_count(), 4);
  EXPECT_NO_THROW(b.validate());
}

TEST(SlabMesh, Volume) {
  EXPECT_NEAR(mesh_reference_volume(build_slab_mesh(1, 1, 0.1, 1, 1, 1)), 0.1, 1e-14);
  EXPECT_NEAR(mesh_reference_volume(build_slab_mesh(1, 1, 0.1, 3, 2, 2)), 0.1, 1e-14);
}

TEST(SlabMesh, FaceSets) {
  const Mesh m = build_slab_mesh(2, 1, 0.5, 2, 1, 1);
  EXPECT_EQ(m.faces("xmax").size(), 1u);
  EXPECT_EQ(m.faces("zmin").size(), 2u);
  EXPECT_EQ(m.node_set("xmin").size(), 4u);
  EXPECT_NEAR(face_set_reference_area(m, "zmax"), 2.0, 1e-14);
  EXPECT_THROW(m.faces("nope"), std::invalid_argument);
}

TEST(SlabMesh, RejectsBadInput) {
  EXPECT_THROW(build_slab_mesh(1, 1, 0.1, 0, 1, 1), std::invalid_argument);
  EXPECT_THROW(build_slab_mesh(1, -1, 0.1, 1, 1, 1), std::invalid_argument);
  Mesh m = build_slab_mesh(1, 1, 1, 1, 1, 1);
  m.elements[0][3] = 99;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = build_slab_mesh(1, 1, 1, 1, 1, 1);
  std::swap(m.elements[0][0], m.elements[0][1]);  // inverted corner order
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(CylinderMesh, SingleElement) {
  const Mesh m = build_cylinder_mesh(0.2, 0.35, 2, 1, 1, 1, std::numbers::pi / 8);
  EXPECT_EQ(m.node_count(), 8);
  EXPECT_EQ(m.element_count(), 1);
  EXPECT_NO_THROW(m.validate());
}

TEST(CylinderMesh, FullRingVolume) {
  const Mesh m = build_cylinder_mesh(0.2, 0.35, 2, 2, 16, 1, 2 * std::numbers::pi);
  const double exact = std::numbers::pi * (0.35 * 0.35 - 0.2 * 0.2) * 2;
  EXPECT_NEAR(mesh_reference_volume(m), exact, 0.005 * exact);
}

TEST(CylinderMesh, InnerArea) {
  const double sector = std::numbers::pi / 8;
  const Mesh m = build_cylinder_mesh(0.2, 0.35, 2, 2, 1, 2, sector);
  EXPECT_NEAR(face_set_reference_area(m, "inner"), 0.2 * sector * 2, 1e-12);
  const double vol = 0.5 * sector * (0.35 * 0.35 - 0.2 * 0.2) * 2;
  EXPECT_NEAR(mesh_reference_volume(m), vol, 1e-12);
}

TEST(CylinderMesh, RejectsBadGeometry) {
  EXPECT_THROW(build_cylinder_mesh(0.35, 0.2, 2, 1, 1, 1, 0.3), std::invalid_argument);
  EXPECT_THROW(build_cylinder_mesh(0.2, 0.35, 2, 1, 1, 1, 7.0), std::invalid_argument);
}

TEST(ShapeFunctions, CornerInterpolation) {
  for (int k = 0; k < kNodesPerElement; ++k) {
    const Vec3d xi(k & 1, (k >> 1) & 1, (k >> 2) & 1);
    const ShapeValues sv = shape_eval(xi);
    for (int n = 0; n < kNodesPerElement; ++n) EXPECT_EQ(sv.N(n), n == k ? 1.0 : 0.0);
  }
}

TEST(ShapeFunctions, Centroid) {
  const ShapeValues sv = shape_eval(Vec3d(0.5, 0.5, 0.5));
  for (int n = 0; n < kNodesPerElement; ++n) EXPECT_EQ(sv.N(n), 0.125);
}

TEST(ShapeFunctions, PartitionOfUnity) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100; ++i) {
    const ShapeValues sv = shape_eval(Vec3d(u(rng), u(rng), u(rng)));
    EXPECT_NEAR(sv.N.sum(), 1.0, 1e-15);
    for (int d = 0; d < 3; ++d) EXPECT_NEAR(sv.dN.col(d).sum(), 0.0, 1e-15);
  }
}

TEST(Quadrature, WeightsSumToOne) {
  double w = 0;
  for (const auto& qp : gauss_rule()) w += qp.weight;
  EXPECT_NEAR(w, 1.0, 1e-15);
}

TEST(Residual, ReferenceIsStressFree) {
  for (const Mesh& m : {build_slab_mesh(1, 1, 0.1, 2, 2, 1),
                        build_cylinder_mesh(0.2, 0.35, 2, 2, 1, 2, std::numbers::pi / 8)}) {
    const auto r = assemble_residual(input_for(m, 0.0, true, true), DofState::reference(m, true));
    EXPECT_LE(r.nodal.cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE(r.incompressibility.cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE(r.constraint.cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Residual, PatchTestFreeContraction) {
  const MaterialParams m;
  const auto o = slab_solve(SlabScenario::free_contraction(), 0.6, m, true);
  const Mesh mesh = build_slab_mesh(1, 1, 0.1, 3, 2, 2);
  AssemblyInput in = input_for(mesh, 0.6, true, true);
  const auto r = assemble_residual(in, homogeneous(mesh, o.lambda, o.p, o.q, true));
  EXPECT_LE(r.nodal.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(r.incompressibility.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(r.constraint.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Residual, PatchTestUniaxialStateC) {
  const MaterialParams m;
  const double beta = 0.8;
  const auto a = slab_solve(SlabScenario::free_contraction(), beta, m, true);
  const auto c = slab_solve(SlabScenario::uniaxial(0, 1.1), beta, m, true);
  const Mesh mesh = build_slab_mesh(1, 1, 0.1, 3, 2, 2);
  const ElementTensions t = compute_tensions(mesh, homogeneous(mesh, a.lambda, a.p, a.q, true), m.aOverD);
  AssemblyInput in = input_for(mesh, beta, false, false);
  in.tensions = &t;
  const auto r = assemble_residual(in, homogeneous(mesh, c.lambda, c.p, 0.0, false));
  double worst = 0.0;
  for (int n = 0; n < mesh.node_count(); ++n) {
    const bool loaded = on_set(mesh, "xmin", n) || on_set(mesh, "xmax", n);
    worst = std::max({worst, std::abs(r.nodal(3 * n + 1)), std::abs(r.nodal(3 * n + 2))});
    if (!loaded) worst = std::max(worst, std::abs(r.nodal(3 * n)));
  }
  EXPECT_LE(worst, 1e-12);
  EXPECT_GT(r.nodal.cwiseAbs().maxCoeff(), 1e-3);  // reactions on the stretched faces
}

TEST(Residual, IncompressibilityRowHomogeneous) {
  const Mesh mesh = build_slab_mesh(1, 1, 0.1, 2, 1, 1);
  const Vec3d l(1.1, 0.95, 0.9);
  const auto r = assemble_residual(input_for(mesh, 0.0, true, false), homogeneous(mesh, l, 0.0, 0.0, false));
  const double detC = std::pow(l.prod(), 2);
  for (int e = 0; e < mesh.element_count(); ++e) EXPECT_NEAR(r.incompressibility(e), detC - 1.0, 1e-14);
}

TEST(Residual, StateASuppressesSurfaceLoads) {
  const Mesh mesh = build_cylinder_mesh(0.2, 0.35, 2, 2, 1, 1, std::numbers::pi / 8);
  AssemblyInput in = input_for(mesh, 0.5, true, true);
  DofState s = DofState::reference(mesh, true);
  s.nodal(0) += 0.01;
  const auto bare = assemble_residual(in, s);
  in.loads.push_back({"inner", LoadKind::follower_pressure, 12.0, Vec3d::Zero()});
  in.loads.push_back({"top", LoadKind::traction_reference, 3.0, Vec3d(0, 0, 1)});
  const auto loaded = assemble_residual(in, s);
  EXPECT_EQ(bare.nodal, loaded.nodal);
}

TEST(Residual, AssemblyDeterministicBitwise) {
  const Mesh mesh = build_cylinder_mesh(0.2, 0.35, 2, 3, 2, 2, std::numbers::pi / 8);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1e-3, 1e-3);
  DofState s = DofState::reference(mesh, true);
  for (int i = 0; i < s.nodal.size(); ++i) s.nodal(i) += u(rng);
  for (int e = 0; e < mesh.element_count(); ++e) {
    s.p(e) = 100 * u(rng);
    s.q(e) = 100 * u(rng);
  }
  AssemblyInput in = input_for(mesh, 0.7, false, false);
  in.loads.push_back({"inner", LoadKind::follower_pressure, 8.0, Vec3d::Zero()});
  DofState sc = s;
  sc.q.resize(0);
  const auto a = assemble_residual(in, sc), b = assemble_residual(in, sc);
  EXPECT_EQ(0, std::memcmp(a.nodal.data(), b.nodal.data(), sizeof(double) * a.nodal.size()));
  EXPECT_EQ(0, std::memcmp(a.incompressibility.data(), b.incompressibility.data(),
                           sizeof(double) * a.incompressibility.size()));
}

TEST(FollowerPressure, ZeroPressure) {
  const Mesh mesh = build_slab_mesh(1, 1, 1, 1, 1, 1);
  EXPECT_EQ(apply_follower_pressure(mesh, DofState::reference(mesh, false).nodal, "zmax", 0.0),
            Eigen::VectorXd::Zero(24));
}

TEST(FollowerPressure, FlatFaceResultant) {
  const Mesh mesh = build_slab_mesh(1, 1, 1, 1, 1, 1);
  DofState s = homogeneous(mesh, Vec3d(1.3, 0.8, 1.1), 0, 0, false);
  const double P = 7.0;
  const Eigen::VectorXd f = apply_follower_pressure(mesh, s.nodal, "zmax", P);
  Vec3d total = Vec3d::Zero();
  for (int n = 0; n < mesh.node_count(); ++n) total += f.segment<3>(3 * n);
  EXPECT_NEAR(total(0), 0.0, 1e-14);
  EXPECT_NEAR(total(1), 0.0, 1e-14);
  EXPECT_NEAR(total(2), -P * 1.3 * 0.8, 1e-13);  // pushes into the body
}

TEST(FollowerPressure, ClosedSurfaceHasZeroResultant) {
  const Mesh mesh = build_slab_mesh(1, 1, 1, 1, 1, 1);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int trial = 0; trial < 20; ++trial) {
    DofState s = DofState::reference(mesh, false);
    for (int i = 0; i < s.nodal.size(); ++i) s.nodal(i) += u(rng);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(24);
    for (const char* set : {"xmin", "xmax", "ymin", "ymax", "zmin", "zmax"})
      f += apply_follower_pressure(mesh, s.nodal, set, 5.0);
    Vec3d total = Vec3d::Zero();
    for (int n = 0; n < 8; ++n) total += f.segment<3>(3 * n);
    EXPECT_LE(total.cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ReferenceTraction, Resultant) {
  const Mesh mesh = build_slab_mesh(2, 1, 0.5, 2, 1, 1);
  const Eigen::VectorXd f = apply_reference_traction(mesh, "xmax", Vec3d(3.0, 0.0, 0.0));
  double total = 0;
  for (int n = 0; n < mesh.node_count(); ++n) total += f(3 * n);
  EXPECT_NEAR(total, 3.0 * 0.5, 1e-14);
}

TEST(MixedSystem, PackUnpackRoundTrip) {
  const Specimen sp = Specimen::cylinder(0.2, 0.35, 2, 2, 1, 2, std::numbers::pi / 8);
  AssemblyInput in = input_for(sp.mesh, 0.3, true, true);
  const MixedSystem sys(in, sp.symmetry_conditions());
  const DofState ref = DofState::reference(sp.mesh, true);
  const Eigen::VectorXd x = sys.pack(ref);
  EXPECT_EQ(x.size(), sys.size());
  const DofState back = sys.unpack(x);
  EXPECT_EQ(back.nodal, ref.nodal);
  EXPECT_TRUE(sys.has_q());
  // one tie group for the top plate
  EXPECT_EQ(sys.size(), sys.free_nodal_count() + 1 + 2 * sp.mesh.element_count());
}

TEST(MixedSystem, ConstraintRowsAtConvergence) {
  const MaterialParams m;
  SolverConfig cfg;
  const Specimen slab = Specimen::slab(1, 1, 0.1, 2, 2, 1);
  const SolveReport a = solve_state_A(slab, m, 0.75, true, cfg);
  ASSERT_TRUE(a.converged);
  AssemblyInput in = input_for(slab.mesh, 0.75, true, true);
  const auto r = assemble_residual(in, a.state);
  EXPECT_LE(r.incompressibility.cwiseAbs().maxCoeff(), 1e-10);  // rows are already / V_e
  EXPECT_LE(r.constraint.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Kinematics, InvertedElementNamesElement) {
  const Mesh mesh = build_slab_mesh(1, 1, 1, 2, 1, 1);
  DofState s = DofState::reference(mesh, false);
  // push the shared face of element 1 past its far face
  for (int n : mesh.node_set("xmax")) s.nodal(3 * n) = 0.2;
  try {
    assemble_residual(input_for(mesh, 0.0, false, false), s);
    FAIL() << "expected InvertedElementError";
  } catch (const InvertedElementError& e) {
    EXPECT_EQ(e.element(), 1);
  }
}
