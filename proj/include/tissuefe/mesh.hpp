// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tissuefe/tensor.hpp"

namespace tissuefe {

using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;

/// Local corner numbering: node n sits at xi = (n & 1, (n >> 1) & 1, (n >> 2) & 1)
/// of the unit cube.
inline constexpr int kNodesPerElement = 8;
inline constexpr int kQuadraturePoints = 8;

/// Local face f lies on xi_(f / 2) = f % 2.
struct FaceRef {
  int element;
  int local_face;
};

struct Mesh {
  CoordinateChart chart;
  std::vector<Vec3d> nodes;  // reference world coordinates Theta^A
  std::vector<std::array<int, kNodesPerElement>> elements;
  std::map<std::string, std::vector<FaceRef>> face_sets;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int element_count() const { return static_cast<int>(elements.size()); }

  const std::vector<FaceRef>& faces(const std::string& label) const;
  /// Sorted, unique node ids touching the face set.
  std::vector<int> node_set(const std::string& label) const;
  /// Checks connectivity ranges, face references and positive reference
  /// Jacobians at every quadrature point. Throws std::invalid_argument.
  void validate() const;
};

/// Box [0,Lx] x [0,Ly] x [0,Lz] (cm), fiber along x. Face sets
/// xmin/xmax/ymin/ymax/zmin/zmax.
Mesh build_slab_mesh(double Lx, double Ly, double Lz, int nx, int ny, int nz);

/// Thick-walled cylinder sector in (R, Phi, Z): R in [R_int, R_ext],
/// Phi in [0, sector_angle], Z in [0, L]. Element axes xi = (R, Phi, Z).
/// Face sets inner/outer/phi0/phi1/bottom/top. A full 2*pi sector keeps the
/// seam nodes distinct.
Mesh build_cylinder_mesh(double R_int, double R_ext, double L, int nr, int nphi, int nz,
                         double sector_angle);

struct ShapeValues {
  Eigen::Matrix<double, kNodesPerElement, 1> N;
  Eigen::Matrix<double, kNodesPerElement, 3> dN;  // dN_n / dxi_K
};

/// Trilinear shape functions on the unit cube.
ShapeValues shape_eval(const Vec3d& xi);

struct QuadraturePoint {
  Vec3d xi;
  double weight;
};

/// 2x2x2 Gauss rule on [0,1]^3 (weights sum to 1).
const std::array<QuadraturePoint, kQuadraturePoints>& gauss_rule();

/// 2x2 Gauss rule on the unit square, embedded on local face f.
std::array<QuadraturePoint, 4> face_gauss_rule(int local_face);

/// Local node ids of face f (4 nodes).
std::array<int, 4> face_nodes(int local_face);

/// Reference volume of one element by quadrature.
double element_reference_volume(const Mesh& mesh, int element);
double mesh_reference_volume(const Mesh& mesh);

/// Reference (undeformed) area of a face set by quadrature.
double face_set_reference_area(const Mesh& mesh, const std::string& label);

/// JSON export: {"chart", "nodes": [[..]], "elements": [[8 ids]],
/// "face_sets": {label: [[element, local_face], ...]}}.
std::string mesh_to_json(const Mesh& mesh, int indent = 2);

}  // namespace tissuefe
