// SPDX-License-Identifier: Apache-2.0

#include "tissuefe/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace tissuefe {

namespace {

struct GridBuilder {
  int n0, n1, n2;
  int node(int i, int j, int k) const { return i + (n0 + 1) * (j + (n1 + 1) * k); }
  int element(int i, int j, int k) const { return i + n0 * (j + n1 * k); }
};

Mesh build_grid(const CoordinateChart& chart, const std::array<double, 3>& lo,
                const std::array<double, 3>& hi, const std::array<int, 3>& n,
                const std::array<std::string, 6>& labels) {
  for (int d = 0; d < 3; ++d) {
    if (n[d] < 1) throw std::invalid_argument("mesh divisions must be positive");
    if (!(hi[d] > lo[d])) throw std::invalid_argument("mesh extents must be positive");
  }
  const GridBuilder g{n[0], n[1], n[2]};
  Mesh mesh;
  mesh.chart = chart;
  mesh.nodes.reserve((n[0] + 1) * (n[1] + 1) * (n[2] + 1));
  for (int k = 0; k <= n[2]; ++k)
    for (int j = 0; j <= n[1]; ++j)
      for (int i = 0; i <= n[0]; ++i) {
        const int idx[3] = {i, j, k};
        Vec3d x;
        for (int d = 0; d < 3; ++d)
          x(d) = idx[d] == n[d] ? hi[d] : lo[d] + (hi[d] - lo[d]) * idx[d] / n[d];
        mesh.nodes.push_back(x);
      }
  for (const auto& l : labels) mesh.face_sets[l];
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        std::array<int, kNodesPerElement> conn{};
        for (int c = 0; c < kNodesPerElement; ++c)
          conn[c] = g.node(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
        const int e = static_cast<int>(mesh.elements.size());
        mesh.elements.push_back(conn);
        const int idx[3] = {i, j, k};
        for (int d = 0; d < 3; ++d) {
          if (idx[d] == 0) mesh.face_sets[labels[2 * d]].push_back({e, 2 * d});
          if (idx[d] == n[d] - 1) mesh.face_sets[labels[2 * d + 1]].push_back({e, 2 * d + 1});
        }
      }
  return mesh;
}

struct ReferenceJacobian {
  Mat3d dX_dxi;
  double det;
};

ReferenceJacobian reference_jacobian(const Mesh& mesh, int element, const ShapeValues& sv) {
  Vec3d Theta = Vec3d::Zero();
  Mat3d dTheta = Mat3d::Zero();
  for (int n = 0; n < kNodesPerElement; ++n) {
    const Vec3d& X = mesh.nodes[mesh.elements[element][n]];
    Theta += sv.N(n) * X;
    dTheta += X * sv.dN.row(n);
  }
  ReferenceJacobian r;
  r.dX_dxi = body_frame_map(mesh.chart, Theta) * dTheta;
  r.det = r.dX_dxi.determinant();
  return r;
}

}  // namespace

const std::vector<FaceRef>& Mesh::faces(const std::string& label) const {
  auto it = face_sets.find(label);
  if (it == face_sets.end()) throw std::invalid_argument("unknown face set '" + label + "'");
  return it->second;
}

std::vector<int> Mesh::node_set(const std::string& label) const {
  std::vector<int> ids;
  for (const FaceRef& f : faces(label))
    for (int local : face_nodes(f.local_face)) ids.push_back(elements[f.element][local]);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

void Mesh::validate() const {
  const int nn = node_count();
  for (const auto& conn : elements)
    for (int id : conn)
      if (id < 0 || id >= nn) throw std::invalid_argument("element connectivity out of range");
  for (const auto& [label, fs] : face_sets)
    for (const FaceRef& f : fs)
      if (f.element < 0 || f.element >= element_count() || f.local_face < 0 || f.local_face > 5)
        throw std::invalid_argument("face set '" + label + "' references a missing element");
  for (int e = 0; e < element_count(); ++e)
    for (const auto& qp : gauss_rule())
      if (!(reference_jacobian(*this, e, shape_eval(qp.xi)).det > 0.0))
        throw std::invalid_argument("element " + std::to_string(e) +
                                    " has non-positive reference volume");
}

Mesh build_slab_mesh(double Lx, double Ly, double Lz, int nx, int ny, int nz) {
  return build_grid(CoordinateChart::cartesian(), {0.0, 0.0, 0.0}, {Lx, Ly, Lz}, {nx, ny, nz},
                    {"xmin", "xmax", "ymin", "ymax", "zmin", "zmax"});
}

Mesh build_cylinder_mesh(double R_int, double R_ext, double L, int nr, int nphi, int nz,
                         double sector_angle) {
  if (!(R_int > 0.0 && R_ext > R_int)) throw std::invalid_argument("require 0 < R_int < R_ext");
  if (!(sector_angle > 0.0 && sector_angle <= 2.0 * std::numbers::pi))
    throw std::invalid_argument("sector angle must lie in (0, 2 pi]");
  if (!(L > 0.0)) throw std::invalid_argument("cylinder length must be positive");
  return build_grid(CoordinateChart::cylindrical(), {R_int, 0.0, 0.0}, {R_ext, sector_angle, L},
                    {nr, nphi, nz}, {"inner", "outer", "phi0", "phi1", "bottom", "top"});
}

ShapeValues shape_eval(const Vec3d& xi) {
  ShapeValues sv;
  for (int n = 0; n < kNodesPerElement; ++n) {
    double f[3], df[3];
    for (int d = 0; d < 3; ++d) {
      const bool hi = (n >> d) & 1;
      f[d] = hi ? xi(d) : 1.0 - xi(d);
      df[d] = hi ? 1.0 : -1.0;
    }
    sv.N(n) = f[0] * f[1] * f[2];
    sv.dN(n, 0) = df[0] * f[1] * f[2];
    sv.dN(n, 1) = f[0] * df[1] * f[2];
    sv.dN(n, 2) = f[0] * f[1] * df[2];
  }
  return sv;
}

namespace {
constexpr double kGaussLo = 0.5 - 0.5 / std::numbers::sqrt3;
constexpr double kGaussHi = 0.5 + 0.5 / std::numbers::sqrt3;
}  // namespace

const std::array<QuadraturePoint, kQuadraturePoints>& gauss_rule() {
  static const std::array<QuadraturePoint, kQuadraturePoints> rule = [] {
    std::array<QuadraturePoint, kQuadraturePoints> r{};
    const double pts[2] = {kGaussLo, kGaussHi};
    for (int q = 0; q < kQuadraturePoints; ++q)
      r[q] = {Vec3d(pts[q & 1], pts[(q >> 1) & 1], pts[(q >> 2) & 1]), 0.125};
    return r;
  }();
  return rule;
}

std::array<QuadraturePoint, 4> face_gauss_rule(int local_face) {
  const int axis = local_face / 2;
  const double side = local_face % 2;
  const int a = (axis + 1) % 3, b = (axis + 2) % 3;
  const double pts[2] = {kGaussLo, kGaussHi};
  std::array<QuadraturePoint, 4> r{};
  for (int q = 0; q < 4; ++q) {
    Vec3d xi;
    xi(axis) = side;
    xi(a) = pts[q & 1];
    xi(b) = pts[(q >> 1) & 1];
    r[q] = {xi, 0.25};
  }
  return r;
}

std::array<int, 4> face_nodes(int local_face) {
  const int axis = local_face / 2, side = local_face % 2;
  std::array<int, 4> ids{};
  int c = 0;
  for (int n = 0; n < kNodesPerElement; ++n)
    if (((n >> axis) & 1) == side) ids[c++] = n;
  return ids;
}

double element_reference_volume(const Mesh& mesh, int element) {
  double v = 0.0;
  for (const auto& qp : gauss_rule())
    v += qp.weight * reference_jacobian(mesh, element, shape_eval(qp.xi)).det;
  return v;
}

double mesh_reference_volume(const Mesh& mesh) {
  double v = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) v += element_reference_volume(mesh, e);
  return v;
}

double face_set_reference_area(const Mesh& mesh, const std::string& label) {
  double area = 0.0;
  for (const FaceRef& f : mesh.faces(label)) {
    const int axis = f.local_face / 2;
    const int a = (axis + 1) % 3, b = (axis + 2) % 3;
    for (const auto& qp : face_gauss_rule(f.local_face)) {
      const ShapeValues sv = shape_eval(qp.xi);
      Vec3d Theta = Vec3d::Zero();
      Mat3d dTheta = Mat3d::Zero();
      for (int n = 0; n < kNodesPerElement; ++n) {
        const Vec3d& X = mesh.nodes[mesh.elements[f.element][n]];
        Theta += sv.N(n) * X;
        dTheta += X * sv.dN.row(n);
      }
      const Mat3d dy = covariant_basis(mesh.chart, Theta) * dTheta;
      area += qp.weight * dy.col(a).cross(dy.col(b)).norm();
    }
  }
  return area;
}

std::string mesh_to_json(const Mesh& mesh, int indent) {
  nlohmann::json j;
  j["chart"] = to_string(mesh.chart.kind);
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (const Vec3d& x : mesh.nodes) nodes.push_back({x(0), x(1), x(2)});
  auto& elems = j["elements"] = nlohmann::json::array();
  for (const auto& conn : mesh.elements) elems.push_back(conn);
  auto& fs = j["face_sets"] = nlohmann::json::object();
  for (const auto& [label, faces] : mesh.face_sets) {
    auto& arr = fs[label] = nlohmann::json::array();
    for (const FaceRef& f : faces) arr.push_back({f.element, f.local_face});
  }
  return j.dump(indent);
}

}  // namespace tissuefe
