// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace tissuefe {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

/// Raised when a deformation gradient has non-positive determinant. Carries
/// the element id when raised from assembly (-1 otherwise).
class InvertedElementError : public std::runtime_error {
 public:
  explicit InvertedElementError(const std::string& what, int element = -1)
      : std::runtime_error(what), element_(element) {}
  int element() const { return element_; }

 private:
  int element_;
};

enum class ChartKind { cartesian, cylindrical };

/// World coordinate chart. Cylindrical points are (r, phi, z) with the axis
/// along z.
///
/// The locally orthonormal body frame X^I attached to each chart is fixed:
///  - cartesian:   X^1 = x, X^2 = y, X^3 = z
///  - cylindrical: X^1 = circumferential, X^2 = axial, X^3 = radial
/// so that X^1 is always the fiber direction and X^2 the collagen-strut
/// direction.
struct CoordinateChart {
  ChartKind kind = ChartKind::cartesian;

  static CoordinateChart cartesian() { return {ChartKind::cartesian}; }
  static CoordinateChart cylindrical() { return {ChartKind::cylindrical}; }
};

inline const char* to_string(ChartKind kind) {
  return kind == ChartKind::cartesian ? "cartesian" : "cylindrical";
}

namespace detail {
template <typename Scalar>
void require_positive_radius(const CoordinateChart& chart, const Vec3<Scalar>& point) {
  if (chart.kind == ChartKind::cylindrical && !(point(0) > Scalar(0)))
    throw std::domain_error("cylindrical chart evaluated at non-positive radius");
}
}  // namespace detail

template <typename Scalar>
struct Metric {
  Mat3<Scalar> covariant;
  Mat3<Scalar> contravariant;
  Vec3<Scalar> point;
};

/// World metric g_ab at a point of the chart.
template <typename Scalar>
Metric<Scalar> metric_at(const CoordinateChart& chart, const Vec3<Scalar>& point) {
  detail::require_positive_radius(chart, point);
  Metric<Scalar> m;
  m.point = point;
  m.covariant.setIdentity();
  m.contravariant.setIdentity();
  if (chart.kind == ChartKind::cylindrical) {
    const Scalar r = point(0);
    m.covariant(1, 1) = r * r;
    m.contravariant(1, 1) = Scalar(1) / (r * r);
  }
  return m;
}

/// Cartesian position of a chart point.
template <typename Scalar>
Vec3<Scalar> embedding(const CoordinateChart& chart, const Vec3<Scalar>& point) {
  if (chart.kind == ChartKind::cartesian) return point;
  using std::cos;
  using std::sin;
  return Vec3<Scalar>(point(0) * cos(point(1)), point(0) * sin(point(1)), point(2));
}

/// Covariant basis vectors g_a = dy/dtheta^a as the columns of a matrix.
template <typename Scalar>
Mat3<Scalar> covariant_basis(const CoordinateChart& chart, const Vec3<Scalar>& point) {
  if (chart.kind == ChartKind::cartesian) return Mat3<Scalar>::Identity();
  detail::require_positive_radius(chart, point);
  using std::cos;
  using std::sin;
  const Scalar r = point(0), c = cos(point(1)), s = sin(point(1));
  Mat3<Scalar> g;
  g << c, -r * s, Scalar(0),
       s, r * c, Scalar(0),
       Scalar(0), Scalar(0), Scalar(1);
  return g;
}

/// Christoffel symbols of the second kind, gamma[b](a, c) = Gamma^b_{ac}, so
/// that dg_a/dtheta^c . g^b = Gamma^b_{ac}.
template <typename Scalar>
using Christoffel = std::array<Mat3<Scalar>, 3>;

/// Correction coefficients of the covariant derivative
///   nabla_I(du_a) = d(du_a)/dX^I - g_{a,I} . g^b du_b
/// with g_{a,I} . g^b = Gamma^b_{ac} Phi_I^c. Returned as the Christoffel
/// symbols; the assembly contracts them with the deformation gradient.
/// All zero for the Cartesian chart.
template <typename Scalar>
Christoffel<Scalar> covariant_gradient_coefficients(const CoordinateChart& chart,
                                                    const Vec3<Scalar>& point) {
  Christoffel<Scalar> gamma;
  for (auto& m : gamma) m.setZero();
  if (chart.kind == ChartKind::cylindrical) {
    detail::require_positive_radius(chart, point);
    const Scalar r = point(0);
    gamma[0](1, 1) = -r;                // Gamma^r_{phi phi}
    gamma[1](0, 1) = Scalar(1) / r;     // Gamma^phi_{r phi}
    gamma[1](1, 0) = Scalar(1) / r;     // Gamma^phi_{phi r}
  }
  return gamma;
}

/// Linear map from reference world increments dTheta to body-frame
/// increments dX at a reference point: dX = Q dTheta.
template <typename Scalar>
Mat3<Scalar> body_frame_map(const CoordinateChart& chart, const Vec3<Scalar>& reference_point) {
  if (chart.kind == ChartKind::cartesian) return Mat3<Scalar>::Identity();
  detail::require_positive_radius(chart, reference_point);
  Mat3<Scalar> q = Mat3<Scalar>::Zero();
  q(0, 1) = reference_point(0);  // X^1 = R dPhi
  q(1, 2) = Scalar(1);           // X^2 = dZ
  q(2, 0) = Scalar(1);           // X^3 = dR
  return q;
}

/// Unit Cartesian directions of the body frame (columns X^1, X^2, X^3) at a
/// reference point.
template <typename Scalar>
Mat3<Scalar> body_frame_directions(const CoordinateChart& chart,
                                   const Vec3<Scalar>& reference_point) {
  if (chart.kind == ChartKind::cartesian) return Mat3<Scalar>::Identity();
  using std::cos;
  using std::sin;
  const Scalar c = cos(reference_point(1)), s = sin(reference_point(1));
  Mat3<Scalar> d;
  d << -s, Scalar(0), c,
        c, Scalar(0), s,
        Scalar(0), Scalar(1), Scalar(0);
  return d;
}

/// Mixed-basis deformation gradient components Phi(a, I) = dtheta^a / dX^I.
template <typename Scalar>
struct DeformationGradient {
  Mat3<Scalar> components;
};

template <typename Scalar>
DeformationGradient<Scalar> deformation_gradient(const Mat3<Scalar>& dtheta_dX) {
  return {dtheta_dX};
}

template <typename Scalar>
struct KinematicState {
  Mat3<Scalar> phi;    // dtheta^a / dX^I
  Mat3<Scalar> C;      // right Cauchy-Green in the body frame
  Mat3<Scalar> C_inv;  // g^(x)IJ
  Mat3<Scalar> E;      // Green strain
  Scalar I1, I3, I4, I6;
};

/// C = Phi^T g(theta) Phi in the orthonormal body frame.
template <typename Scalar>
KinematicState<Scalar> strain_state(const DeformationGradient<Scalar>& grad,
                                    const CoordinateChart& chart,
                                    const Vec3<Scalar>& deformed_point) {
  if (!(grad.components.determinant() > Scalar(0)))
    throw InvertedElementError("deformation gradient with non-positive determinant");
  const Metric<Scalar> g = metric_at(chart, deformed_point);
  KinematicState<Scalar> k;
  k.phi = grad.components;
  k.C = grad.components.transpose() * g.covariant * grad.components;
  k.C = Scalar(0.5) * (k.C + k.C.transpose());
  k.E = Scalar(0.5) * (k.C - Mat3<Scalar>::Identity());
  k.C_inv = k.C.inverse();
  k.I1 = k.C.trace();
  k.I3 = k.C.determinant();
  k.I4 = k.C(0, 0);
  k.I6 = k.C(1, 1);
  return k;
}

}  // namespace tissuefe
