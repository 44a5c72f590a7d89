// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "tissuefe/tensor.hpp"

namespace tissuefe {

/// Material constants of the Lin-Yin type law (kPa where dimensional), the
/// maximal beating tension and the collagen geometry ratio a/D.
struct MaterialParams {
  double C1p = 0.292;  // kPa
  double C2p = 0.321;
  double C3p = -0.260;
  double C4p = 0.201;
  double C1a = -3.870;  // kPa
  double C2a = 4.830;   // kPa
  double C3a = 2.512;   // kPa
  double C4a = 0.951;   // kPa
  double T0 = 35.0;     // kPa
  double aOverD = 0.2;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const {
    const double all[] = {C1p, C2p, C3p, C4p, C1a, C2a, C3a, C4a, T0, aOverD};
    for (double v : all)
      if (!std::isfinite(v)) throw std::invalid_argument("material parameter is not finite");
    if (!(C1p > 0.0)) throw std::invalid_argument("C1p must be positive");
    if (!(aOverD > 0.0 && aOverD < 0.25))
      throw std::invalid_argument("aOverD must lie in (0, 0.25) since D = 4a + d");
  }
};

struct ActivationState {
  double beta = 0.0;
  bool free_contraction = false;  // delta_AH: true when solving state A

  void validate() const {
    if (!(beta >= 0.0 && beta <= 1.0))
      throw std::invalid_argument("activation beta must lie in [0, 1]");
  }
};

template <typename Scalar>
struct MultiplierPair {
  Scalar p = Scalar(0);  // incompressibility pressure, kPa
  Scalar q = Scalar(0);  // collagen coupling multiplier, kPa
};

template <typename Scalar>
struct PseudoActiveTensions {
  Scalar fiber = Scalar(0);        // T_f, kPa
  Scalar cross_fiber = Scalar(0);  // T_cf, kPa
};

/// Raised when the exponent of the passive law would overflow.
class ConstitutiveOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMaxExponent = 700.0;

namespace detail {
template <typename Scalar>
void require_positive_invariants(const Scalar& I4, const Scalar& I6) {
  if (!(I4 > Scalar(0)) || !(I6 > Scalar(0)))
    throw std::domain_error("fiber invariants must be positive");
}

inline constexpr double kPiMinus2 = std::numbers::pi - 2.0;
}  // namespace detail

/// Collagen coupling h(I4, I6) = 1 - sqrt(I6) + (pi - 2)(1 - I4^(-1/4)) a/D.
template <typename Scalar>
Scalar constraint_h(const Scalar& I4, const Scalar& I6, double aOverD) {
  using std::pow;
  using std::sqrt;
  detail::require_positive_invariants(I4, I6);
  return Scalar(1) - sqrt(I6) + detail::kPiMinus2 * (Scalar(1) - pow(I4, Scalar(-0.25))) * aOverD;
}

template <typename Scalar>
Scalar passive_exponent(const Scalar& I1, const Scalar& I4, const MaterialParams& m) {
  const Scalar a = I1 - Scalar(3), b = I4 - Scalar(1);
  return m.C2p * a * a + m.C3p * a * b + m.C4p * b * b;
}

namespace detail {
template <typename Scalar>
Scalar guarded_exp(const Scalar& Q) {
  using std::exp;
  if (!(Q <= Scalar(kMaxExponent)))
    throw ConstitutiveOverflow("passive exponent Q exceeds " + std::to_string(kMaxExponent));
  return exp(Q);
}
}  // namespace detail

/// W_pas = C1p (e^Q - 1).
template <typename Scalar>
Scalar passive_energy(const Scalar& I1, const Scalar& I4, const MaterialParams& m) {
  return m.C1p * (detail::guarded_exp(passive_exponent(I1, I4, m)) - Scalar(1));
}

/// Active law without the beating term.
template <typename Scalar>
Scalar active_energy(const Scalar& I1, const Scalar& I4, const MaterialParams& m) {
  const Scalar a = I1 - Scalar(3), b = I4 - Scalar(1);
  return m.C1a * a * b + m.C2a * a * a + m.C3a * b * b + m.C4a * a;
}

template <typename Scalar>
struct EnergyDerivatives {
  Scalar W1;  // dW*/dI1
  Scalar W4;  // dW*/dI4
  Scalar h4;  // dh/dI4
  Scalar h6;  // dh/dI6
};

/// Derivatives of W* = W_pas + beta W_act and of the constraint h. The
/// coupling energy -q h / 2 is not folded into W1/W4; it reaches the stress
/// through the explicit q h4, q h6 terms of the state-A law.
template <typename Scalar>
EnergyDerivatives<Scalar> energy_derivatives(const Scalar& I1, const Scalar& I4, const Scalar& I6,
                                             double beta, const MaterialParams& m) {
  using std::pow;
  using std::sqrt;
  detail::require_positive_invariants(I4, I6);
  const Scalar a = I1 - Scalar(3), b = I4 - Scalar(1);
  const Scalar eQ = m.C1p * detail::guarded_exp(passive_exponent(I1, I4, m));
  EnergyDerivatives<Scalar> d;
  d.W1 = eQ * (Scalar(2 * m.C2p) * a + m.C3p * b) +
         beta * (m.C1a * b + Scalar(2 * m.C2a) * a + m.C4a);
  d.W4 = eQ * (m.C3p * a + Scalar(2 * m.C4p) * b) + beta * (m.C1a * a + Scalar(2 * m.C3a) * b);
  d.h4 = Scalar(0.25 * detail::kPiMinus2 * m.aOverD) * pow(I4, Scalar(-1.25));
  d.h6 = Scalar(-0.5) / sqrt(I6);
  return d;
}

/// T_f = -q h4 I4 and T_cf = -q h6 I6 (twice dW_pseudo/dI_i times the squared
/// stretch, with W_pseudo = -q h / 2).
template <typename Scalar>
PseudoActiveTensions<Scalar> pseudo_active_tensions(const Scalar& q, const Scalar& I4,
                                                    const Scalar& I6, double aOverD) {
  using std::pow;
  using std::sqrt;
  detail::require_positive_invariants(I4, I6);
  PseudoActiveTensions<Scalar> t;
  t.fiber = -q * Scalar(0.25 * detail::kPiMinus2 * aOverD) * pow(I4, Scalar(-0.25));
  t.cross_fiber = Scalar(0.5) * q * sqrt(I6);
  return t;
}

/// Second Piola-Kirchhoff components P^IJ in the body frame for the free
/// contraction state A.
template <typename Scalar>
Mat3<Scalar> pk2_state_A(const KinematicState<Scalar>& k, const MultiplierPair<Scalar>& mult,
                         double beta, const MaterialParams& m) {
  const auto d = energy_derivatives(k.I1, k.I4, k.I6, beta, m);
  Mat3<Scalar> P = -mult.p * k.C_inv;
  P.diagonal().array() += Scalar(2) * d.W1;
  P(0, 0) += Scalar(2) * d.W4 - mult.q * d.h4 + Scalar(beta * m.T0) / k.C(0, 0);
  P(1, 1) -= mult.q * d.h6;
  return P;
}

/// PK2 components for the loaded state C, with the coupling tensions frozen
/// from state A acting along the deformed fiber and cross-fiber directions.
template <typename Scalar>
Mat3<Scalar> pk2_state_C(const KinematicState<Scalar>& k, const Scalar& p, double beta,
                         const PseudoActiveTensions<Scalar>& t, const MaterialParams& m) {
  const auto d = energy_derivatives(k.I1, k.I4, k.I6, beta, m);
  Mat3<Scalar> P = -p * k.C_inv;
  P.diagonal().array() += Scalar(2) * d.W1;
  P(0, 0) += Scalar(2) * d.W4 + (Scalar(beta * m.T0) + t.fiber) / k.C(0, 0);
  P(1, 1) += t.cross_fiber / k.C(1, 1);
  return P;
}

/// Contravariant Cauchy components tau^ab = Phi P Phi^T in the deformed
/// world basis (incompressible push-forward).
template <typename Scalar>
Mat3<Scalar> cauchy_from_pk2(const Mat3<Scalar>& phi, const Mat3<Scalar>& P) {
  if (phi.determinant() == Scalar(0))
    throw InvertedElementError("singular deformation gradient in push-forward");
  return phi * P * phi.transpose();
}

/// Inverse of cauchy_from_pk2.
template <typename Scalar>
Mat3<Scalar> pk2_from_cauchy(const Mat3<Scalar>& phi, const Mat3<Scalar>& tau) {
  const Mat3<Scalar> inv = phi.inverse();
  return inv * tau * inv.transpose();
}

/// Cauchy stress projected on the unit deformed body-frame directions
/// n_I = g_I / |g_I|: sigma_<IJ> = n_I . tau . n_J = (C P C)_IJ / sqrt(C_II C_JJ).
/// Entry (0,0) is the fiber stress, (1,1) the cross-fiber stress.
template <typename Scalar>
Mat3<Scalar> physical_cauchy(const KinematicState<Scalar>& k, const Mat3<Scalar>& P) {
  using std::sqrt;
  const Mat3<Scalar> cpc = k.C * P * k.C;
  Mat3<Scalar> s;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s(i, j) = cpc(i, j) / sqrt(k.C(i, i) * k.C(j, j));
  return s;
}

}  // namespace tissuefe
