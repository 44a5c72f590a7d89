// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "tissuefe/constitutive.hpp"

using namespace tissuefe;
using M3 = Mat3<double>;
using V3 = Vec3<double>;

namespace {

const MaterialParams kLinYin{};

KinematicState<double> kin(const M3& phi) {
  return strain_state(deformation_gradient(phi), CoordinateChart::cartesian(), V3(V3::Zero()));
}

KinematicState<double> kin_from_C(const M3& C) {
  // any F with F^T F = C
  Eigen::LLT<M3> llt(C);
  return kin(M3(llt.matrixU()));
}

// Energy whose derivative 2 dPsi/dC is the state-A stress law at given p, q.
double total_energy(const M3& C, double beta, double p, double q, const MaterialParams& m) {
  const double I1 = C.trace(), I4 = C(0, 0), I6 = C(1, 1), I3 = C.determinant();
  return passive_energy(I1, I4, m) + beta * active_energy(I1, I4, m) +
         0.5 * beta * m.T0 * std::log(I4) - 0.5 * q * constraint_h(I4, I6, m.aOverD) -
         0.5 * p * (I3 - 1.0);
}

M3 random_isochoric_C(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  M3 F;
  do {
    F = M3::Identity();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) F(i, j) += u(rng);
  } while (F.determinant() < 0.3);
  F /= std::cbrt(F.determinant());
  return F.transpose() * F;
}

}  // namespace

TEST(MaterialParams, Validation) {
  EXPECT_NO_THROW(kLinYin.validate());
  MaterialParams m;
  m.C1p = 0.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = {};
  m.aOverD = 0.25;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = {};
  m.T0 = std::nan("");
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(ConstraintH, ReferenceSatisfiesConstraint) {
  for (double aD : {0.05, 0.1, 0.2}) EXPECT_EQ(constraint_h(1.0, 1.0, aD), 0.0);
}

TEST(ConstraintH, CrossFiberOnly) { EXPECT_NEAR(constraint_h(1.0, 1.21, 0.2), -0.1, 1e-15); }

TEST(ConstraintH, FiberOnly) {
  EXPECT_NEAR(constraint_h(16.0, 1.0, 0.2), (std::numbers::pi - 2.0) * 0.5 * 0.2, 1e-15);
  EXPECT_NEAR(constraint_h(16.0, 1.0, 0.2), 0.11416, 1e-5);
}

TEST(ConstraintH, Monotonicity) {
  // dh/dlambda_cf = -1, dh/dlambda_f > 0
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> l(0.3, 2.5);
  for (int n = 0; n < 200; ++n) {
    const double lf = l(rng), lcf = l(rng), e = 1e-6;
    const auto h = [&](double a, double b) { return constraint_h(a * a, b * b, 0.2); };
    EXPECT_NEAR((h(lf, lcf + e) - h(lf, lcf - e)) / (2 * e), -1.0, 1e-8);
    EXPECT_GT(h(lf + e, lcf) - h(lf - e, lcf), 0.0);
  }
}

TEST(PassiveEnergy, Reference) { EXPECT_EQ(passive_energy(3.0, 1.0, kLinYin), 0.0); }

TEST(PassiveEnergy, EquibiaxialValue) {
  const double a = 0.36225, b = 0.44;
  const double Q = 0.321 * a * a - 0.260 * a * b + 0.201 * b * b;
  const double expect = 0.292 * std::expm1(Q);
  EXPECT_NEAR(passive_energy(3.36225, 1.44, kLinYin), expect, 1e-15);
  EXPECT_NEAR(passive_energy(3.36225, 1.44, kLinYin), 0.0118, 5e-5);
}

TEST(PassiveEnergy, ExponentMatchesExpandedPolynomial) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(2.5, 4.0), v(0.5, 2.0);
  for (int n = 0; n < 100; ++n) {
    const double I1 = u(rng), I4 = v(rng);
    const double expanded = 0.321 * (I1 * I1 - 6 * I1 + 9) - 0.260 * (I1 * I4 - I1 - 3 * I4 + 3) +
                            0.201 * (I4 * I4 - 2 * I4 + 1);
    EXPECT_NEAR(passive_exponent(I1, I4, kLinYin), expanded, 1e-14);
  }
}

TEST(PassiveEnergy, OverflowGuard) {
  EXPECT_THROW(passive_energy(60.0, 1.0, kLinYin), ConstitutiveOverflow);
}

TEST(ActiveEnergy, Reference) { EXPECT_EQ(active_energy(3.0, 1.0, kLinYin), 0.0); }

TEST(ActiveEnergy, EquibiaxialValue) {
  const double a = 0.36225, b = 0.44;
  const double expect = -3.870 * a * b + 4.830 * a * a + 2.512 * b * b + 0.951 * a;
  EXPECT_NEAR(active_energy(3.36225, 1.44, kLinYin), expect, 1e-14);
  EXPECT_NEAR(active_energy(3.36225, 1.44, kLinYin), 0.848, 5e-4);
}

TEST(ActiveEnergy, LinearInCoefficients) {
  MaterialParams twice = kLinYin;
  twice.C1a *= 2;
  twice.C2a *= 2;
  twice.C3a *= 2;
  twice.C4a *= 2;
  EXPECT_NEAR(active_energy(3.2, 0.8, twice), 2.0 * active_energy(3.2, 0.8, kLinYin), 1e-14);
}

TEST(EnergyDerivatives, ReferencePassive) {
  const auto d = energy_derivatives(3.0, 1.0, 1.0, 0.0, kLinYin);
  EXPECT_EQ(d.W1, 0.0);
  EXPECT_EQ(d.W4, 0.0);
}

TEST(EnergyDerivatives, ReferenceActive) {
  const auto d = energy_derivatives(3.0, 1.0, 1.0, 1.0, kLinYin);
  EXPECT_NEAR(d.W1, 0.951, 1e-15);
  EXPECT_EQ(d.W4, 0.0);
}

TEST(EnergyDerivatives, H6Value) { EXPECT_EQ(energy_derivatives(3.0, 1.0, 4.0, 0.0, kLinYin).h6, -0.25); }

TEST(EnergyDerivatives, MatchCentralDifferences) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> I1d(3.0, 4.5), I4d(0.4, 2.0), I6d(0.4, 2.5), bd(0, 1);
  for (int n = 0; n < 200; ++n) {
    const double I1 = I1d(rng), I4 = I4d(rng), I6 = I6d(rng), beta = bd(rng), e = 1e-6;
    const auto W = [&](double a, double b) {
      return passive_energy(a, b, kLinYin) + beta * active_energy(a, b, kLinYin);
    };
    const auto d = energy_derivatives(I1, I4, I6, beta, kLinYin);
    const double W1 = (W(I1 + e, I4) - W(I1 - e, I4)) / (2 * e);
    const double W4 = (W(I1, I4 + e) - W(I1, I4 - e)) / (2 * e);
    EXPECT_NEAR(d.W1, W1, 1e-6 * std::max(1.0, std::abs(W1)));
    EXPECT_NEAR(d.W4, W4, 1e-6 * std::max(1.0, std::abs(W4)));
    const double h4 = (constraint_h(I4 + e, I6, 0.2) - constraint_h(I4 - e, I6, 0.2)) / (2 * e);
    const double h6 = (constraint_h(I4, I6 + e, 0.2) - constraint_h(I4, I6 - e, 0.2)) / (2 * e);
    EXPECT_NEAR(d.h4, h4, 1e-8 * std::abs(h4));
    EXPECT_NEAR(d.h6, h6, 1e-8 * std::abs(h6));
  }
}

TEST(PseudoActiveTensions, ZeroMultiplier) {
  const auto t = pseudo_active_tensions(0.0, 1.3, 0.8, 0.2);
  EXPECT_EQ(t.fiber, 0.0);
  EXPECT_EQ(t.cross_fiber, 0.0);
}

TEST(PseudoActiveTensions, ReferenceValues) {
  const auto t = pseudo_active_tensions(2.0, 1.0, 1.0, 0.2);
  EXPECT_NEAR(t.cross_fiber, 1.0, 1e-15);
  EXPECT_NEAR(t.fiber, -2.0 * (std::numbers::pi - 2.0) * 0.05, 1e-15);
  EXPECT_NEAR(t.fiber, -0.11416, 1e-5);
}

TEST(PseudoActiveTensions, LinearInMultiplier) {
  const auto a = pseudo_active_tensions(1.5, 0.7, 1.9, 0.15);
  const auto b = pseudo_active_tensions(4.5, 0.7, 1.9, 0.15);
  EXPECT_NEAR(b.cross_fiber, 3.0 * a.cross_fiber, 1e-14);
  EXPECT_NEAR(b.fiber, 3.0 * a.fiber, 1e-14);
}

TEST(PseudoActiveTensions, EqualMinusQTimesDerivativeTimesInvariant) {
  const double q = 3.1, I4 = 0.6, I6 = 1.7;
  const auto d = energy_derivatives(3.0, I4, I6, 0.0, kLinYin);
  const auto t = pseudo_active_tensions(q, I4, I6, kLinYin.aOverD);
  EXPECT_NEAR(t.fiber, -q * d.h4 * I4, 1e-14);
  EXPECT_NEAR(t.cross_fiber, -q * d.h6 * I6, 1e-14);
}

TEST(StateA, ReferenceNeutral) {
  const M3 P = pk2_state_A(kin(M3::Identity()), MultiplierPair<double>{}, 0.0, kLinYin);
  EXPECT_EQ(P, M3::Zero());
}

TEST(StateA, ReferenceActiveFiberStress) {
  const M3 P = pk2_state_A(kin(M3::Identity()), MultiplierPair<double>{}, 1.0, kLinYin);
  EXPECT_NEAR(P(0, 0), 2 * 0.951 + 35.0, 1e-13);
  EXPECT_NEAR(P(1, 1), 2 * 0.951, 1e-13);
}

TEST(StateA, MultiplierEntersCrossFiber) {
  const M3 phi = V3(0.8, 1.2, 1.0 / 0.96).asDiagonal();
  const auto k = kin(phi);
  const double q = 2.7;
  const M3 a = pk2_state_A(k, MultiplierPair<double>{0.4, 0.0}, 0.6, kLinYin);
  const M3 b = pk2_state_A(k, MultiplierPair<double>{0.4, q}, 0.6, kLinYin);
  const double h6 = energy_derivatives(k.I1, k.I4, k.I6, 0.6, kLinYin).h6;
  EXPECT_NEAR(b(1, 1) - a(1, 1), -q * h6, 1e-14);
  EXPECT_EQ(b(2, 2), a(2, 2));
}

TEST(StateA, GradientMatchesEnergyDifferences) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> bd(0, 1), pd(-5, 5);
  for (int n = 0; n < 200; ++n) {
    const M3 C = random_isochoric_C(rng);
    const double beta = bd(rng), p = pd(rng), q = pd(rng);
    const M3 P = pk2_state_A(kin_from_C(C), MultiplierPair<double>{p, q}, beta, kLinYin);
    const double e = 1e-6;
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        M3 dE = M3::Zero();
        dE(i, j) = dE(j, i) = e;  // dC = 2 dE
        const double dW = (total_energy(C + 2 * dE, beta, p, q, kLinYin) -
                           total_energy(C - 2 * dE, beta, p, q, kLinYin)) /
                          (2 * e);
        const double S = i == j ? P(i, i) : 2.0 * P(i, j);
        EXPECT_NEAR(S, dW, 1e-6 * std::max(1.0, std::abs(dW))) << i << j;
      }
  }
}

TEST(StateC, ReferenceNeutral) {
  const M3 P = pk2_state_C(kin(M3::Identity()), 0.0, 0.0, PseudoActiveTensions<double>{}, kLinYin);
  EXPECT_EQ(P, M3::Zero());
}

TEST(StateC, TensionDifference) {
  const PseudoActiveTensions<double> t{-0.7, 3.3};
  const auto k = kin(M3::Identity());
  const double beta = 1.0;
  const auto d = energy_derivatives(3.0, 1.0, 1.0, beta, kLinYin);
  const double p = 2.0 * d.W1;  // P33 = 0
  const M3 P = pk2_state_C(k, p, beta, t, kLinYin);
  EXPECT_NEAR(P(2, 2), 0.0, 1e-14);
  EXPECT_NEAR(P(0, 0) - P(1, 1), 2 * d.W4 + beta * kLinYin.T0 + t.fiber - t.cross_fiber, 1e-13);
}

TEST(StateC, UniaxialPassiveFiberStretch) {
  // lateral stretches equal by symmetry; p fixed by P22 = 0
  const double l = 1.2, lt = 1.0 / std::sqrt(l);
  const auto k = kin(V3(l, lt, lt).asDiagonal());
  const auto d = energy_derivatives(k.I1, k.I4, k.I6, 0.0, kLinYin);
  const double p = 2 * d.W1 * lt * lt;
  const M3 P = pk2_state_C(k, p, 0.0, PseudoActiveTensions<double>{}, kLinYin);
  EXPECT_NEAR(P(1, 1), 0.0, 1e-14);
  EXPECT_NEAR(P(2, 2), 0.0, 1e-14);
  EXPECT_GT(P(0, 0), 0.0);
}

TEST(StateC, StateAStressAtFrozenTensions) {
  // With T frozen from the same strain and q, the state-C law reproduces
  // the state-A law.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> pd(-4, 4);
  for (int n = 0; n < 50; ++n) {
    const auto k = kin_from_C(random_isochoric_C(rng));
    const double p = pd(rng), q = pd(rng);
    const auto t = pseudo_active_tensions(q, k.I4, k.I6, kLinYin.aOverD);
    const M3 A = pk2_state_A(k, MultiplierPair<double>{p, q}, 0.7, kLinYin);
    const M3 C = pk2_state_C(k, p, 0.7, t, kLinYin);
    EXPECT_TRUE(A.isApprox(C, 1e-13)) << A << "\n" << C;
  }
}

TEST(Cauchy, IdentityPushForward) {
  M3 P;
  P << 1, 2, 3, 2, 5, 6, 3, 6, 9;
  EXPECT_EQ(cauchy_from_pk2<double>(M3::Identity(), P), P);
}

TEST(Cauchy, DiagonalStretch) {
  const V3 l(1.3, 0.9, 1.0 / 1.17);
  M3 P;
  P << 4, 1, 0, 1, 2, 0.5, 0, 0.5, 3;
  const M3 tau = cauchy_from_pk2<double>(l.asDiagonal(), P);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(tau(i, i), l(i) * l(i) * P(i, i), 1e-14);
}

TEST(Cauchy, RoundTrip) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int n = 0; n < 100; ++n) {
    M3 phi = M3::Identity(), P;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        phi(i, j) += u(rng);
        P(i, j) = 10 * u(rng);
      }
    P = 0.5 * (P + P.transpose()).eval();
    const M3 tau = cauchy_from_pk2(phi, P);
    const M3 back = cauchy_from_pk2(phi, pk2_from_cauchy(phi, tau));
    EXPECT_LT((back - tau).cwiseAbs().maxCoeff(), 1e-13 * std::max(1.0, tau.cwiseAbs().maxCoeff()));
  }
}

TEST(Cauchy, PhysicalComponentsOfDiagonalState) {
  const V3 l(1.2, 1.2, 1.0 / 1.44);
  const auto k = kin(l.asDiagonal());
  M3 P = V3(3.0, 2.0, 1.0).asDiagonal();
  const M3 s = physical_cauchy(k, P);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(s(i, i), l(i) * l(i) * P(i, i), 1e-14);
}

TEST(PassiveInvariance, CouplingLawAddsNothingWithoutMultiplier) {
  std::mt19937_64 rng(31);
  for (int n = 0; n < 50; ++n) {
    const auto k = kin_from_C(random_isochoric_C(rng));
    const M3 A = pk2_state_A(k, MultiplierPair<double>{1.1, 0.0}, 0.0, kLinYin);
    const M3 C = pk2_state_C(k, 1.1, 0.0, PseudoActiveTensions<double>{}, kLinYin);
    EXPECT_EQ(A, C);
  }
}
