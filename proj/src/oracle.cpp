// SPDX-License-Identifier: Apache-2.0

#include "tissuefe/oracle.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace tissuefe {

namespace {

/// Principal Cauchy stresses plus p (so sigma_i = s_i - p) for a diagonal
/// stretch in the body frame.
struct Deviatoric {
  double s1, s2, s3;
};

EnergyDerivatives<double> derivatives(const Vec3<double>& l, double beta,
                                      const MaterialParams& m) {
  const double I1 = l.squaredNorm();
  return energy_derivatives(I1, l(0) * l(0), l(1) * l(1), beta, m);
}

Deviatoric state_a_stress(const Vec3<double>& l, double q, double beta, const MaterialParams& m) {
  const auto d = derivatives(l, beta, m);
  const Vec3<double> c = l.cwiseProduct(l);
  return {c(0) * (2.0 * d.W1 + 2.0 * d.W4 - q * d.h4) + beta * m.T0,
          c(1) * (2.0 * d.W1 - q * d.h6), c(2) * 2.0 * d.W1};
}

Deviatoric state_c_stress(const Vec3<double>& l, double beta,
                          const PseudoActiveTensions<double>& t, const MaterialParams& m) {
  const auto d = derivatives(l, beta, m);
  const Vec3<double> c = l.cwiseProduct(l);
  return {c(0) * (2.0 * d.W1 + 2.0 * d.W4) + beta * m.T0 + t.fiber,
          c(1) * 2.0 * d.W1 + t.cross_fiber, c(2) * 2.0 * d.W1};
}

/// Root of f closest to x0 inside (lo, hi): geometric scan outward from x0
/// in both directions, then TOMS 748 on the first sign change.
double scan_root(const std::function<double(double)>& f, double x0, double lo, double hi,
                 const std::string& what) {
  const auto safe = [&](double x) -> std::optional<double> {
    try {
      const double v = f(x);
      if (std::isfinite(v)) return v;
    } catch (const ConstitutiveOverflow&) {
    } catch (const std::domain_error&) {
    }
    return std::nullopt;
  };
  const auto f0 = safe(x0);
  if (!f0) throw OracleError(what + ": residual undefined at the initial point");
  if (*f0 == 0.0) return x0;

  std::optional<std::pair<double, double>> bracket;
  double prev[2] = {x0, x0};
  double fprev[2] = {*f0, *f0};
  bool alive[2] = {true, true};
  double step = 1e-3 * std::max(1.0, std::abs(x0));
  std::ostringstream trail;
  for (int k = 0; k < 200 && !bracket && (alive[0] || alive[1]); ++k, step *= 1.25) {
    for (int dir = 0; dir < 2 && !bracket; ++dir) {
      if (!alive[dir]) continue;
      double x = dir == 0 ? x0 - step : x0 + step;
      if (x <= lo || x >= hi) {
        x = dir == 0 ? 0.5 * (prev[0] + lo) : 0.5 * (prev[1] + hi);
        if (std::abs(x - prev[dir]) < 1e-14 * (1.0 + std::abs(x))) alive[dir] = false;
      }
      const auto fx = safe(x);
      if (!fx) {
        alive[dir] = false;
        continue;
      }
      if ((*fx > 0.0) != (fprev[dir] > 0.0) || *fx == 0.0)
        bracket = dir == 0 ? std::make_pair(x, prev[0]) : std::make_pair(prev[1], x);
      prev[dir] = x;
      fprev[dir] = *fx;
    }
  }
  if (!bracket) {
    trail << what << ": no sign change found in (" << lo << ", " << hi << ") around " << x0
          << "; f(x0) = " << *f0 << ", f at scan ends = " << fprev[0] << ", " << fprev[1];
    throw OracleError(trail.str());
  }
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(
      [&](double x) { return f(x); }, bracket->first, bracket->second,
      boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

HomogeneousSolution free_contraction(double beta, const MaterialParams& m, bool coupling) {
  HomogeneousSolution s;
  if (beta == 0.0) return s;
  const double k = detail::kPiMinus2 * m.aOverD;
  const auto stretches = [&](double l1) {
    Vec3<double> l;
    l(0) = l1;
    if (coupling) {
      l(1) = 1.0 + k * (1.0 - 1.0 / std::sqrt(l1));
      if (!(l(1) > 0.0)) throw std::domain_error("cross-fiber stretch collapsed");
      l(2) = 1.0 / (l1 * l(1));
    } else {
      l(1) = l(2) = 1.0 / std::sqrt(l1);
    }
    return l;
  };
  const auto multiplier_q = [&](const Vec3<double>& l) {
    if (!coupling) return 0.0;
    const auto d = derivatives(l, beta, m);
    return (2.0 * d.W1 - l(2) * l(2) * 2.0 * d.W1 / (l(1) * l(1))) / d.h6;
  };
  const auto residual = [&](double l1) {
    const Vec3<double> l = stretches(l1);
    const Deviatoric dv = state_a_stress(l, multiplier_q(l), beta, m);
    return dv.s1 - dv.s3;
  };
  const double lo = coupling ? std::pow(1.0 + 1.0 / k, -2.0) : 0.0;
  const double l1 = scan_root(residual, 1.0, lo, 10.0, "free contraction fiber stretch");
  s.lambda = stretches(l1);
  s.q = multiplier_q(s.lambda);
  const Deviatoric dv = state_a_stress(s.lambda, s.q, beta, m);
  s.p = dv.s3;
  s.sigma = Vec3<double>(dv.s1 - s.p, dv.s2 - s.p, 0.0);
  s.tensions = pseudo_active_tensions(s.q, s.lambda(0) * s.lambda(0),
                                      s.lambda(1) * s.lambda(1), m.aOverD);
  return s;
}

}  // namespace

HomogeneousSolution slab_solve(const SlabScenario& scenario, double beta,
                               const MaterialParams& params, bool coupling) {
  params.validate();
  ActivationState{beta, true}.validate();
  const HomogeneousSolution a = free_contraction(beta, params, coupling);
  if (scenario.kind == SlabScenario::Kind::free_contraction) return a;
  if (!(scenario.stretch > 0.0)) throw std::invalid_argument("stretch must be positive");

  HomogeneousSolution c;
  c.tensions = a.tensions;
  c.q = a.q;
  const double lam = scenario.stretch;
  Vec3<double> l;
  if (scenario.kind == SlabScenario::Kind::equibiaxial) {
    l = Vec3<double>(lam, lam, 1.0 / (lam * lam));
  } else {
    if (scenario.axis != 0 && scenario.axis != 1)
      throw std::invalid_argument("uniaxial axis must be 0 or 1");
    const int fixed = scenario.axis, free = 1 - scenario.axis;
    const auto stretches = [&](double lf) {
      Vec3<double> v;
      v(fixed) = lam;
      v(free) = lf;
      v(2) = 1.0 / (lam * lf);
      return v;
    };
    const auto residual = [&](double lf) {
      const Deviatoric dv = state_c_stress(stretches(lf), beta, a.tensions, params);
      return (free == 0 ? dv.s1 : dv.s2) - dv.s3;
    };
    const double start = 1.0 / std::sqrt(lam);
    l = stretches(scan_root(residual, start, 0.0, 20.0, "uniaxial lateral stretch"));
  }
  const Deviatoric dv = state_c_stress(l, beta, a.tensions, params);
  c.lambda = l;
  c.p = dv.s3;
  c.sigma = Vec3<double>(dv.s1 - c.p, dv.s2 - c.p, 0.0);
  return c;
}

namespace {

struct CylinderModel {
  CylinderGeometry g;
  double P, beta;
  MaterialParams m;
  TensionField tensions;
  CylinderOptions opt;

  PseudoActiveTensions<double> tension(double R) const {
    return tensions ? tensions(R) : PseudoActiveTensions<double>{};
  }

  double radius(double ri, double lz, double R) const {
    return std::sqrt(ri * ri + (R * R - g.R_int * g.R_int) / lz);
  }

  /// Stretches (theta, z, r) map onto the body frame (fiber, cross-fiber, thickness).
  Deviatoric stress(double ri, double lz, double R) const {
    const double r = radius(ri, lz, R);
    return state_c_stress(Vec3<double>(r / R, lz, R / (lz * r)), beta, tension(R), m);
  }

  template <typename F>
  double integrate(F f, double a, double b) const {
    if (b <= a) return 0.0;
    if (opt.panels <= 0)
      return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 8, 1e-13);
    const int n = std::max(
        1, static_cast<int>(std::lround(opt.panels * (b - a) / (g.R_ext - g.R_int))));
    const double h = (b - a) / n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      sum += boost::math::quadrature::gauss<double, 10>::integrate(f, a + i * h, a + (i + 1) * h);
    return sum;
  }

  /// d sigma_rr / dR = (s_t - s_r) / r * dr/dR.
  double radial_gradient(double ri, double lz, double R) const {
    const Deviatoric d = stress(ri, lz, R);
    const double r = radius(ri, lz, R);
    return (d.s1 - d.s3) / r * R / (lz * r);
  }

  double radial_residual(double ri, double lz) const {
    return integrate([&](double R) { return radial_gradient(ri, lz, R); }, g.R_int, g.R_ext) - P;
  }

  /// Net axial force over 2 pi, after integrating the sigma_rr term by parts.
  double axial_residual(double ri, double lz) const {
    const double body = integrate(
        [&](double R) {
          const Deviatoric d = stress(ri, lz, R);
          return (-0.5 * (d.s1 - d.s3) + (d.s2 - d.s3)) * R / lz;
        },
        g.R_int, g.R_ext);
    return 0.5 * P * ri * ri + body;
  }

  /// Inner radius balancing the pressure at axial stretch lz, on the branch
  /// nearest `guess`.
  double inner_radius(double lz, double guess) const {
    return scan_root([&](double ri) { return radial_residual(ri, lz); }, guess, 0.0,
                     100.0 * g.R_ext, "cylinder inner radius");
  }
};

}  // namespace

double CylinderSolution::radius_at(double R) const {
  return std::sqrt(r_int * r_int + (R * R - geometry.R_int * geometry.R_int) / lambda_z);
}

CylinderSolution cylinder_solve(const CylinderGeometry& geometry, double P_int, double beta,
                                const MaterialParams& params, const TensionField& tensions,
                                const CylinderOptions& options) {
  params.validate();
  ActivationState{beta, false}.validate();
  if (!(geometry.R_int > 0.0 && geometry.R_ext > geometry.R_int && geometry.L > 0.0))
    throw std::invalid_argument("invalid cylinder geometry");
  if (!(P_int >= 0.0) || !std::isfinite(P_int))
    throw std::invalid_argument("internal pressure must be finite and non-negative");
  if (options.profile_points < 2) throw std::invalid_argument("profile needs at least 2 points");
  if (options.pressure_steps < 1) throw std::invalid_argument("pressure_steps must be >= 1");

  // The pressure-radius response of an active tube can be non-monotone, so
  // the pressure is ramped from zero and each step follows the branch of the
  // previous one, as a load-controlled solver would.
  CylinderModel model{geometry, 0.0, beta, params, tensions, options};
  double lz = 1.0, ri = geometry.R_int;
  const int steps = P_int > 0.0 ? options.pressure_steps : 0;
  for (int k = 0; k <= steps; ++k) {
    model.P = steps ? P_int * k / steps : 0.0;
    const double guess = ri;
    lz = scan_root(
        [&](double z) { return model.axial_residual(model.inner_radius(z, guess), z); }, lz, 0.0,
        50.0, "cylinder axial stretch");
    ri = model.inner_radius(lz, guess);
  }

  CylinderSolution s;
  s.geometry = geometry;
  s.lambda_z = lz;
  s.r_int = ri;
  if (!(s.r_int > 0.0)) throw OracleError("non-physical inner radius");
  s.r_ext = s.radius_at(geometry.R_ext);
  s.height = lz * geometry.L;

  const int n = options.profile_points;
  double sigma_rr = -P_int, R_prev = geometry.R_int;
  for (int i = 0; i < n; ++i) {
    const double R = i == n - 1 ? geometry.R_ext
                                : geometry.R_int + (geometry.R_ext - geometry.R_int) * i / (n - 1);
    sigma_rr += model.integrate([&](double x) { return model.radial_gradient(s.r_int, lz, x); },
                                R_prev, R);
    R_prev = R;
    const Deviatoric d = model.stress(s.r_int, lz, R);
    const double p = d.s3 - sigma_rr;
    s.profile.push_back({R, s.radius_at(R), sigma_rr, d.s1 - p, d.s2 - p, p});
  }
  return s;
}

}  // namespace tissuefe
