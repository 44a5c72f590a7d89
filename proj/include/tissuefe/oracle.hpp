// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tissuefe/constitutive.hpp"

namespace tissuefe {

/// Raised when a scalar root cannot be bracketed or refined.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Homogeneous diagonal deformation of the slab in the body frame.
struct HomogeneousSolution {
  Vec3<double> lambda = Vec3<double>::Ones();  // fiber, cross-fiber, thickness
  double p = 0.0;
  double q = 0.0;  // state-A multiplier (zero without coupling)
  Vec3<double> sigma = Vec3<double>::Zero();   // physical Cauchy, kPa
  PseudoActiveTensions<double> tensions;       // from the state-A solve
};

struct SlabScenario {
  enum class Kind { free_contraction, uniaxial, equibiaxial };
  Kind kind = Kind::free_contraction;
  double stretch = 1.0;
  int axis = 0;  // uniaxial: 0 fiber, 1 cross-fiber

  static SlabScenario free_contraction() { return {}; }
  static SlabScenario uniaxial(int axis, double stretch) { return {Kind::uniaxial, stretch, axis}; }
  static SlabScenario equibiaxial(double stretch) { return {Kind::equibiaxial, stretch, 0}; }
};

/// Free contraction returns the state-A solution; the stretch scenarios run
/// state A first and then the loaded state C with its tensions.
HomogeneousSolution slab_solve(const SlabScenario& scenario, double beta,
                               const MaterialParams& params, bool coupling);

/// Tension field T(R) frozen from a state-A solve, as a function of the
/// reference radius.
using TensionField = std::function<PseudoActiveTensions<double>(double)>;

struct CylinderGeometry {
  double R_int = 0.2;  // cm
  double R_ext = 0.35;
  double L = 2.0;
};

struct CylinderOptions {
  /// 0 selects adaptive Gauss-Kronrod; n > 0 uses n equal panels of a fixed
  /// 10-point Gauss rule per wall integral.
  int panels = 0;
  int profile_points = 33;
  /// Pressure increments from the unloaded tube; each follows the previous root.
  int pressure_steps = 20;
};

struct CylinderProfilePoint {
  double R;
  double r;
  double sigma_rr;
  double sigma_tt;
  double sigma_zz;
  double p;
};

/// Axisymmetric inflation-extension with zero net axial force.
struct CylinderSolution {
  double r_int = 0.0;
  double r_ext = 0.0;
  double lambda_z = 1.0;
  double height = 0.0;
  CylinderGeometry geometry;
  std::vector<CylinderProfilePoint> profile;

  /// Deformed radius of the material cylinder at reference radius R.
  double radius_at(double R) const;
};

CylinderSolution cylinder_solve(const CylinderGeometry& geometry, double P_int, double beta,
                                const MaterialParams& params, const TensionField& tensions = {},
                                const CylinderOptions& options = {});

}  // namespace tissuefe
