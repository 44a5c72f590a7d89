// SPDX-License-Identifier: Apache-2.0

#include "tissuefe/pipeline.hpp"

#include <cmath>
#include <functional>

namespace tissuefe {

Specimen Specimen::slab(double Lx, double Ly, double Lz, int nx, int ny, int nz) {
  Specimen s;
  s.geometry = Geometry::slab;
  s.mesh = build_slab_mesh(Lx, Ly, Lz, nx, ny, nz);
  s.extent = Vec3d(Lx, Ly, Lz);
  return s;
}

Specimen Specimen::cylinder(double R_int, double R_ext, double L, int nr, int nphi, int nz,
                            double sector_angle, bool rigid_top) {
  Specimen s;
  s.geometry = Geometry::cylinder;
  s.mesh = build_cylinder_mesh(R_int, R_ext, L, nr, nphi, nz, sector_angle);
  s.extent = Vec3d(R_int, R_ext, L);
  s.rigid_top = rigid_top;
  return s;
}

EssentialConditions Specimen::symmetry_conditions() const {
  EssentialConditions bc = EssentialConditions::none(mesh);
  if (geometry == Geometry::slab) {
    bc.fix_set(mesh, "xmin", 0, 0.0);
    bc.fix_set(mesh, "ymin", 1, 0.0);
    bc.fix_set(mesh, "zmin", 2, 0.0);
  } else {
    bc.fix_to_reference(mesh, "phi0", 1);
    bc.fix_to_reference(mesh, "phi1", 1);
    bc.fix_set(mesh, "bottom", 2, 0.0);
    if (rigid_top) bc.tie(mesh, "top", 2);
  }
  return bc;
}

namespace {

double mean_coordinate(const Mesh& mesh, const Eigen::VectorXd& nodal, const std::string& set,
                       int component) {
  const auto ids = mesh.node_set(set);
  double sum = 0.0;
  for (int n : ids) sum += nodal(3 * n + component);
  return sum / static_cast<double>(ids.size());
}

/// Walks a parameter t from t0 to t1, re-solving the system built by `make`
/// at each step and halving the step on failure.
struct PathResult {
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;
  std::string message;
};

PathResult follow_path(const std::function<MixedSystem(double)>& make, double t0, double t1,
                       int steps, Eigen::VectorXd& x, const SolverConfig& config) {
  PathResult out;
  const double nominal = (t1 - t0) / steps;
  const double smallest = nominal / 1024.0;
  double t = t0, dt = nominal;
  bool first = true;
  while (first || std::abs(t1 - t) > 0.0) {
    first = false;
    const double t_next = std::abs(t1 - t) <= std::abs(dt) * (1.0 + 1e-12) ? t1 : t + dt;
    NonlinearResult r;
    bool ok = false;
    try {
      const MixedSystem sys = make(t_next);
      r = solve_nonlinear([&sys](const Eigen::VectorXd& v) { return sys.residual(v); }, x,
                          config);
      ok = r.converged;
      if (!ok) out.message = r.message;
    } catch (const SolverError& e) {
      out.message = e.what();
      return out;
    } catch (const std::runtime_error& e) {
      out.message = e.what();
    }
    out.iterations += r.iterations;
    if (ok) {
      x = r.x;
      t = t_next;
      out.residual_norm = r.residual_norm;
      if (std::abs(dt) < std::abs(nominal)) dt *= 2.0;
    } else {
      dt *= 0.5;
      if (std::abs(dt) < std::abs(smallest)) {
        out.message = "continuation stalled at t = " + std::to_string(t) + ": " + out.message;
        out.residual_norm = r.residual_norm;
        return out;
      }
    }
  }
  out.converged = true;
  out.message = "converged";
  return out;
}

}  // namespace

Observables compute_observables(const Specimen& specimen, const DofState& state,
                                const AssemblyInput& input) {
  const Mesh& mesh = specimen.mesh;
  Observables o;
  double lf = 0.0, lcf = 0.0, lcfp = 0.0;
  Vec3d sigma = Vec3d::Zero();
  const PseudoActiveTensions<double> none{};
  const bool state_a = input.activation.free_contraction;
  for (int e = 0; e < mesh.element_count(); ++e) {
    for (int qp = 0; qp < kQuadraturePoints; ++qp) {
      const PointKinematics pk = point_kinematics(mesh, state.nodal, e, qp);
      const auto& k = pk.state;
      Mat3d P;
      if (state_a) {
        const double q = state.q.size() ? state.q(e) : 0.0;
        P = pk2_state_A(k, MultiplierPair<double>{state.p(e), q}, input.activation.beta,
                        input.params);
      } else {
        const auto& t = input.tensions ? (*input.tensions)[e][qp] : none;
        P = pk2_state_C(k, state.p(e), input.activation.beta, t, input.params);
      }
      const Mat3d s = physical_cauchy(k, P);
      sigma += pk.dV * s.diagonal();
      lf += pk.dV * std::sqrt(k.C(0, 0));
      lcf += pk.dV * std::sqrt(k.C(1, 1));
      lcfp += pk.dV * std::sqrt(k.C(2, 2));
      o.reference_volume += pk.dV;
      o.deformed_volume += pk.dV * std::sqrt(k.I3);
    }
  }
  const double V = o.reference_volume;
  o.lambda_f = lf / V;
  o.lambda_cf = lcf / V;
  o.lambda_cfp = lcfp / V;
  o.sigma_11 = sigma(0) / V;
  o.sigma_22 = sigma(1) / V;
  o.sigma_33 = sigma(2) / V;
  if (specimen.geometry == Geometry::cylinder) {
    o.r_int = mean_coordinate(mesh, state.nodal, "inner", 0);
    o.r_ext = mean_coordinate(mesh, state.nodal, "outer", 0);
    o.height = mean_coordinate(mesh, state.nodal, "top", 2);
  }
  return o;
}

SolveReport solve_state_A(const Specimen& specimen, const MaterialParams& params, double beta,
                          bool coupling, const SolverConfig& config, const DofState* warm,
                          double warm_beta) {
  params.validate();
  config.validate();
  ActivationState{beta, true}.validate();

  AssemblyInput input;
  input.mesh = &specimen.mesh;
  input.params = params;
  input.activation = {beta, true};
  input.coupling = coupling;
  const EssentialConditions bc = specimen.symmetry_conditions();

  // beta = 0: the stress-free reference is the exact solution.
  if (beta == 0.0) warm = nullptr;
  DofState start = warm ? *warm : DofState::reference(specimen.mesh, coupling);
  if (coupling && start.q.size() == 0) start.q = Eigen::VectorXd::Zero(specimen.mesh.element_count());
  if (!coupling) start.q.resize(0);
  const double b0 = warm ? warm_beta : 0.0;

  const MixedSystem layout(input, bc);
  Eigen::VectorXd x = layout.pack(start);
  const int steps =
      std::max(1, static_cast<int>(std::ceil(config.continuation_steps * std::abs(beta - b0) - 1e-9)));
  const auto make = [&](double b) {
    AssemblyInput in = input;
    in.activation.beta = b;
    return MixedSystem(in, bc);
  };
  const PathResult path = follow_path(make, b0, beta, steps, x, config);

  SolveReport report;
  report.converged = path.converged;
  report.iterations = path.iterations;
  report.residual_norm = path.residual_norm;
  report.message = path.message;
  report.state = layout.unpack(x);
  if (path.converged) {
    report.tensions = compute_tensions(specimen.mesh, report.state, params.aOverD);
    report.observables = compute_observables(specimen, report.state, input);
  }
  return report;
}

SolveReport solve_state_C(const Specimen& specimen, const MaterialParams& params, double beta,
                          const ElementTensions& tensions, const LoadCase& load,
                          const DofState& start, const SolverConfig& config) {
  params.validate();
  config.validate();
  ActivationState{beta, false}.validate();
  const Mesh& mesh = specimen.mesh;
  if (static_cast<int>(tensions.size()) != mesh.element_count())
    throw std::invalid_argument("tension field does not match the mesh");

  AssemblyInput input;
  input.mesh = &mesh;
  input.params = params;
  input.activation = {beta, false};
  input.coupling = false;
  input.tensions = &tensions;

  struct Prescribed {
    std::string set;
    int component;
    double from, to;
  };
  std::vector<Prescribed> prescribed;
  if (load.kind == LoadCase::Kind::uniaxial || load.kind == LoadCase::Kind::equibiaxial) {
    if (specimen.geometry != Geometry::slab)
      throw std::invalid_argument("stretch loading applies to the slab only");
    if (!(load.stretch > 0.0)) throw std::invalid_argument("stretch must be positive");
    std::vector<int> axes;
    if (load.kind == LoadCase::Kind::uniaxial) {
      if (load.axis != 0 && load.axis != 1)
        throw std::invalid_argument("uniaxial axis must be 0 (fiber) or 1 (cross-fiber)");
      axes = {load.axis};
    } else {
      axes = {0, 1};
    }
    for (int a : axes) {
      const std::string set = a == 0 ? "xmax" : "ymax";
      prescribed.push_back(
          {set, a, mean_coordinate(mesh, start.nodal, set, a), load.stretch * specimen.extent(a)});
    }
  } else if (load.kind == LoadCase::Kind::pressure) {
    if (specimen.geometry != Geometry::cylinder)
      throw std::invalid_argument("pressure loading applies to the cylinder only");
    if (!std::isfinite(load.pressure)) throw std::invalid_argument("pressure must be finite");
  }

  const auto make = [&](double t) {
    EssentialConditions bc = specimen.symmetry_conditions();
    for (const auto& pr : prescribed)
      bc.fix_set(mesh, pr.set, pr.component, (1.0 - t) * pr.from + t * pr.to);
    AssemblyInput in = input;
    if (load.kind == LoadCase::Kind::pressure)
      in.loads.push_back({"inner", LoadKind::follower_pressure, t * load.pressure, Vec3d::Zero()});
    return MixedSystem(in, bc);
  };

  DofState s0 = start;
  s0.q.resize(0);
  const MixedSystem layout = make(0.0);
  Eigen::VectorXd x = layout.pack(s0);
  const int steps = load.kind == LoadCase::Kind::none ? 1 : config.continuation_steps;
  const PathResult path = follow_path(make, 0.0, 1.0, steps, x, config);

  SolveReport report;
  report.converged = path.converged;
  report.iterations = path.iterations;
  report.residual_norm = path.residual_norm;
  report.message = path.message;
  report.tensions = tensions;
  if (path.converged) {
    report.state = make(1.0).unpack(x);
    report.observables = compute_observables(specimen, report.state, input);
  } else {
    report.state = layout.unpack(x);
  }
  return report;
}

SweepResult continuation_sweep(const Specimen& specimen, const MaterialParams& params,
                               bool coupling, const std::vector<SchedulePoint>& schedule,
                               const SolverConfig& config) {
  SweepResult out;
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (!(schedule[i].s > schedule[i - 1].s))
      throw std::invalid_argument("schedule must be strictly increasing in s");
  const DofState* warm = nullptr;
  double warm_beta = 0.0;
  for (const SchedulePoint& pt : schedule) {
    SweepPoint sp;
    sp.point = pt;
    sp.state_a = solve_state_A(specimen, params, pt.beta, coupling, config, warm, warm_beta);
    if (!sp.state_a.converged) {
      out.failed_at = pt.s;
      out.failure = "state A: " + sp.state_a.message;
      break;
    }
    sp.state_c = solve_state_C(specimen, params, pt.beta, sp.state_a.tensions, pt.load,
                               sp.state_a.state, config);
    if (!sp.state_c.converged) {
      out.failed_at = pt.s;
      out.failure = "state C: " + sp.state_c.message;
      break;
    }
    out.points.push_back(std::move(sp));
    warm = &out.points.back().state_a.state;
    warm_beta = pt.beta;
  }
  return out;
}

}  // namespace tissuefe
