// SPDX-License-Identifier: Apache-2.0

#include "tissuefe/solver.hpp"

#include <algorithm>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace tissuefe {

const char* to_string(SolverBackend backend) {
  return backend == SolverBackend::powell_hybrid ? "powell_hybrid" : "newton_line_search";
}

SolverBackend backend_from_string(const std::string& name) {
  if (name == "powell_hybrid") return SolverBackend::powell_hybrid;
  if (name == "newton_line_search") return SolverBackend::newton_line_search;
  throw std::invalid_argument("unknown solver backend '" + name + "'");
}

namespace {

void check_finite(const Eigen::VectorXd& r) {
  for (Eigen::Index i = 0; i < r.size(); ++i)
    if (!std::isfinite(r(i)))
      throw SolverError("non-finite residual in row " + std::to_string(i), static_cast<int>(i));
}

/// Evaluates f, mapping evaluation failures of the model (inverted elements,
/// overflow, leaving the chart) to nullopt. NaNs are hard errors.
std::optional<Eigen::VectorXd> try_eval(const ResidualFn& f, const Eigen::VectorXd& x) {
  Eigen::VectorXd r;
  try {
    r = f(x);
  } catch (const SolverError&) {
    throw;
  } catch (const std::runtime_error&) {
    return std::nullopt;
  } catch (const std::domain_error&) {
    return std::nullopt;
  }
  check_finite(r);
  return r;
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

Eigen::MatrixXd finite_difference_jacobian(const ResidualFn& f, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& fx, double fd_step,
                                           int threads) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd J(fx.size(), n);
  std::vector<std::exception_ptr> errors(std::max(threads, 1));

  auto columns = [&](int worker, Eigen::Index begin, Eigen::Index end) {
    try {
      Eigen::VectorXd xp = x;
      for (Eigen::Index j = begin; j < end; ++j) {
        const double h = fd_step * std::max(1.0, std::abs(x(j)));
        xp(j) = x(j) + h;
        if (auto fp = try_eval(f, xp)) {
          J.col(j) = (*fp - fx) / h;
        } else {
          xp(j) = x(j) - h;
          auto fm = try_eval(f, xp);
          if (!fm) throw std::runtime_error("residual undefined on both sides of column " +
                                            std::to_string(j));
          J.col(j) = (fx - *fm) / h;
        }
        xp(j) = x(j);
      }
    } catch (...) {
      errors[worker] = std::current_exception();
    }
  };

  if (threads <= 1 || n < 2 * threads) {
    columns(0, 0, n);
  } else {
    std::vector<std::thread> pool;
    const Eigen::Index chunk = (n + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      const Eigen::Index b = w * chunk, e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(columns, w, b, e);
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return J;
}

namespace {

Eigen::VectorXd gauss_newton_step(const Eigen::MatrixXd& J, const Eigen::VectorXd& f) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(J);
  return qr.solve(-f);
}

NonlinearResult powell_hybrid(const ResidualFn& f, const Eigen::VectorXd& x0,
                              const SolverConfig& cfg) {
  NonlinearResult res;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd fx = f(x0);
  check_finite(fx);
  res.evaluations = 1;
  const Eigen::Index n = x.size();

  Eigen::VectorXd diag = Eigen::VectorXd::Ones(n);
  double delta = 0.0;
  bool need_jacobian = true;
  bool first = true;
  Eigen::MatrixXd J;
  Eigen::VectorXd gn;

  while (inf_norm(fx) > cfg.tolerance) {
    if (res.iterations >= cfg.max_iterations) {
      res.message = "iteration limit reached";
      break;
    }
    if (need_jacobian) {
      J = finite_difference_jacobian(f, x, fx, cfg.fd_step, cfg.jacobian_threads);
      res.evaluations += static_cast<int>(n);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double c = J.col(j).norm();
        diag(j) = first ? (c > 0.0 ? c : 1.0) : std::max(diag(j), c);
      }
      if (first) {
        delta = 100.0 * diag.cwiseProduct(x).norm();
        if (delta == 0.0) delta = 100.0;
        first = false;
      }
      gn = gauss_newton_step(J, fx);
      need_jacobian = false;
    }
    ++res.iterations;

    // Dogleg in the scaled variables z = D x.
    Eigen::VectorXd step;
    const Eigen::VectorXd gn_scaled = diag.cwiseProduct(gn);
    if (gn_scaled.norm() <= delta) {
      step = gn;
    } else {
      const Eigen::VectorXd g = (J.transpose() * fx).cwiseQuotient(diag);
      const double gnorm = g.norm();
      const Eigen::VectorXd Jg = J * g.cwiseQuotient(diag);
      const double t = gnorm * gnorm / std::max(Jg.squaredNorm(), 1e-300);
      const Eigen::VectorXd sd_scaled = -t * g;
      Eigen::VectorXd s_scaled;
      if (sd_scaled.norm() >= delta || gnorm == 0.0) {
        s_scaled = gnorm > 0.0 ? Eigen::VectorXd(-(delta / gnorm) * g) : gn_scaled * (delta / gn_scaled.norm());
      } else {
        const Eigen::VectorXd d = gn_scaled - sd_scaled;
        const double a = d.squaredNorm(), b = 2.0 * sd_scaled.dot(d),
                     c = sd_scaled.squaredNorm() - delta * delta;
        const double tau = (-b + std::sqrt(std::max(b * b - 4.0 * a * c, 0.0))) / (2.0 * a);
        s_scaled = sd_scaled + tau * d;
      }
      step = s_scaled.cwiseQuotient(diag);
    }
    const double step_norm = diag.cwiseProduct(step).norm();

    const Eigen::VectorXd x_trial = x + step;
    const auto f_trial = try_eval(f, x_trial);
    ++res.evaluations;
    const double fnorm2 = fx.squaredNorm();
    const double predicted = fnorm2 - (fx + J * step).squaredNorm();
    double ratio = -1.0;
    if (f_trial && predicted > 0.0) ratio = (fnorm2 - f_trial->squaredNorm()) / predicted;

    if (ratio < 0.1)
      delta = 0.5 * std::min(delta, step_norm);
    else if (ratio >= 0.5)
      delta = std::max(delta, 2.0 * step_norm);

    if (f_trial && ratio >= 1e-4) {
      x = x_trial;
      fx = *f_trial;
      need_jacobian = true;
    } else if (f_trial && f_trial->squaredNorm() < fnorm2 && predicted <= 0.0) {
      // Roundoff-level predicted reduction: accept any decrease.
      x = x_trial;
      fx = *f_trial;
      need_jacobian = true;
    }
    if (delta <= 1e-15 * (diag.cwiseProduct(x).norm() + 1e-15)) {
      res.message = "trust region collapsed";
      break;
    }
  }
  res.x = x;
  res.residual = fx;
  res.residual_norm = inf_norm(fx);
  res.converged = res.residual_norm <= cfg.tolerance;
  if (res.converged) res.message = "converged";
  return res;
}

NonlinearResult newton_line_search(const ResidualFn& f, const Eigen::VectorXd& x0,
                                   const SolverConfig& cfg) {
  NonlinearResult res;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd fx = f(x0);
  check_finite(fx);
  res.evaluations = 1;
  while (inf_norm(fx) > cfg.tolerance) {
    if (res.iterations >= cfg.max_iterations) {
      res.message = "iteration limit reached";
      break;
    }
    ++res.iterations;
    const Eigen::MatrixXd J =
        finite_difference_jacobian(f, x, fx, cfg.fd_step, cfg.jacobian_threads);
    res.evaluations += static_cast<int>(x.size());
    const Eigen::VectorXd step = gauss_newton_step(J, fx);
    const double fnorm2 = fx.squaredNorm();
    bool accepted = false;
    for (double alpha = 1.0; alpha > 1e-10; alpha *= 0.5) {
      const auto ft = try_eval(f, x + alpha * step);
      ++res.evaluations;
      if (ft && ft->squaredNorm() <= (1.0 - 1e-4 * alpha) * fnorm2) {
        x += alpha * step;
        fx = *ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.message = "line search failed";
      break;
    }
  }
  res.x = x;
  res.residual = fx;
  res.residual_norm = inf_norm(fx);
  res.converged = res.residual_norm <= cfg.tolerance;
  if (res.converged) res.message = "converged";
  return res;
}

}  // namespace

NonlinearResult solve_nonlinear(const ResidualFn& f, const Eigen::VectorXd& x0,
                                const SolverConfig& config) {
  config.validate();
  if (config.backend == SolverBackend::powell_hybrid) return powell_hybrid(f, x0, config);
  return newton_line_search(f, x0, config);
}

}  // namespace tissuefe
