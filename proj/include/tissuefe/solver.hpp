// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace tissuefe {

enum class SolverBackend { powell_hybrid, newton_line_search };

struct SolverConfig {
  double tolerance = 1e-12;  // on the infinity norm of the residual
  int max_iterations = 200;
  double fd_step = std::sqrt(std::numeric_limits<double>::epsilon());
  int continuation_steps = 20;
  SolverBackend backend = SolverBackend::powell_hybrid;
  int jacobian_threads = 1;

  void validate() const {
    if (!(tolerance > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (!(fd_step > 0.0)) throw std::invalid_argument("fd_step must be positive");
    if (continuation_steps < 1) throw std::invalid_argument("continuation_steps must be >= 1");
    if (jacobian_threads < 1) throw std::invalid_argument("jacobian_threads must be >= 1");
  }
};

const char* to_string(SolverBackend backend);
SolverBackend backend_from_string(const std::string& name);

/// Raised on a NaN residual; names the offending row.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int row) : std::runtime_error(what), row_(row) {}
  int row() const { return row_; }

 private:
  int row_;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct NonlinearResult {
  Eigen::VectorXd x;
  Eigen::VectorXd residual;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  double residual_norm = std::numeric_limits<double>::infinity();
  std::string message;
};

/// Forward-difference Jacobian with column step fd_step * max(1, |x_j|).
/// Columns are split across `threads` workers; `f` must be reentrant.
Eigen::MatrixXd finite_difference_jacobian(const ResidualFn& f, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& fx, double fd_step,
                                           int threads = 1);

/// Solves f(x) = 0 for square f. On failure the best iterate is returned with
/// converged = false. Evaluation failures (inverted elements, overflow) at
/// trial points shrink the step; a failure at the initial point propagates.
NonlinearResult solve_nonlinear(const ResidualFn& f, const Eigen::VectorXd& x0,
                                const SolverConfig& config);

}  // namespace tissuefe
