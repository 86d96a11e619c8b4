#pragma once

#include "momident/common.hpp"

#include <functional>
#include <string>

namespace momident {

/// Feasible set {x : A x <= b, lower <= x <= upper}.
struct LinearConstraints {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  bool feasible(const Eigen::VectorXd& x, double tol = 1e-9) const;
};

/**
 * @brief Solves min 0.5 d'Hd + g'd subject to C d <= c by a primal active-set method.
 *
 * H must be positive definite and d = 0 must be feasible (c >= 0).
 */
Eigen::VectorXd solve_inequality_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& C,
                                    const Eigen::VectorXd& c, int max_iterations = 200);

struct SqpOptions {
  int max_iterations = 40;
  double tolerance = 1e-6;  ///< on the projected gradient and on the step
  double fd_step = 1e-6;    ///< relative forward-difference step
  double min_cost_decrease = 0.0;
};

struct SqpResult {
  Eigen::VectorXd x;
  double cost = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/**
 * @brief SQP with a BFGS Hessian for smooth objectives under linear constraints.
 *
 * Iterates stay feasible. Gradients come from forward differences. Variables
 * are scaled to the box [lower, upper] internally.
 */
SqpResult minimize_sqp(const Objective& f, const Eigen::VectorXd& x0, const LinearConstraints& cons,
                       const SqpOptions& options = {});

/// Forward-difference gradient that steps backwards at the upper bound.
Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x, double fx, double rel_step,
                            const Eigen::VectorXd& upper, int* evaluations = nullptr);

}  // namespace momident
