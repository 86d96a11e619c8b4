#include "momident/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace momident {

bool LinearConstraints::feasible(const Eigen::VectorXd& x, double tol) const {
  if ((x - lower).minCoeff() < -tol || (upper - x).minCoeff() < -tol) return false;
  if (A.rows() > 0 && (A * x - b).maxCoeff() > tol) return false;
  return true;
}

Eigen::VectorXd solve_inequality_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::MatrixXd& C,
                                    const Eigen::VectorXd& c, int max_iterations) {
  const Eigen::Index n = g.size();
  const double tol = 1e-12;
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  std::vector<int> work;
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::Index m = static_cast<Eigen::Index>(work.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + m, n + m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
    K.topLeftCorner(n, n) = H;
    for (Eigen::Index k = 0; k < m; ++k) {
      K.block(0, n + k, n, 1) = C.row(work[static_cast<size_t>(k)]).transpose();
      K.block(n + k, 0, 1, n) = C.row(work[static_cast<size_t>(k)]);
    }
    rhs.head(n) = -(H * d + g);
    const Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
    const Eigen::VectorXd p = sol.head(n);
    if (p.norm() <= 1e-12 * (1.0 + d.norm())) {
      if (m == 0) return d;
      const Eigen::VectorXd lambda = sol.tail(m);
      Eigen::Index worst;
      if (lambda.minCoeff(&worst) >= -1e-12) return d;
      work.erase(work.begin() + worst);
      continue;
    }
    double alpha = 1.0;
    int blocking = -1;
    for (Eigen::Index i = 0; i < C.rows(); ++i) {
      if (std::find(work.begin(), work.end(), static_cast<int>(i)) != work.end()) continue;
      const double cp = C.row(i).dot(p);
      if (cp <= tol) continue;
      const double step = std::max(0.0, (c(i) - C.row(i).dot(d)) / cp);
      if (step < alpha) {
        alpha = step;
        blocking = static_cast<int>(i);
      }
    }
    d += alpha * p;
    if (blocking >= 0) work.push_back(blocking);
  }
  return d;
}

Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x, double fx, double rel_step,
                            const Eigen::VectorXd& upper, int* evaluations) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double h = rel_step * std::max(1.0, std::abs(x(i)));
    if (x(i) + h > upper(i)) h = -h;
    Eigen::VectorXd xp = x;
    xp(i) += h;
    g(i) = (f(xp) - fx) / h;
    if (evaluations) ++*evaluations;
  }
  return g;
}

SqpResult minimize_sqp(const Objective& f, const Eigen::VectorXd& x0, const LinearConstraints& cons,
                       const SqpOptions& options) {
  const Eigen::Index n = x0.size();
  const Eigen::VectorXd span = (cons.upper - cons.lower).cwiseMax(1e-300);
  auto to_x = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd { return cons.lower + span.cwiseProduct(u); };
  const Objective fu = [&](const Eigen::VectorXd& u) { return f(to_x(u)); };

  // Constraints on a step d in scaled variables: A S d <= b - A x, -u <= d <= 1 - u.
  const Eigen::Index ma = cons.A.rows();
  Eigen::MatrixXd C(ma + 2 * n, n);
  C.topRows(ma) = cons.A * span.asDiagonal();
  C.middleRows(ma, n) = Eigen::MatrixXd::Identity(n, n);
  C.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

  SqpResult res;
  Eigen::VectorXd u = (x0 - cons.lower).cwiseQuotient(span);
  double fval = fu(u);
  res.evaluations = 1;
  if (!std::isfinite(fval)) {
    res.x = x0;
    res.cost = fval;
    res.message = "objective is not finite at the starting point";
    return res;
  }
  Eigen::VectorXd g = fd_gradient(fu, u, fval, options.fd_step, ones, &res.evaluations);
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;

  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    Eigen::VectorXd c(ma + 2 * n);
    if (ma > 0) c.head(ma) = (cons.b - cons.A * to_x(u)).cwiseMax(0.0);
    c.segment(ma, n) = (ones - u).cwiseMax(0.0);
    c.tail(n) = u.cwiseMax(0.0);
    const Eigen::VectorXd d = solve_inequality_qp(B, g, C, c);
    if (d.lpNorm<Eigen::Infinity>() < options.tolerance) {
      res.converged = true;
      res.message = "step below tolerance";
      break;
    }
    const double slope = g.dot(d);
    if (slope >= 0.0) {
      res.converged = true;
      res.message = "no descent direction";
      break;
    }
    double alpha = 1.0;
    double fnew = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      fnew = fu(u + alpha * d);
      ++res.evaluations;
      if (std::isfinite(fnew) && fnew <= fval + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      res.message = "line search failed";
      break;
    }
    const Eigen::VectorXd s = alpha * d;
    const Eigen::VectorXd unew = (u + s).cwiseMax(0.0).cwiseMin(1.0);
    const Eigen::VectorXd gnew = fd_gradient(fu, unew, fnew, options.fd_step, ones, &res.evaluations);
    const Eigen::VectorXd y = gnew - g;
    const double fold = fval;
    u = unew;
    fval = fnew;
    g = gnew;

    // Damped BFGS update keeps B positive definite.
    const double sy = s.dot(y);
    if (!scaled && sy > 0.0) {
      B *= y.squaredNorm() / sy;
      scaled = true;
    }
    const Eigen::VectorXd Bs = B * s;
    const double sBs = s.dot(Bs);
    if (sBs > 0.0) {
      const double theta = sy >= 0.2 * sBs ? 1.0 : 0.8 * sBs / (sBs - sy);
      const Eigen::VectorXd r = theta * y + (1.0 - theta) * Bs;
      B += r * r.transpose() / s.dot(r) - Bs * Bs.transpose() / sBs;
    }
    if (std::abs(fold - fval) <= options.tolerance * (1.0 + std::abs(fval)) &&
        s.lpNorm<Eigen::Infinity>() < std::sqrt(options.tolerance)) {
      res.converged = true;
      res.message = "cost change below tolerance";
      ++res.iterations;
      break;
    }
  }
  if (res.message.empty()) res.message = "iteration limit reached";
  res.x = to_x(u);
  res.cost = fval;
  return res;
}

}  // namespace momident
