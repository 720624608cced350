// varint: linear-time variational integration for kinematic trees
// SPDX-License-Identifier: MIT
//
// Root finders for the one-step discrete equation of motion. Three methods
// share one driver loop:
//   Newton  - exact Jacobian, dense LU, quadratic convergence.
//   Riqn    - quasi-Newton with the frozen mass matrix as Jacobian
//             approximation; every iteration is a single O(n) abi_solve.
//   Broyden - rank-one inverse updates seeded from the dense dt * M^{-1}.

#ifndef VARINT_SOLVERS_HPP
#define VARINT_SOLVERS_HPP

#include <chrono>
#include <vector>

#include <Eigen/Dense>

#include "varint/dynamics.hpp"

namespace varint {

enum class SolverMethod { Newton, Riqn, Broyden };
enum class InitialGuess { Hold, ExplicitEuler, ForwardDynamics };

struct SolverConfig {
  SolverMethod method = SolverMethod::Riqn;
  double tolerance = 1e-9;      // on the residual infinity norm, N*m*s
  int max_iterations = 30;
  InitialGuess guess = InitialGuess::ExplicitEuler;
  bool line_search = false;     // backtracking on the residual norm
};

struct SolveTrace {
  int iterations = 0;
  std::vector<double> residual_norms;  // iterations + 1 entries
  bool converged = false;
  double wall_time = 0.0;              // seconds
};

/// Predictor for the unknown configuration.
inline VectorXd initial_guess(const DiscreteStepContext& ctx, InitialGuess kind) {
  switch (kind) {
    case InitialGuess::Hold:
      return ctx.q_curr;
    case InitialGuess::ExplicitEuler:
      return ctx.q_curr + (ctx.q_curr - ctx.q_prev);
    case InitialGuess::ForwardDynamics: {
      const VectorXd qdot = (ctx.q_curr - ctx.q_prev) / ctx.dt;
      VectorXd force = ctx.joint_impulses.size() ? VectorXd(ctx.joint_impulses / ctx.dt)
                                                 : VectorXd(VectorXd::Zero(ctx.tree->dof()));
      const VectorXd qddot = forward_dynamics(*ctx.tree, ctx.q_curr, qdot, force);
      return ctx.q_curr + ctx.dt * qdot + ctx.dt * ctx.dt * qddot;
    }
  }
  return ctx.q_curr;
}

namespace detail {

inline double inf_norm(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace detail

/// Solve the discrete equation of motion for q_next. On return the trace
/// records one residual norm per iterate, the initial one included; when the
/// budget runs out `converged` stays false and the best iterate is returned.
inline VectorXd solve_step(const DiscreteStepContext& ctx, const SolverConfig& cfg,
                           SolveTrace& trace, const VectorXd* q_start = nullptr) {
  ctx.validate();
  const KinematicTree& tree = *ctx.tree;
  const int n = tree.dof();
  const auto t0 = std::chrono::steady_clock::now();

  VectorXd q = q_start ? *q_start : initial_guess(ctx, cfg.guess);
  if (q.size() != n) throw ValidationError("solve_step: starting guess dimension mismatch");

  ResidualReport report;
  drnea(ctx, q, report);
  VectorXd residual = report.residual;

  trace.iterations = 0;
  trace.converged = false;
  trace.residual_norms.assign(1, detail::inf_norm(residual));

  // Broyden keeps an explicit inverse-Jacobian estimate, seeded with
  // dt * M(q_curr)^{-1}, the same operator Riqn applies implicitly.
  Eigen::MatrixXd inv_jac;
  if (cfg.method == SolverMethod::Broyden) {
    inv_jac.resize(n, n);
    for (int j = 0; j < n; ++j)
      inv_jac.col(j) = ctx.dt * abi_solve(tree, ctx.q_curr, VectorXd::Unit(n, j));
  }

  while (trace.iterations < cfg.max_iterations) {
    if (trace.residual_norms.back() <= cfg.tolerance) {
      trace.converged = true;
      break;
    }

    VectorXd delta;
    switch (cfg.method) {
      case SolverMethod::Newton:
        delta = drnea_jacobian(ctx, q).partialPivLu().solve(residual);
        break;
      case SolverMethod::Riqn:
        delta = ctx.dt * abi_solve(tree, ctx.q_curr, residual);
        break;
      case SolverMethod::Broyden:
        delta = inv_jac * residual;
        break;
    }

    double alpha = 1.0;
    VectorXd q_new = q - delta;
    drnea(ctx, q_new, report);
    if (cfg.line_search) {
      const double base = trace.residual_norms.back();
      for (int k = 0; k < 8 && detail::inf_norm(report.residual) > base; ++k) {
        alpha *= 0.5;
        q_new = q - alpha * delta;
        drnea(ctx, q_new, report);
      }
    }

    if (cfg.method == SolverMethod::Broyden) {
      const VectorXd dq = q_new - q;
      const VectorXd dr = report.residual - residual;
      const VectorXd bdr = inv_jac * dr;
      const double denom = dq.dot(bdr);
      if (std::abs(denom) > 1e-300) inv_jac += (dq - bdr) * (dq.transpose() * inv_jac) / denom;
    }

    q = q_new;
    residual = report.residual;
    ++trace.iterations;
    trace.residual_norms.push_back(detail::inf_norm(residual));
  }
  if (trace.residual_norms.back() <= cfg.tolerance) trace.converged = true;

  trace.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return q;
}

inline VectorXd solve_step(const DiscreteStepContext& ctx, const SolverConfig& cfg = {}) {
  SolveTrace trace;
  return solve_step(ctx, cfg, trace);
}

}  // namespace varint

#endif
