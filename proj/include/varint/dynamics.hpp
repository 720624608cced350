// varint: linear-time variational integration for kinematic trees
// SPDX-License-Identifier: MIT
//
// Recursive kernels:
//   drnea          - discrete Newton-Euler residual of the forced discrete
//                    Euler-Lagrange equation, one forward + one backward pass.
//   drnea_jacobian - exact partials of the residual w.r.t. the trial
//                    configuration, O(n) per column.
//   abi_solve      - M(q)^{-1} rhs by the articulated-body recursion with
//                    velocity and gravity zeroed.
//   rnea           - continuous inverse dynamics (test oracle and bias-force
//                    source for predictors).
//
// Sign convention follows the discrete Newton-Euler form: the residual is the
// momentum change minus the impulses applied over the step, so positive joint
// actuation reduces it.

#ifndef VARINT_DYNAMICS_HPP
#define VARINT_DYNAMICS_HPP

#include <vector>

#include <Eigen/Dense>

#include "varint/instrument.hpp"
#include "varint/model.hpp"

namespace varint {

struct DiscreteStepContext {
  const KinematicTree* tree = nullptr;
  double dt = 1e-3;
  VectorXd q_prev;
  VectorXd q_curr;
  std::vector<CoTwist> external_impulses;  // per body, body frame at step k; empty = zero
  VectorXd joint_impulses;                 // Q_i^k; empty = zero
  RetractionKind retraction = RetractionKind::Exponential;

  // Optional cache of the previous interval (regenerable from q_prev/q_curr).
  std::vector<Twist> prev_velocity;
  std::vector<CoTwist> prev_momentum;

  void validate() const {
    if (!tree) throw ValidationError("step context: missing tree");
    const int n = tree->dof();
    if (!(dt > 0)) throw ValidationError("step context: dt must be positive");
    if (q_prev.size() != n || q_curr.size() != n)
      throw ValidationError("step context: configuration dimension mismatch");
    if (!external_impulses.empty() && static_cast<int>(external_impulses.size()) != n)
      throw ValidationError("step context: external impulse count mismatch");
    if (joint_impulses.size() != 0 && joint_impulses.size() != n)
      throw ValidationError("step context: joint impulse dimension mismatch");
    if (!prev_velocity.empty() &&
        (static_cast<int>(prev_velocity.size()) != n || prev_velocity.size() != prev_momentum.size()))
      throw ValidationError("step context: previous-interval cache mismatch");
  }
};

struct ResidualReport {
  VectorXd residual;                       // f_i, N*m*s per joint
  std::vector<CoTwist> per_body_momentum;  // mu_i^k
  std::vector<Twist> per_body_velocity;    // V_i^k
};

namespace detail {

/// Discrete average velocities and momenta of one interval (q_a -> q_b).
inline void discrete_interval(const KinematicTree& tree, const VectorXd& q_a, const VectorXd& q_b,
                              double dt, RetractionKind map, std::vector<Twist>& velocity,
                              std::vector<CoTwist>& momentum) {
  const int n = tree.dof();
  velocity.resize(n);
  momentum.resize(n);
  static thread_local std::vector<Transform> disp;
  disp.resize(n);
  for (int i = 0; i < n; ++i) {
    instrument::count();
    const Transform x_a = tree.joint_transform(i, q_a(i));
    const Transform x_b = tree.joint_transform(i, q_b(i));
    const int p = tree.parent(i);
    const Transform d =
        p < 0 ? compose(x_a.inverse(), x_b) : compose(x_a.inverse(), compose(disp[p], x_b));
    disp[i] = d;
    velocity[i] = retract_inverse(d, map) * (1.0 / dt);
    momentum[i] =
        dtau_inv_dual(velocity[i] * dt, tree.body(i).inertia.apply(velocity[i]), map);
  }
}

struct DrneaWorkspace {
  std::vector<Transform> x_curr;   // joint transforms at q_curr
  std::vector<Transform> disp;     // Delta T_i^k for the (q_curr -> q_next) interval
  std::vector<Mat3> rot_world;     // world rotation of each body at q_curr
  std::vector<Twist> v_prev;
  std::vector<CoTwist> mu_prev;
  std::vector<CoTwist> force;
};

inline DrneaWorkspace& drnea_workspace() {
  static thread_local DrneaWorkspace ws;
  return ws;
}

}  // namespace detail

/// Residual of the forced discrete Euler-Lagrange equation at the trial
/// configuration q_next, plus the per-body momenta/velocities of the
/// (q_curr -> q_next) interval for reuse as the next step's cache.
inline void drnea(const DiscreteStepContext& ctx, const VectorXd& q_next, ResidualReport& out) {
  ctx.validate();
  const KinematicTree& tree = *ctx.tree;
  const int n = tree.dof();
  if (q_next.size() != n) throw ValidationError("drnea: q_next dimension mismatch");
  const double dt = ctx.dt;
  const RetractionKind map = ctx.retraction;

  detail::DrneaWorkspace& ws = detail::drnea_workspace();
  ws.x_curr.resize(n);
  ws.disp.resize(n);
  ws.rot_world.resize(n);
  ws.force.assign(n, CoTwist::Zero());
  out.residual.resize(n);
  out.per_body_momentum.resize(n);
  out.per_body_velocity.resize(n);

  // Previous interval (q_prev -> q_curr): cached or recomputed.
  const std::vector<Twist>* v_prev = &ctx.prev_velocity;
  const std::vector<CoTwist>* mu_prev = &ctx.prev_momentum;
  if (ctx.prev_velocity.empty()) {
    detail::discrete_interval(tree, ctx.q_prev, ctx.q_curr, dt, map, ws.v_prev, ws.mu_prev);
    v_prev = &ws.v_prev;
    mu_prev = &ws.mu_prev;
  }

  // Forward pass over the current interval.
  for (int i = 0; i < n; ++i) {
    instrument::count();
    const int p = tree.parent(i);
    ws.x_curr[i] = tree.joint_transform(i, ctx.q_curr(i));
    ws.rot_world[i] = p < 0 ? ws.x_curr[i].rotation : ws.rot_world[p] * ws.x_curr[i].rotation;
    const Transform x_next = tree.joint_transform(i, q_next(i));
    ws.disp[i] = p < 0 ? compose(ws.x_curr[i].inverse(), x_next)
                       : compose(ws.x_curr[i].inverse(), compose(ws.disp[p], x_next));
    out.per_body_velocity[i] = retract_inverse(ws.disp[i], map) * (1.0 / dt);
  }

  // Backward pass: momentum balance per body, impulses pushed to the parent.
  for (int i = n - 1; i >= 0; --i) {
    instrument::count();
    const Twist& v = out.per_body_velocity[i];
    const SpatialInertia& inertia = tree.body(i).inertia;
    out.per_body_momentum[i] = dtau_inv_dual(v * dt, inertia.apply(v), map);

    CoTwist f = out.per_body_momentum[i] -
                Ad_dual(retract((*v_prev)[i] * dt, map), (*mu_prev)[i]);
    f.linear -= dt * inertia.mass * (ws.rot_world[i].transpose() * tree.gravity());
    if (!ctx.external_impulses.empty()) f = f - ctx.external_impulses[i];
    ws.force[i] = ws.force[i] + f;  // children already accumulated here

    out.residual(i) = pairing(ws.force[i], tree.screw(i));
    if (ctx.joint_impulses.size() != 0) out.residual(i) -= ctx.joint_impulses(i);

    const int p = tree.parent(i);
    if (p >= 0) ws.force[p] = ws.force[p] + Ad_dual(ws.x_curr[i].inverse(), ws.force[i]);
  }
}

inline ResidualReport drnea(const DiscreteStepContext& ctx, const VectorXd& q_next) {
  ResidualReport out;
  drnea(ctx, q_next, out);
  return out;
}

/// Exact Jacobian d residual / d q_next via the derivative recursion:
/// a Kronecker-delta seeded forward pass and a dual backward pass per column.
inline Eigen::MatrixXd drnea_jacobian(const DiscreteStepContext& ctx, const VectorXd& q_next) {
  ctx.validate();
  const KinematicTree& tree = *ctx.tree;
  const int n = tree.dof();
  if (q_next.size() != n) throw ValidationError("drnea_jacobian: q_next dimension mismatch");
  const double dt = ctx.dt;
  const RetractionKind map = ctx.retraction;

  // Shared interval quantities, computed once.
  static thread_local std::vector<Transform> x_curr, disp;
  static thread_local std::vector<Twist> vel;
  static thread_local std::vector<Mat6> dtinv;   // dtau^{-1} matrix at dt V_i
  static thread_local std::vector<Vec6> gv;      // G_i V_i
  x_curr.resize(n);
  disp.resize(n);
  vel.resize(n);
  dtinv.resize(n);
  gv.resize(n);
  for (int i = 0; i < n; ++i) {
    const int p = tree.parent(i);
    x_curr[i] = tree.joint_transform(i, ctx.q_curr(i));
    const Transform x_next = tree.joint_transform(i, q_next(i));
    disp[i] = p < 0 ? compose(x_curr[i].inverse(), x_next)
                    : compose(x_curr[i].inverse(), compose(disp[p], x_next));
    vel[i] = retract_inverse(disp[i], map) * (1.0 / dt);
    dtinv[i] = dtau_inv_matrix(vel[i] * dt, map);
    gv[i] = tree.body(i).inertia.apply(vel[i]).vec();
  }

  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  static thread_local std::vector<Twist> dvel;
  static thread_local std::vector<CoTwist> dforce;
  dvel.resize(n);
  dforce.assign(n, CoTwist::Zero());

  for (int j = 0; j < n; ++j) {
    // Forward: right-trivialized derivative of each body displacement.
    for (int i = 0; i < n; ++i) {
      instrument::count();
      const int p = tree.parent(i);
      Twist w = p < 0 ? Twist::Zero() : Ad(x_curr[i].inverse(), dvel[p]);  // dvel reused as W
      if (i == j) w = w + Ad(disp[i], tree.screw(i));
      dvel[i] = w;  // holds W_i for now
    }
    for (int i = 0; i < n; ++i)
      dvel[i] = Twist::from_vec(dtinv[i] * dvel[i].vec() * (1.0 / dt));

    // Backward: derivative of momenta and transmitted impulses.
    for (int i = n - 1; i >= 0; --i) {
      instrument::count();
      const Mat6 ddt = dtau_inv_matrix_deriv(vel[i] * dt, dvel[i] * dt, map);
      CoTwist dmu = CoTwist::from_vec(
          ddt.transpose() * gv[i] +
          dtinv[i].transpose() * tree.body(i).inertia.apply(dvel[i]).vec());
      dforce[i] = dforce[i] + dmu;
      jac(i, j) = pairing(dforce[i], tree.screw(i));
      const int p = tree.parent(i);
      if (p >= 0) dforce[p] = dforce[p] + Ad_dual(x_curr[i].inverse(), dforce[i]);
      dforce[i] = CoTwist::Zero();  // ready for the next column
    }
  }
  return jac;
}

/// Continuous inverse dynamics (RNEA). Returns per-joint generalized forces
/// for the motion (q, qdot, qddot); gravity enters as a fictitious base
/// acceleration when enabled.
inline VectorXd rnea(const KinematicTree& tree, const VectorXd& q, const VectorXd& qdot,
                     const VectorXd& qddot, bool gravity_on = true) {
  const int n = tree.dof();
  if (q.size() != n || qdot.size() != n || qddot.size() != n)
    throw ValidationError("rnea: dimension mismatch");
  static thread_local std::vector<Transform> x;
  static thread_local std::vector<Twist> vel, acc;
  static thread_local std::vector<CoTwist> force;
  x.resize(n);
  vel.resize(n);
  acc.resize(n);
  force.assign(n, CoTwist::Zero());

  const Twist base_acc(Vec3::Zero(), gravity_on ? Vec3(-tree.gravity()) : Vec3(Vec3::Zero()));
  for (int i = 0; i < n; ++i) {
    instrument::count();
    const int p = tree.parent(i);
    x[i] = tree.joint_transform(i, q(i));
    const Transform xi = x[i].inverse();
    const Twist sdq = tree.screw(i) * qdot(i);
    vel[i] = (p < 0 ? Twist::Zero() : Ad(xi, vel[p])) + sdq;
    acc[i] = Ad(xi, p < 0 ? base_acc : acc[p]) + tree.screw(i) * qddot(i) + ad(vel[i], sdq);
  }
  VectorXd tau(n);
  for (int i = n - 1; i >= 0; --i) {
    instrument::count();
    const SpatialInertia& inertia = tree.body(i).inertia;
    force[i] = force[i] + inertia.apply(acc[i]) - ad_dual(vel[i], inertia.apply(vel[i]));
    tau(i) = pairing(force[i], tree.screw(i));
    const int p = tree.parent(i);
    if (p >= 0) force[p] = force[p] + Ad_dual(x[i].inverse(), force[i]);
  }
  return tau;
}

/// Applies M(q)^{-1} to rhs in O(n): articulated-body recursion with velocity
/// and gravity zeroed, driven by rhs as joint forces.
inline VectorXd abi_solve(const KinematicTree& tree, const VectorXd& q, const VectorXd& rhs) {
  const int n = tree.dof();
  if (q.size() != n || rhs.size() != n) throw ValidationError("abi_solve: dimension mismatch");
  static thread_local std::vector<Transform> x;
  static thread_local std::vector<Mat6> inertia;  // articulated inertia
  static thread_local std::vector<Vec6> bias;     // articulated bias impulse
  static thread_local std::vector<double> pivot, u;
  static thread_local std::vector<Twist> acc;
  x.resize(n);
  inertia.resize(n);
  bias.assign(n, Vec6::Zero());
  pivot.resize(n);
  u.resize(n);
  acc.resize(n);

  for (int i = 0; i < n; ++i) {
    x[i] = tree.joint_transform(i, q(i));
    inertia[i] = tree.body(i).inertia.matrix();
  }
  for (int i = n - 1; i >= 0; --i) {
    instrument::count();
    const Vec6 s = tree.screw(i).vec();
    const Vec6 is = inertia[i] * s;
    pivot[i] = s.dot(is);
    if (pivot[i] < 1e-12)
      throw SingularJointError("abi_solve: degenerate articulated inertia at joint " +
                               std::to_string(i + 1));
    u[i] = rhs(i) - s.dot(bias[i]);
    const int p = tree.parent(i);
    if (p >= 0) {
      const Mat6 adj = Ad_matrix(x[i].inverse());
      const Mat6 projected = inertia[i] - is * is.transpose() / pivot[i];
      inertia[p] += adj.transpose() * projected * adj;
      bias[p] += adj.transpose() * (bias[i] + is * (u[i] / pivot[i]));
    }
  }
  VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    instrument::count();
    const int p = tree.parent(i);
    const Twist a_parent = p < 0 ? Twist::Zero() : Ad(x[i].inverse(), acc[p]);
    const Vec6 s = tree.screw(i).vec();
    out(i) = (u[i] - s.dot(inertia[i] * a_parent.vec())) / pivot[i];
    acc[i] = a_parent + tree.screw(i) * out(i);
  }
  return out;
}

/// Forward dynamics with full bias forces: qddot = M^{-1}(Q - C(q, qdot)),
/// C including gravity. Two O(n) sweeps.
inline VectorXd forward_dynamics(const KinematicTree& tree, const VectorXd& q, const VectorXd& qdot,
                                 const VectorXd& applied_force) {
  const VectorXd bias = rnea(tree, q, qdot, VectorXd::Zero(tree.dof()), true);
  return abi_solve(tree, q, applied_force - bias);
}

}  // namespace varint

#endif
