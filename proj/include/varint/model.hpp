// varint: linear-time variational integration for kinematic trees
// SPDX-License-Identifier: MIT
//
// Kinematic tree data model. Body frames sit at the centers of mass so the
// 6x6 spatial inertia stays block-diagonal; joints carry the frame offset
// and the resulting screw picks up a linear part when the axis misses the
// center of mass.

#ifndef VARINT_MODEL_HPP
#define VARINT_MODEL_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "varint/instrument.hpp"
#include "varint/liegroup.hpp"

namespace varint {

using VectorXd = Eigen::VectorXd;

/// Mass and rotational inertia about the center of mass (= body frame origin).
struct SpatialInertia {
  double mass = 1.0;
  Mat3 rotational_inertia = Mat3::Identity();

  /// 6x6 block-diagonal matrix diag(I, m Id3).
  Mat6 matrix() const {
    Mat6 g = Mat6::Zero();
    g.topLeftCorner<3, 3>() = rotational_inertia;
    g.bottomRightCorner<3, 3>() = mass * Mat3::Identity();
    return g;
  }

  CoTwist apply(const Twist& v) const { return {rotational_inertia * v.angular, mass * v.linear}; }

  double kinetic_energy(const Twist& v) const {
    return 0.5 * (v.angular.dot(rotational_inertia * v.angular) + mass * v.linear.squaredNorm());
  }
};

enum class JointKind { Revolute, Prismatic };

/// One-DOF joint. `parent_to_joint` places the joint frame in the parent's
/// scene frame (the parent's own joint frame; the world frame for roots) and
/// `com` places this body's center of mass in the joint frame.
struct Joint {
  JointKind kind = JointKind::Revolute;
  Vec3 axis = Vec3::UnitZ();           // unit axis in the joint frame
  Transform parent_to_joint;           // M_i
  Vec3 com = Vec3::Zero();
};

struct Body {
  SpatialInertia inertia;
  Joint joint;
  int parent = 0;  // 1-based body index; 0 is the inertial frame
};

/// Immutable topologically-sorted tree. Derived per body: the joint screw
/// expressed in the body (CoM) frame and the fixed parent-body-to-body offset.
class KinematicTree {
public:
  KinematicTree(std::vector<Body> bodies, const Vec3& gravity = {0.0, -9.81, 0.0})
      : bodies_(std::move(bodies)), gravity_(gravity) {
    validate();
    build();
  }

  int size() const { return static_cast<int>(bodies_.size()); }
  int dof() const { return size(); }

  const Body& body(int i) const { return bodies_[i]; }
  int parent(int i) const { return bodies_[i].parent - 1; }  // -1 for the world
  const std::vector<int>& children(int i) const { return children_[i]; }
  const Twist& screw(int i) const { return screws_[i]; }
  const Transform& parent_to_body(int i) const { return parent_to_body_[i]; }
  const Vec3& gravity() const { return gravity_; }

  /// Relative transform of body i in its parent's body frame at coordinate q.
  Transform joint_transform(int i, double q) const {
    // Joints use the screw exponential regardless of the integrator's
    // retraction choice.
    return compose(parent_to_body_[i], retract(screws_[i] * q, RetractionKind::Exponential));
  }

  double total_mass() const {
    double m = 0;
    for (const Body& b : bodies_) m += b.inertia.mass;
    return m;
  }

private:
  void validate() {
    if (bodies_.empty()) throw ValidationError("tree: at least one body required");
    for (int i = 0; i < size(); ++i) {
      const std::string tag = "body " + std::to_string(i + 1);
      const Body& b = bodies_[i];
      if (b.parent < 0 || b.parent > i)
        throw ValidationError(tag + ": not topologically sorted (parent " +
                              std::to_string(b.parent) + ")");
      if (!(b.inertia.mass > 0)) throw ValidationError(tag + ": non-positive mass");
      const Mat3& I = b.inertia.rotational_inertia;
      if ((I - I.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw ValidationError(tag + ": rotational inertia not symmetric");
      Eigen::SelfAdjointEigenSolver<Mat3> es(I);
      if (es.eigenvalues().minCoeff() <= 0.0)
        throw ValidationError(tag + ": rotational inertia not positive-definite");
      if (std::abs(b.joint.axis.norm() - 1.0) > 1e-8)
        throw ValidationError(tag + ": joint axis is not a unit vector");
    }
  }

  void build() {
    const int n = size();
    children_.assign(n, {});
    screws_.resize(n);
    parent_to_body_.resize(n);
    for (int i = 0; i < n; ++i) {
      const Body& b = bodies_[i];
      if (parent(i) >= 0) children_[parent(i)].push_back(i);
      const Vec3& c = b.joint.com;
      if (b.joint.kind == JointKind::Revolute)
        screws_[i] = Twist(b.joint.axis, (-c).cross(b.joint.axis));
      else
        screws_[i] = Twist(Vec3::Zero(), b.joint.axis);
      const Vec3 parent_com = parent(i) >= 0 ? bodies_[parent(i)].joint.com : Vec3::Zero();
      parent_to_body_[i] = Transform::Translation(-parent_com) * b.joint.parent_to_joint *
                           Transform::Translation(c);
    }
  }

  std::vector<Body> bodies_;
  Vec3 gravity_;
  std::vector<std::vector<int>> children_;
  std::vector<Twist> screws_;
  std::vector<Transform> parent_to_body_;
};

/// Uniform chain of n thin-rod links (1 kg, 0.1 m, 5 mm radius) hanging
/// along -y, revolute z joints spaced 0.1 m apart.
inline KinematicTree serial_chain(int n) {
  if (n < 1) throw ValidationError("serial_chain: need at least one body");
  constexpr double kMass = 1.0;
  constexpr double kLength = 0.1;
  constexpr double kRadius = 0.005;
  SpatialInertia inertia;
  inertia.mass = kMass;
  inertia.rotational_inertia =
      Vec3(kMass * kLength * kLength / 12.0, kMass * kRadius * kRadius / 2.0,
           kMass * kLength * kLength / 12.0)
          .asDiagonal();
  std::vector<Body> bodies(n);
  for (int i = 0; i < n; ++i) {
    bodies[i].inertia = inertia;
    bodies[i].joint.kind = JointKind::Revolute;
    bodies[i].joint.axis = Vec3::UnitZ();
    bodies[i].joint.parent_to_joint =
        i == 0 ? Transform::Identity() : Transform::Translation({0.0, -kLength, 0.0});
    bodies[i].joint.com = {0.0, -kLength / 2.0, 0.0};
    bodies[i].parent = i;  // 1-based parent index; body 1 hangs off the world
  }
  return KinematicTree(std::move(bodies));
}

/// World pose of every body frame, one forward pass.
inline std::vector<Transform> forward_kinematics(const KinematicTree& tree, const VectorXd& q) {
  if (q.size() != tree.dof()) throw ValidationError("forward_kinematics: dimension mismatch");
  std::vector<Transform> pose(tree.size());
  for (int i = 0; i < tree.size(); ++i) {
    instrument::count();
    const Transform rel = tree.joint_transform(i, q(i));
    pose[i] = tree.parent(i) < 0 ? rel : compose(pose[tree.parent(i)], rel);
  }
  return pose;
}

/// Configuration pair driving the variational stepper, plus the per-body
/// discrete momenta/velocities of the last completed interval. The cache is
/// regenerable from (q_prev, q_curr); carrying it forward just avoids
/// recomputation.
struct SimState {
  VectorXd q_prev;
  VectorXd q_curr;
  std::vector<CoTwist> momentum;  // mu^{k-1}
  std::vector<Twist> velocity;    // V^{k-1}
  double time = 0.0;
};

}  // namespace varint

#endif
