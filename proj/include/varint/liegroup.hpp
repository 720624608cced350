// varint: linear-time variational integration for kinematic trees
// SPDX-License-Identifier: MIT
//
// SE(3) spatial algebra: transforms, twists, co-twists, retraction maps
// (exponential and Cayley) with their right-trivialized tangents, and the
// adjoint / co-adjoint actions.
//
// Conventions
// -----------
//   Twist    = (angular, linear), angular block first.
//   Ad_T     = [[R, 0], [p^ R, R]] acting on twists.
//   Ad_dual  : <Ad_dual(T, f), v> = <f, Ad(T, v)> (matrix transpose of Ad_T).
//   dtau_v   : right trivialized tangent, d/ds tau(v + s w)|0 = (dtau_v w)^ tau(v).

#ifndef VARINT_LIEGROUP_HPP
#define VARINT_LIEGROUP_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>

#include "varint/errors.hpp"

namespace varint {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

enum class RetractionKind { Exponential, Cayley };

inline Mat3 skew(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<     0, -v.z(),  v.y(),
       v.z(),      0, -v.x(),
      -v.y(),  v.x(),      0;
  // clang-format on
  return s;
}

inline Vec3 unskew(const Mat3& m) {
  return {m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1)};
}

namespace detail {
inline void check_finite(const Vec3& a, const Vec3& b, const char* what) {
  if (!a.allFinite() || !b.allFinite()) throw ValidationError(std::string(what) + ": non-finite entries");
}
}  // namespace detail

/// Element of se(3): body velocity or small displacement.
struct Twist {
  Vec3 angular = Vec3::Zero();
  Vec3 linear = Vec3::Zero();

  Twist() = default;
  Twist(const Vec3& w, const Vec3& v) : angular(w), linear(v) {
    detail::check_finite(w, v, "Twist");
  }

  static Twist Zero() { return {}; }

  Vec6 vec() const {
    Vec6 x;
    x << angular, linear;
    return x;
  }
  static Twist from_vec(const Vec6& x) { return {x.head<3>(), x.tail<3>()}; }

  Twist operator+(const Twist& o) const { return {angular + o.angular, linear + o.linear}; }
  Twist operator-(const Twist& o) const { return {angular - o.angular, linear - o.linear}; }
  Twist operator*(double a) const { return {a * angular, a * linear}; }
  Twist operator-() const { return {-angular, -linear}; }
  double norm() const { return std::sqrt(angular.squaredNorm() + linear.squaredNorm()); }
};

inline Twist operator*(double a, const Twist& v) { return v * a; }

/// Element of dual se(3): impulse / momentum.
struct CoTwist {
  Vec3 angular = Vec3::Zero();  // impulse moment
  Vec3 linear = Vec3::Zero();   // linear impulse

  CoTwist() = default;
  CoTwist(const Vec3& m, const Vec3& f) : angular(m), linear(f) {
    detail::check_finite(m, f, "CoTwist");
  }

  static CoTwist Zero() { return {}; }

  Vec6 vec() const {
    Vec6 x;
    x << angular, linear;
    return x;
  }
  static CoTwist from_vec(const Vec6& x) { return {x.head<3>(), x.tail<3>()}; }

  CoTwist operator+(const CoTwist& o) const { return {angular + o.angular, linear + o.linear}; }
  CoTwist operator-(const CoTwist& o) const { return {angular - o.angular, linear - o.linear}; }
  CoTwist operator*(double a) const { return {a * angular, a * linear}; }
  CoTwist operator-() const { return {-angular, -linear}; }
  double inf_norm() const { return std::max(angular.cwiseAbs().maxCoeff(), linear.cwiseAbs().maxCoeff()); }
};

inline CoTwist operator*(double a, const CoTwist& f) { return f * a; }

inline double pairing(const CoTwist& f, const Twist& v) {
  return f.angular.dot(v.angular) + f.linear.dot(v.linear);
}

/// Element of SE(3). Rotation is kept orthonormal by a lazy polar-style
/// correction on composition (triggered above 1e-9 drift).
struct Transform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Transform() = default;
  Transform(const Mat3& R, const Vec3& p) : rotation(R), translation(p) {}

  static Transform Identity() { return {}; }
  static Transform Translation(const Vec3& p) { return {Mat3::Identity(), p}; }
  static Transform RotZ(double angle) {
    return {Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix(), Vec3::Zero()};
  }

  Transform inverse() const { return {rotation.transpose(), -(rotation.transpose() * translation)}; }

  Vec3 act(const Vec3& x) const { return rotation * x + translation; }
};

namespace detail {

inline double ortho_drift(const Mat3& R) {
  double d = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      const double g = R.col(i).dot(R.col(j)) - (i == j ? 1.0 : 0.0);
      d = std::max(d, std::abs(g));
    }
  return d;
}

inline void orthonormalize(Mat3& R) {
  // Newton-Schulz toward the polar factor; quadratic for small drift.
  for (int it = 0; it < 5 && ortho_drift(R) > 1e-13; ++it)
    R = 0.5 * R * (3.0 * Mat3::Identity() - R.transpose() * R);
}

}  // namespace detail

inline Transform compose(const Transform& a, const Transform& b) {
  Transform out(a.rotation * b.rotation, a.rotation * b.translation + a.translation);
  if (detail::ortho_drift(out.rotation) > 1e-9) detail::orthonormalize(out.rotation);
  return out;
}

inline Transform operator*(const Transform& a, const Transform& b) { return compose(a, b); }

// ---------------------------------------------------------------------------
// Adjoint and co-adjoint actions
// ---------------------------------------------------------------------------

inline Twist Ad(const Transform& T, const Twist& v) {
  const Vec3 w = T.rotation * v.angular;
  return {w, T.translation.cross(w) + T.rotation * v.linear};
}

/// <Ad_dual(T, f), v> = <f, Ad(T, v)>.
inline CoTwist Ad_dual(const Transform& T, const CoTwist& f) {
  return {T.rotation.transpose() * (f.angular + f.linear.cross(T.translation)),
          T.rotation.transpose() * f.linear};
}

inline Mat6 Ad_matrix(const Transform& T) {
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = T.rotation;
  m.bottomRightCorner<3, 3>() = T.rotation;
  m.bottomLeftCorner<3, 3>() = skew(T.translation) * T.rotation;
  return m;
}

/// Lie bracket ad_v w = [v, w].
inline Twist ad(const Twist& v, const Twist& w) {
  return {v.angular.cross(w.angular), v.angular.cross(w.linear) + v.linear.cross(w.angular)};
}

/// <ad_dual(v, f), w> = <f, ad(v, w)>.
inline CoTwist ad_dual(const Twist& v, const CoTwist& f) {
  return {-v.angular.cross(f.angular) - v.linear.cross(f.linear), -v.angular.cross(f.linear)};
}

// ---------------------------------------------------------------------------
// Scalar coefficient functions of the exponential map
// ---------------------------------------------------------------------------

namespace detail {

// Trigonometric coefficients of exp / dexp / dexp^{-1} on SO(3) and their
// theta-derivatives, with series fallbacks below theta = 0.1 to dodge
// cancellation. Suffix _t marks a derivative divided by theta.
struct ExpCoeffs {
  double s1;    // sin(t)/t
  double b;     // (1 - cos t)/t^2
  double e;     // (t - sin t)/t^3
  double c;     // (1 - (t/2) cot(t/2))/t^2
  double bp_t;  // b'(t)/t
  double ep_t;  // e'(t)/t
  double cp_t;  // c'(t)/t
  double s2;    // (t c''(t) - c'(t))/t^3
};

inline ExpCoeffs exp_coeffs(double theta) {
  ExpCoeffs k{};
  const double t2 = theta * theta;
  if (theta < 0.1) {
    k.s1 = 1.0 + t2 * (-1.0 / 6 + t2 * (1.0 / 120 + t2 * (-1.0 / 5040 + t2 / 362880)));
    k.b = 0.5 + t2 * (-1.0 / 24 + t2 * (1.0 / 720 + t2 * (-1.0 / 40320 + t2 / 3628800)));
    k.e = 1.0 / 6 + t2 * (-1.0 / 120 + t2 * (1.0 / 5040 + t2 * (-1.0 / 362880 + t2 / 39916800)));
    k.c = 1.0 / 12 + t2 * (1.0 / 720 + t2 * (1.0 / 30240 + t2 * (1.0 / 1209600 + t2 / 47900160)));
    k.bp_t = -1.0 / 12 + t2 * (1.0 / 180 + t2 * (-1.0 / 6720 + t2 / 453600));
    k.ep_t = -1.0 / 60 + t2 * (1.0 / 1260 + t2 * (-1.0 / 60480 + t2 / 4989600));
    k.cp_t = 1.0 / 360 + t2 * (1.0 / 7560 + t2 * (1.0 / 201600 + t2 / 5987520));
    k.s2 = 1.0 / 3780 + t2 * (1.0 / 50400 + t2 / 997920);
    return k;
  }
  const double h = 0.5 * theta;
  const double sh = std::sin(h);
  const double ch = std::cos(h);
  const double st = 2.0 * sh * ch;       // sin(theta)
  const double omc = 2.0 * sh * sh;      // 1 - cos(theta)
  const double cot = ch / sh;
  const double csc2 = 1.0 / (sh * sh);
  const double t3 = t2 * theta, t4 = t2 * t2, t5 = t4 * theta;
  k.s1 = st / theta;
  k.b = omc / t2;
  k.e = (theta - st) / t3;
  k.c = (1.0 - h * cot) / t2;
  k.bp_t = (theta * st - 2.0 * omc) / t4;
  k.ep_t = (omc * theta - 3.0 * (theta - st)) / t5;
  const double cp = -2.0 / t3 + csc2 / (4.0 * theta) + cot / (2.0 * t2);
  const double cpp = 6.0 / t4 - csc2 * cot / (4.0 * theta) - csc2 / (2.0 * t2) - cot / t3;
  k.cp_t = cp / theta;
  k.s2 = (theta * cpp - cp) / t3;
  return k;
}

inline Transform hat_exp(const Twist& v) {
  const double theta = v.angular.norm();
  const ExpCoeffs k = exp_coeffs(theta);
  const Mat3 W = skew(v.angular);
  const Mat3 W2 = W * W;
  const Mat3 R = Mat3::Identity() + k.s1 * W + k.b * W2;
  const Mat3 Jl = Mat3::Identity() + k.b * W + k.e * W2;  // left Jacobian of SO(3)
  return {R, Jl * v.linear};
}

inline Transform cayley(const Twist& v) {
  const double t2 = v.angular.squaredNorm();
  const Mat3 W = skew(v.angular);
  const Mat3 W2 = W * W;
  const Mat3 R = Mat3::Identity() + (4.0 * W + 2.0 * W2) / (4.0 + t2);
  const Vec3 p = v.linear + (2.0 * W + W2) * v.linear / (4.0 + t2);
  return {R, p};
}

// 4x4 homogeneous matrix of a twist.
inline Eigen::Matrix4d hat4(const Twist& v) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.topLeftCorner<3, 3>() = skew(v.angular);
  m.topRightCorner<3, 1>() = v.linear;
  return m;
}

inline Twist vee4(const Eigen::Matrix4d& m) {
  return {unskew(m.topLeftCorner<3, 3>()) * 0.5, m.topRightCorner<3, 1>()};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Retraction maps
// ---------------------------------------------------------------------------

inline Transform retract(const Twist& v, RetractionKind map = RetractionKind::Exponential) {
  return map == RetractionKind::Exponential ? detail::hat_exp(v) : detail::cayley(v);
}

/// Inverse retraction. Throws DomainError when the rotation angle reaches
/// pi - 1e-6 (both maps lose injectivity / blow up there).
inline Twist retract_inverse(const Transform& T, RetractionKind map = RetractionKind::Exponential) {
  if (map == RetractionKind::Exponential) {
    Eigen::Quaterniond q(T.rotation);
    if (q.w() < 0) q.coeffs() = -q.coeffs();
    const double vn = q.vec().norm();
    const double theta = 2.0 * std::atan2(vn, q.w());
    if (theta >= M_PI - 1e-6)
      throw DomainError("retract_inverse: rotation angle too close to pi");
    Vec3 w;
    if (vn < 1e-12) {
      w = 2.0 * q.vec();
    } else {
      w = q.vec() * (theta / vn);
    }
    const detail::ExpCoeffs k = detail::exp_coeffs(theta);
    const Mat3 W = skew(w);
    const Mat3 JlInv = Mat3::Identity() - 0.5 * W + k.c * W * W;
    return {w, JlInv * T.translation};
  }
  const double tr = T.rotation.trace();
  // cay^{-1} blows up as the angle approaches pi (1 + tr -> 0).
  if (1.0 + tr < 2.0 * (1.0 + std::cos(M_PI - 1e-6)))
    throw DomainError("retract_inverse: rotation angle too close to pi");
  const Vec3 w = unskew(T.rotation) * (2.0 / (1.0 + tr));
  const Vec3 v = (Mat3::Identity() - 0.5 * skew(w)) * T.translation;
  return {w, v};
}

// ---------------------------------------------------------------------------
// Right trivialized tangents
// ---------------------------------------------------------------------------

namespace detail {

inline void check_dtau_domain(const Twist& v, RetractionKind map) {
  if (map == RetractionKind::Exponential && v.angular.norm() >= 2.0 * M_PI - 1e-6)
    throw DomainError("dtau: angular magnitude outside convergence domain");
}

// dexp^{-1} on SE(3) as [[A, 0], [B, A]]; B is the Frechet derivative of A
// in the direction of the linear block.
inline Mat6 dexp_inv_matrix(const Twist& v) {
  const double theta = v.angular.norm();
  const ExpCoeffs k = exp_coeffs(theta);
  const Mat3 W = skew(v.angular);
  const Mat3 V = skew(v.linear);
  const Mat3 W2 = W * W;
  const Mat3 A = Mat3::Identity() - 0.5 * W + k.c * W2;
  const Mat3 B = -0.5 * V + k.c * (W * V + V * W) + k.cp_t * v.angular.dot(v.linear) * W2;
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = A;
  m.bottomRightCorner<3, 3>() = A;
  m.bottomLeftCorner<3, 3>() = B;
  return m;
}

inline Mat6 dexp_matrix(const Twist& v) {
  const double theta = v.angular.norm();
  const ExpCoeffs k = exp_coeffs(theta);
  const Mat3 W = skew(v.angular);
  const Mat3 V = skew(v.linear);
  const Mat3 W2 = W * W;
  const double wv = v.angular.dot(v.linear);
  const Mat3 A = Mat3::Identity() + k.b * W + k.e * W2;
  const Mat3 B = k.b * V + k.e * (W * V + V * W) + k.bp_t * wv * W + k.ep_t * wv * W2;
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = A;
  m.bottomRightCorner<3, 3>() = A;
  m.bottomLeftCorner<3, 3>() = B;
  return m;
}

// Directional derivative of dexp_inv_matrix at v in direction dv.
inline Mat6 dexp_inv_matrix_deriv(const Twist& v, const Twist& dv) {
  const double theta = v.angular.norm();
  const ExpCoeffs k = exp_coeffs(theta);
  const Mat3 W = skew(v.angular);
  const Mat3 V = skew(v.linear);
  const Mat3 dW = skew(dv.angular);
  const Mat3 dV = skew(dv.linear);
  const Mat3 W2 = W * W;
  const double wv = v.angular.dot(v.linear);
  const double wdw = v.angular.dot(dv.angular);
  const Mat3 dA = -0.5 * dW + k.c * (W * dW + dW * W) + k.cp_t * wdw * W2;
  const Mat3 dB = -0.5 * dV + k.c * (W * dV + dV * W + dW * V + V * dW) +
                  k.cp_t * ((v.angular.dot(dv.linear) + dv.angular.dot(v.linear)) * W2 +
                            wdw * (W * V + V * W) + wv * (W * dW + dW * W)) +
                  k.s2 * wdw * wv * W2;
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = dA;
  m.bottomRightCorner<3, 3>() = dA;
  m.bottomLeftCorner<3, 3>() = dB;
  return m;
}

inline Mat6 dcay_inv_matrix(const Twist& v) {
  const Mat3 W = skew(v.angular);
  const Mat3 V = skew(v.linear);
  const Mat3 A = Mat3::Identity() - 0.5 * W + 0.25 * v.angular * v.angular.transpose();
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = A;
  m.bottomRightCorner<3, 3>() = Mat3::Identity() - 0.5 * W;
  m.bottomLeftCorner<3, 3>() = -0.5 * V + 0.25 * W * V;
  return m;
}

inline Mat6 dcay_inv_matrix_deriv(const Twist& v, const Twist& dv) {
  const Mat3 W = skew(v.angular);
  const Mat3 dW = skew(dv.angular);
  const Mat3 V = skew(v.linear);
  const Mat3 dV = skew(dv.linear);
  const Mat3 dA = -0.5 * dW + 0.25 * (dv.angular * v.angular.transpose() +
                                      v.angular * dv.angular.transpose());
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = dA;
  m.bottomRightCorner<3, 3>() = -0.5 * dW;
  m.bottomLeftCorner<3, 3>() = -0.5 * dV + 0.25 * (dW * V + W * dV);
  return m;
}

// dcay_v(w) = vee((I - v^/2)^{-1} w^ (I + v^/2)^{-1}) on the homogeneous rep.
inline Twist dcay_apply(const Twist& v, const Twist& w) {
  const Eigen::Matrix4d A = Eigen::Matrix4d::Identity() + 0.5 * hat4(v);
  const Eigen::Matrix4d B = Eigen::Matrix4d::Identity() - 0.5 * hat4(v);
  const Eigen::Matrix4d r = B.inverse() * hat4(w) * A.inverse();
  return vee4(r);
}

}  // namespace detail

/// Matrix of dtau^{-1} at base twist v (6x6, acts on twists).
inline Mat6 dtau_inv_matrix(const Twist& v, RetractionKind map = RetractionKind::Exponential) {
  detail::check_dtau_domain(v, map);
  return map == RetractionKind::Exponential ? detail::dexp_inv_matrix(v)
                                            : detail::dcay_inv_matrix(v);
}

/// Directional derivative of dtau_inv_matrix at v in direction dv.
inline Mat6 dtau_inv_matrix_deriv(const Twist& v, const Twist& dv,
                                  RetractionKind map = RetractionKind::Exponential) {
  detail::check_dtau_domain(v, map);
  return map == RetractionKind::Exponential ? detail::dexp_inv_matrix_deriv(v, dv)
                                            : detail::dcay_inv_matrix_deriv(v, dv);
}

inline Twist dtau(const Twist& v, const Twist& w, RetractionKind map = RetractionKind::Exponential) {
  detail::check_dtau_domain(v, map);
  if (map == RetractionKind::Exponential) return Twist::from_vec(detail::dexp_matrix(v) * w.vec());
  return detail::dcay_apply(v, w);
}

inline Twist dtau_inv(const Twist& v, const Twist& w,
                      RetractionKind map = RetractionKind::Exponential) {
  return Twist::from_vec(dtau_inv_matrix(v, map) * w.vec());
}

/// Dual of dtau_inv: <dtau_inv_dual(v, f), w> = <f, dtau_inv(v, w)>.
inline CoTwist dtau_inv_dual(const Twist& v, const CoTwist& f,
                             RetractionKind map = RetractionKind::Exponential) {
  return CoTwist::from_vec(dtau_inv_matrix(v, map).transpose() * f.vec());
}

}  // namespace varint

#endif
