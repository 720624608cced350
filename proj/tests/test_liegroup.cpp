// SPDX-License-Identifier: MIT

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"
#include "varint/liegroup.hpp"

using namespace varint;
using vtest::random_cotwist;
using vtest::random_transform;
using vtest::random_twist;

namespace {

const RetractionKind kMaps[] = {RetractionKind::Exponential, RetractionKind::Cayley};

double transform_dist(const Transform& a, const Transform& b) {
  return std::max((a.rotation - b.rotation).cwiseAbs().maxCoeff(),
                  (a.translation - b.translation).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("compose: identity and inverse") {
  auto g = vtest::rng();
  for (int i = 0; i < 20; ++i) {
    const Transform T = random_transform(g);
    CHECK(transform_dist(compose(Transform::Identity(), T), T) < 1e-15);
    CHECK(transform_dist(compose(T, Transform::Identity()), T) < 1e-15);
    CHECK(transform_dist(compose(T, T.inverse()), Transform::Identity()) < 1e-12);
  }
}

TEST_CASE("compose: rotZ(pi/2) twice is rotZ(pi)") {
  const Transform T = compose(Transform::RotZ(M_PI / 2), Transform::RotZ(M_PI / 2));
  CHECK(transform_dist(T, Transform::RotZ(M_PI)) < 1e-14);
}

TEST_CASE("compose: long chains stay orthonormal") {
  const Transform step = compose(Transform::RotZ(1e-3), Transform::Translation({1e-3, 0, 2e-3}));
  Transform T = Transform::Identity();
  for (int i = 0; i < 1000000; ++i) T = compose(T, step);
  CHECK(varint::detail::ortho_drift(T.rotation) < 1e-9);
}

TEST_CASE("retract: tau(0) = e exactly") {
  for (auto map : kMaps) {
    const Transform T = retract(Twist::Zero(), map);
    CHECK(T.rotation == Mat3::Identity());
    CHECK(T.translation == Vec3::Zero());
  }
}

TEST_CASE("retract: pure translation") {
  for (auto map : kMaps) {
    const Transform T = retract(Twist({0, 0, 0}, {1, 0, 0}), map);
    CHECK(transform_dist(T, Transform::Translation({1, 0, 0})) < 1e-15);
  }
}

TEST_CASE("retract: exponential of z-rotation is rotZ") {
  const Transform T = retract(Twist({0, 0, M_PI / 2}, {0, 0, 0}));
  CHECK(transform_dist(T, Transform::RotZ(M_PI / 2)) < 1e-14);
}

TEST_CASE("retract_inverse: identity and near-pi logarithm") {
  for (auto map : kMaps) {
    const Twist v = retract_inverse(Transform::Identity(), map);
    CHECK(v.vec().cwiseAbs().maxCoeff() == 0.0);
  }
  const double a = M_PI - 1e-3;
  const Twist v = retract_inverse(Transform::RotZ(a));
  CHECK(std::abs(v.angular.z() - a) < 1e-10);
  CHECK(v.angular.head<2>().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(v.linear.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("retract_inverse: domain error at angle >= pi - 1e-6") {
  for (auto map : kMaps)
    CHECK_THROWS_AS((void)retract_inverse(Transform::RotZ(M_PI - 1e-8), map), DomainError);
}

TEST_CASE("retract round-trip: 1000 random twists") {
  auto g = vtest::rng();
  for (auto map : kMaps) {
    for (int i = 0; i < 1000; ++i) {
      const Twist v = random_twist(g, 3.0, 2.0);
      const Twist u = retract_inverse(retract(v, map), map);
      CHECK((u.vec() - v.vec()).norm() <= 1e-9 * (1.0 + v.vec().norm()));
    }
  }
}

TEST_CASE("dtau_inv: identity at zero base") {
  auto g = vtest::rng();
  for (auto map : kMaps) {
    const Twist w = random_twist(g);
    CHECK((dtau_inv(Twist::Zero(), w, map).vec() - w.vec()).cwiseAbs().maxCoeff() == 0.0);
    const CoTwist f = random_cotwist(g);
    CHECK((dtau_inv_dual(Twist::Zero(), f, map).vec() - f.vec()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("dtau_inv composed with dtau is the identity map") {
  auto g = vtest::rng();
  for (auto map : kMaps) {
    for (int i = 0; i < 50; ++i) {
      const Twist v = random_twist(g, 2.5, 1.5);
      Mat6 dt;
      for (int k = 0; k < 6; ++k) {
        Vec6 e = Vec6::Zero();
        e(k) = 1.0;
        dt.col(k) = dtau(v, Twist::from_vec(e), map).vec();
      }
      const Mat6 prod = dtau_inv_matrix(v, map) * dt;
      CHECK((prod - Mat6::Identity()).cwiseAbs().maxCoeff() < 1e-9);
      const Twist w = random_twist(g);
      CHECK((dtau_inv(v, dtau(v, w, map), map).vec() - w.vec()).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("dtau matches finite differences of the retraction") {
  auto g = vtest::rng();
  const double h = 1e-5;
  for (auto map : kMaps) {
    for (int i = 0; i < 30; ++i) {
      const Twist v = random_twist(g, 2.0, 1.0);
      const Twist w = random_twist(g, 1.0, 1.0);
      // (d/ds) tau(v + s w)|0 . tau(v)^{-1}, central differences.
      const Transform Tp = retract(v + w * h, map);
      const Transform Tm = retract(v + w * (-h), map);
      const Transform Ti = retract(v, map).inverse();
      Eigen::Matrix4d Hp = Eigen::Matrix4d::Identity(), Hm = Eigen::Matrix4d::Identity();
      Hp.topLeftCorner<3, 3>() = Tp.rotation;
      Hp.topRightCorner<3, 1>() = Tp.translation;
      Hm.topLeftCorner<3, 3>() = Tm.rotation;
      Hm.topRightCorner<3, 1>() = Tm.translation;
      Eigen::Matrix4d Hi = Eigen::Matrix4d::Identity();
      Hi.topLeftCorner<3, 3>() = Ti.rotation;
      Hi.topRightCorner<3, 1>() = Ti.translation;
      const Eigen::Matrix4d D = (Hp - Hm) / (2 * h) * Hi;
      const Twist fd = varint::detail::vee4(D);
      const Twist an = dtau(v, w, map);
      CHECK((fd.vec() - an.vec()).norm() / (1.0 + an.vec().norm()) < 1e-6);
    }
  }
}

TEST_CASE("dtau_inv_dual: pairing adjoint identity and transpose structure") {
  auto g = vtest::rng();
  for (auto map : kMaps) {
    for (int i = 0; i < 100; ++i) {
      const Twist v = random_twist(g, 2.0, 1.0);
      const Twist w = random_twist(g);
      const CoTwist f = random_cotwist(g);
      CHECK(std::abs(pairing(dtau_inv_dual(v, f, map), w) - pairing(f, dtau_inv(v, w, map))) <
            1e-12 * (1.0 + f.vec().norm() * w.vec().norm()));
    }
    // Matrix of the dual built column-by-column equals the transpose.
    const Twist v = random_twist(g, 2.0, 1.0);
    Mat6 dual_cols;
    for (int k = 0; k < 6; ++k) {
      Vec6 e = Vec6::Zero();
      e(k) = 1.0;
      dual_cols.col(k) = dtau_inv_dual(v, CoTwist::from_vec(e), map).vec();
    }
    CHECK((dual_cols - dtau_inv_matrix(v, map).transpose()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("dtau_inv_matrix_deriv matches finite differences") {
  auto g = vtest::rng();
  const double h = 1e-6;
  for (auto map : kMaps) {
    for (int i = 0; i < 30; ++i) {
      const Twist v = random_twist(g, 2.0, 1.5);
      const Twist dv = random_twist(g, 1.0, 1.0);
      const Mat6 fd =
          (dtau_inv_matrix(v + dv * h, map) - dtau_inv_matrix(v + dv * (-h), map)) / (2 * h);
      const Mat6 an = dtau_inv_matrix_deriv(v, dv, map);
      CHECK((fd - an).cwiseAbs().maxCoeff() < 1e-7 * (1.0 + an.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("dtau domain error") {
  CHECK_THROWS_AS((void)dtau_inv(Twist({0, 2.0 * M_PI, 0}, {0, 0, 0}), Twist::Zero()), DomainError);
}

TEST_CASE("Ad: trivial actions") {
  auto g = vtest::rng();
  for (int i = 0; i < 20; ++i) {
    const Twist v = random_twist(g);
    const Transform T = random_transform(g);
    CHECK((Ad(Transform::Identity(), v).vec() - v.vec()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((Ad(T, Ad(T.inverse(), v)).vec() - v.vec()).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("Ad: homomorphism and duality on 100 random inputs") {
  auto g = vtest::rng();
  for (int i = 0; i < 100; ++i) {
    const Transform T1 = random_transform(g);
    const Transform T2 = random_transform(g);
    const Twist v = random_twist(g);
    const CoTwist f = random_cotwist(g);
    CHECK((Ad(compose(T1, T2), v).vec() - Ad(T1, Ad(T2, v)).vec()).cwiseAbs().maxCoeff() < 1e-11);
    CHECK(std::abs(pairing(Ad_dual(T1, f), v) - pairing(f, Ad(T1, v))) < 1e-11);
    CHECK((Ad_matrix(T1) * v.vec() - Ad(T1, v).vec()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("pairing is bilinear") {
  auto g = vtest::rng();
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double a = d(g);
    const CoTwist f = random_cotwist(g);
    const Twist v = random_twist(g);
    CHECK(std::abs(pairing(f * a, v) - a * pairing(f, v)) < 1e-12 * (1.0 + std::abs(a)));
  }
}

TEST_CASE("exponential and Cayley agree to third order near zero") {
  auto g = vtest::rng();
  for (int i = 0; i < 100; ++i) {
    Twist v = random_twist(g, 1.0, 1.0);
    const double n = std::max(v.vec().norm(), 1e-12);
    v = v * (1e-2 / n);  // ||v|| = 1e-2
    const Transform a = retract(v, RetractionKind::Exponential);
    const Transform b = retract(v, RetractionKind::Cayley);
    CHECK(transform_dist(a, b) <= 1.0 * std::pow(1e-2, 3));
  }
}

TEST_CASE("twist construction rejects non-finite entries") {
  CHECK_THROWS_AS(Twist({0, 0, std::numeric_limits<double>::quiet_NaN()}, {0, 0, 0}),
                  ValidationError);
}
