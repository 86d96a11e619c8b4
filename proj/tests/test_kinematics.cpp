#include "doctest.h"
#include "test_support.hpp"

#include "momident/kinematics.hpp"

using namespace momident;
using namespace testing_support;

TEST_CASE("joint rotation is orthonormal with the joint axis as z") {
  Rng rng(2);
  for (int k = 0; k < 100; ++k) {
    const Mat3 R = joint_rotation(rng.uniform(-kPi, kPi), rng.uniform(-kPi, kPi), rng.uniform(-kPi, kPi));
    CHECK((R * R.transpose() - Mat3::Identity()).norm() < 1e-12);
    CHECK(R.determinant() == doctest::Approx(1.0));
  }
  const double a = 0.3, q = 0.7;
  const Mat3 R = joint_rotation(q, a);
  // Modified DH form: Rx(alpha) Rz(q).
  Mat3 expected;
  expected << std::cos(q), -std::sin(q), 0, std::sin(q) * std::cos(a), std::cos(q) * std::cos(a), -std::sin(a),
      std::sin(q) * std::sin(a), std::cos(q) * std::sin(a), std::cos(a);
  CHECK((R - expected).norm() < 1e-14);
}

TEST_CASE("base rotation follows the Z-X-Y convention") {
  const Vec3 z(0.3, -0.2, 0.5);
  const Mat3 expected = Eigen::AngleAxisd(z(0), Vec3::UnitZ()).toRotationMatrix() *
                        Eigen::AngleAxisd(z(1), Vec3::UnitX()).toRotationMatrix() *
                        Eigen::AngleAxisd(z(2), Vec3::UnitY()).toRotationMatrix();
  CHECK((base_rotation(z) - expected).norm() < 1e-14);
  CHECK((base_rotation(Vec3::Zero()) - Mat3::Identity()).norm() == 0.0);
}

TEST_CASE("Euler rate map agrees with the derivative of the rotation") {
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    const Vec3 z(rng.uniform(-kPi, kPi), rng.uniform(-1.3, 1.3), rng.uniform(-kPi, kPi));
    const Vec3 zd = rng.vec3(-1.0, 1.0);
    const double h = 1e-6;
    const Mat3 Rdot = (base_rotation(z + h * zd) - base_rotation(z - h * zd)) / (2 * h);
    const Mat3 W = Rdot * base_rotation(z).transpose();
    const Vec3 w_fd(W(2, 1), W(0, 2), W(1, 0));
    CHECK((base_angular_velocity(z, zd) - w_fd).norm() < 1e-8);
    CHECK((euler_rates_from_angular_velocity(z, base_angular_velocity(z, zd)) - zd).norm() < 1e-10);
  }
}

TEST_CASE("gimbal lock is reported") {
  CHECK_THROWS_AS(euler_rate_map(Vec3(0.0, kPi / 2, 0.0)), NumericalError);
  CHECK_NOTHROW(euler_rate_map(Vec3(0.0, kPi / 2 - 1e-3, 0.0)));
}

TEST_CASE("link velocities are the time derivatives of the poses") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const RobotModel m = random_tree(rng, rng.integer(1, 6), trial % 2 == 0);
    BaseState b;
    b.position = rng.vec3(-1, 1);
    b.euler = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    b.velocity = rng.vec3(-1, 1);
    b.euler_rate = rng.vec3(-1, 1);
    const Eigen::VectorXd q = rng.vector(m.joint_count(), -kPi, kPi);
    const Eigen::VectorXd qd = rng.vector(m.joint_count(), -1, 1);
    const auto s = forward_kinematics(m, base_link_state(b), q, qd);
    const double h = 1e-6;
    BaseState bp = b, bm = b;
    bp.position += h * b.velocity;
    bp.euler += h * b.euler_rate;
    bm.position -= h * b.velocity;
    bm.euler -= h * b.euler_rate;
    const auto sp = link_poses(m, base_rotation(bp.euler), bp.position, q + h * qd);
    const auto sm = link_poses(m, base_rotation(bm.euler), bm.position, q - h * qd);
    for (int i = 0; i < m.link_count(); ++i) {
      const Vec3 v_fd = (sp[i].r - sm[i].r) / (2 * h);
      const Mat3 W = (sp[i].R - sm[i].R) / (2 * h) * s[i].R.transpose();
      CHECK((s[i].v - v_fd).norm() < 1e-7);
      CHECK((s[i].w - Vec3(W(2, 1), W(0, 2), W(1, 0))).norm() < 1e-7);
    }
  }
}

TEST_CASE("fixture mounting points and wheel axes") {
  const RobotModel m = builtin_dual_arm();
  const auto s = link_poses(m, Mat3::Identity(), Vec3::Zero(), Eigen::VectorXd::Zero(m.joint_count()));
  CHECK((s[1].r - Vec3(0.7, 0.3, 0.9)).norm() < 1e-12);
  CHECK((s[4].r - Vec3(-0.3, 0.3, 0.9)).norm() < 1e-12);
  // Wheel spin axes are mutually orthogonal.
  const auto& w = m.wheel_links();
  Mat3 axes;
  for (int k = 0; k < 3; ++k) axes.col(k) = s[w[k]].R.col(2);
  CHECK((axes.transpose() * axes - Mat3::Identity()).norm() < 1e-12);
}

TEST_CASE("explicit Euler step of the base") {
  BaseState b;
  b.velocity = Vec3(1, 2, 3);
  b.euler_rate = Vec3(0.1, 0.2, 0.3);
  const BaseState n = integrate_base(b, 0.5);
  CHECK((n.position - Vec3(0.5, 1.0, 1.5)).norm() < 1e-15);
  CHECK((n.euler - Vec3(0.05, 0.1, 0.15)).norm() < 1e-15);
}
