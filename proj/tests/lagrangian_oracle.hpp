#pragma once

#include "momident/estimation.hpp"
#include "momident/kinematics.hpp"
#include "momident/simulation.hpp"

// Joint torques from the Lagrange equations of the free-floating system with generalized
// coordinates (base position, Euler angles, joint angles). Kinetic energy comes from the
// standard parameters of every link; all derivatives are finite differences.
namespace oracle {

using namespace momident;

struct State {
  Vec3 r0;
  Vec3 zeta;
  Vec3 r0_dot;
  Vec3 zeta_dot;
  Eigen::VectorXd q;
  Eigen::VectorXd qd;
};

inline double kinetic_energy(const RobotModel& model, const State& x) {
  BaseState b;
  b.position = x.r0;
  b.euler = x.zeta;
  b.velocity = x.r0_dot;
  b.euler_rate = x.zeta_dot;
  const auto st = forward_kinematics(model, base_link_state(b), x.q, x.qd);
  double T = 0.0;
  for (int i = 0; i < model.link_count(); ++i) {
    const MassProperties mp = mass_properties(model.link(i).params);
    const Vec3 arm = st[i].R * mp.com;
    const Vec3 cdot = st[i].v + st[i].w.cross(arm);
    T += 0.5 * mp.mass * cdot.squaredNorm() +
         0.5 * st[i].w.dot(st[i].R * mp.inertia_com * st[i].R.transpose() * st[i].w);
  }
  return T;
}

/// Full state at time t for a base pose, with base rates from zero total momentum.
inline State state_at(const RobotModel& model, const JointTrajectory& traj, double t, const Vec3& r0, const Vec3& zeta) {
  const JointSample js = traj.evaluate(t);
  const BaseTwist tw = base_twist_from_momentum(model, base_rotation(zeta), r0, js.q, js.qd, Vec6::Zero());
  return {r0, zeta, tw.v, euler_rates_from_angular_velocity(zeta, tw.w), js.q, js.qd};
}

/// Base pose after a midpoint step of length h from time t.
inline State step(const RobotModel& model, const JointTrajectory& traj, const State& x, double t, double h) {
  const State mid = state_at(model, traj, t + 0.5 * h, x.r0 + 0.5 * h * x.r0_dot, x.zeta + 0.5 * h * x.zeta_dot);
  return state_at(model, traj, t + h, x.r0 + h * mid.r0_dot, x.zeta + h * mid.zeta_dot);
}

/// Torques of the given joints (indices into the joint vector).
inline Eigen::VectorXd joint_torques(const RobotModel& model, const JointTrajectory& traj, double t,
                                     const BaseState& pose, const std::vector<int>& joints, double h = 1e-3) {
  const State x0 = state_at(model, traj, t, pose.position, pose.euler);
  const State xp = step(model, traj, x0, t, h), xm = step(model, traj, x0, t, -h);
  auto dT_dqd = [&](State x, int j) {
    const double e = 1e-3;
    x.qd(j) += e;
    const double tp = kinetic_energy(model, x);
    x.qd(j) -= 2 * e;
    return (tp - kinetic_energy(model, x)) / (2 * e);
  };
  auto dT_dq = [&](State x, int j) {
    const double e = 1e-6;
    x.q(j) += e;
    const double tp = kinetic_energy(model, x);
    x.q(j) -= 2 * e;
    return (tp - kinetic_energy(model, x)) / (2 * e);
  };
  Eigen::VectorXd tau(static_cast<Eigen::Index>(joints.size()));
  for (size_t k = 0; k < joints.size(); ++k) {
    const int j = joints[k];
    tau(static_cast<Eigen::Index>(k)) = (dT_dqd(xp, j) - dT_dqd(xm, j)) / (2 * h) - dT_dq(x0, j);
  }
  return tau;
}

/// Joint-vector indices of the non-wheel joints.
inline std::vector<int> arm_joints(const RobotModel& model) {
  std::vector<int> j;
  for (int i = 1; i < model.link_count(); ++i)
    if (!model.link(i).is_wheel) j.push_back(i - 1);
  return j;
}

}  // namespace oracle
