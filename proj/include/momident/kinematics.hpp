#pragma once

#include "momident/common.hpp"
#include "momident/robot_model.hpp"

#include <vector>

namespace momident {

/// Pose and twist of one link, all expressed in the inertial frame.
struct LinkState {
  Mat3 R = Mat3::Identity();
  Vec3 r = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 w = Vec3::Zero();
};

/// Base position, Z-X-Y Euler angles and their rates.
struct BaseState {
  Vec3 position = Vec3::Zero();
  Vec3 euler = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 euler_rate = Vec3::Zero();
};

constexpr double kGimbalMargin = 1e-6;

Mat3 skew(const Vec3& v);

/// Rotation of a child frame in its parent: Rz(mount) Rx(twist) Rz(q).
Mat3 joint_rotation(double q, double twist, double mount = 0.0);

/// Rz(z1) Rx(z2) Ry(z3).
Mat3 base_rotation(const Vec3& euler);

/**
 * @brief Maps Euler rates to body angular velocity, w_body = M * euler_rate.
 * @throws NumericalError when |cos(euler[1])| <= margin.
 */
Mat3 euler_rate_map(const Vec3& euler, double margin = kGimbalMargin);

/// Angular velocity in the inertial frame from Euler angles and rates.
Vec3 base_angular_velocity(const Vec3& euler, const Vec3& euler_rate);

/// Euler rates producing the inertial angular velocity w.
Vec3 euler_rates_from_angular_velocity(const Vec3& euler, const Vec3& w);

LinkState base_link_state(const BaseState& base);

/// Rotations and origins of every link for the given base pose and joint angles.
std::vector<LinkState> link_poses(const RobotModel& model, const Mat3& base_R, const Vec3& base_r,
                                  const Eigen::Ref<const Eigen::VectorXd>& q);

/// Fills v and w of every link; poses must come from link_poses.
void propagate_velocities(const RobotModel& model, std::vector<LinkState>& states, const Vec3& base_v,
                          const Vec3& base_w, const Eigen::Ref<const Eigen::VectorXd>& qd);

std::vector<LinkState> forward_kinematics(const RobotModel& model, const LinkState& base,
                                          const Eigen::Ref<const Eigen::VectorXd>& q,
                                          const Eigen::Ref<const Eigen::VectorXd>& qd);

/// Explicit Euler step of position and Euler angles.
BaseState integrate_base(const BaseState& state, double dt);

}  // namespace momident
