#pragma once

#include "momident/common.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace momident {

/// Joint connecting a link to its parent. Revolute about the local z axis.
struct JointGeometry {
  int parent = -1;     ///< parent link index, -1 for the base
  double twist = 0.0;  ///< rad, rotation about the parent x axis
  Vec3 offset = Vec3::Zero();  ///< origin of this link in the parent frame, m
  double mount = 0.0;  ///< rad, fixed rotation about the parent z axis (wheels only)
};

/// Mass, centre of mass and central inertia of one link.
struct MassProperties {
  double mass = 0.0;
  Vec3 com = Vec3::Zero();
  Mat3 inertia_com = Mat3::Zero();
};

/**
 * @brief Link parameter vector (Ixx, Iyy, Izz, Ixy, Iyz, Izx, m, m*ax, m*ay, m*az).
 *
 * Inertia entries are taken about the link frame origin.
 */
Vec10 link_parameters(const MassProperties& props);

/// Inverse of link_parameters. Requires mass > 0 unless the first moments vanish.
MassProperties mass_properties(const Vec10& params);

/// 3x3 inertia from its 6-vector (xx, yy, zz, xy, yz, zx).
Mat3 inertia_matrix(const Eigen::Ref<const Eigen::Matrix<double, 6, 1>>& v);

struct JointLimits {
  double q_min = -kPi;
  double q_max = kPi;
  double rate_max = kPi;
  double accel_max = 4.0 * kPi;
};

struct Link {
  std::string name;
  JointGeometry joint;
  Vec10 params = Vec10::Zero();
  bool is_wheel = false;
  JointLimits limits;  ///< ignored for the base and for wheels
};

/**
 * @brief Immutable kinematic tree with inertial parameters.
 *
 * Link 0 is the base. Every other link carries one revolute joint; the joint
 * vector is ordered by link index (joint k belongs to link k + 1).
 */
class RobotModel {
 public:
  RobotModel() = default;
  explicit RobotModel(std::vector<Link> links);

  const std::vector<Link>& links() const { return links_; }
  const Link& link(int i) const { return links_[static_cast<size_t>(i)]; }
  int link_count() const { return static_cast<int>(links_.size()); }
  /// Number of joints, arms and wheels together.
  int joint_count() const { return link_count() - 1; }
  /// Number of identified (non-wheel) joints.
  int identified_joint_count() const { return static_cast<int>(identified_.size()) - 1; }

  /// Base followed by every non-wheel link, in link order.
  const std::vector<int>& identified_links() const { return identified_; }
  const std::vector<int>& wheel_links() const { return wheels_; }
  const std::vector<int>& children(int i) const { return children_[static_cast<size_t>(i)]; }
  /// Links in the subtree rooted at i, including i.
  std::vector<int> subtree(int i) const;

  /// Stacked parameter vectors of the identified links.
  Eigen::VectorXd standard_parameters() const;
  double total_mass() const;

  /// Copy with the parameters of the given link replaced.
  RobotModel with_link_parameters(int i, const Vec10& params) const;

 private:
  std::vector<Link> links_;
  std::vector<int> identified_;
  std::vector<int> wheels_;
  std::vector<std::vector<int>> children_;
};

/// The 12-DoF dual-arm fixture with three reaction wheels.
RobotModel builtin_dual_arm();

/// Fixture geometry with the offset inertial guess.
RobotModel offset_guess(const RobotModel& model);

RobotModel load_robot(const nlohmann::json& doc);
RobotModel load_robot_file(const std::string& path);
nlohmann::json robot_to_json(const RobotModel& model);

}  // namespace momident
