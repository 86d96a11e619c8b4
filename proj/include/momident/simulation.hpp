#pragma once

#include "momident/common.hpp"
#include "momident/dataset.hpp"
#include "momident/kinematics.hpp"
#include "momident/robot_model.hpp"
#include "momident/trajectory.hpp"

#include <functional>
#include <span>

namespace momident {

/// Total momentum of the system for a full set of link states.
using MomentumModel = std::function<Vec6(std::span<const LinkState>)>;

/// Momentum from the model's own standard parameters, wheels included.
MomentumModel standard_momentum(const RobotModel& model);

struct BaseTwist {
  Vec3 v = Vec3::Zero();
  Vec3 w = Vec3::Zero();
};

/**
 * @brief Base twist that makes the total momentum equal to target.
 *
 * The 6x6 base block is assembled from six unit-twist evaluations.
 * @throws NumericalError when the base block is singular.
 */
BaseTwist solve_base_twist(const RobotModel& model, const MomentumModel& momentum, const Mat3& base_R,
                           const Vec3& base_r, const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                           const Vec6& target);

/// Same solve with the model's standard parameters.
BaseTwist base_twist_from_momentum(const RobotModel& model, const Mat3& base_R, const Vec3& base_r,
                                   const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                                   const Vec6& target);

struct SimulationOptions {
  double dt = 0.002;
  double sample_rate = 50.0;
  BaseState initial;  ///< rates ignored; the robot starts at rest
};

/**
 * @brief Free-floating response to prescribed joint motion at zero total momentum.
 *
 * Samples are recorded at t = k / sample_rate for k = 0 .. floor(duration * rate).
 */
Dataset simulate(const RobotModel& model, const MomentumModel& momentum, const JointTrajectory& trajectory,
                 const SimulationOptions& options = {});

Dataset simulate(const RobotModel& model, const JointTrajectory& trajectory, const SimulationOptions& options = {});

/**
 * @brief Adds Gaussian noise to the measured rates and rebuilds the poses from them.
 * @throws ConfigError when the dataset already carries noise.
 */
Dataset add_noise(const Dataset& data, const NoiseSpec& spec);

}  // namespace momident
