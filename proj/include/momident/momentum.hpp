#pragma once

#include "momident/common.hpp"
#include "momident/kinematics.hpp"

#include <span>
#include <vector>

namespace momident {

using LinkKinematicMatrix = Eigen::Matrix<double, 6, 10>;

/// 3x6 matrix with omega_operator(w) * (Ixx, Iyy, Izz, Ixy, Iyz, Izx) = I * w.
Eigen::Matrix<double, 3, 6> omega_operator(const Vec3& w);

/// Maps the link parameter vector to (p, l), l taken about the inertial origin.
LinkKinematicMatrix link_kinematic_matrix(const LinkState& s);

/// Momentum from mass, centre of mass and central inertia (nonlinear form).
Vec6 link_momentum(const LinkState& s, const Vec10& params);

/// [K_i0 ... K_ik] for the listed links.
Eigen::MatrixXd system_kinematic_matrix(std::span<const LinkState> states, std::span<const int> links);

/// Vertically stacked system matrices with their sample times.
struct GlobalKinematicMatrix {
  Eigen::MatrixXd matrix;
  std::vector<double> times;

  int sample_count() const { return static_cast<int>(times.size()); }
  Eigen::MatrixXd sample(int i) const { return matrix.middleRows(6 * i, 6); }
};

GlobalKinematicMatrix stack_global(std::span<const Eigen::MatrixXd> samples, std::span<const double> times);

/// Sum of link momenta over the listed links, linear form.
Vec6 total_momentum(const RobotModel& model, std::span<const LinkState> states, std::span<const int> links);

}  // namespace momident
