#pragma once

#include "momident/common.hpp"

namespace momident {

/// Joint positions, rates and accelerations at one instant.
struct JointSample {
  Eigen::VectorXd q;
  Eigen::VectorXd qd;
  Eigen::VectorXd qdd;
};

/// Time-parameterised motion of every joint (arms and wheels, link order).
class JointTrajectory {
 public:
  virtual ~JointTrajectory() = default;
  virtual int joint_count() const = 0;
  virtual double duration() const = 0;
  virtual JointSample evaluate(double t) const = 0;
};

}  // namespace momident
