#pragma once

#include "momident/common.hpp"
#include "momident/kinematics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace momident {

/// Standard deviations of the additive Gaussian measurement noise.
struct NoiseSpec {
  double linear_velocity = 50e-6;   ///< m/s
  double angular_velocity = 80e-6;  ///< rad/s
  double joint_rate = 50e-6;        ///< rad/s
  std::uint64_t seed = 42;
};

struct Sample {
  double t = 0.0;
  BaseState base;
  Vec3 angular_velocity = Vec3::Zero();  ///< base, inertial frame
  Eigen::VectorXd q;
  Eigen::VectorXd qd;
  Vec6 applied_momentum = Vec6::Zero();  ///< minus the wheel momentum
};

/// Uniformly sampled record of a run. Joint vectors follow link order (arms and wheels).
struct Dataset {
  std::vector<Sample> samples;
  std::optional<NoiseSpec> noise;

  int size() const { return static_cast<int>(samples.size()); }
  int joint_count() const { return samples.empty() ? 0 : static_cast<int>(samples.front().q.size()); }
};

/// Path of the JSON metadata file that accompanies a CSV dataset.
std::string sidecar_path(const std::string& csv_path);

void write_dataset(const Dataset& data, const std::string& csv_path);
Dataset read_dataset(const std::string& csv_path);

}  // namespace momident
