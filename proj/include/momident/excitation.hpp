#pragma once

#include "momident/common.hpp"
#include "momident/optimizer.hpp"
#include "momident/robot_model.hpp"
#include "momident/trajectory.hpp"

#include "json.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace momident {

/// Velocity sign (+1 or -1) of every joint during one interval.
using DirectionCombination = std::vector<int>;

/// Combination with the given index; joint 1 is +, joints 2..J read the bits MSB first (1 means -).
DirectionCombination direction_combination(int joints, std::uint64_t index);

/// All 2^(J-1) combinations in index order.
std::vector<DirectionCombination> direction_combinations(int joints);

/// Cycloidal rest-to-rest motion from qi to qf over period.
struct CycloidSample {
  double q;
  double qd;
  double qdd;
};

CycloidSample cycloid(double qi, double qf, double period, double t);

/// Start and range of every joint, radians.
struct SeedParameters {
  Eigen::VectorXd start;
  Eigen::VectorXd range;
};

/// Concatenated cycloidal intervals. knots(j, k) is joint j's position at the start of interval k.
class IntervalTrajectory : public JointTrajectory {
 public:
  IntervalTrajectory(Eigen::MatrixXd knots, double period);

  int joint_count() const override { return static_cast<int>(knots_.rows()); }
  int interval_count() const { return static_cast<int>(knots_.cols()) - 1; }
  double period() const { return period_; }
  double duration() const override { return period_ * interval_count(); }
  const Eigen::MatrixXd& knots() const { return knots_; }
  JointSample evaluate(double t) const override;

 private:
  Eigen::MatrixXd knots_;
  double period_;
};

IntervalTrajectory expand_seed(const SeedParameters& seed, const std::vector<DirectionCombination>& combos,
                               double period);

/// Settings of the trajectory design. Angles in radians.
struct ExcitationConfig {
  double weight = 1.0;
  double period = 1.0;
  double sample_rate = 50.0;
  double sim_dt = 0.002;
  int prune_u_max = 5;
  double prune_delta = 1.0 / 300.0;
  double wheel_start = 0.0;
  double wheel_range = 3.0 * kPi;
  double min_range = 1e-4;
  SqpOptions optimizer;
};

/**
 * @brief Decision vector layout and constraints for the non-wheel joints.
 *
 * The decision vector is (start_1..start_n, range_1..range_n).
 */
struct SeedProblem {
  std::vector<int> arm_joints;  ///< joint indices of the optimised joints
  LinearConstraints constraints;
  Eigen::VectorXd range_max;
};

/// Largest range that respects the rate and acceleration limits for one interval.
double max_seed_range(const JointLimits& limits, double period);

/// @throws ConfigError when a joint has no admissible range.
SeedProblem constraint_set(const RobotModel& model, const std::vector<DirectionCombination>& combos,
                           const ExcitationConfig& config);

/// Full seed (arms from x, wheels pinned) for a decision vector.
SeedParameters seeds_from_decision(const RobotModel& model, const SeedProblem& problem,
                                   const Eigen::VectorXd& x, const ExcitationConfig& config);

Eigen::VectorXd decision_from_seeds(const SeedProblem& problem, const SeedParameters& seeds);

/// Feasible starting point: centred starts and half the admissible range.
Eigen::VectorXd initial_decision(const RobotModel& model, const SeedProblem& problem,
                                 const std::vector<DirectionCombination>& combos);

constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

/// Singular values, descending, via a QR factor first when the matrix is tall.
Eigen::VectorXd singular_values(const Eigen::MatrixXd& M);
int significant_singular_values(const Eigen::MatrixXd& M, double delta);
/// sigma_max / sigma_min, infinite when sigma_min < 1e-14 sigma_max.
double condition_number(const Eigen::MatrixXd& M);

struct ObjectiveTerms {
  double cost = kInfiniteCost;
  double condition = kInfiniteCost;
  double rate_term = 0.0;
};

/// Simulates the guess model along the seeds and scores the resulting regressor.
ObjectiveTerms objective_terms(const RobotModel& guess, const SeedParameters& seeds,
                               const std::vector<DirectionCombination>& combos, const ExcitationConfig& config);

double objective(const RobotModel& guess, const SeedParameters& seeds, const std::vector<DirectionCombination>& combos,
                 const ExcitationConfig& config);

struct SeedOptimization {
  SeedParameters seeds;
  SqpResult result;
  double initial_cost = 0.0;
};

SeedOptimization optimize_seeds(const RobotModel& guess, const std::vector<DirectionCombination>& combos,
                                const ExcitationConfig& config);

/// Warm-started variant.
SeedOptimization optimize_seeds(const RobotModel& guess, const std::vector<DirectionCombination>& combos,
                                const ExcitationConfig& config, const Eigen::VectorXd& x0);

/**
 * @brief Greedy interval selection on a regressor whose rows are grouped per interval.
 * @param rows_per_interval number of rows of each interval block, in order
 * @return kept interval positions (0-based, increasing)
 */
std::vector<int> prune_intervals(const Eigen::MatrixXd& G, const std::vector<int>& rows_per_interval, int u_max,
                                 double delta);

/// Rows of the regressor that fall into each interval, given the sample times of every row block of 6.
std::vector<int> interval_row_counts(const std::vector<double>& times, int intervals, double period);

/// Trajectory file description: combination indices plus seeds.
struct TrajectorySpec {
  int joint_count = 0;
  double period = 1.0;
  double sample_rate = 50.0;
  std::vector<std::uint64_t> combination_indices;
  SeedParameters seeds;

  std::vector<DirectionCombination> combinations() const;
  IntervalTrajectory trajectory() const;
};

nlohmann::json trajectory_to_json(const TrajectorySpec& spec);
TrajectorySpec trajectory_from_json(const nlohmann::json& doc);

/// Deterministic subset of combination indices: all when count >= 2^(J-1).
std::vector<std::uint64_t> select_combinations(int joints, int count, std::uint64_t seed);

}  // namespace momident
