#pragma once

#include "momident/common.hpp"
#include "momident/minparam.hpp"
#include "momident/robot_model.hpp"
#include "momident/simulation.hpp"
#include "momident/trajectory.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace momident {

struct LeastSquaresResult {
  Eigen::VectorXd estimate;
  int rank = 0;
  bool rank_deficient = false;
  /// For each unexcited direction, the parameter with the largest component.
  std::vector<int> unexcited;
};

/**
 * @brief Least squares with columns scaled to unit RMS and a pivoted orthogonal factorization.
 *
 * Falls back to the minimum-norm solution (in scaled coordinates) when rank deficient.
 */
LeastSquaresResult estimate(const Eigen::MatrixXd& G, const Eigen::VectorXd& m);

struct RelativeErrors {
  Eigen::VectorXd per_parameter;  ///< NaN where the true value is zero
  double median = 0.0;
  double max = 0.0;
  std::vector<int> excluded;
};

RelativeErrors relative_errors(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth);

double rms_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// q_j = q0_j + sum_i s_ji sin(i wf t) + c_ji cos(i wf t).
class FourierTrajectory : public JointTrajectory {
 public:
  FourierTrajectory(Eigen::VectorXd offset, Eigen::MatrixXd sin_coeffs, Eigen::MatrixXd cos_coeffs,
                    double base_frequency, double duration);

  int joint_count() const override { return static_cast<int>(offset_.size()); }
  int harmonics() const { return static_cast<int>(sin_.cols()); }
  double frequency() const { return wf_; }
  double duration() const override { return duration_; }
  JointSample evaluate(double t) const override;

  const Eigen::VectorXd& offset() const { return offset_; }
  const Eigen::MatrixXd& sin_coefficients() const { return sin_; }
  const Eigen::MatrixXd& cos_coefficients() const { return cos_; }

 private:
  Eigen::VectorXd offset_;
  Eigen::MatrixXd sin_;
  Eigen::MatrixXd cos_;
  double wf_;
  double duration_;
};

nlohmann::json fourier_to_json(const FourierTrajectory& traj);
FourierTrajectory fourier_from_json(const nlohmann::json& doc);

/// Momentum from minimal parameters of the identified links plus the known wheels.
MomentumModel minimal_momentum(const RobotModel& model, const MinimalBasis& basis, const Eigen::VectorXd& minimal);

/// Base twist (v, w) per recorded sample, shape N x 6.
Eigen::MatrixXd twist_series(const Dataset& data);

/// Simulates the trajectory with the minimal-parameter momentum model and returns the twist series.
Eigen::MatrixXd predict_base_twist(const RobotModel& model, const MinimalBasis& basis, const Eigen::VectorXd& minimal,
                                   const JointTrajectory& trajectory, const SimulationOptions& options = {});

struct TorqueOptions {
  double step = 1e-4;              ///< s, central-difference step
  double richardson_tol = 1e-5;    ///< N*m
  bool check_richardson = true;
};

/**
 * @brief Joint torques of the non-wheel joints at time t from subtree momentum rates.
 *
 * base_R and base_r describe the base pose at t. The pose at t +- h is obtained by a
 * midpoint step from the momentum-conserving base twist.
 */
Eigen::VectorXd joint_torques_at(const RobotModel& model, const MomentumModel& momentum, const MinimalBasis& basis,
                                 const Eigen::VectorXd& minimal, const JointTrajectory& trajectory, double t,
                                 const BaseState& base, const TorqueOptions& options = {});

/// Torque series (N x n) at the recorded samples of a minimal-parameter simulation.
Eigen::MatrixXd predict_joint_torques(const RobotModel& model, const MinimalBasis& basis,
                                      const Eigen::VectorXd& minimal, const JointTrajectory& trajectory,
                                      const SimulationOptions& sim = {}, const TorqueOptions& options = {});

struct EstimationReport {
  std::string label;
  Eigen::VectorXd minimal;
  std::optional<Eigen::VectorXd> truth;
  std::optional<RelativeErrors> errors;
  double condition = 0.0;
  int significant = 0;
  int rank = 0;
  bool rank_deficient = false;
  std::vector<int> unexcited;
  double residual_rms = 0.0;
  double truth_residual_rms = 0.0;  ///< residual at the true parameters, when known
  int rows = 0;
};

EstimationReport make_report(const std::string& label, const Regressor& reg, const std::optional<Eigen::VectorXd>& truth,
                             double delta = 1.0 / 300.0);

nlohmann::json report_to_json(const EstimationReport& report, const std::vector<std::string>& expressions = {});
Eigen::VectorXd minimal_from_report(const nlohmann::json& doc);

/// Rows: index, true value, estimate, relative error.
std::string report_table_csv(const EstimationReport& report);

}  // namespace momident
