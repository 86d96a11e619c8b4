#pragma once

#include "momident/dataset.hpp"
#include "momident/estimation.hpp"
#include "momident/excitation.hpp"

#include <cstdint>
#include <ostream>
#include <string>

namespace momident {

struct PipelineConfig {
  std::string robot_path;       ///< empty: built-in fixture
  std::string guess_path;       ///< empty: offset guess of the fixture
  std::string trajectory_path;  ///< used when excitation is skipped
  std::string validation_path;  ///< Fourier trajectory; empty: bundled default
  std::string out_dir = "momident_out";
  NoiseSpec noise;
  std::uint64_t seed = 42;
  int max_combos = 64;
  bool skip_excite = false;
  bool skip_validate = false;
  ExcitationConfig excitation;
};

/// Thrown by a pipeline stage; carries the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, int exit_code)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)), code_(exit_code) {}
  const std::string& stage() const { return stage_; }
  int exit_code() const { return code_; }

 private:
  std::string stage_;
  int code_;
};

/// Outcome of the three-step trajectory design.
struct ExcitationRun {
  TrajectorySpec step1;             ///< all selected combinations, optimised seeds
  std::vector<int> kept_positions;  ///< positions in step1 kept by pruning
  TrajectorySpec refined;            ///< kept combinations with re-optimised seeds
  double step1_cost = 0.0;
  double final_cost = 0.0;
  double pruned_condition = 0.0;    ///< before re-optimisation
  int pruned_significant = 0;
};

/// Step 1 (optimise all given combinations), step 2 (prune) and step 3 (re-optimise the kept set).
ExcitationRun design_excitation(const RobotModel& guess, const std::vector<std::uint64_t>& combination_indices,
                                const ExcitationConfig& config, std::ostream& log, bool reoptimise = true);

/// Pruning of a given trajectory on a model; returns kept interval positions.
std::vector<int> prune_trajectory(const RobotModel& model, const TrajectorySpec& spec, const ExcitationConfig& config);

struct ValidationResult {
  std::vector<double> times;
  Eigen::MatrixXd twist_true;     ///< N x 6
  Eigen::MatrixXd twist_pred;
  Eigen::MatrixXd torque_true;    ///< N x n
  Eigen::MatrixXd torque_pred;
  Eigen::VectorXd twist_rms;      ///< per component
  Eigen::VectorXd torque_rms;     ///< per joint
};

/**
 * @brief Compares predictions from estimated minimal parameters with the true model.
 *
 * The true twist comes from the standard-parameter simulation and the true torques from the
 * true minimal parameters.
 */
ValidationResult validate_parameters(const RobotModel& model, const Eigen::VectorXd& estimated,
                                     const JointTrajectory& trajectory, const SimulationOptions& sim = {},
                                     bool with_torques = true);

/// Per-sample errors (true minus predicted) as CSV.
std::string validation_csv(const ValidationResult& result);
nlohmann::json validation_summary(const ValidationResult& result);

/// Runs excite, prune, re-optimise, simulate, add noise, estimate and validate.
void run_pipeline(const PipelineConfig& config, std::ostream& log);

/// Seed of a pipeline stage derived from the master seed.
std::uint64_t stage_seed(std::uint64_t master, int stage);

/// Default validation motion for a model: two harmonics at pi/20 rad/s, 40 s.
FourierTrajectory default_validation_trajectory(const RobotModel& model);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
nlohmann::json read_json_file(const std::string& path);

}  // namespace momident
