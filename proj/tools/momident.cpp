// momident command line front end.
#include "momident/estimation.hpp"
#include "momident/excitation.hpp"
#include "momident/minparam.hpp"
#include "momident/pipeline.hpp"
#include "momident/robot_model.hpp"
#include "momident/simulation.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <iostream>
#include <memory>
#include <optional>

using namespace momident;

namespace {

constexpr int kExitNumerical = 1;
constexpr int kExitConfig = 2;

RobotModel robot_or_fixture(const std::string& path) {
  return path.empty() ? builtin_dual_arm() : load_robot_file(path);
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_text_file(path, text);
}

std::unique_ptr<JointTrajectory> load_trajectory(const std::string& path) {
  const nlohmann::json doc = read_json_file(path);
  const std::string type = doc.value("type", std::string("interval"));
  if (type == "fourier") return std::make_unique<FourierTrajectory>(fourier_from_json(doc));
  if (type == "interval") return std::make_unique<IntervalTrajectory>(trajectory_from_json(doc).trajectory());
  throw ConfigError("'" + path + "': unknown trajectory type '" + type + "'");
}

double trajectory_rate(const std::string& path, double fallback) {
  const nlohmann::json doc = read_json_file(path);
  return doc.value("sample_rate_hz", fallback);
}

/// True minimal parameters from a robot file or a parameter vector document.
Eigen::VectorXd load_truth(const std::string& path, const RobotModel& model, const MinimalBasis& basis) {
  const nlohmann::json doc = read_json_file(path);
  if (doc.contains("links")) {
    const RobotModel truth = load_robot(doc);
    if (truth.joint_count() != model.joint_count()) throw ConfigError("'" + path + "': joint count differs from the robot");
    return basis.reduce(truth.standard_parameters());
  }
  std::vector<double> v;
  try {
    if (doc.contains("phi_m"))
      v = doc["phi_m"].get<std::vector<double>>();
    else
      v = doc.at("phi_m_hat").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
  if (static_cast<int>(v.size()) != basis.size()) throw ConfigError("'" + path + "': parameter vector has the wrong length");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct Options {
  std::string robot, guess, out, trajectory, dataset, truth, report, table, params, summary, emit_path, basis_path;
  std::string out_dir = "momident_out", validation, prune_trajectory;
  std::uint64_t seed = 42;
  int max_combos = 64;
  int max_iterations = 40;
  bool noise = false, skip_excite = false, skip_validate = false, no_reoptimise = false, no_torques = false;
  bool no_noise = false;
  double sigma_v = 50e-6, sigma_w = 80e-6, sigma_qd = 50e-6;
  double dt = 0.002, rate = 0.0, weight = 1.0, period = 1.0;
  std::string label = "estimate";
};

ExcitationConfig excitation_config(const Options& o) {
  ExcitationConfig c;
  c.weight = o.weight;
  c.period = o.period;
  c.sim_dt = o.dt;
  c.optimizer.max_iterations = o.max_iterations;
  return c;
}

int cmd_model(const std::string& action, const Options& o) {
  if (action == "emit-fixture") {
    emit(o.out, robot_to_json(builtin_dual_arm()).dump(2) + "\n");
  } else if (action == "emit-offset") {
    emit(o.out, robot_to_json(offset_guess(builtin_dual_arm())).dump(2) + "\n");
  } else {
    const RobotModel m = robot_or_fixture(o.robot);
    std::cout << "links: " << m.link_count() << "\njoints: " << m.joint_count()
              << "\nidentified joints: " << m.identified_joint_count() << "\nwheels: " << m.wheel_links().size()
              << "\ntotal mass [kg]: " << m.total_mass() << "\nminimal parameters: " << minimal_basis(m).size() << "\n";
    for (int i = 0; i < m.link_count(); ++i) {
      const Link& l = m.link(i);
      std::cout << "  " << i << " " << l.name << " parent " << l.joint.parent << (l.is_wheel ? " wheel" : "")
                << " mass " << l.params(6) << "\n";
    }
  }
  return 0;
}

int cmd_minparams(const Options& o) {
  const RobotModel m = robot_or_fixture(o.robot);
  const MinimalBasis basis = minimal_basis(m);
  emit(o.emit_path, minimal_parameter_report(m));
  if (!o.basis_path.empty()) write_text_file(o.basis_path, basis_csv(basis));
  std::cerr << "minimal parameters: " << basis.size() << "\n";
  return 0;
}

int cmd_excite(const Options& o) {
  const RobotModel robot = robot_or_fixture(o.robot);
  const RobotModel guess = o.guess.empty() ? offset_guess(robot) : load_robot_file(o.guess);
  if (guess.joint_count() != robot.joint_count()) throw ConfigError("guess and robot have different joint counts");
  const ExcitationConfig cfg = excitation_config(o);
  if (!o.prune_trajectory.empty()) {
    TrajectorySpec spec = trajectory_from_json(read_json_file(o.prune_trajectory));
    const std::vector<int> kept = prune_trajectory(guess, spec, cfg);
    std::vector<std::uint64_t> idx;
    for (int p : kept) idx.push_back(spec.combination_indices[static_cast<size_t>(p)]);
    std::cerr << "kept " << kept.size() << " of " << spec.combination_indices.size() << " intervals\n";
    spec.combination_indices = idx;
    emit(o.out, trajectory_to_json(spec).dump(2) + "\n");
    return 0;
  }
  const auto indices = select_combinations(guess.joint_count(), o.max_combos, stage_seed(o.seed, 1));
  const ExcitationRun run = design_excitation(guess, indices, cfg, std::cerr, !o.no_reoptimise);
  emit(o.out, trajectory_to_json(run.refined).dump(2) + "\n");
  return 0;
}

int cmd_simulate(const Options& o) {
  const RobotModel robot = robot_or_fixture(o.robot);
  const auto traj = load_trajectory(o.trajectory);
  if (traj->joint_count() != robot.joint_count()) throw ConfigError("trajectory joint count does not match the robot");
  SimulationOptions sim;
  sim.dt = o.dt;
  sim.sample_rate = o.rate > 0.0 ? o.rate : trajectory_rate(o.trajectory, 50.0);
  Dataset data;
  if (!o.params.empty()) {
    const MinimalBasis basis = minimal_basis(robot);
    const Eigen::VectorXd phi = minimal_from_report(read_json_file(o.params));
    data = simulate(robot, minimal_momentum(robot, basis, phi), *traj, sim);
  } else {
    data = simulate(robot, *traj, sim);
  }
  if (o.noise) {
    NoiseSpec n;
    n.linear_velocity = o.sigma_v;
    n.angular_velocity = o.sigma_w;
    n.joint_rate = o.sigma_qd;
    n.seed = o.seed;
    data = add_noise(data, n);
  }
  write_dataset(data, o.out);
  std::cerr << "wrote " << data.size() << " samples to " << o.out << "\n";
  return 0;
}

int cmd_estimate(const Options& o) {
  const RobotModel robot = robot_or_fixture(o.robot);
  const Dataset data = read_dataset(o.dataset);
  if (data.joint_count() != robot.joint_count()) throw ConfigError("dataset joint count does not match the robot");
  const MinimalBasis basis = minimal_basis(robot);
  std::optional<Eigen::VectorXd> truth;
  if (!o.truth.empty()) truth = load_truth(o.truth, robot, basis);
  const EstimationReport rep = make_report(o.label, regressor(robot, data, basis), truth);
  emit(o.report, report_to_json(rep, minimal_parameter_expressions(robot, basis)).dump(2) + "\n");
  if (!o.table.empty()) write_text_file(o.table, report_table_csv(rep));
  std::cerr << "condition " << rep.condition << ", significant singular values " << rep.significant << "\n";
  if (rep.errors) std::cerr << "epsilon_median " << rep.errors->median << ", epsilon_max " << rep.errors->max << "\n";
  if (rep.rank_deficient) std::cerr << "warning: regressor is rank deficient (rank " << rep.rank << ")\n";
  return 0;
}

int cmd_validate(const Options& o) {
  const RobotModel robot = robot_or_fixture(o.robot);
  const Eigen::VectorXd phi = minimal_from_report(read_json_file(o.params));
  const auto traj = load_trajectory(o.trajectory);
  if (traj->joint_count() != robot.joint_count()) throw ConfigError("trajectory joint count does not match the robot");
  SimulationOptions sim;
  sim.dt = o.dt;
  sim.sample_rate = o.rate > 0.0 ? o.rate : 50.0;
  const ValidationResult v = validate_parameters(robot, phi, *traj, sim, !o.no_torques);
  emit(o.out, validation_csv(v));
  const std::string summary = validation_summary(v).dump(2) + "\n";
  if (!o.summary.empty())
    write_text_file(o.summary, summary);
  else
    std::cerr << summary;
  return 0;
}

int cmd_pipeline(const Options& o) {
  PipelineConfig c;
  c.robot_path = o.robot;
  c.guess_path = o.guess;
  c.trajectory_path = o.trajectory;
  c.validation_path = o.validation;
  c.out_dir = o.out_dir;
  c.seed = o.seed;
  c.max_combos = o.max_combos;
  c.skip_excite = o.skip_excite;
  c.skip_validate = o.skip_validate;
  c.excitation = excitation_config(o);
  if (o.no_noise) c.noise.linear_velocity = c.noise.angular_velocity = c.noise.joint_rate = 0.0;
  run_pipeline(c, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Momentum-based inertial parameter identification for free-floating robots"};
  app.require_subcommand(1);
  Options o;
  std::string model_action = "show";

  auto* model = app.add_subcommand("model", "Emit or inspect robot descriptions");
  model->add_option("action", model_action, "emit-fixture, emit-offset or show")
      ->check(CLI::IsMember({"emit-fixture", "emit-offset", "show"}));
  model->add_option("--robot", o.robot, "Robot JSON (default: built-in fixture)");
  model->add_option("--out", o.out, "Output file (default: stdout)");

  auto* minp = app.add_subcommand("minparams", "Minimal parameter expressions and basis matrix");
  minp->add_option("--robot", o.robot, "Robot JSON (default: built-in fixture)");
  minp->add_option("--emit", o.emit_path, "Expression listing output (default: stdout)");
  minp->add_option("--basis-csv", o.basis_path, "Basis matrix as CSV");

  auto* excite = app.add_subcommand("excite", "Design an exciting trajectory (optimise, prune, re-optimise)");
  excite->add_option("--robot", o.robot, "Robot JSON (default: built-in fixture)");
  excite->add_option("--guess", o.guess, "Inertial guess JSON (default: offset guess of the robot)");
  excite->add_option("--out", o.out, "Trajectory JSON output (default: stdout)");
  excite->add_option("--max-combos", o.max_combos, "Direction combinations used in step 1")->check(CLI::PositiveNumber);
  excite->add_option("--seed", o.seed, "Random seed for the combination subset");
  excite->add_option("--weight", o.weight, "Weight of the rate term");
  excite->add_option("--period", o.period, "Interval period [s]")->check(CLI::PositiveNumber);
  excite->add_option("--dt", o.dt, "Integration step [s]")->check(CLI::PositiveNumber);
  excite->add_option("--max-iterations", o.max_iterations, "Optimizer iteration cap")->check(CLI::NonNegativeNumber);
  excite->add_flag("--no-reoptimise", o.no_reoptimise, "Stop after pruning");
  excite->add_option("--prune", o.prune_trajectory, "Only prune the given trajectory JSON");

  auto* sim = app.add_subcommand("simulate", "Simulate a joint trajectory on the free-floating robot");
  sim->add_option("--robot", o.robot, "Robot JSON (default: built-in fixture)");
  sim->add_option("--params", o.params, "Minimal parameter report; simulates with these instead");
  sim->add_option("--trajectory", o.trajectory, "Interval or Fourier trajectory JSON")->required();
  sim->add_flag("--noise", o.noise, "Add measurement noise");
  sim->add_option("--sigma-v", o.sigma_v, "Linear velocity noise std [m/s]");
  sim->add_option("--sigma-w", o.sigma_w, "Angular velocity noise std [rad/s]");
  sim->add_option("--sigma-qd", o.sigma_qd, "Joint rate noise std [rad/s]");
  sim->add_option("--seed", o.seed, "Noise seed");
  sim->add_option("--dt", o.dt, "Integration step [s]")->check(CLI::PositiveNumber);
  sim->add_option("--rate", o.rate, "Sample rate [Hz] (default: from trajectory or 50)");
  sim->add_option("--out", o.out, "Dataset CSV (a JSON sidecar is written next to it)")->required();

  auto* est = app.add_subcommand("estimate", "Least-squares estimate of the minimal parameters");
  est->add_option("--dataset", o.dataset, "Dataset CSV")->required();
  est->add_option("--robot", o.robot, "Robot JSON (default: built-in fixture)");
  est->add_option("--truth", o.truth, "True parameters: robot JSON or parameter vector JSON");
  est->add_option("--report", o.report, "Report JSON (default: stdout)");
  est->add_option("--table", o.table, "Parameter table CSV");
  est->add_option("--label", o.label, "Report label");

  auto* val = app.add_subcommand("validate", "Predict base twist and joint torques on a validation trajectory");
  val->add_option("--params", o.params, "Estimated parameter report JSON")->required();
  val->add_option("--trajectory", o.trajectory, "Fourier (or interval) trajectory JSON")->required();
  val->add_option("--robot", o.robot, "Robot JSON with the true parameters (default: built-in fixture)");
  val->add_option("--out", o.out, "Error series CSV (default: stdout)");
  val->add_option("--summary", o.summary, "RMS summary JSON (default: stderr)");
  val->add_option("--dt", o.dt, "Integration step [s]")->check(CLI::PositiveNumber);
  val->add_option("--rate", o.rate, "Sample rate [Hz]");
  val->add_flag("--no-torques", o.no_torques, "Skip the torque prediction");

  auto* pipe = app.add_subcommand("pipeline", "Run excite, prune, re-optimise, simulate, estimate and validate");
  pipe->add_option("--robot", o.robot, "Robot JSON (default: built-in fixture)");
  pipe->add_option("--guess", o.guess, "Inertial guess JSON (default: offset guess)");
  pipe->add_option("--trajectory", o.trajectory, "Trajectory JSON used with --skip-excite");
  pipe->add_option("--validation", o.validation, "Fourier validation trajectory JSON");
  pipe->add_option("--out-dir", o.out_dir, "Artifact directory");
  pipe->add_option("--seed", o.seed, "Master random seed");
  pipe->add_option("--max-combos", o.max_combos, "Direction combinations used in step 1")->check(CLI::PositiveNumber);
  pipe->add_option("--max-iterations", o.max_iterations, "Optimizer iteration cap")->check(CLI::NonNegativeNumber);
  pipe->add_option("--weight", o.weight, "Weight of the rate term");
  pipe->add_option("--dt", o.dt, "Integration step [s]")->check(CLI::PositiveNumber);
  pipe->add_flag("--skip-excite", o.skip_excite, "Use --trajectory instead of designing one");
  pipe->add_flag("--skip-validate", o.skip_validate, "Stop after estimation");
  pipe->add_flag("--no-noise", o.no_noise, "Estimate from noise-free data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (model->parsed()) return cmd_model(model_action, o);
    if (minp->parsed()) return cmd_minparams(o);
    if (excite->parsed()) return cmd_excite(o);
    if (sim->parsed()) return cmd_simulate(o);
    if (est->parsed()) return cmd_estimate(o);
    if (val->parsed()) return cmd_validate(o);
    if (pipe->parsed()) return cmd_pipeline(o);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
