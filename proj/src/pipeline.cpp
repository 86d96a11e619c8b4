#include "momident/pipeline.hpp"

#include "momident/minparam.hpp"
#include "momident/simulation.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace momident {

namespace fs = std::filesystem;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file '" + path + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

nlohmann::json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::uint64_t stage_seed(std::uint64_t master, int stage) {
  return master + 1000003ULL * static_cast<std::uint64_t>(stage);
}

FourierTrajectory default_validation_trajectory(const RobotModel& model) {
  const int J = model.joint_count();
  Eigen::VectorXd q0 = Eigen::VectorXd::Zero(J);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(J, 2), C = Eigen::MatrixXd::Zero(J, 2);
  int arm = 0;
  for (int j = 0; j < J; ++j) {
    if (model.link(j + 1).is_wheel) {
      // Wheels spin a few turns per period.
      S(j, 0) = 4.0 * kPi;
      S(j, 1) = 1.0 * kPi;
      continue;
    }
    const double k = static_cast<double>(arm++);
    S(j, 0) = deg2rad(10.0 - 1.0 * k);
    S(j, 1) = deg2rad(3.0 + 0.5 * k);
    C(j, 0) = deg2rad(4.0 + 0.5 * k);
    C(j, 1) = deg2rad(-2.0 + 0.3 * k);
    q0(j) = -(C(j, 0) + C(j, 1));  // start at zero
  }
  return FourierTrajectory(q0, S, C, kPi / 20.0, 40.0);
}

std::vector<int> prune_trajectory(const RobotModel& model, const TrajectorySpec& spec, const ExcitationConfig& config) {
  SimulationOptions sim;
  sim.dt = config.sim_dt;
  sim.sample_rate = config.sample_rate;
  const IntervalTrajectory traj = spec.trajectory();
  const Dataset data = simulate(model, traj, sim);
  const Regressor reg = regressor(model, data, minimal_basis(model));
  return prune_intervals(reg.G, interval_row_counts(reg.times, traj.interval_count(), spec.period), config.prune_u_max,
                         config.prune_delta);
}

ExcitationRun design_excitation(const RobotModel& guess, const std::vector<std::uint64_t>& combination_indices,
                                const ExcitationConfig& config, std::ostream& log, bool reoptimise) {
  ExcitationRun run;
  const int J = guess.joint_count();
  run.step1.joint_count = J;
  run.step1.period = config.period;
  run.step1.sample_rate = config.sample_rate;
  run.step1.combination_indices = combination_indices;
  const auto combos = run.step1.combinations();
  log << "step 1: optimising seeds over " << combos.size() << " combinations\n";
  const SeedOptimization s1 = optimize_seeds(guess, combos, config);
  run.step1.seeds = s1.seeds;
  run.step1_cost = s1.result.cost;
  log << "step 1: cost " << s1.initial_cost << " -> " << s1.result.cost << " in " << s1.result.iterations
      << " iterations\n";

  run.kept_positions = prune_trajectory(guess, run.step1, config);
  run.refined = run.step1;
  run.refined.combination_indices.clear();
  for (int p : run.kept_positions) run.refined.combination_indices.push_back(combination_indices[static_cast<size_t>(p)]);
  const auto kept = run.refined.combinations();
  {
    SimulationOptions sim;
    sim.dt = config.sim_dt;
    sim.sample_rate = config.sample_rate;
    const Regressor reg = regressor(guess, simulate(guess, run.refined.trajectory(), sim), minimal_basis(guess));
    run.pruned_condition = condition_number(reg.G);
    run.pruned_significant = significant_singular_values(reg.G, config.prune_delta);
  }
  log << "step 2: kept " << kept.size() << " of " << combos.size() << " intervals, condition "
      << run.pruned_condition << ", significant singular values " << run.pruned_significant << "\n";

  run.final_cost = objective(guess, run.refined.seeds, kept, config);
  if (!reoptimise) return run;
  const SeedProblem problem = constraint_set(guess, kept, config);
  Eigen::VectorXd x0 = decision_from_seeds(problem, run.refined.seeds);
  if (!problem.constraints.feasible(x0, 1e-9)) {
    log << "step 3: step-1 seeds violate the limits of the kept walk, restarting from the default seeds\n";
    x0 = initial_decision(guess, problem, kept);
  }
  const SeedOptimization s3 = optimize_seeds(guess, kept, config, x0);
  if (s3.result.cost <= run.final_cost || !std::isfinite(run.final_cost)) {
    run.refined.seeds = s3.seeds;
    run.final_cost = s3.result.cost;
  }
  log << "step 3: cost " << s3.initial_cost << " -> " << run.final_cost << " in " << s3.result.iterations
      << " iterations\n";
  return run;
}

ValidationResult validate_parameters(const RobotModel& model, const Eigen::VectorXd& estimated,
                                     const JointTrajectory& trajectory, const SimulationOptions& sim,
                                     bool with_torques) {
  const MinimalBasis basis = minimal_basis(model);
  if (estimated.size() != basis.size())
    throw ConfigError("estimated parameter vector has " + std::to_string(estimated.size()) + " entries, the model needs " +
                      std::to_string(basis.size()));
  const Eigen::VectorXd truth = basis.reduce(model.standard_parameters());
  ValidationResult r;
  const Dataset data = simulate(model, trajectory, sim);
  for (const Sample& s : data.samples) r.times.push_back(s.t);
  r.twist_true = twist_series(data);
  r.twist_pred = predict_base_twist(model, basis, estimated, trajectory, sim);
  r.twist_rms.resize(6);
  for (int c = 0; c < 6; ++c) r.twist_rms(c) = rms_error(r.twist_true.col(c), r.twist_pred.col(c));
  if (with_torques) {
    r.torque_true = predict_joint_torques(model, basis, truth, trajectory, sim);
    r.torque_pred = predict_joint_torques(model, basis, estimated, trajectory, sim);
    r.torque_rms.resize(r.torque_true.cols());
    for (Eigen::Index c = 0; c < r.torque_true.cols(); ++c)
      r.torque_rms(c) = rms_error(r.torque_true.col(c), r.torque_pred.col(c));
  }
  return r;
}

std::string validation_csv(const ValidationResult& r) {
  std::ostringstream os;
  os.precision(10);
  os << "t,err_vx,err_vy,err_vz,err_wx,err_wy,err_wz";
  for (Eigen::Index j = 0; j < r.torque_true.cols(); ++j) os << ",err_tau" << j + 1;
  os << "\n";
  for (size_t i = 0; i < r.times.size(); ++i) {
    const Eigen::Index k = static_cast<Eigen::Index>(i);
    os << r.times[i];
    for (int c = 0; c < 6; ++c) os << "," << r.twist_true(k, c) - r.twist_pred(k, c);
    for (Eigen::Index j = 0; j < r.torque_true.cols(); ++j) os << "," << r.torque_true(k, j) - r.torque_pred(k, j);
    os << "\n";
  }
  return os.str();
}

nlohmann::json validation_summary(const ValidationResult& r) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json j;
  j["samples"] = r.times.size();
  j["twist_rms"] = {{"vx", r.twist_rms(0)}, {"vy", r.twist_rms(1)}, {"vz", r.twist_rms(2)},
                    {"wx", r.twist_rms(3)}, {"wy", r.twist_rms(4)}, {"wz", r.twist_rms(5)}};
  j["torque_rms"] = vec(r.torque_rms);
  return j;
}

namespace {

template <typename F>
auto run_stage(const std::string& name, std::ostream& log, F&& body) {
  log << "== " << name << "\n";
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const ConfigError& e) {
    throw StageError(name, e.what(), 2);
  } catch (const NumericalError& e) {
    throw StageError(name, e.what(), 1);
  } catch (const std::exception& e) {
    throw StageError(name, e.what(), 1);
  }
}

void write_json(const fs::path& path, const nlohmann::json& doc) { write_text_file(path.string(), doc.dump(2) + "\n"); }

}  // namespace

void run_pipeline(const PipelineConfig& config, std::ostream& log) {
  const fs::path out(config.out_dir);
  RobotModel truth, guess;
  run_stage("setup", log, [&] {
    truth = config.robot_path.empty() ? builtin_dual_arm() : load_robot_file(config.robot_path);
    guess = config.guess_path.empty() ? offset_guess(truth) : load_robot_file(config.guess_path);
    if (guess.joint_count() != truth.joint_count()) throw ConfigError("guess and robot have different joint counts");
    if (config.skip_excite && config.trajectory_path.empty())
      throw ConfigError("skipping excitation requires a trajectory file");
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ConfigError("cannot create output directory '" + out.string() + "': " + ec.message());
    write_json(out / "robot.json", robot_to_json(truth));
    write_json(out / "guess.json", robot_to_json(guess));
    return 0;
  });

  TrajectorySpec spec;
  if (config.skip_excite) {
    spec = run_stage("load trajectory", log, [&] { return trajectory_from_json(read_json_file(config.trajectory_path)); });
    if (spec.joint_count != truth.joint_count())
      throw StageError("load trajectory", "trajectory joint count does not match the robot", 2);
  } else {
    const ExcitationRun run = run_stage("excite", log, [&] {
      const auto indices =
          select_combinations(guess.joint_count(), config.max_combos, stage_seed(config.seed, 1));
      ExcitationRun r = design_excitation(guess, indices, config.excitation, log);
      write_json(out / "trajectory_step1.json", trajectory_to_json(r.step1));
      nlohmann::json prune;
      prune["kept_positions"] = r.kept_positions;
      prune["kept_combination_indices"] = r.refined.combination_indices;
      prune["condition_number"] = r.pruned_condition;
      prune["significant_singular_values"] = r.pruned_significant;
      write_json(out / "prune.json", prune);
      write_json(out / "trajectory.json", trajectory_to_json(r.refined));
      return r;
    });
    spec = run.refined;
  }

  const Dataset noisy = run_stage("simulate", log, [&] {
    SimulationOptions sim;
    sim.dt = config.excitation.sim_dt;
    sim.sample_rate = spec.sample_rate;
    const Dataset clean = simulate(truth, spec.trajectory(), sim);
    write_dataset(clean, (out / "dataset_clean.csv").string());
    NoiseSpec noise = config.noise;
    noise.seed = stage_seed(config.seed, 2);
    Dataset d = add_noise(clean, noise);
    write_dataset(d, (out / "dataset.csv").string());
    log << "simulated " << d.size() << " samples over " << spec.trajectory().duration() << " s\n";
    return d;
  });

  const MinimalBasis basis = minimal_basis(truth);
  const Eigen::VectorXd truth_minimal = basis.reduce(truth.standard_parameters());
  const EstimationReport report = run_stage("estimate", log, [&] {
    const Regressor reg = regressor(truth, noisy, basis);
    EstimationReport rep = make_report("noisy", reg, truth_minimal, config.excitation.prune_delta);
    write_json(out / "report.json", report_to_json(rep, minimal_parameter_expressions(truth, basis)));
    write_text_file((out / "report_table.csv").string(), report_table_csv(rep));
    log << "estimate: epsilon_median " << rep.errors->median << ", epsilon_max " << rep.errors->max
        << ", condition " << rep.condition << ", significant " << rep.significant << "\n";
    if (rep.rank_deficient) log << "estimate: warning, regressor is rank deficient (rank " << rep.rank << ")\n";
    return rep;
  });

  if (config.skip_validate) return;
  run_stage("validate", log, [&] {
    const FourierTrajectory fourier = config.validation_path.empty()
                                          ? default_validation_trajectory(truth)
                                          : fourier_from_json(read_json_file(config.validation_path));
    write_json(out / "validation_trajectory.json", fourier_to_json(fourier));
    SimulationOptions sim;
    sim.dt = config.excitation.sim_dt;
    sim.sample_rate = spec.sample_rate;
    const ValidationResult v = validate_parameters(truth, report.minimal, fourier, sim);
    write_text_file((out / "validation.csv").string(), validation_csv(v));
    write_json(out / "validation_summary.json", validation_summary(v));
    log << "validate: twist RMS";
    for (int c = 0; c < 6; ++c) log << " " << v.twist_rms(c);
    log << "\nvalidate: torque RMS";
    for (Eigen::Index c = 0; c < v.torque_rms.size(); ++c) log << " " << v.torque_rms(c);
    log << "\n";
    return 0;
  });
}

}  // namespace momident
