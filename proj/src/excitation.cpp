#include "momident/excitation.hpp"

#include "momident/minparam.hpp"
#include "momident/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace momident {

DirectionCombination direction_combination(int joints, std::uint64_t index) {
  if (joints < 1 || joints > 63) throw ConfigError("joint count must be in [1, 63]");
  if (index >= (std::uint64_t{1} << (joints - 1))) throw ConfigError("combination index out of range");
  DirectionCombination c(static_cast<size_t>(joints), 1);
  for (int j = 2; j <= joints; ++j)
    if ((index >> (joints - j)) & 1u) c[static_cast<size_t>(j - 1)] = -1;
  return c;
}

std::vector<DirectionCombination> direction_combinations(int joints) {
  if (joints < 1 || joints > 30) throw ConfigError("joint count must be in [1, 30] for full enumeration");
  std::vector<DirectionCombination> out;
  const std::uint64_t count = std::uint64_t{1} << (joints - 1);
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(direction_combination(joints, i));
  return out;
}

CycloidSample cycloid(double qi, double qf, double period, double t) {
  if (!(period > 0.0)) throw ConfigError("cycloid period must be positive");
  if (t < -1e-12 * period || t > period * (1.0 + 1e-12)) throw ConfigError("cycloid time outside [0, period]");
  const double delta = qf - qi;
  const double a = 2.0 * kPi * t / period;
  return {qi + delta * (t / period - std::sin(a) / (2.0 * kPi)), delta / period * (1.0 - std::cos(a)),
          delta * 2.0 * kPi / (period * period) * std::sin(a)};
}

IntervalTrajectory::IntervalTrajectory(Eigen::MatrixXd knots, double period)
    : knots_(std::move(knots)), period_(period) {
  if (knots_.cols() < 2) throw ConfigError("interval trajectory needs at least one interval");
  if (!(period_ > 0.0)) throw ConfigError("interval period must be positive");
}

JointSample IntervalTrajectory::evaluate(double t) const {
  const int K = interval_count();
  const double tc = std::clamp(t, 0.0, duration());
  int k = std::min(static_cast<int>(std::floor(tc / period_)), K - 1);
  const double tau = std::clamp(tc - k * period_, 0.0, period_);
  JointSample s;
  const Eigen::Index J = knots_.rows();
  s.q.resize(J);
  s.qd.resize(J);
  s.qdd.resize(J);
  for (Eigen::Index j = 0; j < J; ++j) {
    const CycloidSample c = cycloid(knots_(j, k), knots_(j, k + 1), period_, tau);
    s.q(j) = c.q;
    s.qd(j) = c.qd;
    s.qdd(j) = c.qdd;
  }
  return s;
}

IntervalTrajectory expand_seed(const SeedParameters& seed, const std::vector<DirectionCombination>& combos,
                               double period) {
  if (combos.empty()) throw ConfigError("expand_seed: no direction combinations");
  const Eigen::Index J = seed.start.size();
  Eigen::MatrixXd knots(J, static_cast<Eigen::Index>(combos.size()) + 1);
  knots.col(0) = seed.start;
  for (size_t k = 0; k < combos.size(); ++k) {
    if (static_cast<Eigen::Index>(combos[k].size()) != J) throw ConfigError("combination length differs from joints");
    for (Eigen::Index j = 0; j < J; ++j)
      knots(j, static_cast<Eigen::Index>(k) + 1) =
          knots(j, static_cast<Eigen::Index>(k)) + combos[k][static_cast<size_t>(j)] * seed.range(j);
  }
  return IntervalTrajectory(std::move(knots), period);
}

double max_seed_range(const JointLimits& limits, double period) {
  return std::min(0.5 * period * limits.rate_max, period * period / (2.0 * kPi) * limits.accel_max);
}

namespace {

/// Extremes of the running sign sum of one joint, including the start.
std::pair<double, double> cumulative_extremes(const std::vector<DirectionCombination>& combos, int joint) {
  double c = 0.0, lo = 0.0, hi = 0.0;
  for (const auto& combo : combos) {
    c += combo[static_cast<size_t>(joint)];
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return {lo, hi};
}

}  // namespace

SeedProblem constraint_set(const RobotModel& model, const std::vector<DirectionCombination>& combos,
                           const ExcitationConfig& config) {
  SeedProblem p;
  for (int j = 1; j < model.link_count(); ++j)
    if (!model.link(j).is_wheel) p.arm_joints.push_back(j - 1);
  const Eigen::Index n = static_cast<Eigen::Index>(p.arm_joints.size());
  p.range_max.resize(n);
  LinearConstraints& c = p.constraints;
  c.lower.resize(2 * n);
  c.upper.resize(2 * n);
  c.A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  c.b.resize(2 * n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const int joint = p.arm_joints[static_cast<size_t>(a)];
    const Link& link = model.link(joint + 1);
    const JointLimits& lim = link.limits;
    const double rmax = max_seed_range(lim, config.period);
    if (!(rmax > 0.0)) throw ConfigError("joint '" + link.name + "' admits no motion under its rate limits");
    p.range_max(a) = rmax;
    c.lower(a) = lim.q_min;
    c.upper(a) = lim.q_max;
    c.lower(n + a) = std::min(config.min_range, 1e-3 * rmax);
    c.upper(n + a) = rmax;
    const auto [lo, hi] = cumulative_extremes(combos, joint);
    c.A(2 * a, a) = 1.0;
    c.A(2 * a, n + a) = hi;
    c.b(2 * a) = lim.q_max;
    c.A(2 * a + 1, a) = -1.0;
    c.A(2 * a + 1, n + a) = -lo;
    c.b(2 * a + 1) = -lim.q_min;
    if (c.lower(n + a) * (hi - lo) > lim.q_max - lim.q_min)
      throw ConfigError("joint '" + link.name + "': position limits cannot hold the combinations");
  }
  return p;
}

SeedParameters seeds_from_decision(const RobotModel& model, const SeedProblem& problem, const Eigen::VectorXd& x,
                                   const ExcitationConfig& config) {
  const Eigen::Index n = static_cast<Eigen::Index>(problem.arm_joints.size());
  SeedParameters s;
  s.start = Eigen::VectorXd::Constant(model.joint_count(), config.wheel_start);
  s.range = Eigen::VectorXd::Constant(model.joint_count(), config.wheel_range);
  for (Eigen::Index a = 0; a < n; ++a) {
    s.start(problem.arm_joints[static_cast<size_t>(a)]) = x(a);
    s.range(problem.arm_joints[static_cast<size_t>(a)]) = x(n + a);
  }
  return s;
}

Eigen::VectorXd decision_from_seeds(const SeedProblem& problem, const SeedParameters& seeds) {
  const Eigen::Index n = static_cast<Eigen::Index>(problem.arm_joints.size());
  Eigen::VectorXd x(2 * n);
  for (Eigen::Index a = 0; a < n; ++a) {
    x(a) = seeds.start(problem.arm_joints[static_cast<size_t>(a)]);
    x(n + a) = seeds.range(problem.arm_joints[static_cast<size_t>(a)]);
  }
  return x;
}

Eigen::VectorXd initial_decision(const RobotModel& model, const SeedProblem& problem,
                                 const std::vector<DirectionCombination>& combos) {
  const Eigen::Index n = static_cast<Eigen::Index>(problem.arm_joints.size());
  Eigen::VectorXd x(2 * n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const int joint = problem.arm_joints[static_cast<size_t>(a)];
    const JointLimits& lim = model.link(joint + 1).limits;
    const auto [lo, hi] = cumulative_extremes(combos, joint);
    double range = 0.5 * problem.range_max(a);
    if (hi - lo > 0.0) range = std::min(range, 0.5 * (lim.q_max - lim.q_min) / (hi - lo));
    range = std::max(range, problem.constraints.lower(n + a));
    const double mid = 0.5 * (lim.q_min + lim.q_max);
    // Zero start when it is feasible, otherwise centre the swept band.
    double start = 0.0;
    if (start + hi * range > lim.q_max || start + lo * range < lim.q_min) start = mid - 0.5 * (hi + lo) * range;
    x(a) = start;
    x(n + a) = range;
  }
  return x;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& M) {
  if (M.rows() > M.cols()) {
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(M.cols()).triangularView<Eigen::Upper>();
    return Eigen::JacobiSVD<Eigen::MatrixXd>(R).singularValues();
  }
  return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues();
}

int significant_singular_values(const Eigen::MatrixXd& M, double delta) {
  if (M.size() == 0) return 0;
  const Eigen::VectorXd s = singular_values(M);
  if (!(s(0) > 0.0)) return 0;
  return static_cast<int>((s.array() > delta * s(0)).count());
}

double condition_number(const Eigen::MatrixXd& M) {
  const Eigen::VectorXd s = singular_values(M);
  if (s.size() == 0 || !(s(0) > 0.0)) return kInfiniteCost;
  const double smin = s(s.size() - 1);
  if (smin < 1e-14 * s(0)) return kInfiniteCost;
  return s(0) / smin;
}

ObjectiveTerms objective_terms(const RobotModel& guess, const SeedParameters& seeds,
                               const std::vector<DirectionCombination>& combos, const ExcitationConfig& config) {
  ObjectiveTerms out;
  if ((seeds.range.array() <= 0.0).any()) return out;
  const IntervalTrajectory traj = expand_seed(seeds, combos, config.period);
  SimulationOptions sim;
  sim.dt = config.sim_dt;
  sim.sample_rate = config.sample_rate;
  Dataset data;
  try {
    data = simulate(guess, traj, sim);
  } catch (const NumericalError&) {
    return out;
  }
  const MinimalBasis basis = minimal_basis(guess);
  const Regressor reg = regressor(guess, data, basis);
  double sum_sq = 0.0;
  for (const Sample& s : data.samples)
    sum_sq += s.base.velocity.squaredNorm() + s.angular_velocity.squaredNorm() + s.qd.squaredNorm();
  const double channels = 6.0 + guess.joint_count();
  out.condition = condition_number(reg.G);
  out.rate_term = sum_sq > 0.0 ? config.weight * channels * data.size() / sum_sq : kInfiniteCost;
  out.cost = out.condition + out.rate_term;
  return out;
}

double objective(const RobotModel& guess, const SeedParameters& seeds, const std::vector<DirectionCombination>& combos,
                 const ExcitationConfig& config) {
  return objective_terms(guess, seeds, combos, config).cost;
}

SeedOptimization optimize_seeds(const RobotModel& guess, const std::vector<DirectionCombination>& combos,
                                const ExcitationConfig& config, const Eigen::VectorXd& x0) {
  const SeedProblem problem = constraint_set(guess, combos, config);
  if (!problem.constraints.feasible(x0, 1e-9)) throw ConfigError("initial seeds violate the joint limits");
  const Objective f = [&](const Eigen::VectorXd& x) {
    return objective(guess, seeds_from_decision(guess, problem, x, config), combos, config);
  };
  SeedOptimization out;
  out.initial_cost = f(x0);
  out.result = minimize_sqp(f, x0, problem.constraints, config.optimizer);
  out.seeds = seeds_from_decision(guess, problem, out.result.x, config);
  return out;
}

SeedOptimization optimize_seeds(const RobotModel& guess, const std::vector<DirectionCombination>& combos,
                                const ExcitationConfig& config) {
  const SeedProblem problem = constraint_set(guess, combos, config);
  return optimize_seeds(guess, combos, config, initial_decision(guess, problem, combos));
}

namespace {

Eigen::MatrixXd triangular_factor(const Eigen::MatrixXd& M) {
  if (M.rows() <= M.cols()) return M;
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  return qr.matrixQR().topRows(M.cols()).triangularView<Eigen::Upper>();
}

double raw_condition(const Eigen::VectorXd& s) {
  if (s.size() == 0 || !(s(0) > 0.0)) return kInfiniteCost;
  return s(0) / s(s.size() - 1);
}

int count_significant(const Eigen::VectorXd& s, double delta) {
  if (s.size() == 0 || !(s(0) > 0.0)) return 0;
  return static_cast<int>((s.array() > delta * s(0)).count());
}

}  // namespace

std::vector<int> prune_intervals(const Eigen::MatrixXd& G, const std::vector<int>& rows_per_interval, int u_max,
                                 double delta) {
  std::vector<Eigen::Index> offsets{0};
  for (int r : rows_per_interval) offsets.push_back(offsets.back() + r);
  if (offsets.back() != G.rows()) throw ConfigError("prune_intervals: interval rows do not cover the matrix");
  const int count = static_cast<int>(rows_per_interval.size());
  auto block = [&](int i) { return G.middleRows(offsets[static_cast<size_t>(i)], rows_per_interval[static_cast<size_t>(i)]); };

  std::vector<int> kept;
  const Eigen::Index nc = G.cols();
  Eigen::Index nr = 0;
  int i = 0;
  Eigen::MatrixXd kept_rows(0, nc);
  while (nr <= nc && i < count) {
    kept.push_back(i);
    Eigen::MatrixXd next(kept_rows.rows() + block(i).rows(), nc);
    next << kept_rows, block(i);
    kept_rows.swap(next);
    nr = kept_rows.rows();
    ++i;
  }
  // The triangular factor has the same singular values as the stacked rows.
  Eigen::MatrixXd Ro = triangular_factor(kept_rows);
  Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(Ro).singularValues();
  int s_prev = count_significant(sv, delta);
  double cn_prev = raw_condition(sv);
  int u = 0;
  for (; i < count; ++i) {
    Eigen::MatrixXd Gt(Ro.rows() + block(i).rows(), nc);
    Gt << Ro, block(i);
    const Eigen::MatrixXd Rt = triangular_factor(Gt);
    sv = Eigen::JacobiSVD<Eigen::MatrixXd>(Rt).singularValues();
    const int s_now = count_significant(sv, delta);
    const double cn_now = raw_condition(sv);
    const bool same_streak = s_now == s_prev && u <= u_max;
    if (s_now > s_prev || cn_now < cn_prev || same_streak) {
      kept.push_back(i);
      Ro = Rt;
      u = same_streak ? u + 1 : 0;
      s_prev = s_now;
      cn_prev = cn_now;
    } else {
      u = 0;
    }
  }
  return kept;
}

std::vector<int> interval_row_counts(const std::vector<double>& times, int intervals, double period) {
  std::vector<int> rows(static_cast<size_t>(intervals), 0);
  for (double t : times) {
    const int k = std::clamp(static_cast<int>(std::floor(t / period + 1e-9)), 0, intervals - 1);
    rows[static_cast<size_t>(k)] += 6;
  }
  return rows;
}

std::vector<DirectionCombination> TrajectorySpec::combinations() const {
  std::vector<DirectionCombination> out;
  for (std::uint64_t idx : combination_indices) out.push_back(direction_combination(joint_count, idx));
  return out;
}

IntervalTrajectory TrajectorySpec::trajectory() const { return expand_seed(seeds, combinations(), period); }

nlohmann::json trajectory_to_json(const TrajectorySpec& spec) {
  nlohmann::json seeds = nlohmann::json::array();
  for (int j = 0; j < spec.joint_count; ++j) {
    seeds.push_back({{"joint", j + 1},
                     {"start_deg", rad2deg(spec.seeds.start(j))},
                     {"range_deg", rad2deg(spec.seeds.range(j))},
                     {"start_rad", spec.seeds.start(j)},
                     {"range_rad", spec.seeds.range(j)}});
  }
  return {{"type", "interval"},
          {"joint_count", spec.joint_count},
          {"period_s", spec.period},
          {"sample_rate_hz", spec.sample_rate},
          {"combination_indices", spec.combination_indices},
          {"seeds", seeds}};
}

TrajectorySpec trajectory_from_json(const nlohmann::json& doc) {
  try {
    if (doc.value("type", std::string("interval")) != "interval")
      throw ConfigError("trajectory document is not an interval trajectory");
    TrajectorySpec spec;
    spec.joint_count = doc.at("joint_count").get<int>();
    spec.period = doc.value("period_s", 1.0);
    spec.sample_rate = doc.value("sample_rate_hz", 50.0);
    spec.combination_indices = doc.at("combination_indices").get<std::vector<std::uint64_t>>();
    if (spec.combination_indices.empty()) throw ConfigError("trajectory has no combinations");
    const auto& seeds = doc.at("seeds");
    if (static_cast<int>(seeds.size()) != spec.joint_count) throw ConfigError("trajectory needs one seed per joint");
    spec.seeds.start.resize(spec.joint_count);
    spec.seeds.range.resize(spec.joint_count);
    for (int j = 0; j < spec.joint_count; ++j) {
      const auto& s = seeds[static_cast<size_t>(j)];
      spec.seeds.start(j) = s.contains("start_rad") ? s["start_rad"].get<double>() : deg2rad(s.at("start_deg").get<double>());
      spec.seeds.range(j) = s.contains("range_rad") ? s["range_rad"].get<double>() : deg2rad(s.at("range_deg").get<double>());
      if (!(spec.seeds.range(j) > 0.0)) throw ConfigError("seed ranges must be positive");
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("trajectory document: ") + e.what());
  }
}

std::vector<std::uint64_t> select_combinations(int joints, int count, std::uint64_t seed) {
  const std::uint64_t total = std::uint64_t{1} << (joints - 1);
  std::vector<std::uint64_t> all(total);
  for (std::uint64_t i = 0; i < total; ++i) all[i] = i;
  if (count <= 0 || static_cast<std::uint64_t>(count) >= total) return all;
  // Partial Fisher-Yates with an explicit generator so the subset is portable.
  std::mt19937_64 rng(seed);
  for (std::uint64_t k = 0; k < static_cast<std::uint64_t>(count); ++k) {
    const std::uint64_t j = k + rng() % (total - k);
    std::swap(all[k], all[j]);
  }
  all.resize(static_cast<size_t>(count));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace momident
