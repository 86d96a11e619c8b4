#include "momident/simulation.hpp"

#include "momident/minparam.hpp"
#include "momident/momentum.hpp"

#include <cmath>
#include <random>

namespace momident {

MomentumModel standard_momentum(const RobotModel& model) {
  std::vector<int> all(static_cast<size_t>(model.link_count()));
  for (int i = 0; i < model.link_count(); ++i) all[static_cast<size_t>(i)] = i;
  return [model, all](std::span<const LinkState> states) { return total_momentum(model, states, all); };
}

BaseTwist solve_base_twist(const RobotModel& model, const MomentumModel& momentum, const Mat3& base_R,
                           const Vec3& base_r, const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                           const Vec6& target) {
  std::vector<LinkState> states = link_poses(model, base_R, base_r, q);
  propagate_velocities(model, states, Vec3::Zero(), Vec3::Zero(), qd);
  const Vec6 h_joints = momentum(states);

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(qd.size());
  Eigen::Matrix<double, 6, 6> Hb;
  for (int k = 0; k < 6; ++k) {
    Vec3 v = Vec3::Zero(), w = Vec3::Zero();
    if (k < 3)
      v(k) = 1.0;
    else
      w(k - 3) = 1.0;
    propagate_velocities(model, states, v, w, zero);
    Hb.col(k) = momentum(states);
  }
  const Eigen::PartialPivLU<Eigen::Matrix<double, 6, 6>> lu(Hb);
  if (!(lu.rcond() > 1e-14)) throw NumericalError("base momentum block is singular");
  const Vec6 x = lu.solve(target - h_joints);
  return {x.head<3>(), x.tail<3>()};
}

BaseTwist base_twist_from_momentum(const RobotModel& model, const Mat3& base_R, const Vec3& base_r,
                                   const Eigen::VectorXd& q, const Eigen::VectorXd& qd, const Vec6& target) {
  return solve_base_twist(model, standard_momentum(model), base_R, base_r, q, qd, target);
}

namespace {

int sample_stride(const SimulationOptions& o) {
  if (!(o.dt > 0.0) || !(o.sample_rate > 0.0)) throw ConfigError("dt and sample rate must be positive");
  const double ratio = 1.0 / (o.sample_rate * o.dt);
  const long stride = std::lround(ratio);
  if (stride < 1 || std::abs(ratio - static_cast<double>(stride)) > 1e-9 * ratio)
    throw ConfigError("sample period must be an integer multiple of dt");
  return static_cast<int>(stride);
}

}  // namespace

Dataset simulate(const RobotModel& model, const MomentumModel& momentum, const JointTrajectory& trajectory,
                 const SimulationOptions& options) {
  if (trajectory.joint_count() != model.joint_count())
    throw ConfigError("trajectory has " + std::to_string(trajectory.joint_count()) + " joints, robot has " +
                      std::to_string(model.joint_count()));
  const int stride = sample_stride(options);
  const double sample_dt = options.dt * stride;
  const long samples = std::lround(std::floor(trajectory.duration() / sample_dt + 1e-9));
  const long steps = samples * stride;

  Dataset data;
  data.samples.reserve(static_cast<size_t>(samples + 1));
  Vec3 r0 = options.initial.position;
  Vec3 zeta = options.initial.euler;
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * options.dt;
    const JointSample js = trajectory.evaluate(t);
    const Mat3 R0 = base_rotation(zeta);
    const BaseTwist tw = solve_base_twist(model, momentum, R0, r0, js.q, js.qd, Vec6::Zero());
    const Vec3 zeta_dot = euler_rate_map(zeta).partialPivLu().solve(R0.transpose() * tw.w);
    if (k % stride == 0) {
      Sample s;
      s.t = static_cast<double>(k / stride) * sample_dt;
      s.base.position = r0;
      s.base.euler = zeta;
      s.base.velocity = tw.v;
      s.base.euler_rate = zeta_dot;
      s.angular_velocity = tw.w;
      s.q = js.q;
      s.qd = js.qd;
      std::vector<LinkState> states = link_poses(model, R0, r0, js.q);
      propagate_velocities(model, states, tw.v, tw.w, js.qd);
      s.applied_momentum = -wheel_momentum(model, states);
      data.samples.push_back(std::move(s));
    }
    r0 += tw.v * options.dt;
    zeta += zeta_dot * options.dt;
  }
  return data;
}

Dataset simulate(const RobotModel& model, const JointTrajectory& trajectory, const SimulationOptions& options) {
  return simulate(model, standard_momentum(model), trajectory, options);
}

Dataset add_noise(const Dataset& data, const NoiseSpec& spec) {
  if (data.noise) throw ConfigError("dataset already carries measurement noise");
  if (spec.linear_velocity < 0 || spec.angular_velocity < 0 || spec.joint_rate < 0)
    throw ConfigError("noise standard deviations must be non-negative");
  Dataset out = data;
  out.noise = spec;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Vec3 dr = Vec3::Zero(), dzeta = Vec3::Zero();
  Eigen::VectorXd dq = Eigen::VectorXd::Zero(data.joint_count());
  for (size_t i = 0; i < out.samples.size(); ++i) {
    Sample& s = out.samples[i];
    // Poses follow from integrating the measured (noisy) rates.
    s.base.position += dr;
    s.base.euler += dzeta;
    s.q += dq;

    Vec3 nv, nw;
    for (int k = 0; k < 3; ++k) nv(k) = spec.linear_velocity * normal(rng);
    for (int k = 0; k < 3; ++k) nw(k) = spec.angular_velocity * normal(rng);
    Eigen::VectorXd nq(s.qd.size());
    for (Eigen::Index k = 0; k < nq.size(); ++k) nq(k) = spec.joint_rate * normal(rng);

    const Sample& truth = data.samples[i];
    const Vec3 dzeta_dot = euler_rates_from_angular_velocity(truth.base.euler, nw);
    s.base.velocity += nv;
    s.angular_velocity += nw;
    s.base.euler_rate += dzeta_dot;
    s.qd += nq;

    if (i + 1 < out.samples.size()) {
      const double h = data.samples[i + 1].t - truth.t;
      dr += nv * h;
      dzeta += dzeta_dot * h;
      dq += nq * h;
    }
  }
  return out;
}

}  // namespace momident
