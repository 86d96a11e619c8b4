#include "doctest.h"
#include "test_support.hpp"

#include "momident/dataset.hpp"
#include "momident/excitation.hpp"
#include "momident/minparam.hpp"
#include "momident/momentum.hpp"
#include "momident/simulation.hpp"

#include <cstdio>
#include <filesystem>

using namespace momident;
using namespace testing_support;

namespace {

IntervalTrajectory short_trajectory(const RobotModel& m, int intervals, std::uint64_t seed) {
  SeedParameters s;
  s.start = Eigen::VectorXd::Zero(m.joint_count());
  s.range = Eigen::VectorXd::Constant(m.joint_count(), deg2rad(20.0));
  for (int w : m.wheel_links()) s.range(w - 1) = 3 * kPi;
  std::vector<DirectionCombination> combos;
  for (std::uint64_t i : select_combinations(m.joint_count(), intervals, seed))
    combos.push_back(direction_combination(m.joint_count(), i));
  return expand_seed(s, combos, 1.0);
}

Vec6 total_at(const RobotModel& m, const Sample& s) {
  LinkState base = base_link_state(s.base);
  base.w = s.angular_velocity;
  const auto st = forward_kinematics(m, base, s.q, s.qd);
  std::vector<int> all(m.link_count());
  for (int i = 0; i < m.link_count(); ++i) all[i] = i;
  return total_momentum(m, st, all);
}

}  // namespace

TEST_CASE("total momentum stays zero in noise-free simulations") {
  const RobotModel m = builtin_dual_arm();
  const Dataset d = simulate(m, short_trajectory(m, 3, 1));
  CHECK(d.size() == 151);
  double worst = 0.0;
  for (const Sample& s : d.samples) worst = std::max(worst, total_at(m, s).cwiseAbs().maxCoeff());
  CHECK(worst <= 1e-8);
}

TEST_CASE("a robot that does not move keeps the base at rest") {
  const RobotModel m = builtin_dual_arm();
  SeedParameters s;
  s.start = Eigen::VectorXd::Zero(m.joint_count());
  s.range = Eigen::VectorXd::Zero(m.joint_count());
  const auto traj = expand_seed(s, {DirectionCombination(m.joint_count(), 1)}, 1.0);
  const Dataset d = simulate(m, traj);
  for (const Sample& x : d.samples) {
    CHECK(x.base.velocity.norm() == 0.0);
    CHECK(x.angular_velocity.norm() == 0.0);
    CHECK(x.base.position.norm() == 0.0);
  }
}

TEST_CASE("base twist solve recovers a prescribed momentum") {
  const RobotModel m = builtin_dual_arm();
  Rng rng(21);
  for (int k = 0; k < 20; ++k) {
    const Mat3 R = base_rotation(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
    const Vec3 r = rng.vec3(-1, 1);
    const Eigen::VectorXd q = rng.vector(m.joint_count(), -kPi, kPi);
    const Eigen::VectorXd qd = rng.vector(m.joint_count(), -1, 1);
    Vec6 target;
    target << rng.vec3(-5, 5), rng.vec3(-5, 5);
    const BaseTwist tw = base_twist_from_momentum(m, R, r, q, qd, target);
    auto st = link_poses(m, R, r, q);
    propagate_velocities(m, st, tw.v, tw.w, qd);
    CHECK(rel_diff(standard_momentum(m)(st), target) < 1e-10);
  }
}

TEST_CASE("singular base block is reported") {
  std::vector<Link> links(1);
  links[0].name = "base";
  const RobotModel m(links);
  CHECK_THROWS_AS(base_twist_from_momentum(m, Mat3::Identity(), Vec3::Zero(), Eigen::VectorXd(0), Eigen::VectorXd(0),
                                           Vec6::Zero()),
                  NumericalError);
}

TEST_CASE("explicit Euler integration converges at first order") {
  const RobotModel m = builtin_dual_arm();
  const auto traj = short_trajectory(m, 2, 3);
  auto final_pose = [&](double dt) {
    SimulationOptions o;
    o.dt = dt;
    const Dataset d = simulate(m, traj, o);
    Eigen::Matrix<double, 6, 1> p;
    p << d.samples.back().base.position, d.samples.back().base.euler;
    return p;
  };
  const auto p1 = final_pose(0.004), p2 = final_pose(0.002), p3 = final_pose(0.001);
  const double ratio = (p1 - p2).norm() / (p2 - p3).norm();
  CHECK(ratio >= 1.7);
  CHECK(ratio <= 2.3);
}

TEST_CASE("sample stride must be an integer") {
  const RobotModel m = builtin_dual_arm();
  SimulationOptions o;
  o.dt = 0.003;
  CHECK_THROWS_AS(simulate(m, short_trajectory(m, 1, 1), o), ConfigError);
}

TEST_CASE("regressor of a noise-free run reproduces the applied momentum") {
  const RobotModel m = builtin_dual_arm();
  const MinimalBasis b = minimal_basis(m);
  const Dataset d = simulate(m, short_trajectory(m, 4, 5));
  const Regressor reg = regressor(m, d, b);
  const Eigen::VectorXd res = reg.G * b.reduce(m.standard_parameters()) - reg.m;
  CHECK(std::sqrt(res.squaredNorm() / res.size()) <= 1e-8);
  CHECK(reg.m.cwiseAbs().maxCoeff() > 1.0);  // wheels spin, so m is not trivially zero
}

TEST_CASE("noise statistics, determinism and the zero-noise case") {
  const RobotModel m = builtin_dual_arm();
  const Dataset clean = simulate(m, short_trajectory(m, 6, 7));
  NoiseSpec zero;
  zero.linear_velocity = zero.angular_velocity = zero.joint_rate = 0.0;
  const Dataset same = add_noise(clean, zero);
  for (int i = 0; i < clean.size(); ++i) {
    CHECK(same.samples[i].qd == clean.samples[i].qd);
    CHECK(same.samples[i].base.velocity == clean.samples[i].base.velocity);
    CHECK(same.samples[i].base.euler == clean.samples[i].base.euler);
  }
  NoiseSpec spec;
  const Dataset a = add_noise(clean, spec), b = add_noise(clean, spec);
  for (int i = 0; i < clean.size(); ++i) CHECK(a.samples[i].qd == b.samples[i].qd);
  CHECK_THROWS_AS(add_noise(a, spec), ConfigError);

  // Pool every channel over enough samples for a 5 % check on the standard deviation.
  std::vector<double> v, w, qd;
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    spec.seed = seed;
    const Dataset n = add_noise(clean, spec);
    for (int i = 0; i < clean.size(); ++i) {
      for (int c = 0; c < 3; ++c) {
        v.push_back(n.samples[i].base.velocity(c) - clean.samples[i].base.velocity(c));
        w.push_back(n.samples[i].angular_velocity(c) - clean.samples[i].angular_velocity(c));
      }
      for (int j = 0; j < m.joint_count(); ++j) qd.push_back(n.samples[i].qd(j) - clean.samples[i].qd(j));
    }
  }
  auto stddev = [](const std::vector<double>& x) {
    double s = 0.0;
    for (double e : x) s += e * e;
    return std::sqrt(s / static_cast<double>(x.size()));
  };
  CHECK(v.size() >= 13000);
  CHECK(std::abs(stddev(v) / 50e-6 - 1.0) < 0.05);
  CHECK(std::abs(stddev(w) / 80e-6 - 1.0) < 0.05);
  CHECK(std::abs(stddev(qd) / 50e-6 - 1.0) < 0.05);
}

TEST_CASE("dataset CSV round trip is exact") {
  const RobotModel m = builtin_dual_arm();
  NoiseSpec spec;
  const Dataset d = add_noise(simulate(m, short_trajectory(m, 1, 9)), spec);
  const auto dir = std::filesystem::temp_directory_path() / "momident_dataset_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "run.csv").string();
  write_dataset(d, path);
  CHECK(std::filesystem::exists(sidecar_path(path)));
  const Dataset back = read_dataset(path);
  REQUIRE(back.size() == d.size());
  REQUIRE(back.noise.has_value());
  CHECK(back.noise->angular_velocity == spec.angular_velocity);
  for (int i = 0; i < d.size(); ++i) {
    CHECK(back.samples[i].t == d.samples[i].t);
    CHECK(back.samples[i].q == d.samples[i].q);
    CHECK(back.samples[i].qd == d.samples[i].qd);
    CHECK(back.samples[i].base.euler_rate == d.samples[i].base.euler_rate);
    CHECK(back.samples[i].angular_velocity == d.samples[i].angular_velocity);
    CHECK(back.samples[i].applied_momentum == d.samples[i].applied_momentum);
  }
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(read_dataset((dir / "missing.csv").string()), ConfigError);
}
