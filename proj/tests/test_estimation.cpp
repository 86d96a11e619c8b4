#include "doctest.h"
#include "lagrangian_oracle.hpp"
#include "reference_tables.hpp"
#include "test_support.hpp"

#include "momident/estimation.hpp"
#include "momident/excitation.hpp"
#include "momident/minparam.hpp"
#include "momident/pipeline.hpp"

using namespace momident;
using namespace testing_support;

namespace {

Eigen::VectorXd from_array(const std::array<double, 52>& a) {
  return Eigen::Map<const Eigen::VectorXd>(a.data(), 52);
}

FourierTrajectory random_fourier(Rng& rng, const RobotModel& m, double amplitude_deg, double wf, double duration) {
  const int J = m.joint_count();
  Eigen::MatrixXd S(J, 2), C(J, 2);
  for (int j = 0; j < J; ++j)
    for (int i = 0; i < 2; ++i) {
      const double a = m.link(j + 1).is_wheel ? 180.0 : amplitude_deg;
      S(j, i) = deg2rad(rng.uniform(-a, a));
      C(j, i) = deg2rad(rng.uniform(-a, a));
    }
  return FourierTrajectory(rng.vector(J, -0.5, 0.5), S, C, wf, duration);
}

}  // namespace

TEST_CASE("least squares on a tiny system matches the normal equations") {
  Eigen::MatrixXd G(3, 2);
  G << 1, 0, 0, 2, 1, 1;
  const Eigen::Vector3d m(1, 2, 4);
  const Eigen::VectorXd ref = (G.transpose() * G).inverse() * G.transpose() * m;
  const LeastSquaresResult r = estimate(G, m);
  CHECK((r.estimate - ref).norm() < 1e-12);
  CHECK(r.rank == 2);
  CHECK_FALSE(r.rank_deficient);
  CHECK_THROWS_AS(estimate(G, Eigen::Vector2d(1, 2)), ConfigError);
  CHECK_THROWS_AS(estimate(G.topRows(2), Eigen::Vector2d(1, 2)), NumericalError);
}

TEST_CASE("column scaling handles widely different magnitudes") {
  Rng rng(41);
  Eigen::MatrixXd G = Eigen::MatrixXd::NullaryExpr(200, 6, [&] { return rng.uniform(-1, 1); });
  const Eigen::VectorXd scales = (Eigen::VectorXd(6) << 1e-3, 1, 1e3, 1e-2, 10, 1e2).finished();
  G = G * scales.asDiagonal();
  const Eigen::VectorXd truth = rng.vector(6, -5, 5);
  const LeastSquaresResult r = estimate(G, G * truth);
  CHECK(rel_diff(r.estimate, truth) < 1e-10);
}

TEST_CASE("rank deficiency is flagged with the unexcited direction") {
  Rng rng(42);
  Eigen::MatrixXd G = Eigen::MatrixXd::NullaryExpr(50, 4, [&] { return rng.uniform(-1, 1); });
  G.col(3).setZero();
  const LeastSquaresResult r = estimate(G, G * Eigen::Vector4d(1, 2, 3, 4));
  CHECK(r.rank_deficient);
  CHECK(r.rank == 3);
  REQUIRE(r.unexcited.size() == 1);
  CHECK(r.unexcited[0] == 3);
  CHECK(std::abs(r.estimate(3)) < 1e-12);
  CHECK((r.estimate.head<3>() - Eigen::Vector3d(1, 2, 3)).norm() < 1e-10);
}

TEST_CASE("relative error statistics") {
  const Eigen::VectorXd t = Eigen::Vector4d(1, 2, 4, 8);
  RelativeErrors e = relative_errors(t, t);
  CHECK(e.median == 0.0);
  CHECK(e.max == 0.0);
  Eigen::VectorXd off = t;
  off(2) *= 1.1;
  e = relative_errors(off, t);
  CHECK(e.max == doctest::Approx(0.1));
  const Eigen::VectorXd with_zero = Eigen::Vector3d(0, 1, 2);
  e = relative_errors(Eigen::Vector3d(1, 1, 2), with_zero);
  CHECK(e.excluded == std::vector<int>{0});
  CHECK(std::isnan(e.per_parameter(0)));
  CHECK(e.max == 0.0);
  CHECK_THROWS_AS(relative_errors(t, with_zero), ConfigError);
}

TEST_CASE("relative errors of the reference estimates") {
  const Eigen::VectorXd truth = from_array(reference::kTrue);
  const RelativeErrors full = relative_errors(from_array(reference::kFull), truth);
  const RelativeErrors first20 = relative_errors(from_array(reference::kFirst20), truth);
  const RelativeErrors first40 = relative_errors(from_array(reference::kFirst40), truth);
  CHECK(full.median == doctest::Approx(0.0208).epsilon(0.01));
  CHECK(first20.median == doctest::Approx(1.5022).epsilon(0.001));
  CHECK(first40.median == doctest::Approx(0.1228).epsilon(0.001));
  CHECK(full.max == doctest::Approx(1.7402).epsilon(0.001));
  CHECK(first20.max == doctest::Approx(518.1741).epsilon(0.001));
  CHECK(first40.max == doctest::Approx(21.4179).epsilon(0.001));
}

TEST_CASE("RMS error") {
  const Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(10, 0, 1);
  CHECK(rms_error(a, a) == 0.0);
  CHECK(rms_error(a, a.array() + 0.3) == doctest::Approx(0.3));
  Eigen::VectorXd alt(6);
  alt << 0.2, -0.2, 0.2, -0.2, 0.2, -0.2;
  CHECK(rms_error(alt, Eigen::VectorXd::Zero(6)) == doctest::Approx(0.2));
  CHECK_THROWS_AS(rms_error(a, alt), ConfigError);
}

TEST_CASE("Fourier trajectory") {
  const Eigen::VectorXd q0 = Eigen::Vector2d(0.1, -0.2);
  const FourierTrajectory flat(q0, Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2), kPi / 20, 40);
  const JointSample s0 = flat.evaluate(3.0);
  CHECK((s0.q - q0).norm() == 0.0);
  CHECK(s0.qd.norm() == 0.0);
  CHECK(flat.harmonics() == 2);
  Rng rng(43);
  const RobotModel m = builtin_dual_arm();
  const FourierTrajectory f = random_fourier(rng, m, 10, kPi / 20, 40);
  for (double t : {0.5, 7.0, 33.3}) {
    const double h = 1e-5;
    const JointSample s = f.evaluate(t);
    CHECK(((f.evaluate(t + h).q - f.evaluate(t - h).q) / (2 * h) - s.qd).norm() < 1e-8);
    CHECK(((f.evaluate(t + h).qd - f.evaluate(t - h).qd) / (2 * h) - s.qdd).norm() < 1e-8);
  }
  CHECK_THROWS_AS(f.evaluate(-1.0), ConfigError);
  CHECK_THROWS_AS(FourierTrajectory(q0, Eigen::MatrixXd::Zero(2, 0), Eigen::MatrixXd::Zero(2, 0), 1, 1), ConfigError);
  CHECK_THROWS_AS(FourierTrajectory(q0, Eigen::MatrixXd::Zero(2, 1), Eigen::MatrixXd::Zero(2, 1), 0, 1), ConfigError);
  const FourierTrajectory back = fourier_from_json(fourier_to_json(f));
  CHECK((back.evaluate(2.0).q - f.evaluate(2.0).q).norm() < 1e-12);
  const FourierTrajectory bundled = fourier_from_json(read_json_file(std::string(MOMIDENT_DATA_DIR) + "/fourier_validation.json"));
  CHECK(bundled.harmonics() == 2);
  CHECK(bundled.frequency() == doctest::Approx(kPi / 20));
  CHECK(bundled.joint_count() == 9);
}

TEST_CASE("predicted twist with the true minimal parameters equals the simulation") {
  const RobotModel m = builtin_dual_arm();
  const MinimalBasis b = minimal_basis(m);
  Rng rng(44);
  const FourierTrajectory f = random_fourier(rng, m, 20, 0.8, 3.0);
  const Eigen::MatrixXd truth = twist_series(simulate(m, f));
  const Eigen::MatrixXd pred = predict_base_twist(m, b, b.reduce(m.standard_parameters()), f);
  CHECK((truth - pred).cwiseAbs().maxCoeff() < 1e-9);

  const FourierTrajectory still(Eigen::VectorXd::Zero(9), Eigen::MatrixXd::Zero(9, 1), Eigen::MatrixXd::Zero(9, 1), 1, 1);
  CHECK(predict_base_twist(m, b, b.reduce(m.standard_parameters()), still).norm() == 0.0);
  CHECK_THROWS_AS(predict_base_twist(m, b, Eigen::VectorXd::Zero(5), f), ConfigError);
}

TEST_CASE("joint torques: rest, linearity and the Lagrangian oracle") {
  const RobotModel m = builtin_dual_arm();
  const MinimalBasis b = minimal_basis(m);
  const Eigen::VectorXd phi = b.reduce(m.standard_parameters());
  const MomentumModel momentum = standard_momentum(m);

  const FourierTrajectory still(Eigen::VectorXd::Zero(9), Eigen::MatrixXd::Zero(9, 1), Eigen::MatrixXd::Zero(9, 1), 1, 1);
  CHECK(joint_torques_at(m, momentum, b, phi, still, 0.5, BaseState{}).norm() < 1e-12);

  Rng rng(45);
  const FourierTrajectory f = random_fourier(rng, m, 30, 1.0, 3.0);
  BaseState pose;
  pose.position = Vec3(0.01, -0.02, 0.03);
  pose.euler = Vec3(0.05, -0.03, 0.02);
  const Eigen::VectorXd tau = joint_torques_at(m, momentum, b, phi, f, 1.3, pose);
  const Eigen::VectorXd tau2 = joint_torques_at(m, momentum, b, 2.0 * phi, f, 1.3, pose);
  CHECK((tau2 - 2.0 * tau).norm() < 1e-6 * std::max(1.0, tau.norm()));
  CHECK(tau.cwiseAbs().maxCoeff() > 0.1);

  const Eigen::VectorXd ref = oracle::joint_torques(m, f, 1.3, pose, oracle::arm_joints(m));
  CHECK((tau - ref).cwiseAbs().maxCoeff() < 1e-3);

  TorqueOptions coarse;
  coarse.step = 0.2;
  CHECK_THROWS_AS(joint_torques_at(m, momentum, b, phi, f, 1.3, pose, coarse), NumericalError);
}

TEST_CASE("report JSON and CSV") {
  Rng rng(46);
  Regressor reg;
  reg.G = Eigen::MatrixXd::NullaryExpr(60, 3, [&] { return rng.uniform(-1, 1); });
  const Eigen::Vector3d truth(1, -2, 0);
  reg.m = reg.G * truth;
  const EstimationReport r = make_report("unit", reg, Eigen::VectorXd(truth));
  CHECK(r.rows == 60);
  CHECK(r.significant == 3);
  CHECK(r.residual_rms < 1e-12);
  REQUIRE(r.errors.has_value());
  CHECK(r.errors->excluded == std::vector<int>{2});
  const nlohmann::json j = report_to_json(r, {"a", "b", "c"});
  CHECK(j["relative_error"][2].is_null());
  CHECK(j["label"] == "unit");
  CHECK((minimal_from_report(j) - r.minimal).norm() == 0.0);
  const std::string csv = report_table_csv(r);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK_THROWS_AS(minimal_from_report(nlohmann::json::object()), ConfigError);
}
