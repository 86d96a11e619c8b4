#include "momident/estimation.hpp"

#include "momident/excitation.hpp"
#include "momident/momentum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace momident {

LeastSquaresResult estimate(const Eigen::MatrixXd& G, const Eigen::VectorXd& m) {
  if (G.rows() != m.size()) throw ConfigError("estimate: row count of G and length of m differ");
  if (G.rows() <= G.cols()) throw NumericalError("estimate: fewer rows than parameters");
  const Eigen::VectorXd scale =
      (G.colwise().squaredNorm().transpose() / static_cast<double>(G.rows())).cwiseSqrt().unaryExpr(
          [](double s) { return s > 0.0 ? s : 1.0; });
  const Eigen::MatrixXd Gs = G * scale.cwiseInverse().asDiagonal();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(1e-12);
  cod.compute(Gs);
  LeastSquaresResult res;
  res.rank = static_cast<int>(cod.rank());
  res.estimate = cod.solve(m).cwiseQuotient(scale);
  if (res.rank < G.cols()) {
    res.rank_deficient = true;
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(Gs);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(G.cols()).triangularView<Eigen::Upper>();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeFullV);
    const Eigen::VectorXd s = svd.singularValues();
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      if (s(k) > 1e-12 * s(0)) continue;
      Eigen::Index idx;
      svd.matrixV().col(k).cwiseAbs().maxCoeff(&idx);
      res.unexcited.push_back(static_cast<int>(idx));
    }
  }
  return res;
}

RelativeErrors relative_errors(const Eigen::VectorXd& est, const Eigen::VectorXd& truth) {
  if (est.size() != truth.size()) throw ConfigError("relative_errors: length mismatch");
  RelativeErrors r;
  r.per_parameter.resize(est.size());
  std::vector<double> vals;
  for (Eigen::Index i = 0; i < est.size(); ++i) {
    if (truth(i) == 0.0) {
      r.per_parameter(i) = std::numeric_limits<double>::quiet_NaN();
      r.excluded.push_back(static_cast<int>(i));
      continue;
    }
    r.per_parameter(i) = std::abs((truth(i) - est(i)) / truth(i));
    vals.push_back(r.per_parameter(i));
  }
  if (vals.empty()) return r;
  std::sort(vals.begin(), vals.end());
  const size_t n = vals.size();
  r.median = n % 2 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
  r.max = vals.back();
  return r;
}

double rms_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw ConfigError("rms_error: series lengths differ");
  if (a.size() == 0) return 0.0;
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

FourierTrajectory::FourierTrajectory(Eigen::VectorXd offset, Eigen::MatrixXd sin_coeffs, Eigen::MatrixXd cos_coeffs,
                                     double base_frequency, double duration)
    : offset_(std::move(offset)), sin_(std::move(sin_coeffs)), cos_(std::move(cos_coeffs)), wf_(base_frequency),
      duration_(duration) {
  if (sin_.rows() != offset_.size() || cos_.rows() != offset_.size() || sin_.cols() != cos_.cols())
    throw ConfigError("Fourier coefficient shapes disagree");
  if (sin_.cols() < 1) throw ConfigError("Fourier trajectory needs at least one harmonic");
  if (!(wf_ > 0.0)) throw ConfigError("Fourier base frequency must be positive");
  if (!(duration_ > 0.0)) throw ConfigError("Fourier duration must be positive");
}

JointSample FourierTrajectory::evaluate(double t) const {
  if (t < 0.0) throw ConfigError("Fourier trajectory evaluated at negative time");
  JointSample s;
  s.q = offset_;
  s.qd = Eigen::VectorXd::Zero(offset_.size());
  s.qdd = Eigen::VectorXd::Zero(offset_.size());
  for (int i = 1; i <= harmonics(); ++i) {
    const double w = i * wf_;
    const double sn = std::sin(w * t), cs = std::cos(w * t);
    s.q += sin_.col(i - 1) * sn + cos_.col(i - 1) * cs;
    s.qd += w * (sin_.col(i - 1) * cs - cos_.col(i - 1) * sn);
    s.qdd -= w * w * (sin_.col(i - 1) * sn + cos_.col(i - 1) * cs);
  }
  return s;
}

nlohmann::json fourier_to_json(const FourierTrajectory& traj) {
  nlohmann::json joints = nlohmann::json::array();
  for (int j = 0; j < traj.joint_count(); ++j) {
    std::vector<double> s, c;
    for (int i = 0; i < traj.harmonics(); ++i) {
      s.push_back(rad2deg(traj.sin_coefficients()(j, i)));
      c.push_back(rad2deg(traj.cos_coefficients()(j, i)));
    }
    joints.push_back({{"q0_deg", rad2deg(traj.offset()(j))}, {"sin_deg", s}, {"cos_deg", c}});
  }
  return {{"type", "fourier"}, {"omega_f", traj.frequency()}, {"duration_s", traj.duration()}, {"joints", joints}};
}

FourierTrajectory fourier_from_json(const nlohmann::json& doc) {
  try {
    if (doc.value("type", std::string()) != "fourier") throw ConfigError("trajectory document is not a Fourier trajectory");
    const auto& joints = doc.at("joints");
    const Eigen::Index J = static_cast<Eigen::Index>(joints.size());
    if (J == 0) throw ConfigError("Fourier trajectory has no joints");
    const Eigen::Index H = static_cast<Eigen::Index>(joints[0].at("sin_deg").size());
    Eigen::VectorXd q0(J);
    Eigen::MatrixXd S(J, H), C(J, H);
    for (Eigen::Index j = 0; j < J; ++j) {
      const auto& jj = joints[static_cast<size_t>(j)];
      q0(j) = deg2rad(jj.value("q0_deg", 0.0));
      const auto s = jj.at("sin_deg").get<std::vector<double>>();
      const auto c = jj.at("cos_deg").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(s.size()) != H || static_cast<Eigen::Index>(c.size()) != H)
        throw ConfigError("every joint needs the same number of harmonics");
      for (Eigen::Index i = 0; i < H; ++i) {
        S(j, i) = deg2rad(s[static_cast<size_t>(i)]);
        C(j, i) = deg2rad(c[static_cast<size_t>(i)]);
      }
    }
    return FourierTrajectory(q0, S, C, doc.at("omega_f").get<double>(), doc.at("duration_s").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("Fourier trajectory document: ") + e.what());
  }
}

MomentumModel minimal_momentum(const RobotModel& model, const MinimalBasis& basis, const Eigen::VectorXd& minimal) {
  if (minimal.size() != basis.size()) throw ConfigError("minimal parameter vector has the wrong length");
  return [model, basis, minimal](std::span<const LinkState> states) -> Vec6 {
    return minimal_skm(basis, states) * minimal + wheel_momentum(model, states);
  };
}

Eigen::MatrixXd twist_series(const Dataset& data) {
  Eigen::MatrixXd out(data.size(), 6);
  for (int i = 0; i < data.size(); ++i) {
    out.row(i).head<3>() = data.samples[static_cast<size_t>(i)].base.velocity.transpose();
    out.row(i).tail<3>() = data.samples[static_cast<size_t>(i)].angular_velocity.transpose();
  }
  return out;
}

Eigen::MatrixXd predict_base_twist(const RobotModel& model, const MinimalBasis& basis, const Eigen::VectorXd& minimal,
                                   const JointTrajectory& trajectory, const SimulationOptions& options) {
  return twist_series(simulate(model, minimal_momentum(model, basis, minimal), trajectory, options));
}

namespace {

struct PoseRate {
  Vec3 r_dot;
  Vec3 zeta_dot;
};

PoseRate pose_rate(const RobotModel& model, const MomentumModel& momentum, const JointTrajectory& traj, double t,
                   const Vec3& r0, const Vec3& zeta) {
  const JointSample js = traj.evaluate(t);
  const Mat3 R0 = base_rotation(zeta);
  const BaseTwist tw = solve_base_twist(model, momentum, R0, r0, js.q, js.qd, Vec6::Zero());
  return {tw.v, euler_rate_map(zeta).partialPivLu().solve(R0.transpose() * tw.w)};
}

/// Momentum of every identified-link subtree rooted at a non-wheel joint, stacked per joint.
Eigen::MatrixXd subtree_momenta(const RobotModel& model, const MomentumModel& momentum, const MinimalBasis& basis,
                                const Eigen::VectorXd& minimal, const JointTrajectory& traj, double t,
                                const Vec3& r0, const Vec3& zeta, const std::vector<std::vector<int>>& subtrees) {
  const JointSample js = traj.evaluate(t);
  const Mat3 R0 = base_rotation(zeta);
  const BaseTwist tw = solve_base_twist(model, momentum, R0, r0, js.q, js.qd, Vec6::Zero());
  std::vector<LinkState> states = link_poses(model, R0, r0, js.q);
  propagate_velocities(model, states, tw.v, tw.w, js.qd);
  const Eigen::MatrixXd Km = minimal_skm(basis, states);
  // Per identified link: its kept columns times its minimal parameters.
  const Eigen::Index nl = static_cast<Eigen::Index>(basis.links.size());
  Eigen::MatrixXd per_link = Eigen::MatrixXd::Zero(6, nl);
  for (int k = 0; k < basis.size(); ++k) per_link.col(basis.owner[static_cast<size_t>(k)]) += Km.col(k) * minimal(k);
  Eigen::MatrixXd out(6, static_cast<Eigen::Index>(subtrees.size()));
  for (size_t j = 0; j < subtrees.size(); ++j) {
    Vec6 h = Vec6::Zero();
    for (int pos : subtrees[j]) h += per_link.col(pos);
    out.col(static_cast<Eigen::Index>(j)) = h;
  }
  return out;
}

Eigen::VectorXd torques_with_step(const RobotModel& model, const MomentumModel& momentum, const MinimalBasis& basis,
                                  const Eigen::VectorXd& minimal, const JointTrajectory& traj, double t,
                                  const BaseState& base, double h, const std::vector<std::vector<int>>& subtrees,
                                  const std::vector<int>& joint_links) {
  const PoseRate k1 = pose_rate(model, momentum, traj, t, base.position, base.euler);
  Eigen::MatrixXd side[2];
  for (int s = 0; s < 2; ++s) {
    const double dir = s == 0 ? 1.0 : -1.0;
    const double hs = dir * h;
    // Midpoint step for the base pose.
    const Vec3 rm = base.position + 0.5 * hs * k1.r_dot;
    const Vec3 zm = base.euler + 0.5 * hs * k1.zeta_dot;
    const PoseRate k2 = pose_rate(model, momentum, traj, t + 0.5 * hs, rm, zm);
    side[s] = subtree_momenta(model, momentum, basis, minimal, traj, t + hs, base.position + hs * k2.r_dot,
                              base.euler + hs * k2.zeta_dot, subtrees);
  }
  const Eigen::MatrixXd rate = (side[0] - side[1]) / (2.0 * h);
  const JointSample js = traj.evaluate(t);
  const std::vector<LinkState> poses = link_poses(model, base_rotation(base.euler), base.position, js.q);
  Eigen::VectorXd tau(static_cast<Eigen::Index>(joint_links.size()));
  for (size_t j = 0; j < joint_links.size(); ++j) {
    const LinkState& s = poses[static_cast<size_t>(joint_links[j])];
    const Vec3 p_dot = rate.col(static_cast<Eigen::Index>(j)).head<3>();
    const Vec3 l_dot = rate.col(static_cast<Eigen::Index>(j)).tail<3>();
    tau(static_cast<Eigen::Index>(j)) = s.R.col(2).dot(l_dot - s.r.cross(p_dot));
  }
  return tau;
}

void joint_subtrees(const RobotModel& model, const MinimalBasis& basis, std::vector<std::vector<int>>& subtrees,
                    std::vector<int>& joint_links) {
  std::vector<int> pos(static_cast<size_t>(model.link_count()), -1);
  for (size_t k = 0; k < basis.links.size(); ++k) pos[static_cast<size_t>(basis.links[k])] = static_cast<int>(k);
  for (size_t k = 1; k < basis.links.size(); ++k) {
    const int link = basis.links[k];
    std::vector<int> sub;
    for (int i : model.subtree(link))
      if (pos[static_cast<size_t>(i)] >= 0) sub.push_back(pos[static_cast<size_t>(i)]);
    subtrees.push_back(sub);
    joint_links.push_back(link);
  }
}

}  // namespace

Eigen::VectorXd joint_torques_at(const RobotModel& model, const MomentumModel& momentum, const MinimalBasis& basis,
                                 const Eigen::VectorXd& minimal, const JointTrajectory& trajectory, double t,
                                 const BaseState& base, const TorqueOptions& options) {
  std::vector<std::vector<int>> subtrees;
  std::vector<int> joint_links;
  joint_subtrees(model, basis, subtrees, joint_links);
  const double h = options.step;
  if (!(h > 0.0)) throw ConfigError("torque differentiation step must be positive");
  const double t0 = std::max(t, h);  // keep t - h inside the trajectory
  const Eigen::VectorXd tau_h =
      torques_with_step(model, momentum, basis, minimal, trajectory, t0, base, h, subtrees, joint_links);
  if (!options.check_richardson) return tau_h;
  const Eigen::VectorXd tau_half =
      torques_with_step(model, momentum, basis, minimal, trajectory, t0, base, 0.5 * h, subtrees, joint_links);
  if ((tau_h - tau_half).lpNorm<Eigen::Infinity>() > options.richardson_tol)
    throw NumericalError("torque differentiation step too large: halving it changes the torque by " +
                         std::to_string((tau_h - tau_half).lpNorm<Eigen::Infinity>()) + " N*m");
  return tau_half;
}

Eigen::MatrixXd predict_joint_torques(const RobotModel& model, const MinimalBasis& basis, const Eigen::VectorXd& minimal,
                                      const JointTrajectory& trajectory, const SimulationOptions& sim,
                                      const TorqueOptions& options) {
  const MomentumModel momentum = minimal_momentum(model, basis, minimal);
  const Dataset data = simulate(model, momentum, trajectory, sim);
  Eigen::MatrixXd out(data.size(), basis.links.size() - 1);
  for (int i = 0; i < data.size(); ++i) {
    const Sample& s = data.samples[static_cast<size_t>(i)];
    out.row(i) = joint_torques_at(model, momentum, basis, minimal, trajectory, s.t, s.base, options).transpose();
  }
  return out;
}

EstimationReport make_report(const std::string& label, const Regressor& reg, const std::optional<Eigen::VectorXd>& truth,
                             double delta) {
  EstimationReport r;
  r.label = label;
  const LeastSquaresResult ls = estimate(reg.G, reg.m);
  r.minimal = ls.estimate;
  r.rank = ls.rank;
  r.rank_deficient = ls.rank_deficient;
  r.unexcited = ls.unexcited;
  r.rows = static_cast<int>(reg.G.rows());
  const Eigen::VectorXd sv = singular_values(reg.G);
  r.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : kInfiniteCost;
  r.significant = sv(0) > 0.0 ? static_cast<int>((sv.array() > delta * sv(0)).count()) : 0;
  const double rows = static_cast<double>(reg.G.rows());
  r.residual_rms = std::sqrt((reg.G * r.minimal - reg.m).squaredNorm() / rows);
  if (truth) {
    r.truth = *truth;
    r.errors = relative_errors(r.minimal, *truth);
    r.truth_residual_rms = std::sqrt((reg.G * *truth - reg.m).squaredNorm() / rows);
  }
  return r;
}

nlohmann::json report_to_json(const EstimationReport& r, const std::vector<std::string>& expressions) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json j;
  j["label"] = r.label;
  j["parameter_count"] = r.minimal.size();
  j["phi_m_hat"] = vec(r.minimal);
  j["condition_number"] = std::isfinite(r.condition) ? nlohmann::json(r.condition) : nlohmann::json("inf");
  j["significant_singular_values"] = r.significant;
  j["rank"] = r.rank;
  j["rank_deficient"] = r.rank_deficient;
  std::vector<int> unexcited;
  for (int k : r.unexcited) unexcited.push_back(k + 1);
  j["unexcited_parameters"] = unexcited;
  j["rows"] = r.rows;
  j["residual_rms"] = r.residual_rms;
  if (r.truth) {
    j["phi_m_true"] = vec(*r.truth);
    nlohmann::json rel = nlohmann::json::array();
    for (Eigen::Index i = 0; i < r.errors->per_parameter.size(); ++i) {
      const double e = r.errors->per_parameter(i);
      rel.push_back(std::isnan(e) ? nlohmann::json(nullptr) : nlohmann::json(e));
    }
    j["relative_error"] = rel;
    j["epsilon_median"] = r.errors->median;
    j["epsilon_max"] = r.errors->max;
    j["truth_residual_rms"] = r.truth_residual_rms;
  }
  if (!expressions.empty()) j["expressions"] = expressions;
  return j;
}

Eigen::VectorXd minimal_from_report(const nlohmann::json& doc) {
  try {
    const auto v = doc.at("phi_m_hat").get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("parameter document: ") + e.what());
  }
}

std::string report_table_csv(const EstimationReport& r) {
  std::ostringstream os;
  os.precision(10);
  os << "index,true_value,estimate,relative_error\n";
  for (Eigen::Index i = 0; i < r.minimal.size(); ++i) {
    os << i + 1 << ",";
    if (r.truth) os << (*r.truth)(i);
    os << "," << r.minimal(i) << ",";
    if (r.errors && !std::isnan(r.errors->per_parameter(i))) os << r.errors->per_parameter(i);
    os << "\n";
  }
  return os.str();
}

}  // namespace momident
