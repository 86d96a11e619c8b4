#include "momident/momentum.hpp"

#include "momident/robot_model.hpp"

namespace momident {

Eigen::Matrix<double, 3, 6> omega_operator(const Vec3& w) {
  Eigen::Matrix<double, 3, 6> W;
  W << w.x(), 0, 0, w.y(), 0, w.z(),
       0, w.y(), 0, w.x(), w.z(), 0,
       0, 0, w.z(), 0, w.y(), w.x();
  return W;
}

LinkKinematicMatrix link_kinematic_matrix(const LinkState& s) {
  LinkKinematicMatrix K = LinkKinematicMatrix::Zero();
  const Mat3 wx = skew(s.w);
  const Mat3 rx = skew(s.r);
  K.block<3, 1>(0, 6) = s.v;
  K.block<3, 3>(0, 7) = wx * s.R;
  K.block<3, 6>(3, 0) = s.R * omega_operator(s.R.transpose() * s.w);
  K.block<3, 1>(3, 6) = rx * s.v;
  K.block<3, 3>(3, 7) = (rx * wx - skew(s.v)) * s.R;
  return K;
}

Vec6 link_momentum(const LinkState& s, const Vec10& params) {
  const MassProperties mp = mass_properties(params);
  const Vec3 a = s.R * mp.com;
  const Vec3 c = s.r + a;
  const Vec3 cdot = s.v + s.w.cross(a);
  Vec6 h;
  h.head<3>() = mp.mass * cdot;
  h.tail<3>() = s.R * mp.inertia_com * s.R.transpose() * s.w + c.cross(mp.mass * cdot);
  return h;
}

Eigen::MatrixXd system_kinematic_matrix(std::span<const LinkState> states, std::span<const int> links) {
  Eigen::MatrixXd K(6, 10 * static_cast<Eigen::Index>(links.size()));
  for (size_t k = 0; k < links.size(); ++k)
    K.middleCols<10>(10 * static_cast<Eigen::Index>(k)) = link_kinematic_matrix(states[static_cast<size_t>(links[k])]);
  return K;
}

GlobalKinematicMatrix stack_global(std::span<const Eigen::MatrixXd> samples, std::span<const double> times) {
  if (samples.empty()) throw ConfigError("stack_global: no samples");
  if (samples.size() != times.size()) throw ConfigError("stack_global: sample and time counts differ");
  const Eigen::Index cols = samples.front().cols();
  GlobalKinematicMatrix g;
  g.matrix.resize(6 * static_cast<Eigen::Index>(samples.size()), cols);
  for (size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].rows() != 6 || samples[i].cols() != cols) throw ConfigError("stack_global: shape mismatch");
    g.matrix.middleRows(6 * static_cast<Eigen::Index>(i), 6) = samples[i];
  }
  g.times.assign(times.begin(), times.end());
  return g;
}

Vec6 total_momentum(const RobotModel& model, std::span<const LinkState> states, std::span<const int> links) {
  Vec6 h = Vec6::Zero();
  for (int i : links) h += link_kinematic_matrix(states[static_cast<size_t>(i)]) * model.link(i).params;
  return h;
}

}  // namespace momident
