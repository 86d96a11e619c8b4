#include "momident/kinematics.hpp"

#include <cmath>

namespace momident {

namespace {

Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 R;
  R << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return R;
}

Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 R;
  R << c, 0, s,
       0, 1, 0,
       -s, 0, c;
  return R;
}

Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 R;
  R << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return R;
}

}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 S;
  S << 0, -v.z(), v.y(),
       v.z(), 0, -v.x(),
       -v.y(), v.x(), 0;
  return S;
}

Mat3 joint_rotation(double q, double twist, double mount) {
  const Mat3 R = rot_x(twist) * rot_z(q);
  return mount == 0.0 ? R : Mat3(rot_z(mount) * R);
}

Mat3 base_rotation(const Vec3& euler) {
  return rot_z(euler(0)) * rot_x(euler(1)) * rot_y(euler(2));
}

Mat3 euler_rate_map(const Vec3& euler, double margin) {
  const double cb = std::cos(euler(1)), sb = std::sin(euler(1));
  if (std::abs(cb) <= margin) throw NumericalError("Euler angle x-rotation is at gimbal lock");
  const double cc = std::cos(euler(2)), sc = std::sin(euler(2));
  Mat3 M;
  M << -sc * cb, cc, 0,
       sb, 0, 1,
       cc * cb, sc, 0;
  return M;
}

Vec3 base_angular_velocity(const Vec3& euler, const Vec3& euler_rate) {
  return base_rotation(euler) * (euler_rate_map(euler) * euler_rate);
}

Vec3 euler_rates_from_angular_velocity(const Vec3& euler, const Vec3& w) {
  const Mat3 M = euler_rate_map(euler);
  return M.partialPivLu().solve(base_rotation(euler).transpose() * w);
}

LinkState base_link_state(const BaseState& base) {
  LinkState s;
  s.R = base_rotation(base.euler);
  s.r = base.position;
  s.v = base.velocity;
  s.w = s.R * (euler_rate_map(base.euler) * base.euler_rate);
  return s;
}

std::vector<LinkState> link_poses(const RobotModel& model, const Mat3& base_R, const Vec3& base_r,
                                  const Eigen::Ref<const Eigen::VectorXd>& q) {
  std::vector<LinkState> states(static_cast<size_t>(model.link_count()));
  states[0].R = base_R;
  states[0].r = base_r;
  for (int j = 1; j < model.link_count(); ++j) {
    const JointGeometry& g = model.link(j).joint;
    const LinkState& p = states[static_cast<size_t>(g.parent)];
    LinkState& s = states[static_cast<size_t>(j)];
    s.r = p.r + p.R * g.offset;
    s.R = p.R * joint_rotation(q(j - 1), g.twist, g.mount);
  }
  return states;
}

void propagate_velocities(const RobotModel& model, std::vector<LinkState>& states, const Vec3& base_v,
                          const Vec3& base_w, const Eigen::Ref<const Eigen::VectorXd>& qd) {
  states[0].v = base_v;
  states[0].w = base_w;
  for (int j = 1; j < model.link_count(); ++j) {
    const LinkState& p = states[static_cast<size_t>(model.link(j).joint.parent)];
    LinkState& s = states[static_cast<size_t>(j)];
    s.v = p.v + p.w.cross(s.r - p.r);
    s.w = p.w + s.R.col(2) * qd(j - 1);
  }
}

std::vector<LinkState> forward_kinematics(const RobotModel& model, const LinkState& base,
                                          const Eigen::Ref<const Eigen::VectorXd>& q,
                                          const Eigen::Ref<const Eigen::VectorXd>& qd) {
  std::vector<LinkState> states = link_poses(model, base.R, base.r, q);
  propagate_velocities(model, states, base.v, base.w, qd);
  return states;
}

BaseState integrate_base(const BaseState& state, double dt) {
  BaseState next = state;
  next.position += state.velocity * dt;
  next.euler += state.euler_rate * dt;
  return next;
}

}  // namespace momident
