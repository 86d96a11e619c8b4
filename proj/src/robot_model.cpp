#include "momident/robot_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace momident {

Mat3 inertia_matrix(const Eigen::Ref<const Eigen::Matrix<double, 6, 1>>& v) {
  Mat3 I;
  I << v(0), v(3), v(5),
       v(3), v(1), v(4),
       v(5), v(4), v(2);
  return I;
}

namespace {

Eigen::Matrix<double, 6, 1> inertia_vector(const Mat3& I) {
  Eigen::Matrix<double, 6, 1> v;
  v << I(0, 0), I(1, 1), I(2, 2), I(0, 1), I(1, 2), I(0, 2);
  return v;
}

Mat3 parallel_axis_term(double mass, const Vec3& a) {
  return mass * (a.squaredNorm() * Mat3::Identity() - a * a.transpose());
}

}  // namespace

Vec10 link_parameters(const MassProperties& props) {
  Vec10 p;
  p.head<6>() = inertia_vector(props.inertia_com + parallel_axis_term(props.mass, props.com));
  p(6) = props.mass;
  p.tail<3>() = props.mass * props.com;
  return p;
}

MassProperties mass_properties(const Vec10& params) {
  MassProperties out;
  out.mass = params(6);
  Mat3 I = inertia_matrix(params.head<6>());
  if (out.mass > 0.0) {
    out.com = params.tail<3>() / out.mass;
    out.inertia_com = I - parallel_axis_term(out.mass, out.com);
  } else {
    out.inertia_com = I;
  }
  return out;
}

RobotModel::RobotModel(std::vector<Link> links) : links_(std::move(links)) {
  if (links_.empty()) throw ConfigError("robot has no links");
  std::set<std::string> names;
  children_.assign(links_.size(), {});
  for (size_t j = 0; j < links_.size(); ++j) {
    const Link& l = links_[j];
    const std::string tag = "link '" + l.name + "'";
    if (l.name.empty()) throw ConfigError("link " + std::to_string(j) + " has no name");
    if (!names.insert(l.name).second) throw ConfigError("duplicate link name '" + l.name + "'");
    if (!l.params.allFinite()) throw ConfigError(tag + ": non-finite inertial parameters");
    if (l.params(6) < 0.0) throw ConfigError(tag + ": negative mass");
    if (j == 0) {
      if (l.joint.parent != -1) throw ConfigError("base link must not have a parent");
      if (l.is_wheel) throw ConfigError("base link cannot be a wheel");
      continue;
    }
    const int p = l.joint.parent;
    if (p < 0 || p >= static_cast<int>(j))
      throw ConfigError(tag + ": parent index must satisfy 0 <= parent < " + std::to_string(j));
    if (!l.joint.offset.allFinite() || !std::isfinite(l.joint.twist) || !std::isfinite(l.joint.mount))
      throw ConfigError(tag + ": non-finite geometry");
    if (l.is_wheel && p != 0) throw ConfigError(tag + ": wheels must be children of the base");
    if (links_[static_cast<size_t>(p)].is_wheel) throw ConfigError(tag + ": a wheel cannot have children");
    if (!l.is_wheel && l.joint.mount != 0.0)
      throw ConfigError(tag + ": mount angle is only supported on wheels");
    if (!l.is_wheel) {
      const JointLimits& lim = l.limits;
      if (!(lim.q_min < lim.q_max)) throw ConfigError(tag + ": q_min must be below q_max");
      if (!(lim.rate_max >= 0.0) || !(lim.accel_max >= 0.0)) throw ConfigError(tag + ": negative rate limit");
    }
    children_[static_cast<size_t>(p)].push_back(static_cast<int>(j));
  }
  for (int j = 0; j < link_count(); ++j) {
    if (links_[static_cast<size_t>(j)].is_wheel)
      wheels_.push_back(j);
    else
      identified_.push_back(j);
  }
}

std::vector<int> RobotModel::subtree(int i) const {
  std::vector<int> out{i};
  for (size_t k = 0; k < out.size(); ++k)
    for (int c : children(out[k])) out.push_back(c);
  return out;
}

Eigen::VectorXd RobotModel::standard_parameters() const {
  Eigen::VectorXd phi(10 * static_cast<Eigen::Index>(identified_.size()));
  for (size_t k = 0; k < identified_.size(); ++k)
    phi.segment<10>(10 * static_cast<Eigen::Index>(k)) = link(identified_[k]).params;
  return phi;
}

double RobotModel::total_mass() const {
  double m = 0.0;
  for (const Link& l : links_) m += l.params(6);
  return m;
}

RobotModel RobotModel::with_link_parameters(int i, const Vec10& params) const {
  std::vector<Link> links = links_;
  links.at(static_cast<size_t>(i)).params = params;
  return RobotModel(std::move(links));
}

namespace {

struct LinkRow {
  const char* name;
  double mass;
  double cx, cy, cz;
  double ixx, iyy, izz, ixy, iyz, izx;
};

// Index order: base, arm 1 (three links), arm 2 (three links).
constexpr LinkRow kTrueRows[7] = {
    {"base", 2000, 0.2, 0.3, 0.4, 1200, 1200, 1200, 35.52, 40.45, 45.71},
    {"arm1_link1", 50, 0.6, 0.05, -0.07, 3.1, 1.89, 20.51, 1.9, 3.65, 3.9},
    {"arm1_link2", 40, 0.4, -0.04, -0.05, 1.15, 1.68, 18.67, 0.61, 1.75, 1.5},
    {"arm1_link3", 30, 0.7, 0.4, 0.3, 24.45, 28.56, 35.53, 9.78, 9.1, 10.23},
    {"arm2_link1", 50, 0.55, 0.04, -0.04, 1.85, 1.62, 17.05, 1.5, 2.25, 3.71},
    {"arm2_link2", 35, 0.45, 0.05, 0.05, 2.55, 1.84, 14.28, 2.9, 1.55, 1.27},
    {"arm2_link3", 60, 0.6, -0.5, -0.35, 12.24, 31.45, 23.77, 9.1, 8.52, 8.67},
};

constexpr LinkRow kOffsetRows[7] = {
    {"base", 1500, 0, 0, 0, 1000, 1000, 1000, 25, 20.45, 65.71},
    {"arm1_link1", 30, 0.4, 0, 0, 2, 1, 10, 0.9, 2.65, 2.9},
    {"arm1_link2", 20, 0.7, 0, 0, 1, 1, 28, 1.2, 2.75, 2.5},
    {"arm1_link3", 50, 0.5, 0.2, 0.1, 14, 20, 20, 4.6, 3.1, 1.23},
    {"arm2_link1", 40, 0.4, 0, 0, 1, 2, 9, 1, 1.25, 6.71},
    {"arm2_link2", 25, 0.3, 0, 0, 1, 1.5, 19, 1.5, 0.55, 4.27},
    {"arm2_link3", 30, 0.5, 0.2, 0.2, 6, 20, 35, 15, 18.52, 4.67},
};

Vec10 row_parameters(const LinkRow& r) {
  MassProperties p;
  p.mass = r.mass;
  p.com = Vec3(r.cx, r.cy, r.cz);
  Eigen::Matrix<double, 6, 1> v;
  v << r.ixx, r.iyy, r.izz, r.ixy, r.iyz, r.izx;
  p.inertia_com = inertia_matrix(v);
  return link_parameters(p);
}

Vec10 wheel_parameters() {
  Vec10 p = Vec10::Zero();
  p(2) = 1.0;
  return p;
}

}  // namespace

RobotModel builtin_dual_arm() {
  std::vector<Link> links(10);
  const double half_pi = kPi / 2.0;
  const int parents[7] = {-1, 0, 1, 2, 0, 4, 5};
  const double twists[7] = {0, 0, half_pi, 0, 0, half_pi, 0};
  const Vec3 offsets[7] = {Vec3::Zero(),        Vec3(0.7, 0.3, 0.9), Vec3(1, 0, 0), Vec3(1, 0, 0),
                           Vec3(-0.3, 0.3, 0.9), Vec3(1, 0, 0),       Vec3(1, 0, 0)};
  for (int i = 0; i < 7; ++i) {
    Link& l = links[static_cast<size_t>(i)];
    l.name = kTrueRows[i].name;
    l.joint.parent = parents[i];
    l.joint.twist = twists[i];
    l.joint.offset = offsets[i];
    l.params = row_parameters(kTrueRows[i]);
  }
  const char* wheel_names[3] = {"wheel_x", "wheel_y", "wheel_z"};
  const double wheel_twist[3] = {half_pi, -half_pi, 0.0};
  const double wheel_mount[3] = {half_pi, 0.0, 0.0};
  for (int k = 0; k < 3; ++k) {
    Link& l = links[static_cast<size_t>(7 + k)];
    l.name = wheel_names[k];
    l.joint.parent = 0;
    l.joint.twist = wheel_twist[k];
    l.joint.mount = wheel_mount[k];
    l.params = wheel_parameters();
    l.is_wheel = true;
  }
  return RobotModel(std::move(links));
}

RobotModel offset_guess(const RobotModel& model) {
  const auto& ids = model.identified_links();
  if (ids.size() != 7) throw ConfigError("offset guess is only defined for the dual-arm fixture");
  std::vector<Link> links = model.links();
  for (size_t k = 0; k < 7; ++k) links[static_cast<size_t>(ids[k])].params = row_parameters(kOffsetRows[k]);
  return RobotModel(std::move(links));
}

namespace {

using nlohmann::json;

Vec3 read_vec3(const json& j, const std::string& key, const std::string& tag) {
  if (!j.contains(key)) return Vec3::Zero();
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != 3) throw ConfigError(tag + ": '" + key + "' must be an array of 3 numbers");
  return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

int resolve_parent(const json& jl, const std::vector<std::string>& names, size_t j, const std::string& tag) {
  if (!jl.contains("parent") || jl.at("parent").is_null()) return -1;
  const json& p = jl.at("parent");
  if (p.is_number_integer()) return p.get<int>();
  if (p.is_string()) {
    const std::string s = p.get<std::string>();
    for (size_t k = 0; k < names.size(); ++k)
      if (names[k] == s) {
        if (k >= j) throw ConfigError(tag + ": parent '" + s + "' must precede its child (cycle or bad order)");
        return static_cast<int>(k);
      }
    throw ConfigError(tag + ": unknown parent '" + s + "'");
  }
  throw ConfigError(tag + ": 'parent' must be an index, a link name or null");
}

}  // namespace

RobotModel load_robot(const json& doc) {
  try {
    if (!doc.is_object() || !doc.contains("links") || !doc.at("links").is_array())
      throw ConfigError("robot document needs a 'links' array");
    const json& jlinks = doc.at("links");
    std::vector<std::string> names;
    for (const json& jl : jlinks) names.push_back(jl.value("name", std::string()));
    std::vector<Link> links;
    for (size_t j = 0; j < jlinks.size(); ++j) {
      const json& jl = jlinks[j];
      if (!jl.is_object()) throw ConfigError("link " + std::to_string(j) + " is not an object");
      Link l;
      l.name = names[j];
      const std::string tag = "link '" + l.name + "'";
      l.joint.parent = resolve_parent(jl, names, j, tag);
      if (jl.contains("dh")) {
        const json& dh = jl.at("dh");
        const double alpha = deg2rad(dh.value("alpha_deg", 0.0));
        const double a = dh.value("a_m", 0.0);
        const double d = dh.value("d_m", 0.0);
        l.joint.twist = alpha;
        l.joint.offset = Vec3(a, -std::sin(alpha) * d, std::cos(alpha) * d);
      } else {
        l.joint.twist = deg2rad(jl.value("twist_deg", 0.0));
        l.joint.offset = read_vec3(jl, "offset_m", tag);
      }
      l.joint.mount = deg2rad(jl.value("mount_deg", 0.0));
      l.is_wheel = jl.value("is_wheel", false);
      MassProperties mp;
      mp.mass = jl.value("mass_kg", 0.0);
      mp.com = read_vec3(jl, "com_m", tag);
      if (jl.contains("inertia_com_kgm2")) {
        const json& in = jl.at("inertia_com_kgm2");
        if (!in.is_array() || in.size() != 6)
          throw ConfigError(tag + ": 'inertia_com_kgm2' must hold (xx, yy, zz, xy, yz, zx)");
        Eigen::Matrix<double, 6, 1> v;
        for (int k = 0; k < 6; ++k) v(k) = in[static_cast<size_t>(k)].get<double>();
        mp.inertia_com = inertia_matrix(v);
      }
      if (mp.mass < 0.0) throw ConfigError(tag + ": negative mass");
      l.params = link_parameters(mp);
      links.push_back(l);
    }
    if (doc.contains("joint_limits")) {
      for (const json& jl : doc.at("joint_limits")) {
        const std::string name = jl.at("joint").get<std::string>();
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end() || it == names.begin())
          throw ConfigError("joint_limits: unknown joint '" + name + "'");
        JointLimits& lim = links[static_cast<size_t>(it - names.begin())].limits;
        lim.q_min = deg2rad(jl.value("q_min_deg", rad2deg(lim.q_min)));
        lim.q_max = deg2rad(jl.value("q_max_deg", rad2deg(lim.q_max)));
        lim.rate_max = deg2rad(jl.value("rate_max_deg_s", rad2deg(lim.rate_max)));
        lim.accel_max = deg2rad(jl.value("accel_max_deg_s2", rad2deg(lim.accel_max)));
      }
    }
    return RobotModel(std::move(links));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("robot document: ") + e.what());
  }
}

RobotModel load_robot_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open robot file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
  return load_robot(doc);
}

json robot_to_json(const RobotModel& model) {
  json links = json::array();
  json limits = json::array();
  for (int i = 0; i < model.link_count(); ++i) {
    const Link& l = model.link(i);
    const MassProperties mp = mass_properties(l.params);
    json jl;
    jl["name"] = l.name;
    jl["parent"] = l.joint.parent < 0 ? json(nullptr) : json(l.joint.parent);
    jl["twist_deg"] = rad2deg(l.joint.twist);
    jl["offset_m"] = {l.joint.offset.x(), l.joint.offset.y(), l.joint.offset.z()};
    if (l.joint.mount != 0.0) jl["mount_deg"] = rad2deg(l.joint.mount);
    jl["mass_kg"] = mp.mass;
    jl["com_m"] = {mp.com.x(), mp.com.y(), mp.com.z()};
    const Mat3& I = mp.inertia_com;
    jl["inertia_com_kgm2"] = {I(0, 0), I(1, 1), I(2, 2), I(0, 1), I(1, 2), I(0, 2)};
    jl["is_wheel"] = l.is_wheel;
    links.push_back(jl);
    if (i > 0 && !l.is_wheel) {
      limits.push_back({{"joint", l.name},
                        {"q_min_deg", rad2deg(l.limits.q_min)},
                        {"q_max_deg", rad2deg(l.limits.q_max)},
                        {"rate_max_deg_s", rad2deg(l.limits.rate_max)},
                        {"accel_max_deg_s2", rad2deg(l.limits.accel_max)}});
    }
  }
  return json{{"links", links}, {"joint_limits", limits}};
}

}  // namespace momident
