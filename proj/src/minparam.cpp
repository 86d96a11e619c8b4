#include "momident/minparam.hpp"

#include "momident/momentum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace momident {

DependencyVectors dependency_vectors(double twist, const Vec3& b) {
  const double C = std::cos(twist), S = std::sin(twist);
  DependencyVectors d;
  d.t1 << 1, C * C, S * S, 0, C * S, 0;
  d.t2 << 2 * b.z() * C - 2 * b.y() * S, 2 * b.z() * C, -2 * b.y() * S, b.x() * S, b.z() * S - b.y() * C,
      -b.x() * C;
  d.t3 << 0, -S, C;
  return d;
}

GroupingVectors grouping_vectors(double twist, const Vec3& b) {
  const DependencyVectors d = dependency_vectors(twist, b);
  const double bb = b.squaredNorm();
  GroupingVectors k;
  k.k1 << d.t1, 0, 0, 0, 0;
  k.k2 << bb - b.x() * b.x(), bb - b.y() * b.y(), bb - b.z() * b.z(), -b.x() * b.y(), -b.y() * b.z(),
      -b.z() * b.x(), 1, b;
  k.k3 << d.t2, 0, d.t3;
  return k;
}

Eigen::VectorXd MinimalBasis::reduce(const Eigen::VectorXd& standard) const {
  if (standard.size() != standard_size()) throw ConfigError("reduce: parameter vector has the wrong length");
  return map * standard;
}

Eigen::MatrixXd MinimalBasis::reduce_skm(const Eigen::MatrixXd& skm) const {
  if (skm.cols() != standard_size()) throw ConfigError("reduce_skm: column count does not match the basis");
  Eigen::MatrixXd out(skm.rows(), size());
  for (int k = 0; k < size(); ++k) out.col(k) = skm.col(kept_columns[static_cast<size_t>(k)]);
  return out;
}

MinimalBasis minimal_basis(const RobotModel& model) {
  MinimalBasis basis;
  basis.links = model.identified_links();
  const int nl = static_cast<int>(basis.links.size());
  const int ns = 10 * nl;
  std::vector<int> pos(static_cast<size_t>(model.link_count()), -1);
  for (int k = 0; k < nl; ++k) pos[static_cast<size_t>(basis.links[static_cast<size_t>(k)])] = k;

  // Each grouped vector is kept as a linear form over the standard parameters.
  std::vector<Eigen::MatrixXd> grouped(static_cast<size_t>(nl));
  for (int k = 0; k < nl; ++k) {
    grouped[static_cast<size_t>(k)] = Eigen::MatrixXd::Zero(10, ns);
    grouped[static_cast<size_t>(k)].middleCols(10 * k, 10).setIdentity();
  }
  for (int k = nl - 1; k >= 0; --k) {
    const int link = basis.links[static_cast<size_t>(k)];
    Eigen::MatrixXd& L = grouped[static_cast<size_t>(k)];
    for (int c : model.children(link)) {
      const int pc = pos[static_cast<size_t>(c)];
      if (pc < 0) continue;  // wheel
      if (pc <= k) throw ConfigError("minimal_basis: topology is not a tree in link order");
      const JointGeometry& g = model.link(c).joint;
      const GroupingVectors kv = grouping_vectors(g.twist, g.offset);
      const Eigen::MatrixXd& Lc = grouped[static_cast<size_t>(pc)];
      L += kv.k1 * Lc.row(1) + kv.k2 * Lc.row(6) + kv.k3 * Lc.row(9);
    }
    if (k > 0) L.row(0) -= L.row(1);
  }

  const int nm = 10 + 7 * (nl - 1);
  Eigen::MatrixXd B(nm, ns);
  int row = 0;
  for (int k = 0; k < nl; ++k) {
    const Eigen::MatrixXd& L = grouped[static_cast<size_t>(k)];
    if (k == 0) {
      for (int e = 0; e < 10; ++e) {
        B.row(row++) = L.row(e);
        basis.kept_columns.push_back(e);
        basis.owner.push_back(0);
      }
    } else {
      for (int e : kKeptEntries) {
        B.row(row++) = L.row(e);
        basis.kept_columns.push_back(10 * k + e);
        basis.owner.push_back(k);
      }
    }
  }
  basis.map = B.sparseView(1.0, 0.0);
  basis.map.makeCompressed();
  return basis;
}

std::string standard_parameter_name(int link, int entry) {
  static const char* inertia[6] = {"xx", "yy", "zz", "xy", "yz", "zx"};
  static const char* axis[3] = {"x", "y", "z"};
  const std::string i = std::to_string(link);
  if (entry < 6) return "I" + i + inertia[entry];
  if (entry == 6) return "m" + i;
  return "m" + i + "·a" + i + axis[entry - 7];
}

namespace {

std::string format_coefficient(double c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", c);
  std::string s = buf;
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

struct Term {
  int index;
  std::string text;
};

}  // namespace

std::vector<std::string> minimal_parameter_expressions(const RobotModel& model, const MinimalBasis& basis) {
  const Eigen::MatrixXd B = Eigen::MatrixXd(basis.map);
  const int nl = static_cast<int>(basis.links.size());
  std::vector<std::string> out;
  for (int r = 0; r < B.rows(); ++r) {
    // Group terms by rounded coefficient.
    std::map<long long, std::vector<int>> groups;
    for (int c = 0; c < B.cols(); ++c) {
      const long long key = std::llround(B(r, c) * 1e4);
      if (key != 0) groups[key].push_back(c);
    }
    struct Piece {
      int first;
      long long key;
      std::vector<std::string> names;
      bool collapsed;
    };
    std::vector<Piece> pieces;
    for (auto& [key, cols] : groups) {
      // Collapse all-mass sums into M or (M - m0).
      std::vector<int> masses, rest;
      for (int c : cols) (c % 10 == 6 ? masses : rest).push_back(c);
      std::vector<std::string> names;
      bool collapsed = false;
      int first = cols.front();
      if (nl > 1 && static_cast<int>(masses.size()) == nl) {
        names.push_back("M");
        collapsed = true;
      } else if (nl > 1 && static_cast<int>(masses.size()) == nl - 1 && masses.front() != 6) {
        names.push_back("(M − m" + std::to_string(basis.links[0]) + ")");
        collapsed = true;
      } else {
        rest = cols;
      }
      for (int c : rest) names.push_back(standard_parameter_name(basis.links[static_cast<size_t>(c / 10)], c % 10));
      if (key == 10000 || key == -10000) {
        // Unit coefficients are listed term by term.
        if (collapsed) {
          std::string s = names.front();
          if (s.front() == '(') s = s.substr(1, s.size() - 2);
          pieces.push_back({masses.front(), key, {s}, true});
          names.erase(names.begin());
        }
        for (size_t k = 0; k < names.size(); ++k) pieces.push_back({rest[k], key, {names[k]}, false});
      } else {
        pieces.push_back({first, key, names, collapsed});
      }
    }
    std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.first < b.first; });
    std::string expr;
    for (size_t k = 0; k < pieces.size(); ++k) {
      const Piece& p = pieces[k];
      const bool neg = p.key < 0;
      const double mag = std::abs(static_cast<double>(p.key)) / 1e4;
      std::string body;
      if (p.key == 10000 || p.key == -10000) {
        body = p.names.front();
      } else {
        body = format_coefficient(mag);
        if (p.names.size() == 1 && p.names.front().front() != '(') {
          body += p.names.front();
        } else if (p.names.size() == 1) {
          body += p.names.front();
        } else {
          body += "(";
          for (size_t t = 0; t < p.names.size(); ++t) body += (t ? " + " : "") + p.names[t];
          body += ")";
        }
      }
      if (k == 0)
        expr = (neg ? "−" : "") + body;
      else
        expr += (neg ? " − " : " + ") + body;
    }
    out.push_back(expr.empty() ? "0" : expr);
  }
  (void)model;
  return out;
}

std::string minimal_parameter_report(const RobotModel& model) {
  const MinimalBasis basis = minimal_basis(model);
  const std::vector<std::string> expr = minimal_parameter_expressions(model, basis);
  std::ostringstream os;
  for (size_t k = 0; k < expr.size(); ++k) os << "phi_m(" << k + 1 << ") = " << expr[k] << "\n";
  os << "where M = sum of the masses of the identified links\n";
  return os.str();
}

std::string basis_csv(const MinimalBasis& basis) {
  const Eigen::MatrixXd B = Eigen::MatrixXd(basis.map);
  std::ostringstream os;
  os.precision(17);
  os << "row";
  for (int c = 0; c < B.cols(); ++c)
    os << "," << standard_parameter_name(basis.links[static_cast<size_t>(c / 10)], c % 10);
  os << "\n";
  for (int r = 0; r < B.rows(); ++r) {
    os << r + 1;
    for (int c = 0; c < B.cols(); ++c) os << "," << B(r, c);
    os << "\n";
  }
  return os.str();
}

Vec6 wheel_momentum(const RobotModel& model, std::span<const LinkState> states) {
  return total_momentum(model, states, model.wheel_links());
}

Eigen::MatrixXd minimal_skm(const MinimalBasis& basis, std::span<const LinkState> states) {
  Eigen::MatrixXd K(6, basis.size());
  int col = 0;
  for (size_t k = 0; k < basis.links.size(); ++k) {
    const LinkKinematicMatrix L = link_kinematic_matrix(states[static_cast<size_t>(basis.links[k])]);
    if (k == 0) {
      K.middleCols<10>(0) = L;
      col = 10;
    } else {
      for (int e : kKeptEntries) K.col(col++) = L.col(e);
    }
  }
  return K;
}

Regressor regressor(const RobotModel& model, const Dataset& data, const MinimalBasis& basis) {
  const int n = data.size();
  if (6 * n <= basis.size())
    throw NumericalError("regressor is underdetermined: " + std::to_string(6 * n) + " rows for " +
                         std::to_string(basis.size()) + " parameters");
  Regressor reg;
  reg.G.resize(6 * n, basis.size());
  reg.m.resize(6 * n);
  reg.times.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Sample& s = data.samples[static_cast<size_t>(i)];
    if (s.q.size() != model.joint_count() || s.qd.size() != model.joint_count())
      throw ConfigError("dataset joint count does not match the robot");
    const LinkState base = base_link_state(s.base);
    const std::vector<LinkState> states = forward_kinematics(model, base, s.q, s.qd);
    reg.G.middleRows(6 * i, 6) = minimal_skm(basis, states);
    reg.m.segment<6>(6 * i) = -wheel_momentum(model, states);
    reg.times.push_back(s.t);
  }
  return reg;
}

}  // namespace momident
