#include "momident/dataset.hpp"

#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace momident {

namespace {

std::vector<std::string> column_names(int joints) {
  std::vector<std::string> c = {"t",         "r0_x",      "r0_y",      "r0_z",  "zeta_1", "zeta_2", "zeta_3",
                                "v0_x",      "v0_y",      "v0_z",      "zeta_dot_1", "zeta_dot_2", "zeta_dot_3",
                                "w0_x",      "w0_y",      "w0_z"};
  for (int j = 1; j <= joints; ++j) c.push_back("q_" + std::to_string(j));
  for (int j = 1; j <= joints; ++j) c.push_back("qd_" + std::to_string(j));
  for (const char* s : {"m_px", "m_py", "m_pz", "m_lx", "m_ly", "m_lz"}) c.push_back(s);
  return c;
}

}  // namespace

std::string sidecar_path(const std::string& csv_path) {
  const std::string ext = ".csv";
  if (csv_path.size() > ext.size() && csv_path.compare(csv_path.size() - ext.size(), ext.size(), ext) == 0)
    return csv_path.substr(0, csv_path.size() - ext.size()) + ".json";
  return csv_path + ".json";
}

void write_dataset(const Dataset& data, const std::string& csv_path) {
  const int J = data.joint_count();
  const std::vector<std::string> cols = column_names(J);
  std::FILE* f = std::fopen(csv_path.c_str(), "w");
  if (!f) throw ConfigError("cannot write dataset '" + csv_path + "'");
  for (size_t k = 0; k < cols.size(); ++k) std::fprintf(f, "%s%s", k ? "," : "", cols[k].c_str());
  std::fputc('\n', f);
  for (const Sample& s : data.samples) {
    std::fprintf(f, "%.17g", s.t);
    auto put3 = [&](const Vec3& v) {
      for (int k = 0; k < 3; ++k) std::fprintf(f, ",%.17g", v(k));
    };
    put3(s.base.position);
    put3(s.base.euler);
    put3(s.base.velocity);
    put3(s.base.euler_rate);
    put3(s.angular_velocity);
    for (int j = 0; j < J; ++j) std::fprintf(f, ",%.17g", s.q(j));
    for (int j = 0; j < J; ++j) std::fprintf(f, ",%.17g", s.qd(j));
    for (int k = 0; k < 6; ++k) std::fprintf(f, ",%.17g", s.applied_momentum(k));
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) throw ConfigError("error writing dataset '" + csv_path + "'");

  nlohmann::json meta;
  meta["joint_count"] = J;
  meta["sample_count"] = data.size();
  meta["columns"] = cols;
  if (data.noise) {
    meta["noise"] = {{"linear_velocity_std", data.noise->linear_velocity},
                     {"angular_velocity_std", data.noise->angular_velocity},
                     {"joint_rate_std", data.noise->joint_rate},
                     {"seed", data.noise->seed}};
  } else {
    meta["noise"] = nullptr;
  }
  std::ofstream out(sidecar_path(csv_path));
  if (!out) throw ConfigError("cannot write '" + sidecar_path(csv_path) + "'");
  out << meta.dump(2) << "\n";
}

Dataset read_dataset(const std::string& csv_path) {
  std::ifstream side(sidecar_path(csv_path));
  if (!side) throw ConfigError("missing dataset sidecar '" + sidecar_path(csv_path) + "'");
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + sidecar_path(csv_path) + "': " + e.what());
  }
  const int J = meta.value("joint_count", -1);
  if (J < 0) throw ConfigError("dataset sidecar lacks 'joint_count'");
  Dataset data;
  if (meta.contains("noise") && !meta["noise"].is_null()) {
    NoiseSpec n;
    n.linear_velocity = meta["noise"].value("linear_velocity_std", 0.0);
    n.angular_velocity = meta["noise"].value("angular_velocity_std", 0.0);
    n.joint_rate = meta["noise"].value("joint_rate_std", 0.0);
    n.seed = meta["noise"].value("seed", std::uint64_t{0});
    data.noise = n;
  }

  std::ifstream in(csv_path);
  if (!in) throw ConfigError("cannot open dataset '" + csv_path + "'");
  const size_t ncols = column_names(J).size();
  std::string line;
  std::getline(in, line);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> v;
    v.reserve(ncols);
    const char* p = line.c_str();
    while (*p) {
      char* end = nullptr;
      v.push_back(std::strtod(p, &end));
      if (end == p) throw ConfigError(csv_path + ":" + std::to_string(lineno) + ": bad number");
      p = end;
      if (*p == ',') ++p;
    }
    if (v.size() != ncols)
      throw ConfigError(csv_path + ":" + std::to_string(lineno) + ": expected " + std::to_string(ncols) + " columns");
    Sample s;
    s.t = v[0];
    s.base.position = Vec3(v[1], v[2], v[3]);
    s.base.euler = Vec3(v[4], v[5], v[6]);
    s.base.velocity = Vec3(v[7], v[8], v[9]);
    s.base.euler_rate = Vec3(v[10], v[11], v[12]);
    s.angular_velocity = Vec3(v[13], v[14], v[15]);
    s.q = Eigen::Map<const Eigen::VectorXd>(v.data() + 16, J);
    s.qd = Eigen::Map<const Eigen::VectorXd>(v.data() + 16 + J, J);
    s.applied_momentum = Eigen::Map<const Vec6>(v.data() + 16 + 2 * J);
    data.samples.push_back(std::move(s));
  }
  return data;
}

}  // namespace momident
