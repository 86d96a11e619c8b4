#include "doctest.h"
#include "test_support.hpp"

#include "momident/robot_model.hpp"

using namespace momident;
using namespace testing_support;

TEST_CASE("link parameters round trip through mass properties") {
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    const Vec10 phi = random_parameters(rng);
    const Vec10 back = link_parameters(mass_properties(phi));
    CHECK(rel_diff(phi, back) < 1e-12);
  }
}

TEST_CASE("parallel axis shift of a point mass") {
  MassProperties p;
  p.mass = 2.0;
  p.com = Vec3(1.0, 0.0, 0.0);
  const Vec10 phi = link_parameters(p);
  CHECK(phi(0) == doctest::Approx(0.0));
  CHECK(phi(1) == doctest::Approx(2.0));
  CHECK(phi(2) == doctest::Approx(2.0));
  CHECK(phi(6) == doctest::Approx(2.0));
  CHECK(phi(7) == doctest::Approx(2.0));
}

TEST_CASE("products of inertia shift with minus m times the offsets") {
  MassProperties p;
  p.mass = 40.0;
  p.com = Vec3(0.4, -0.04, -0.05);
  p.inertia_com << 1.15, 0.61, 1.5, 0.61, 1.68, 1.75, 1.5, 1.75, 18.67;
  const Vec10 phi = link_parameters(p);
  CHECK(phi(3) == doctest::Approx(0.61 + 40.0 * 0.4 * 0.04));
  CHECK(phi(4) == doctest::Approx(1.75 - 40.0 * 0.04 * 0.05));
  CHECK(phi(5) == doctest::Approx(1.5 + 40.0 * 0.05 * 0.4));
}

TEST_CASE("fixture structure") {
  const RobotModel m = builtin_dual_arm();
  CHECK(m.link_count() == 10);
  CHECK(m.joint_count() == 9);
  CHECK(m.identified_joint_count() == 6);
  CHECK(m.wheel_links().size() == 3);
  CHECK(m.total_mass() == doctest::Approx(2265.0));
  CHECK(m.subtree(1) == std::vector<int>{1, 2, 3});
  CHECK(m.subtree(0).size() == 10);
  for (int w : m.wheel_links()) {
    CHECK(m.link(w).params(6) == 0.0);
    CHECK(m.link(w).params(2) == doctest::Approx(1.0));
  }
}

TEST_CASE("offset guess keeps the geometry and changes the inertia") {
  const RobotModel m = builtin_dual_arm();
  const RobotModel g = offset_guess(m);
  REQUIRE(g.link_count() == m.link_count());
  for (int i = 0; i < m.link_count(); ++i) {
    CHECK(g.link(i).joint.twist == m.link(i).joint.twist);
    CHECK((g.link(i).joint.offset - m.link(i).joint.offset).norm() == 0.0);
  }
  CHECK(g.link(0).params(6) == doctest::Approx(1500.0));
  CHECK(g.link(6).params(6) == doctest::Approx(30.0));
}

TEST_CASE("robot JSON round trip") {
  const RobotModel m = builtin_dual_arm();
  const RobotModel back = load_robot(robot_to_json(m));
  REQUIRE(back.link_count() == m.link_count());
  for (int i = 0; i < m.link_count(); ++i) {
    CHECK(back.link(i).name == m.link(i).name);
    CHECK(back.link(i).joint.parent == m.link(i).joint.parent);
    CHECK(back.link(i).is_wheel == m.link(i).is_wheel);
    CHECK(std::abs(back.link(i).joint.twist - m.link(i).joint.twist) < 1e-12);
    CHECK(std::abs(back.link(i).joint.mount - m.link(i).joint.mount) < 1e-12);
    CHECK(rel_diff(back.link(i).params, m.link(i).params) < 1e-12);
    CHECK(std::abs(back.link(i).limits.rate_max - m.link(i).limits.rate_max) < 1e-12);
  }
}

TEST_CASE("bundled fixture file matches the built-in model") {
  const RobotModel file = load_robot_file(std::string(MOMIDENT_DATA_DIR) + "/dual_arm.json");
  const RobotModel m = builtin_dual_arm();
  REQUIRE(file.link_count() == m.link_count());
  CHECK(rel_diff(file.standard_parameters(), m.standard_parameters()) < 1e-12);
}

namespace {
nlohmann::json two_link_doc() {
  return nlohmann::json::parse(R"({
    "links": [
      {"name": "base", "parent": null, "mass_kg": 10, "com_m": [0,0,0], "inertia_com_kgm2": [1,1,1,0,0,0]},
      {"name": "arm", "parent": "base", "twist_deg": 90, "offset_m": [1,0,0], "mass_kg": 1,
       "com_m": [0.5,0,0], "inertia_com_kgm2": [0.1,0.1,0.1,0,0,0]}
    ]})");
}
}  // namespace

TEST_CASE("loader accepts names, indices and DH rows") {
  auto doc = two_link_doc();
  const RobotModel a = load_robot(doc);
  CHECK(a.link(1).joint.parent == 0);
  CHECK(a.link(1).joint.twist == doctest::Approx(kPi / 2));
  doc["links"][1]["parent"] = 0;
  doc["links"][1].erase("twist_deg");
  doc["links"][1].erase("offset_m");
  doc["links"][1]["dh"] = {{"alpha_deg", 90.0}, {"a_m", 1.0}, {"d_m", 0.5}};
  const RobotModel b = load_robot(doc);
  CHECK(b.link(1).joint.offset.x() == doctest::Approx(1.0));
  CHECK(b.link(1).joint.offset.y() == doctest::Approx(-0.5));
  CHECK(std::abs(b.link(1).joint.offset.z()) < 1e-12);
}

TEST_CASE("loader rejects malformed robots") {
  auto doc = two_link_doc();
  SUBCASE("negative mass") {
    doc["links"][1]["mass_kg"] = -1.0;
    CHECK_THROWS_AS(load_robot(doc), ConfigError);
  }
  SUBCASE("unknown parent") {
    doc["links"][1]["parent"] = "nowhere";
    CHECK_THROWS_AS(load_robot(doc), ConfigError);
  }
  SUBCASE("duplicate names") {
    doc["links"][1]["name"] = "base";
    CHECK_THROWS_AS(load_robot(doc), ConfigError);
  }
  SUBCASE("mount angle on an arm joint") {
    doc["links"][1]["mount_deg"] = 30.0;
    CHECK_THROWS_AS(load_robot(doc), ConfigError);
  }
  SUBCASE("missing links") {
    CHECK_THROWS_AS(load_robot(nlohmann::json::object()), ConfigError);
  }
}

TEST_CASE("missing robot file names the path") {
  try {
    load_robot_file("/nonexistent/robot.json");
    FAIL("expected an exception");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/robot.json") != std::string::npos);
  }
}
