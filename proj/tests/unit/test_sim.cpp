#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "scenecraft/error.hpp"
#include "scenecraft/sim/settle.hpp"

using namespace scenecraft;
using namespace scenecraft::sim;
using geom::ConvexPiece;
using geom::Pose3;
using geom::Quat;
using geom::Vec3;
namespace prim = scene::primitives;

namespace {

std::vector<ConvexPiece> floor_env(double half = 5.0) {
  return {ConvexPiece::box(Vec3(-half, -half, -0.1), Vec3(half, half, 0.0))};
}

SimBody body(std::string id, scene::Asset a, const Vec3& t, double yaw = 0.0, bool welded = false) {
  SimBody b;
  b.id = std::move(id);
  b.asset = std::move(a);
  b.pose = Pose3::from_yaw(t, yaw);
  b.welded = welded;
  return b;
}

scene::Asset unit_cube() { return prim::box("cube", scene::Category::kManipuland, Vec3(1, 1, 1), 1.0); }

double bottom_z(const SimBody& b, const Pose3& pose) {
  double lo = 1e9;
  for (const auto& p : b.asset.collision_pieces)
    for (const auto& v : p.vertices()) lo = std::min(lo, pose.apply(v).z());
  return lo;
}

}  // namespace

TEST(Settle, CubeDropsOntoFloor) {
  auto b = body("c", unit_cube(), Vec3(0, 0, 0.05));
  auto rep = settle({b}, floor_env());
  const auto& r = rep.body("c");
  EXPECT_NEAR(bottom_z(b, r.final), 0.0, 1e-3);
  EXPECT_NEAR(r.displacement, 0.05, 1.5e-3);
  EXPECT_LT(r.final.translation.z() - b.pose.translation.z(), 0.0);
  EXPECT_LT(r.rotation, 0.02);
  EXPECT_FALSE(r.fell_off);
  EXPECT_TRUE(rep.at_rest);
}

TEST(Settle, WeldedBodyIsImmobile) {
  auto w = body("w", unit_cube(), Vec3(0.3, 0.2, 1.7), 33.0, true);
  auto c = body("c", prim::box("s", scene::Category::kManipuland, Vec3(0.2, 0.2, 0.2), 0.5), Vec3(0.3, 0.2, 2.9));
  auto rep = settle({w, c}, floor_env());
  EXPECT_EQ(rep.body("w").displacement, 0.0);
  EXPECT_EQ(rep.body("w").rotation, 0.0);
  EXPECT_EQ(rep.body("w").final, w.pose);
  // The small box lands on the welded one.
  EXPECT_NEAR(bottom_z(c, rep.body("c").final), 2.7, 1e-3);
}

TEST(Settle, OverhangingCubeTopples) {
  auto table = body("table", prim::box("t", scene::Category::kFurniture, Vec3(1, 1, 0.7), 20.0), Vec3(0, 0, 0),
                    0.0, true);
  // 3 cm of the cube on the table, CoM 7 cm past the edge.
  auto cube = body("c", prim::box("b", scene::Category::kManipuland, Vec3(0.2, 0.2, 0.2), 1.0),
                   Vec3(0.57, 0, 0.7005));
  auto rep = settle({table, cube}, floor_env());
  const auto& r = rep.body("c");
  EXPECT_TRUE(r.rotation > 0.5 || r.fell_off) << r.rotation;
}

TEST(Settle, SupportedCubeOnTableEdgeStays) {
  auto table = body("table", prim::box("t", scene::Category::kFurniture, Vec3(1, 1, 0.7), 20.0), Vec3(0, 0, 0),
                    0.0, true);
  auto cube = body("c", prim::box("b", scene::Category::kManipuland, Vec3(0.2, 0.2, 0.2), 1.0),
                   Vec3(0.45, 0, 0.7005));
  auto rep = settle({table, cube}, floor_env());
  EXPECT_LT(rep.body("c").displacement, 2e-3);
  EXPECT_LT(rep.body("c").rotation, 0.01);
}

TEST(Settle, Deterministic) {
  auto a = body("a", unit_cube(), Vec3(0, 0, 0.3), 10.0);
  auto b = body("b", prim::cylinder("cy", scene::Category::kManipuland, 0.2, 0.4, 2.0), Vec3(0.1, 0.05, 1.6), 0.0);
  b.pose.rotation = Quat(Eigen::AngleAxisd(0.3, Vec3(1, 1, 0).normalized()));
  auto r1 = settle({a, b}, floor_env());
  auto r2 = settle({a, b}, floor_env());
  EXPECT_EQ(to_json(r1).dump(), to_json(r2).dump());
  ASSERT_EQ(r1.bodies.size(), r2.bodies.size());
  for (std::size_t i = 0; i < r1.bodies.size(); ++i) {
    EXPECT_EQ(r1.bodies[i].final, r2.bodies[i].final);
    EXPECT_EQ(r1.bodies[i].displacement, r2.bodies[i].displacement);
  }
}

TEST(Settle, RestConsistency) {
  std::vector<SimBody> bodies = {
      body("a", unit_cube(), Vec3(0, 0, 0.02)),
      body("b", prim::box("m", scene::Category::kManipuland, Vec3(0.4, 0.3, 0.2), 1.5), Vec3(0.1, 0.0, 1.05), 20.0),
      body("c", prim::cylinder("cy", scene::Category::kManipuland, 0.1, 0.3, 0.4), Vec3(1.5, 0.5, 0.01)),
  };
  auto first = settle(bodies, floor_env());
  ASSERT_TRUE(first.at_rest);
  for (std::size_t i = 0; i < bodies.size(); ++i) bodies[i].pose = first.bodies[i].final;
  auto second = settle(bodies, floor_env());
  for (const auto& r : second.bodies) {
    EXPECT_LT(r.displacement, 1e-3) << r.id;
    EXPECT_LT(r.rotation, 0.01) << r.id;
  }
}

TEST(Settle, NoHorizontalDrift) {
  for (double yaw : {0.0, 17.0, 45.0}) {
    auto b = body("c", prim::box("b", scene::Category::kManipuland, Vec3(0.5, 0.3, 0.8), 3.0), Vec3(1, -1, 0.0),
                  yaw);
    SimConfig cfg;
    cfg.early_stop = false;
    auto rep = settle({b}, floor_env(), cfg);
    const Vec3 d = rep.body("c").final.translation - b.pose.translation;
    EXPECT_LT(std::hypot(d.x(), d.y()), 5e-3);
  }
}

TEST(Settle, EnergyNonIncreasingAtRest) {
  auto a = body("a", unit_cube(), Vec3(0, 0, 0.0));
  auto b = body("b", prim::box("m", scene::Category::kManipuland, Vec3(0.3, 0.3, 0.3), 1.0), Vec3(0.2, 0.1, 1.0));
  SimConfig cfg;
  cfg.early_stop = false;
  cfg.record_energy = true;
  auto rep = settle({a, b}, floor_env(), cfg);
  ASSERT_EQ(rep.energy.size(), 5000u);
  for (std::size_t i = 4001; i < rep.energy.size(); ++i) EXPECT_LE(rep.energy[i], rep.energy[i - 1] + 1e-9) << i;
}

TEST(Settle, StackOfBoxesRests) {
  std::vector<SimBody> bodies;
  double z = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double h = 0.1 + 0.02 * i;
    bodies.push_back(body("b" + std::to_string(i),
                          prim::box("x", scene::Category::kManipuland, Vec3(0.4 - 0.04 * i, 0.3, h), 0.5 + i),
                          Vec3(0.01 * i, 0, z + 0.001)));
    z += h + 0.001;
  }
  auto rep = settle(bodies, floor_env());
  for (const auto& r : rep.bodies) {
    EXPECT_LT(r.displacement, 0.01) << r.id;
    EXPECT_LT(r.rotation, 0.01) << r.id;
  }
}

TEST(Settle, PenetrationsSmallAtRest) {
  std::vector<SimBody> bodies;
  for (int i = 0; i < 6; ++i)
    bodies.push_back(body("b" + std::to_string(i), prim::box("x", scene::Category::kManipuland, Vec3(0.2, 0.2, 0.2), 1),
                          Vec3(0.05 * (i % 3), 0.03 * i, 0.25 * i + 0.05), 13.0 * i));
  auto rep = settle(bodies, floor_env());
  std::vector<std::vector<geom::WorldPiece>> posed;
  for (std::size_t i = 0; i < bodies.size(); ++i)
    posed.push_back(geom::pose_pieces(bodies[i].asset.collision_pieces, rep.bodies[i].final));
  for (std::size_t i = 0; i < posed.size(); ++i) {
    auto env = geom::pose_pieces(floor_env(), Pose3());
    EXPECT_GT(geom::signed_distance(posed[i], env).distance, -1e-3);
    for (std::size_t j = i + 1; j < posed.size(); ++j)
      EXPECT_GT(geom::signed_distance(posed[i], posed[j]).distance, -1e-3) << i << "," << j;
  }
}

TEST(Settle, DivergenceNamesBody) {
  auto b = body("runaway", unit_cube(), Vec3(0, 0, 5));
  b.linear_velocity = Vec3(0, 0, 1e6);
  try {
    settle({b}, floor_env());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSimulationDiverged);
    EXPECT_EQ(e.details()["body"], "runaway");
  }
}

TEST(Settle, RejectsBadConfig) {
  SimConfig cfg;
  cfg.time_step = 0.0;
  EXPECT_THROW(settle({}, floor_env(), cfg), Error);
}
