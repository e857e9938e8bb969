#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "scenecraft/error.hpp"
#include "scenecraft/feasibility/feasibility.hpp"
#include "scenecraft/scene/collision.hpp"
#include "scenecraft/scene/query.hpp"
#include "scenecraft/scene/surface.hpp"
#include "qp_oracle.hpp"
#include "scene_builders.hpp"

using namespace scenecraft;
using namespace scenecraft::feasibility;
using geom::Pose3;
using geom::Quat;
using geom::Vec2;
using geom::Vec3;
using scene::Category;
namespace prim = scene::primitives;

namespace {

// Scene without rooms holding the oracle boxes as manipulands.
scene::Scene scene_of(const std::vector<oracle::OBox>& boxes, std::vector<std::string>& movable) {
  scene::Scene s;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    auto a = prim::box("b" + std::to_string(i), Category::kManipuland, 2.0 * b.half, 1.0);
    const Vec3 c = a.bbox.center();
    s.add_asset(a);
    scene::ObjectInstance o;
    o.asset_id = a.id;
    o.pose.rotation = Quat(b.rot);
    o.pose.translation = b.center - o.pose.rotation * c;
    o.welded = b.fixed;
    const auto id = s.add_object(a.id, o);
    if (!b.fixed) movable.push_back(id);
  }
  return s;
}

double min_pair_distance(const scene::Scene& s) {
  const auto bodies = scene::object_bodies(s);
  double d = 1e9;
  for (std::size_t i = 0; i < bodies.size(); ++i)
    for (std::size_t j = i + 1; j < bodies.size(); ++j)
      d = std::min(d, geom::signed_distance(bodies[i].pieces, bodies[j].pieces).distance);
  return d;
}

double lowest_z(const scene::Scene& s, const std::string& id) {
  double z = 1e9;
  for (const auto& p : scene::world_pieces(s, s.object(id))) z = std::min(z, p.bounds.min.z());
  return z;
}

scene::Scene two_cubes(double overlap, bool weld_second, std::vector<std::string>& movable) {
  oracle::OBox a{Eigen::Vector3d(0, 0, 0), Eigen::Matrix3d::Identity(), Eigen::Vector3d(0.5, 0.5, 0.5), false};
  oracle::OBox b{Eigen::Vector3d(1.0 - overlap, 0, 0), Eigen::Matrix3d::Identity(), Eigen::Vector3d(0.5, 0.5, 0.5),
                 weld_second};
  return scene_of({a, b}, movable);
}

}  // namespace

TEST(Projection, CollisionFreeIsIdentity) {
  std::vector<std::string> mv;
  auto s = two_cubes(-0.2, false, mv);
  auto r = project_nonpenetration(s, mv);
  EXPECT_EQ(r.total_displacement, 0.0);
  EXPECT_EQ(r.scene, s);
}

TEST(Projection, TwoCubesSplitTheOverlap) {
  std::vector<std::string> mv;
  auto s = two_cubes(0.1, false, mv);
  const ProjectionConfig cfg;
  auto r = project_nonpenetration(s, mv, cfg);
  const double half = 0.05 + cfg.epsilon / 2;
  EXPECT_NEAR(r.displacement.at(mv[0]).x(), -half, 1e-7);
  EXPECT_NEAR(r.displacement.at(mv[1]).x(), half, 1e-7);
  EXPECT_NEAR(r.displacement.at(mv[0]).y(), 0.0, 1e-12);
  EXPECT_NEAR(r.displacement.at(mv[1]).z(), 0.0, 1e-12);

  std::vector<oracle::OBox> boxes{{Eigen::Vector3d(0, 0, 0), Eigen::Matrix3d::Identity(), Eigen::Vector3d::Constant(0.5)},
                                  {Eigen::Vector3d(0.9, 0, 0), Eigen::Matrix3d::Identity(), Eigen::Vector3d::Constant(0.5)}};
  const double ref = oracle::projection_oracle(boxes, cfg.epsilon);
  EXPECT_NEAR(r.total_displacement, ref, 1e-4 * ref);
  EXPECT_GE(min_pair_distance(r.scene), cfg.epsilon - 1e-6);
}

TEST(Projection, WeldedPartnerTakesNoShare) {
  std::vector<std::string> mv;
  auto s = two_cubes(0.1, true, mv);
  ASSERT_EQ(mv.size(), 1u);
  auto r = project_nonpenetration(s, mv);
  EXPECT_NEAR(r.displacement.at(mv[0]).x(), -(0.1 + 1e-5), 1e-7);
  for (const auto& [id, obj] : r.scene.objects)
    if (id != mv[0]) EXPECT_EQ(obj.pose, s.object(id).pose);
}

TEST(Projection, RejectsWeldedMovable) {
  std::vector<std::string> mv;
  auto s = two_cubes(0.1, true, mv);
  std::string welded;
  for (const auto& [id, obj] : s.objects)
    if (obj.welded) welded = id;
  EXPECT_THROW(project_nonpenetration(s, {welded}), Error);
}

TEST(Projection, MatchesQpOracleOnRandomInstances) {
  std::mt19937_64 rng(7);
  const ProjectionConfig cfg;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 2;
    auto boxes = oracle::random_overlap_instance(rng, n, trial % 3 != 0);
    std::vector<std::string> mv;
    auto s = scene_of(boxes, mv);
    auto r = project_nonpenetration(s, mv, cfg);
    const double ref = oracle::projection_oracle(boxes, cfg.epsilon);
    EXPECT_NEAR(r.total_displacement, ref, 1e-3 * ref) << "trial " << trial;
    EXPECT_GE(min_pair_distance(r.scene), cfg.epsilon - 1e-6) << "trial " << trial;
    for (const auto& [id, obj] : r.scene.objects) {
      const auto& q0 = s.object(id).pose.rotation;
      EXPECT_EQ(obj.pose.rotation.coeffs(), q0.coeffs());
    }
  }
}

TEST(Projection, LocallyMinimal) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto boxes = oracle::random_overlap_instance(rng, 3, true);
    std::vector<std::string> mv;
    auto s = scene_of(boxes, mv);
    auto r = project_nonpenetration(s, mv);
    for (const auto& id : mv) {
      const Vec3 d = r.displacement.at(id);
      if (d.norm() <= 1e-3) continue;
      auto probe = r.scene;
      probe.object(id).pose.translation -= 1e-3 * d.normalized();
      EXPECT_LT(min_pair_distance(probe), 1e-5 - 1e-6) << trial << " " << id;
    }
  }
}

TEST(Projection, FloorAndWallsConstrain) {
  auto s = oracle::room_scene(3.0, 3.0);
  s.add_asset(prim::box("crate", Category::kFurniture, Vec3(0.6, 0.6, 0.6), 5.0));
  const auto sunk = oracle::place(s, "crate", Vec3(1.5, 1.5, -0.05));
  const auto into_wall = oracle::place(s, "crate", Vec3(0.2, 1.5, 0.0));
  auto r = project_nonpenetration(s, {sunk, into_wall});
  EXPECT_NEAR(lowest_z(r.scene, sunk), 1e-5, 1e-7);
  EXPECT_NEAR(r.scene.object(into_wall).pose.translation.x(), 0.3 + 1e-5, 1e-7);
  EXPECT_NEAR(lowest_z(r.scene, into_wall), 1e-5, 1e-7);
}

TEST(Projection, NonConvergenceNamesWorstPair) {
  // Pushing the middle cube out of the left one drives it into the right one,
  // which a single pass cannot see.
  const auto I = Eigen::Matrix3d::Identity();
  const Eigen::Vector3d h = Eigen::Vector3d::Constant(0.5);
  std::vector<oracle::OBox> boxes{{Eigen::Vector3d(0, 0, 0), I, h, true},
                                  {Eigen::Vector3d(0.9, 0, 0), I, h, false},
                                  {Eigen::Vector3d(1.95, 0, 0), I, h, true}};
  std::vector<std::string> mv;
  auto s = scene_of(boxes, mv);
  ProjectionConfig cfg;
  cfg.max_iterations = 1;
  try {
    project_nonpenetration(s, mv, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProjectionFailed);
    EXPECT_EQ(e.details()["a"], "b1_0");
    EXPECT_EQ(e.details()["b"], "b2_0");
    EXPECT_LT(e.details()["distance"].get<double>(), 0.0);
  }
  cfg.max_iterations = 50;
  auto r = project_nonpenetration(s, mv, cfg);
  EXPECT_GE(min_pair_distance(r.scene), cfg.epsilon - 1e-6);
}

TEST(Projection, StageNamesRoundTrip) {
  for (const auto& s : {"post_furniture", "per_entity:table_0", "post_manipulands"})
    EXPECT_EQ(to_string(stage_from_string(s)), s);
  EXPECT_THROW(stage_from_string("later"), Error);
}

namespace {

struct Dining {
  scene::Scene scene;
  std::string table, shelf, cup, plate, box;
};

Dining dining() {
  Dining d;
  d.scene = oracle::room_scene(4.0, 4.0);
  d.scene.add_asset(prim::table("table", Vec2(1.2, 0.8), 0.75, 0.04, 0.05, 20.0));
  d.scene.add_asset(prim::box("cabinet", Category::kFurniture, Vec3(0.8, 0.4, 1.0), 30.0));
  d.scene.add_asset(prim::cylinder("cup", Category::kManipuland, 0.04, 0.1, 0.2));
  d.scene.add_asset(prim::cylinder("plate", Category::kManipuland, 0.11, 0.015, 0.4));
  d.scene.add_asset(prim::box("box", Category::kManipuland, Vec3(0.2, 0.15, 0.1), 0.5));
  d.table = oracle::place(d.scene, "table", Vec3(2, 2, 0));
  d.shelf = oracle::place(d.scene, "cabinet", Vec3(2, 0.5, 0));
  auto top_of = [&](const std::string& owner) {
    scene::SupportSurface best;
    double h = -1;
    for (const auto& s : scene::scene_surfaces(d.scene))
      if (s.owner_id == owner && s.height() > h) {
        h = s.height();
        best = s;
      }
    return best.id;
  };
  d.cup = oracle::place_on(d.scene, "cup", top_of(d.table), geom::Pose2(0.2, 0.1, 0.0));
  d.plate = oracle::place_on(d.scene, "plate", top_of(d.table), geom::Pose2(-0.3, 0.0, 0.0));
  d.box = oracle::place_on(d.scene, "box", top_of(d.shelf), geom::Pose2(0.0, 0.0, 15.0));
  return d;
}

double max_pose_change(const scene::Scene& a, const scene::Scene& b) {
  double m = 0.0;
  for (const auto& [id, obj] : a.objects) {
    if (!b.has_object(id)) continue;
    m = std::max(m, (obj.pose.translation - b.object(id).pose.translation).norm());
  }
  return m;
}

}  // namespace

TEST(Enforce, SupportingEntityFollowsGeometry) {
  auto d = dining();
  EXPECT_EQ(scene::supporting_entity(d.scene, d.cup), d.table);
  // Without the reference the geometry still says the cup is on the table.
  d.scene.object(d.cup).support.reset();
  d.scene.object(d.cup).pose.translation.z() += 0.003;
  EXPECT_EQ(scene::supporting_entity(d.scene, d.cup), d.table);
  EXPECT_EQ(scene::supporting_object(d.scene, d.table), std::nullopt);
}

TEST(Enforce, CleanSceneBarelyMoves) {
  auto d = dining();
  auto r = enforce_feasibility(d.scene, Stage::post_furniture());
  EXPECT_LT(max_pose_change(d.scene, r.scene), 1e-3);
  EXPECT_GE(r.movable.size(), 5u);
}

TEST(Enforce, PerEntityWeldsTheEntity) {
  auto d = dining();
  // Push the plate into the cup so the projection has work to do.
  d.scene.object(d.plate).pose.translation.x() += 0.3;
  d.scene.object(d.plate).support.reset();
  auto r = enforce_feasibility(d.scene, Stage::per_entity(d.table));
  EXPECT_EQ(r.scene.object(d.table).pose, d.scene.object(d.table).pose);
  EXPECT_EQ(r.scene.object(d.shelf).pose, d.scene.object(d.shelf).pose);
  EXPECT_EQ(r.scene.object(d.box).pose, d.scene.object(d.box).pose);
  std::vector<std::string> mv = r.movable;
  std::sort(mv.begin(), mv.end());
  std::vector<std::string> want{d.cup, d.plate};
  std::sort(want.begin(), want.end());
  EXPECT_EQ(mv, want);
  EXPECT_GT(r.projection_displacement, 0.0);
  const double gap = geom::signed_distance(scene::world_pieces(r.scene, r.scene.object(d.cup)),
                                           scene::world_pieces(r.scene, r.scene.object(d.plate)))
                         .distance;
  EXPECT_GT(gap, -1e-3);
}

TEST(Enforce, PostManipulandsKeepsFurnitureExact) {
  auto d = dining();
  d.scene.object(d.cup).pose.translation.z() += 0.05;  // hovering
  auto r = enforce_feasibility(d.scene, Stage::post_manipulands());
  EXPECT_EQ(r.scene.object(d.table).pose, d.scene.object(d.table).pose);
  EXPECT_EQ(r.scene.object(d.shelf).pose, d.scene.object(d.shelf).pose);
  EXPECT_NEAR(lowest_z(r.scene, d.cup), 0.75, 1e-3);
  EXPECT_FALSE(r.scene.object(d.cup).support.has_value());
}

TEST(Enforce, Idempotent) {
  std::mt19937_64 rng(5);
  auto s = oracle::random_furnished_room(rng, 6);
  auto first = enforce_feasibility(s, Stage::post_furniture());
  auto second = enforce_feasibility(first.scene, Stage::post_furniture());
  EXPECT_LT(max_pose_change(first.scene, second.scene), 2e-3);
}

TEST(Enforce, RemovesOverlapsOfRandomFurniture) {
  std::mt19937_64 rng(9);
  int checked = 0;
  for (int trial = 0; trial < 6; ++trial) {
    auto s = oracle::random_furnished_room(rng, 5);
    FeasibilityReport r;
    try {
      r = enforce_feasibility(s, Stage::post_furniture());
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::kProjectionFailed);
      continue;
    }
    ++checked;
    EXPECT_GT(min_pair_distance(r.scene), -1e-3) << trial;
  }
  EXPECT_GT(checked, 0);
}

TEST(Fallen, Reasons) {
  auto s = oracle::room_scene(5.0, 5.0);
  s.add_asset(prim::box("chair", Category::kFurniture, Vec3(0.5, 0.5, 0.9), 6.0));
  s.add_asset(prim::box("wardrobe", Category::kFurniture, Vec3(1.0, 0.6, 2.0), 60.0));
  s.add_asset(prim::cylinder("mug", Category::kManipuland, 0.04, 0.1, 0.3));
  const auto chair = oracle::place(s, "chair", Vec3(1, 1, 0));
  const auto wardrobe = oracle::place(s, "wardrobe", Vec3(3, 3, 0));
  const auto sunk = oracle::place(s, "mug", Vec3(2, 1, 0));
  const auto dropped = oracle::place(s, "mug", Vec3(2, 2, 0.75));
  const auto kept = oracle::place(s, "mug", Vec3(2, 3, 0.75));

  sim::SettleReport rep;
  auto add = [&](const std::string& id, const Pose3& fin) {
    sim::BodyResult b;
    b.id = id;
    b.initial = s.object(id).pose;
    b.final = fin;
    rep.bodies.push_back(b);
  };
  Pose3 tilted = s.object(chair).pose;
  tilted.rotation = Quat(Eigen::AngleAxisd(80.0 * M_PI / 180.0, Vec3::UnitX()));
  add(chair, tilted);
  add(wardrobe, s.object(wardrobe).pose);
  Pose3 low = s.object(sunk).pose;
  low.translation.z() = -0.02;
  add(sunk, low);
  Pose3 floor = s.object(dropped).pose;
  floor.translation.z() = 0.0;
  add(dropped, floor);
  add(kept, s.object(kept).pose);

  auto r = remove_fallen(s, rep);
  std::map<std::string, std::string> why;
  for (const auto& x : r.removed) why[x.id] = x.reason;
  EXPECT_EQ(why.size(), 3u);
  EXPECT_EQ(why[chair], "tilt");
  EXPECT_EQ(why[sunk], "floor_penetration");
  EXPECT_EQ(why[dropped], "fell_from_support");
  EXPECT_TRUE(r.scene.has_object(wardrobe));
  EXPECT_TRUE(r.scene.has_object(kept));
  EXPECT_FALSE(r.scene.has_object(chair));
}

TEST(Fallen, SmallDropIsKept) {
  auto s = oracle::room_scene(3.0, 3.0);
  s.add_asset(prim::box("book", Category::kManipuland, Vec3(0.2, 0.15, 0.03), 0.4));
  const auto id = oracle::place(s, "book", Vec3(1, 1, 0.25));
  sim::SettleReport rep;
  sim::BodyResult b;
  b.id = id;
  b.initial = s.object(id).pose;
  b.final = b.initial;
  b.final.translation.z() = 0.0;  // ends on the floor but only dropped 0.25 m
  rep.bodies.push_back(b);
  EXPECT_TRUE(remove_fallen(s, rep).removed.empty());
}
