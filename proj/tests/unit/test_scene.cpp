#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "scenecraft/error.hpp"
#include "scenecraft/geometry/rotation.hpp"
#include "scenecraft/scene/query.hpp"
#include "scenecraft/scene/serialize.hpp"
#include "scenecraft/scene/surface.hpp"

using namespace scenecraft;
using namespace scenecraft::scene;
using geom::Quat;

namespace {

SupportSurface plain_surface(const Pose3& frame) {
  SupportSurface s;
  s.id = "test:S_0";
  s.frame = frame;
  s.bounds = Polygon2::rectangle(Vec2(-1, -1), Vec2(1, 1));
  return s;
}

Eigen::Matrix4d yaw_matrix(double x, double y, double deg) {
  const double t = geom::deg_to_rad(deg);
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(0, 0) = std::cos(t);
  m(0, 1) = -std::sin(t);
  m(1, 0) = std::sin(t);
  m(1, 1) = std::cos(t);
  m(0, 3) = x;
  m(1, 3) = y;
  return m;
}

Scene sample_scene() {
  Scene s;
  s.seed = 42;
  auto room = rectangular_room("kitchen", "kitchen", Vec2(1.5, -2.0), 5.0, 4.0);
  room.doors.push_back({"door_0", OpeningKind::kDoor, "wall_0", 2.0, 0.9, 2.1, 0.0, true});
  room.windows.push_back({"window_0", OpeningKind::kWindow, "wall_2", 1.5, 1.2, 1.0, 0.9, false});
  room.open_connections.insert("wall_3");
  room.prompt = "a cozy kitchen";
  s.rooms.push_back(room);
  s.add_asset(primitives::table("table", Vec2(1.2, 0.8), 0.75, 0.04, 0.05, 20.0));
  s.add_asset(primitives::box("mug", Category::kManipuland, Vec3(0.08, 0.08, 0.1), 0.3));
  s.add_asset(primitives::thin_covering("rug", Vec2(2.0, 1.4)));
  ObjectInstance t;
  t.asset_id = "table";
  t.pose = Pose3::from_yaw(Vec3(3.0, 0.0, 0.0), 17.0);
  t.welded = true;
  const std::string tid = s.add_object("table", t);
  const auto surfaces = extract_support_surfaces(s.asset("table"), s.object(tid).pose, tid);
  for (int i = 0; i < 3; ++i) {
    ObjectInstance m;
    m.asset_id = "mug";
    const Pose2 local(0.1 * i - 0.1, 0.05 * i, 33.3 * i);
    m.pose = lift_pose(local, surfaces.front());
    m.support = SupportRef{surfaces.front().id, local};
    s.add_object("mug", m);
  }
  ObjectInstance rug;
  rug.asset_id = "rug";
  rug.pose = Pose3::from_yaw(Vec3(2.0, -1.0, 0.0), -5.0);
  s.add_object("rug", rug);
  return s;
}

}  // namespace

TEST(LiftPose, IdentitySurfaceAtTableHeight) {
  const auto s = plain_surface(Pose3(Vec3(0, 0, 0.75), Quat::Identity()));
  const Pose3 p = lift_pose(Pose2(0.1, 0.2, 90.0), s);
  EXPECT_NEAR((p.translation - Vec3(0.1, 0.2, 0.75)).norm(), 0.0, 1e-12);
  EXPECT_NEAR(p.yaw_deg(), 90.0, 1e-9);
}

TEST(LiftPose, ZeroLocalPoseIsSurfaceFrame) {
  Rng rng(1);
  const auto s = plain_surface(Pose3(Vec3(1, 2, 3), geom::sample_rotation_uniform(rng)));
  const Pose3 p = lift_pose(Pose2(), s);
  EXPECT_NEAR((p.matrix() - s.frame.matrix()).norm(), 0.0, 1e-12);
}

TEST(LiftPose, MatchesExplicitMatrixProduct) {
  const Pose3 frame(Vec3(2, 0, 1), Quat(Eigen::AngleAxisd(geom::kPi / 2, Vec3::UnitZ())));
  const auto s = plain_surface(frame);
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 0) = 0;
  f(0, 1) = -1;
  f(1, 0) = 1;
  f(1, 1) = 0;
  f(0, 3) = 2;
  f(2, 3) = 1;
  const Eigen::Matrix4d expected = f * yaw_matrix(0.5, 0.3, 0.0);
  EXPECT_NEAR((lift_pose(Pose2(0.5, 0.3, 0.0), s).matrix() - expected).norm(), 0.0, 1e-12);
}

TEST(LiftPose, RoundTripOnRandomSurfaces) {
  Rng rng(2);
  std::uniform_real_distribution<double> u(-3, 3);
  std::uniform_real_distribution<double> ang(-179.9, 179.9);
  for (int i = 0; i < 500; ++i) {
    auto s = plain_surface(Pose3(Vec3(u(rng), u(rng), u(rng)), geom::sample_rotation_uniform(rng)));
    s.mount = geom::sample_rotation_uniform(rng);
    const Pose2 local(u(rng), u(rng), ang(rng));
    const Pose3 lifted = lift_pose(local, s);
    const Pose2 back = unlift_pose(lifted, s);
    EXPECT_NEAR(back.x, local.x, 1e-9);
    EXPECT_NEAR(back.y, local.y, 1e-9);
    EXPECT_NEAR(back.theta_deg, local.theta_deg, 1e-9);
    EXPECT_NEAR((lift_pose(back, s).matrix() - lifted.matrix()).norm(), 0.0, 1e-9);
  }
}

TEST(RoomSurfaces, WallMountFacesIntoRoom) {
  const auto room = rectangular_room("r", "office", Vec2(10, 20), 4.0, 3.0, 2.5);
  const auto surfaces = room_surfaces(room);
  ASSERT_EQ(surfaces.size(), 6u);
  for (int k = 0; k < 4; ++k) {
    const auto& s = surfaces[1 + k];
    const WallFrame f = wall_frame(room, k);
    const Pose3 p = lift_pose(Pose2(0.5, 1.2, 0.0), s);
    // Back (y = 0) on the inner face, forward (+Y) into the room, up stays up.
    EXPECT_NEAR((p.translation - (f.start + 0.5 * f.x_axis + Vec3(0, 0, 1.2))).norm(), 0.0, 1e-12);
    EXPECT_NEAR((p.apply_vector(Vec3::UnitY()) - f.inward).norm(), 0.0, 1e-12);
    EXPECT_NEAR((p.apply_vector(Vec3::UnitZ()) - Vec3::UnitZ()).norm(), 0.0, 1e-12);
    const Vec2 mid = 0.5 * (f.start + f.end).head<2>() + 0.1 * f.inward.head<2>();
    EXPECT_TRUE(geom::point_in_polygon(mid, room.world_floor()));
  }
}

TEST(RoomSurfaces, CeilingUsesRoomCoordinates) {
  const auto room = rectangular_room("r", "office", Vec2(1, 1), 4.0, 3.0, 2.7);
  const auto ceiling = room_surfaces(room).back();
  EXPECT_EQ(ceiling.id, "r:ceiling");
  EXPECT_GT(ceiling.bounds.area(), 0.0);
  const Pose3 p = lift_pose(ceiling_local_from_room(Pose2(1.0, 2.0, 30.0)), ceiling);
  EXPECT_NEAR((p.translation - Vec3(2.0, 3.0, 2.7)).norm(), 0.0, 1e-12);
  EXPECT_NEAR(p.yaw_deg(), 30.0, 1e-9);
  EXPECT_NEAR((p.apply_vector(Vec3::UnitZ()) - Vec3::UnitZ()).norm(), 0.0, 1e-12);
}

TEST(ExtractSurfaces, UnitCube) {
  const auto a = primitives::box("cube", Category::kFurniture, Vec3(1, 1, 1), 1.0);
  const auto s = extract_support_surfaces(a, Pose3(), "cube_0");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].id, "cube_0:S_0");
  EXPECT_NEAR(s[0].height(), 1.0, 1e-12);
  EXPECT_NEAR(s[0].area(), 1.0, 1e-12);
}

TEST(ExtractSurfaces, TwoShelfOpenBox) {
  std::vector<ConvexPiece> pieces;
  pieces.push_back(ConvexPiece::box(Vec3(-0.5, -0.2, 0.0), Vec3(-0.48, 0.2, 0.82)));
  pieces.push_back(ConvexPiece::box(Vec3(0.48, -0.2, 0.0), Vec3(0.5, 0.2, 0.82)));
  pieces.push_back(ConvexPiece::box(Vec3(-0.48, -0.2, 0.38), Vec3(0.48, 0.2, 0.40)));
  pieces.push_back(ConvexPiece::box(Vec3(-0.48, -0.2, 0.80), Vec3(0.48, 0.2, 0.82)));
  const auto a = make_asset("shelf", Category::kFurniture, pieces, 10.0);
  const auto s = extract_support_surfaces(a, Pose3(), "shelf_0");
  ASSERT_GE(s.size(), 2u);
  EXPECT_NEAR(s[0].height(), 0.40, 1e-12);
  EXPECT_NEAR(s[0].clearance, 0.40, 1e-3);
}

TEST(ExtractSurfaces, IcosphereHasNone) {
  // Finer tessellations (4^3 * 20 faces and up) do form a polar cap within
  // 5 degrees and 5 mm whose hull exceeds 0.01 m^2.
  for (int sub = 0; sub <= 2; ++sub) {
    EXPECT_TRUE(extract_support_surfaces(geom::icosphere_mesh(1.0, sub), Pose3(), "ball").empty()) << sub;
  }
}

TEST(ExtractSurfaces, InvariantToTriangleOrder) {
  const auto a = primitives::shelf("s", Category::kFurniture, Vec3(0.8, 0.3, 1.2), {0.4, 0.8}, 0.02, 15.0);
  geom::TriMesh mesh;
  for (const auto& p : a.collision_pieces) {
    const int base = static_cast<int>(mesh.vertices.size());
    for (const auto& v : p.vertices()) mesh.vertices.push_back(v);
    for (const auto& t : p.triangles()) mesh.triangles.push_back({base + t[0], base + t[1], base + t[2]});
  }
  const Pose3 owner = Pose3::from_yaw(Vec3(1, 2, 0), 30.0);
  const auto ref = extract_support_surfaces(mesh, owner, "s_0");
  ASSERT_GE(ref.size(), 3u);
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    auto shuffled = mesh;
    std::shuffle(shuffled.triangles.begin(), shuffled.triangles.end(), rng);
    const auto got = extract_support_surfaces(shuffled, owner, "s_0");
    ASSERT_EQ(got.size(), ref.size());
    for (size_t i = 0; i < got.size(); ++i) {
      EXPECT_NEAR((got[i].frame.matrix() - ref[i].frame.matrix()).norm(), 0.0, 1e-6);
    }
  }
}

TEST(ExtractSurfaces, EquivariantUnderRigidMotion) {
  const auto a = primitives::table("t", Vec2(1.2, 0.7), 0.75, 0.04, 0.05, 20.0);
  const Pose3 owner = Pose3::from_yaw(Vec3(0.3, -0.2, 0), 10.0);
  const auto ref = extract_support_surfaces(a, owner, "t_0");
  ASSERT_EQ(ref.size(), 1u);
  Rng rng(5);
  std::uniform_real_distribution<double> u(-5, 5);
  std::uniform_real_distribution<double> ang(-180, 180);
  for (int i = 0; i < 20; ++i) {
    const Pose3 g = Pose3::from_yaw(Vec3(u(rng), u(rng), u(rng)), ang(rng));
    const auto got = extract_support_surfaces(a, g * owner, "t_0");
    ASSERT_EQ(got.size(), 1u);
    EXPECT_NEAR((got[0].frame.matrix() - (g * ref[0].frame).matrix()).norm(), 0.0, 1e-6);
    EXPECT_NEAR(got[0].area(), ref[0].area(), 1e-9);
  }
}

TEST(Serialization, RoundTripIsExact) {
  const Scene s = sample_scene();
  const std::string text = serialize_scene(s);
  const Scene back = deserialize_scene(text);
  EXPECT_TRUE(back == s);
  EXPECT_EQ(serialize_scene(back), text);
}

TEST(Serialization, RoundTripRandomPoses) {
  Scene s = sample_scene();
  Rng rng(9);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 50; ++i) {
    ObjectInstance o;
    o.asset_id = "mug";
    o.pose = Pose3(Vec3(u(rng), u(rng), u(rng)), geom::sample_rotation_uniform(rng));
    s.add_object("mug", o);
  }
  EXPECT_TRUE(deserialize_scene(serialize_scene(s)) == s);
}

TEST(Serialization, MissingFieldNamesPath) {
  auto j = scene_to_json(sample_scene());
  j["objects"][1]["pose"].erase("xyz");
  try {
    scene_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
    EXPECT_EQ(e.details()["field"], "objects[1].pose.xyz");
  }
}

TEST(Serialization, TruncatedTextIsSchemaError) {
  const std::string text = serialize_scene(sample_scene());
  try {
    deserialize_scene(text.substr(0, text.size() / 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
  }
  auto j = scene_to_json(sample_scene());
  j.erase("objects");
  try {
    scene_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
    EXPECT_EQ(e.details()["field"], "objects");
  }
}

TEST(Serialization, UnknownVersion) {
  auto j = scene_to_json(sample_scene());
  j["format_version"] = "99";
  try {
    scene_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kVersion);
  }
}

TEST(Query, EmptyScene) { EXPECT_TRUE(query_scene_state(Scene{}).empty()); }

TEST(Query, LexicographicOrder) {
  Scene s;
  s.add_asset(primitives::box("chair", Category::kFurniture, Vec3(0.5, 0.5, 0.9), 5.0));
  ObjectInstance o;
  o.asset_id = "chair";
  for (int i = 0; i < 11; ++i) s.add_object("chair", o);
  const auto listing = query_scene_state(s);
  ASSERT_EQ(listing.size(), 11u);
  EXPECT_EQ(listing[0].id, "chair_0");
  EXPECT_EQ(listing[10].id, "chair_a");
  for (size_t i = 1; i < listing.size(); ++i) EXPECT_LT(listing[i - 1].id, listing[i].id);
}

TEST(Query, FilterBySurface) {
  Scene s = sample_scene();
  for (int i = 0; i < 6; ++i) {
    ObjectInstance o;
    o.asset_id = "mug";
    o.pose = Pose3::from_yaw(Vec3(4.0 + 0.2 * i, 0.5, 0.0), 0.0);
    s.add_object("mug", o);
  }
  const auto listing = query_scene_state(s, {std::nullopt, std::nullopt, std::string("table_0:S_0")});
  ASSERT_EQ(listing.size(), 3u);
  for (const auto& l : listing) EXPECT_EQ(l.support->surface_id, "table_0:S_0");
  EXPECT_EQ(query_scene_state(s, {Category::kThinCovering, std::nullopt, std::nullopt}).size(), 1u);
  EXPECT_THROW(query_scene_state(s, {std::nullopt, std::string("attic"), std::nullopt}), Error);
  EXPECT_THROW(query_scene_state(s, {std::nullopt, std::nullopt, std::string("table_0:S_9")}), Error);
}

TEST(Naming, Base36) {
  EXPECT_EQ(to_base36(0), "0");
  EXPECT_EQ(to_base36(10), "a");
  EXPECT_EQ(to_base36(35), "z");
  EXPECT_EQ(to_base36(36), "10");
}

TEST(RoomStatic, DoorLeavesAHole) {
  auto room = rectangular_room("r", "hall", Vec2(0, 0), 4.0, 3.0, 2.5, 0.1);
  room.doors.push_back({"d", OpeningKind::kDoor, "wall_0", 2.0, 1.0, 2.0, 0.0, true});
  room.windows.push_back({"w", OpeningKind::kWindow, "wall_1", 1.5, 1.0, 1.0, 1.0, false});
  room.open_connections.insert("wall_2");
  room.validate();
  const auto pieces = room_static_pieces(room);
  auto solid = [&](const Vec3& p) {
    for (const auto& piece : pieces) {
      if (geom::contains_point(geom::WorldPiece::from(piece, Pose3()), p, -1e-9)) return true;
    }
    return false;
  };
  // wall_0 runs along y = 0 from x = 4 to x = 0; the door centre is at x = 2.
  EXPECT_FALSE(solid(Vec3(2.0, -0.05, 1.0)));
  EXPECT_TRUE(solid(Vec3(2.0, -0.05, 2.2)));
  EXPECT_TRUE(solid(Vec3(0.5, -0.05, 1.0)));
  // wall_1 runs along x = 4 from y = 3 to y = 0; window spans z in [1, 2].
  EXPECT_FALSE(solid(Vec3(4.05, 1.5, 1.5)));
  EXPECT_TRUE(solid(Vec3(4.05, 1.5, 0.5)));
  // wall_2 (y = 3) is an open connection.
  EXPECT_FALSE(solid(Vec3(2.0, 3.05, 1.0)));
  EXPECT_TRUE(solid(Vec3(2.0, 1.5, -0.05)));
}

TEST(RoomGeometry, RejectsTallWindow) {
  auto room = rectangular_room("r", "hall", Vec2(0, 0), 4.0, 3.0, 2.5, 0.1);
  room.windows.push_back({"w", OpeningKind::kWindow, "wall_1", 1.5, 1.0, 2.0, 1.0, false});
  EXPECT_THROW(room.validate(), Error);
}
