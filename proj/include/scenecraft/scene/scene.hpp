#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scenecraft/geometry/convex.hpp"
#include "scenecraft/geometry/polygon.hpp"
#include "scenecraft/scene/asset.hpp"

namespace scenecraft::scene {

using geom::Polygon2;
using geom::Pose2;
using geom::Pose3;
using geom::WorldPiece;

struct SupportRef {
  std::string surface_id;
  Pose2 local;

  bool operator==(const SupportRef&) const = default;
};

struct ObjectInstance {
  std::string id;
  std::string asset_id;
  Pose3 pose;  // world
  std::optional<SupportRef> support;
  bool welded = false;

  bool operator==(const ObjectInstance&) const = default;
};

enum class OpeningKind { kDoor, kWindow };

// Door or window cut into one wall segment. offset_x is the opening center
// measured from the segment start along the wall frame x axis.
struct Opening {
  std::string id;
  OpeningKind kind = OpeningKind::kDoor;
  std::string wall_segment_id;
  double offset_x = 0.0;
  double width = 0.0;
  double height = 0.0;
  double sill = 0.0;  // windows only
  bool exterior = false;

  bool operator==(const Opening&) const = default;
};

struct WallSegment {
  std::string id;  // "wall_<k>" for floor edge k
  double thickness = 0.1;

  bool operator==(const WallSegment&) const = default;
};

// Architectural geometry of one room. The floor polygon lives in the room
// frame, which is the world frame translated by `origin` (floor at z = 0).
// Wall segment k runs along floor edge k from vertex k+1 to vertex k, so
// that, seen from inside, the wall x axis runs left to right.
struct RoomGeometry {
  std::string id;
  std::string room_type;
  Vec2 origin = Vec2::Zero();
  Polygon2 floor;
  double wall_height = 2.5;
  std::vector<WallSegment> walls;
  std::vector<Opening> doors;
  std::vector<Opening> windows;
  std::set<std::string> open_connections;
  std::string prompt;  // opaque metadata

  // Throws kInvalidGeometry / kDimension on invariant violations.
  void validate() const;
  Polygon2 world_floor() const { return floor.translated(origin); }

  bool operator==(const RoomGeometry&) const = default;
};

// Builds a rectangular room [0,w]x[0,l] in its own frame with one wall
// segment per edge.
RoomGeometry rectangular_room(std::string id, std::string room_type, const Vec2& origin, double width,
                              double length, double wall_height = 2.5, double wall_thickness = 0.1);

struct WallFrame {
  Vec3 start;    // world, at floor level on the inner face
  Vec3 end;
  Vec3 x_axis;   // unit, start -> end
  Vec3 inward;   // unit, horizontal, into the room
  double length = 0.0;
};

// Throws kNotFound for an unknown segment id.
int wall_index(const RoomGeometry& room, const std::string& segment_id);
WallFrame wall_frame(const RoomGeometry& room, int k);

struct Scene {
  static constexpr const char* kFormatVersion = "1";

  std::uint64_t seed = 0;
  std::vector<RoomGeometry> rooms;
  std::map<std::string, Asset> assets;
  std::map<std::string, ObjectInstance> objects;
  std::map<std::string, std::uint64_t> id_counters;  // next base-36 suffix per name

  const Asset& asset(const std::string& id) const;
  const ObjectInstance& object(const std::string& id) const;
  ObjectInstance& object(const std::string& id);
  const Asset& asset_of(const std::string& object_id) const;
  const RoomGeometry& room(const std::string& id) const;
  RoomGeometry& room(const std::string& id);
  bool has_object(const std::string& id) const { return objects.count(id) != 0; }

  // Allocates "<name>_<base36 counter>".
  std::string next_object_id(const std::string& name);
  void add_asset(Asset a);
  // Inserts with a fresh id derived from `name`; returns the id.
  std::string add_object(const std::string& name, ObjectInstance obj);

  // Room whose world floor contains the xy of p, if any.
  const RoomGeometry* room_containing(const Vec3& p) const;

  void validate() const;

  bool operator==(const Scene&) const = default;
};

std::string to_base36(std::uint64_t n);

// Collision pieces of an object posed in the world; empty for thin coverings.
std::vector<WorldPiece> world_pieces(const Scene& scene, const ObjectInstance& obj);
// World AABB of the posed asset bbox corners.
geom::Aabb3 world_aabb(const Scene& scene, const ObjectInstance& obj);
// 2D oriented footprint of the asset bbox under the object's yaw.
geom::Obb2 footprint_obb(const Scene& scene, const ObjectInstance& obj);

// Static environment for one room: a floor slab under the floor polygon plus
// wall boxes outward of each floor edge, with door and window holes cut out
// and open connections removed.
std::vector<ConvexPiece> room_static_pieces(const RoomGeometry& room, double floor_thickness = 0.1);

struct StaticPart {
  std::string id;  // "<room>:floor" or "<room>:wall_<k>"
  ConvexPiece piece;
};
// Same pieces as room_static_pieces, labelled by the element they belong to.
std::vector<StaticPart> room_static_parts(const RoomGeometry& room, double floor_thickness = 0.1);

}  // namespace scenecraft::scene
