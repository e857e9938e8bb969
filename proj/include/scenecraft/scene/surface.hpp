#pragma once

#include <limits>
#include <string>
#include <vector>

#include "scenecraft/geometry/polygon.hpp"
#include "scenecraft/scene/scene.hpp"

namespace scenecraft::scene {

enum class SurfaceKind { kFloor, kWall, kCeiling, kObject };

// Planar placement frame. World pose of a placed object is
//   frame * (x, y, 0, yaw theta) * mount
// where `mount` re-orients the canonical asset frame for the surface kind
// (identity for floors and object tops).
struct SupportSurface {
  std::string id;
  std::string owner_id;  // object id, or room id for architectural surfaces
  SurfaceKind kind = SurfaceKind::kObject;
  Pose3 frame;
  geom::Quat mount = geom::Quat::Identity();
  Polygon2 bounds;  // in frame coordinates
  double clearance = 0.0;
  std::vector<Polygon2> excluded;  // doors, windows, open connections (walls only)

  double height() const { return frame.translation.z(); }
  double area() const { return bounds.area(); }
};

struct SurfaceExtractionConfig {
  double normal_tolerance_deg = 5.0;
  double height_tolerance = 0.005;
  double min_area = 0.01;
  double clearance_cap = std::numeric_limits<double>::infinity();
};

Pose3 lift_pose(const Pose2& local, const SupportSurface& surface);
// Ceiling placements are given in room coordinates; the downward-facing
// ceiling frame sees them as (x, -y, -theta).
Pose2 ceiling_local_from_room(const Pose2& room_local);

// Inverse of lift_pose for poses expressible on the surface.
Pose2 unlift_pose(const Pose3& pose, const SupportSurface& surface);

// Up-facing clusters of the posed collision hulls, ids "<owner_id>:S_<k>",
// ordered by (height, centroid x, centroid y).
std::vector<SupportSurface> extract_support_surfaces(const Asset& asset, const Pose3& owner_pose,
                                                     const std::string& owner_id,
                                                     const SurfaceExtractionConfig& cfg = {});
std::vector<SupportSurface> extract_support_surfaces(const geom::TriMesh& mesh, const Pose3& owner_pose,
                                                     const std::string& owner_id,
                                                     const SurfaceExtractionConfig& cfg = {});

// Architectural surfaces: "<room>:floor", "<room>:wall_<k>", "<room>:ceiling".
std::vector<SupportSurface> room_surfaces(const RoomGeometry& room);

// Every surface in the scene: room surfaces followed by those of furniture
// and wall objects, capped at the height of the containing room.
std::vector<SupportSurface> scene_surfaces(const Scene& scene);

// Throws kNotFound.
SupportSurface find_surface(const Scene& scene, const std::string& surface_id);

// Owner of a surface id ("<owner>:<name>").
std::string surface_owner(const std::string& surface_id);

}  // namespace scenecraft::scene
