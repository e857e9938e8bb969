#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenecraft/scene/scene.hpp"

namespace scenecraft::tools {

using geom::Vec2;
using geom::Vec3;
using scene::Scene;

// ---- facing ----------------------------------------------------------------

struct FacingReport {
  bool faces_toward = false;
  bool faces_away = false;
  double optimal_theta = 0.0;  // absolute source yaw (degrees) that faces the target
  bool target_is_circular = false;
  Vec2 target_point = Vec2::Zero();
};

// Forward direction of a yaw: +Y rotated about +Z.
Vec2 forward_of(double yaw_deg);
// Ray-rectangle test, t >= 0, boundary inclusive.
bool ray_hits_box(const Vec2& origin, const Vec2& dir, const Vec2& lo, const Vec2& hi);
// Yaw (degrees) that makes the ray cast from pose origin + R(yaw) * offset
// along R(yaw) * (0, sign) pass through `point`. nullopt when unreachable.
std::optional<double> aim_yaw(const Vec2& origin, const Vec2& offset, const Vec2& point, double sign);

// Throws kNotFound for unknown ids and kPlacement when source == target.
FacingReport check_facing(const Scene& scene, const std::string& source_id, const std::string& target_id);

// ---- snap ------------------------------------------------------------------

enum class SnapMode { kToward, kAway, kNone };
SnapMode snap_mode_from_string(const std::string& s);

struct SnapConfig {
  double step = 0.01;
  double margin = 0.005;
  double max_travel = 10.0;
};

struct SnapResult {
  Scene scene;
  geom::Pose3 pose;
  bool pushed_out = false;   // phase 1 ran
  double travel = 0.0;       // phase 3 distance moved
  double final_distance = 0.0;
};

// Throws kSnapFailed (scene untouched) when no collision-free position exists
// along the approach direction, kPlacement for a welded source.
SnapResult snap_to_object(const Scene& scene, const std::string& source_id, const std::string& target_id,
                          SnapMode mode, const SnapConfig& cfg = {});

// ---- reachability ----------------------------------------------------------

struct ReachabilityReport {
  bool fully_reachable = true;
  int region_count = 0;
  double reachability_ratio = 1.0;
  double total_area = 0.0;
  std::vector<double> region_areas;  // descending
  std::vector<std::string> blocking_object_ids;
};

// Free-space components smaller than this are numerical pockets and are not
// counted as regions (their area still enters the total).
inline constexpr double kMinRegionArea = 1e-4;

// Furniture footprints standing in the room.
std::vector<std::pair<std::string, geom::Obb2>> room_obstacles(const Scene& scene, const std::string& room_id);

ReachabilityReport check_reachability(const Scene& scene, const std::string& room_id, double robot_half_width);

// ---- physics ---------------------------------------------------------------

enum class Stage { kFurniture, kWall, kCeiling, kManipuland };
Stage stage_from_string(const std::string& s);
std::string to_string(Stage s);

struct PhysicsConfig {
  double collision_threshold = 0.001;
  double door_clearance = 0.75;
  double window_depth = 0.3;
  double robot_half_width = 0.35;
  double near_distance = 0.05;  // manipuland-vs-furniture neighbourhood
};

struct Collision {
  std::string a;
  std::string b;  // a < b
  double depth = 0.0;
};

struct Blockage {
  std::string room_id;
  std::string element_id;  // door id or wall segment id
  std::vector<std::string> object_ids;
};

struct Violation {
  std::string object_id;
  std::string reason;
};

struct PhysicsReport {
  std::vector<Collision> collisions;
  std::vector<std::pair<std::string, std::string>> covering_overlaps;
  std::vector<Violation> boundary_violations;
  std::vector<Blockage> door_blockages;
  std::vector<Blockage> open_connection_blockages;
  std::vector<Blockage> window_warnings;

  bool clean() const {
    return collisions.empty() && covering_overlaps.empty() && boundary_violations.empty() && door_blockages.empty() &&
           open_connection_blockages.empty();
  }
};

PhysicsReport check_physics(const Scene& scene, Stage stage, const std::optional<std::string>& context = std::nullopt,
                            const PhysicsConfig& cfg = {});

nlohmann::json to_json(const FacingReport& r);
nlohmann::json to_json(const ReachabilityReport& r);
nlohmann::json to_json(const PhysicsReport& r);

}  // namespace scenecraft::tools
