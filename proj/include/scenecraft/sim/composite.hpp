#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenecraft/rng.hpp"
#include "scenecraft/scene/surface.hpp"
#include "scenecraft/sim/settle.hpp"

namespace scenecraft::sim {

using geom::Pose2;
using geom::Vec2;
using scene::Asset;
using scene::SupportSurface;

// One member of a composite. `local` is relative to the composite frame,
// which is lift_pose(composite pose, surface); `world` = frame * local.
struct CompositeItem {
  int index = 0;  // position in the input list
  Asset asset;
  Pose3 local;
  Pose3 world;
};

// Frame of a composite placed at `local` on the surface.
Pose3 composite_frame(const SupportSurface& surface, const Pose2& local);

// ---- stack -----------------------------------------------------------------

struct StackConfig {
  SimConfig sim;
  double spawn_gap = 0.001;
  double lateral_threshold = 0.03;  // lateral displacement beyond this marks an item unstable
};

struct StackResult {
  bool success = false;
  int stable_count = 0;  // leading items neither fallen nor unstable
  std::vector<bool> stable;
  std::vector<bool> fallen;
  double height = 0.0;  // above the surface, after settling
  std::vector<CompositeItem> items;  // bottom to top, input order
  SettleReport settle;
};

// Items are stacked bottom-to-top in input order by their collision AABB
// heights and settled. A fallen item rejects the stack (success false).
// Throws kClearance when the settled stack is taller than the surface clearance.
StackResult create_stack(const std::vector<Asset>& items, const SupportSurface& surface, const Pose2& base_local,
                         const std::vector<ConvexPiece>& env, const StackConfig& cfg = {});

// ---- fill ------------------------------------------------------------------

struct FillConfig {
  SimConfig sim;
  double top_fraction = 0.2;
  double hull_scale = 0.85;
  double aspect_threshold = 2.5;
  int max_iterations = 10;
  double inside_fraction = 0.1;  // inside iff lowest point >= base + fraction * container height
  double spawn_gap = 0.01;
};

struct FillResult {
  CompositeItem container;
  std::vector<CompositeItem> inside;
  std::vector<int> removed;  // input indices
  std::vector<Vec2> interior;  // scaled opening hull, composite frame, counter-clockwise
  int iterations = 0;
};

// Opening of a container in its canonical frame: hull of the xy projections
// of vertices in the top fraction of its height, scaled about its centroid.
std::vector<Vec2> container_interior(const Asset& container, double top_fraction, double scale);

// Initial orientation of a fill item: elongated items stand upright with the
// second-longest axis along `long_axis`, thick end up.
geom::Quat fill_orientation(const Asset& item, double aspect_threshold, const Vec3& long_axis);

// Footprint area of the parts of the rotated asset above and below its mid height.
std::pair<double, double> half_footprints(const Asset& item, const geom::Quat& q);

// Throws kFillFailed when no item ends up inside.
FillResult fill_container(const Asset& container, const std::vector<Asset>& fills, const SupportSurface& surface,
                          const Pose2& local, const std::vector<ConvexPiece>& env, Rng& rng,
                          const FillConfig& cfg = {});

// ---- arrangement -----------------------------------------------------------

struct ArrangementItem {
  Asset asset;
  Pose2 local;  // relative to the container center
};

struct ArrangeConfig {
  SimConfig sim;
  double spawn_gap = 0.002;
  double fall_fraction = 0.5;  // fallen below base + fraction * resting height
};

struct ContainerBounds {
  bool circular = false;
  Vec2 center = Vec2::Zero();  // canonical frame
  double radius = 0.0;
  Vec2 half_extents = Vec2::Zero();
};

ContainerBounds container_bounds(const Asset& container);

struct ArrangementResult {
  CompositeItem container;
  std::vector<CompositeItem> items;
  ContainerBounds bounds;
};

// Throws kBounds for an item center outside the container, kCollision naming
// the first overlapping pair, kArrangementFailed listing every fallen item.
ArrangementResult create_arrangement(const Asset& container, const std::vector<ArrangementItem>& items,
                                     const SupportSurface& surface, const Pose2& local,
                                     const std::vector<ConvexPiece>& env, const ArrangeConfig& cfg = {});

// ---- pile ------------------------------------------------------------------

struct PileConfig {
  SimConfig sim;
  double radius_factor = 0.75;
  double fall_drop = 0.02;  // fallen below surface height minus this
  double spawn_gap = 0.005;
};

struct PileResult {
  std::vector<CompositeItem> on;
  std::vector<int> fallen;  // input indices
  double spawn_radius = 0.0;
};

// Uniform point in a disk of radius r (square-root radial transform).
Vec2 sample_disk(double radius, Rng& rng);

// Throws kArity for fewer than 2 items and kPileFailed when fewer than 2 stay.
PileResult create_pile(const std::vector<Asset>& items, const SupportSurface& surface, const Pose2& local,
                       const std::vector<ConvexPiece>& env, Rng& rng, const PileConfig& cfg = {});

// ---- scene glue ------------------------------------------------------------

// Static geometry a composite on `surface` settles against: floor and walls of
// the room holding it plus the owner's pieces not lying wholly above the surface.
std::vector<ConvexPiece> composite_environment(const scene::Scene& scene, const SupportSurface& surface);

// Adds the items as free-standing objects (no support reference, since settled
// poses are not surface lifts); returns the new ids in item order.
std::vector<std::string> commit_composite(scene::Scene& scene, const std::vector<CompositeItem>& items);

nlohmann::json to_json(const ContainerBounds& b);
nlohmann::json to_json(const CompositeItem& item);

}  // namespace scenecraft::sim
