#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenecraft/scene/scene.hpp"

namespace scenecraft::scene {

struct SceneFilter {
  std::optional<Category> category;
  std::optional<std::string> room_id;
  std::optional<std::string> surface_id;
};

struct ObjectListing {
  std::string id;
  std::string asset_id;
  Category category = Category::kFurniture;
  std::string room_id;  // empty when outside every room
  Pose3 pose;
  std::optional<SupportRef> support;
  Aabb3 bbox;  // asset canonical frame
  bool welded = false;
};

// Objects matching every given selector, sorted by id. Throws kNotFound for
// an unknown room or surface selector.
std::vector<ObjectListing> query_scene_state(const Scene& scene, const SceneFilter& filter = {});

nlohmann::json to_json(const std::vector<ObjectListing>& listing);

// Object the given one rests on: the owner of its support surface when that is
// an object, otherwise the object whose geometry tops out highest under the
// center of its footprint within `tolerance` of its lowest point. Nullopt on
// the floor or in the air.
std::optional<std::string> supporting_object(const Scene& scene, const std::string& id, double tolerance = 0.02);

// Follows supporting_object through manipulands (plate on plate on table) to
// the first furniture, wall or ceiling object.
std::optional<std::string> supporting_entity(const Scene& scene, const std::string& id, double tolerance = 0.02);

}  // namespace scenecraft::scene
