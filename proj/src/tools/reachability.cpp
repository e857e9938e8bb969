#include <algorithm>

#include "scenecraft/error.hpp"
#include "scenecraft/geometry/polygon.hpp"
#include "scenecraft/tools/placement.hpp"

namespace scenecraft::tools {

std::vector<std::pair<std::string, geom::Obb2>> room_obstacles(const Scene& scene, const std::string& room_id) {
  const auto& room = scene.room(room_id);
  const auto floor = room.world_floor();
  std::vector<std::pair<std::string, geom::Obb2>> out;
  for (const auto& [id, obj] : scene.objects) {
    if (scene.asset(obj.asset_id).category != scene::Category::kFurniture) continue;
    const geom::Obb2 box = scene::footprint_obb(scene, obj);
    if (!geom::point_in_polygon(box.center, floor)) continue;
    out.emplace_back(id, box);
  }
  return out;
}

namespace {

int counted_regions(const geom::FreeSpace& space) {
  int n = 0;
  for (const auto& reg : space.regions) n += reg.area >= kMinRegionArea;
  return n;
}

geom::FreeSpace space_without(const geom::Polygon2& floor, const std::vector<std::pair<std::string, geom::Obb2>>& obs,
                              double r, size_t skip) {
  std::vector<geom::Obb2> boxes;
  for (size_t i = 0; i < obs.size(); ++i) {
    if (i != skip) boxes.push_back(obs[i].second);
  }
  return geom::free_space(floor, boxes, r);
}

}  // namespace

ReachabilityReport check_reachability(const Scene& scene, const std::string& room_id, double robot_half_width) {
  if (!(robot_half_width > 0.0)) {
    throw Error(ErrorCode::kSpec, "robot half width must be positive");
  }
  const auto floor = scene.room(room_id).world_floor();
  const auto obs = room_obstacles(scene, room_id);
  const auto space = space_without(floor, obs, robot_half_width, obs.size());

  ReachabilityReport r;
  r.region_count = counted_regions(space);
  r.fully_reachable = r.region_count <= 1;
  r.total_area = space.total_area;
  for (const auto& reg : space.regions) {
    if (reg.area >= kMinRegionArea) r.region_areas.push_back(reg.area);
  }
  r.reachability_ratio = r.region_count > 0 ? r.region_areas.front() / space.total_area : 1.0;
  for (size_t i = 0; i < obs.size() && r.region_count > 1; ++i) {
    const auto without = space_without(floor, obs, robot_half_width, i);
    if (counted_regions(without) < r.region_count) r.blocking_object_ids.push_back(obs[i].first);
  }
  return r;
}

nlohmann::json to_json(const ReachabilityReport& r) {
  return {{"fully_reachable", r.fully_reachable},     {"region_count", r.region_count},
          {"reachability_ratio", r.reachability_ratio}, {"total_area", r.total_area},
          {"region_areas", r.region_areas},             {"blocking_object_ids", r.blocking_object_ids}};
}

}  // namespace scenecraft::tools
