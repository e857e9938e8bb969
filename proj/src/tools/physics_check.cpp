#include <algorithm>
#include <map>
#include <set>

#include "scenecraft/error.hpp"
#include "scenecraft/geometry/polygon.hpp"
#include "scenecraft/scene/collision.hpp"
#include "scenecraft/scene/query.hpp"
#include "scenecraft/scene/surface.hpp"
#include "scenecraft/tools/placement.hpp"

namespace scenecraft::tools {

using scene::Body;
using scene::Category;

namespace {

constexpr double kAreaEps = 1e-6;

std::vector<Body> bodies_of(const Scene& scene, std::initializer_list<Category> cats) {
  return scene::object_bodies(scene, [&](const scene::ObjectInstance&, const scene::Asset& a) {
    return std::find(cats.begin(), cats.end(), a.category) != cats.end();
  });
}

// Appends every pair (a in A, b in B, a != b) penetrating deeper than the threshold.
void collide(const std::vector<Body>& as, const std::vector<Body>& bs, double threshold, std::set<std::pair<std::string, std::string>>& seen,
             std::vector<Collision>& out) {
  for (const auto& a : as) {
    for (const auto& b : bs) {
      if (a.id == b.id) continue;
      auto key = std::minmax(a.id, b.id);
      if (seen.count(key)) continue;
      const auto d = scene::body_distance(a, b, 0.0);
      if (!d || -*d <= threshold) continue;
      seen.insert(key);
      out.push_back({key.first, key.second, -*d});
    }
  }
}

geom::Polygon2 wall_band(const scene::WallFrame& f, double x0, double x1, double d0, double d1) {
  const Vec2 s = f.start.head<2>();
  const Vec2 ax = f.x_axis.head<2>();
  const Vec2 in = f.inward.head<2>();
  geom::Polygon2 p;
  p.exterior = {s + x0 * ax + d0 * in, s + x1 * ax + d0 * in, s + x1 * ax + d1 * in, s + x0 * ax + d1 * in};
  if (geom::ring_area(p.exterior) < 0.0) std::reverse(p.exterior.begin(), p.exterior.end());
  return p;
}

struct Footprint {
  std::string id;
  geom::Obb2 box;
  geom::Polygon2 poly;
  double top = 0.0;
};

std::vector<Footprint> footprints(const Scene& scene, Category cat) {
  std::vector<Footprint> out;
  for (const auto& [id, obj] : scene.objects) {
    if (scene.asset(obj.asset_id).category != cat) continue;
    const auto box = scene::footprint_obb(scene, obj);
    out.push_back({id, box, geom::Polygon2::from_obb(box), scene::world_aabb(scene, obj).max.z()});
  }
  return out;
}

void furniture_stage(const Scene& scene, const PhysicsConfig& cfg, PhysicsReport& r) {
  std::set<std::pair<std::string, std::string>> seen;
  const auto furniture = bodies_of(scene, {Category::kFurniture});
  collide(furniture, furniture, cfg.collision_threshold, seen, r.collisions);
  collide(furniture, scene::static_bodies(scene, false), cfg.collision_threshold, seen, r.collisions);

  const auto covers = footprints(scene, Category::kThinCovering);
  for (size_t i = 0; i < covers.size(); ++i) {
    for (size_t j = i + 1; j < covers.size(); ++j) {
      if (geom::intersection_area(covers[i].poly, covers[j].poly) > kAreaEps) {
        r.covering_overlaps.emplace_back(covers[i].id, covers[j].id);
      }
    }
    const auto* room = scene.room_containing(Vec3(covers[i].box.center.x(), covers[i].box.center.y(), 0.0));
    if (!room) {
      r.boundary_violations.push_back({covers[i].id, "outside every room"});
    } else if (covers[i].poly.area() - geom::intersection_area(covers[i].poly, room->world_floor()) > kAreaEps) {
      r.boundary_violations.push_back({covers[i].id, "extends beyond the walls of " + room->id});
    }
  }

  const auto items = footprints(scene, Category::kFurniture);
  for (const auto& room : scene.rooms) {
    for (const auto& door : room.doors) {
      const auto f = scene::wall_frame(room, scene::wall_index(room, door.wall_segment_id));
      const double x0 = door.offset_x - 0.5 * door.width;
      const double x1 = door.offset_x + 0.5 * door.width;
      const auto zone = wall_band(f, x0, x1, -cfg.door_clearance, cfg.door_clearance);
      Blockage b{room.id, door.id, {}};
      for (const auto& it : items) {
        if (geom::intersection_area(zone, it.poly) > kAreaEps) b.object_ids.push_back(it.id);
      }
      if (!b.object_ids.empty()) r.door_blockages.push_back(std::move(b));
    }
    for (const auto& window : room.windows) {
      const auto f = scene::wall_frame(room, scene::wall_index(room, window.wall_segment_id));
      const auto zone = wall_band(f, window.offset_x - 0.5 * window.width, window.offset_x + 0.5 * window.width, 0.0,
                                  cfg.window_depth);
      Blockage b{room.id, window.id, {}};
      for (const auto& it : items) {
        if (it.top > window.sill && geom::intersection_area(zone, it.poly) > kAreaEps) b.object_ids.push_back(it.id);
      }
      if (!b.object_ids.empty()) r.window_warnings.push_back(std::move(b));
    }
    for (const auto& seg : room.open_connections) {
      const auto f = scene::wall_frame(room, scene::wall_index(room, seg));
      const double hr = cfg.robot_half_width;
      const auto band = wall_band(f, 0.0, f.length, -hr, hr);
      std::vector<std::pair<double, double>> covered;
      std::vector<std::string> ids;
      for (const auto& it : items) {
        if (geom::intersection_area(band, it.poly) <= kAreaEps) continue;
        double lo = 1e300, hi = -1e300;
        for (const auto& c : it.box.corners()) {
          const double x = (c - f.start.head<2>()).dot(f.x_axis.head<2>());
          lo = std::min(lo, x);
          hi = std::max(hi, x);
        }
        covered.emplace_back(lo, hi);
        ids.push_back(it.id);
      }
      std::sort(covered.begin(), covered.end());
      double widest = 0.0;
      double cursor = 0.0;
      for (const auto& [lo, hi] : covered) {
        widest = std::max(widest, std::min(lo, f.length) - cursor);
        cursor = std::max(cursor, hi);
      }
      widest = std::max(widest, f.length - cursor);
      if (widest < 2.0 * hr) r.open_connection_blockages.push_back({room.id, seg, ids});
    }
  }
}

void wall_stage(const Scene& scene, const PhysicsConfig& cfg, PhysicsReport& r) {
  std::set<std::pair<std::string, std::string>> seen;
  const auto walls = bodies_of(scene, {Category::kWall});
  const auto all = scene::object_bodies(scene);
  collide(walls, all, cfg.collision_threshold, seen, r.collisions);
  collide(walls, scene::static_bodies(scene, false), cfg.collision_threshold, seen, r.collisions);

  for (const auto& [id, obj] : scene.objects) {
    const auto& asset = scene.asset(obj.asset_id);
    if (asset.category != Category::kWall || !obj.support) continue;
    const auto surf = scene::find_surface(scene, obj.support->surface_id);
    if (surf.kind != scene::SurfaceKind::kWall) continue;
    // Footprint on the wall plane, in surface coordinates.
    const geom::Pose3 inv = surf.frame.inverse();
    geom::Aabb3 local;
    const auto& b = asset.bbox;
    for (int i = 0; i < 8; ++i) {
      const Vec3 c((i & 1) ? b.max.x() : b.min.x(), (i & 2) ? b.max.y() : b.min.y(), (i & 4) ? b.max.z() : b.min.z());
      local.extend(inv.apply(obj.pose.apply(c)));
    }
    const geom::Polygon2 rect = geom::Polygon2::rectangle(local.min.head<2>(), local.max.head<2>());
    const double outside = rect.area() - geom::intersection_area(rect, surf.bounds);
    if (outside > kAreaEps) {
      const auto& room = scene.room(surf.owner_id);
      const std::string why = local.max.y() > room.wall_height + 1e-6 ? "above the ceiling" : "beyond the wall edge";
      r.boundary_violations.push_back({id, why});
    }
    for (const auto& ex : surf.excluded) {
      if (geom::intersection_area(rect, ex) > kAreaEps) {
        r.boundary_violations.push_back({id, "overlaps a door, window or open connection"});
        break;
      }
    }
  }
}

void ceiling_stage(const Scene& scene, const PhysicsConfig& cfg, PhysicsReport& r) {
  std::set<std::pair<std::string, std::string>> seen;
  const auto fixtures = bodies_of(scene, {Category::kCeiling});
  collide(fixtures, scene::object_bodies(scene), cfg.collision_threshold, seen, r.collisions);
  collide(fixtures, scene::static_bodies(scene, false), cfg.collision_threshold, seen, r.collisions);
  for (const auto& fp : footprints(scene, Category::kCeiling)) {
    const auto* room = scene.room_containing(Vec3(fp.box.center.x(), fp.box.center.y(), 0.0));
    if (!room) {
      r.boundary_violations.push_back({fp.id, "outside every room"});
    } else if (fp.poly.area() - geom::intersection_area(fp.poly, room->world_floor()) > kAreaEps) {
      r.boundary_violations.push_back({fp.id, "extends beyond the walls of " + room->id});
    }
  }
}

void manipuland_stage(const Scene& scene, const std::optional<std::string>& context, const PhysicsConfig& cfg,
                      PhysicsReport& r) {
  if (context && !scene.has_object(*context)) {
    throw Error(ErrorCode::kNotFound, "unknown context entity '" + *context + "'", {{"id", *context}});
  }
  const auto mine = scene::object_bodies(scene, [&](const scene::ObjectInstance& o, const scene::Asset& a) {
    if (a.category != Category::kManipuland) return false;
    if (!context) return true;
    return scene::supporting_entity(scene, o.id) == *context;
  });
  std::set<std::pair<std::string, std::string>> seen;
  collide(mine, mine, cfg.collision_threshold, seen, r.collisions);
  std::vector<Body> nearby;
  for (auto& f : bodies_of(scene, {Category::kFurniture})) {
    for (const auto& m : mine) {
      if (f.bounds.overlaps(m.bounds, cfg.near_distance)) {
        nearby.push_back(std::move(f));
        break;
      }
    }
  }
  collide(mine, nearby, cfg.collision_threshold, seen, r.collisions);
}

}  // namespace

Stage stage_from_string(const std::string& s) {
  if (s == "furniture") return Stage::kFurniture;
  if (s == "wall") return Stage::kWall;
  if (s == "ceiling") return Stage::kCeiling;
  if (s == "manipuland") return Stage::kManipuland;
  throw Error(ErrorCode::kSpec, "stage must be furniture, wall, ceiling or manipuland, got '" + s + "'");
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::kFurniture: return "furniture";
    case Stage::kWall: return "wall";
    case Stage::kCeiling: return "ceiling";
    default: return "manipuland";
  }
}

PhysicsReport check_physics(const Scene& scene, Stage stage, const std::optional<std::string>& context,
                            const PhysicsConfig& cfg) {
  PhysicsReport r;
  switch (stage) {
    case Stage::kFurniture: furniture_stage(scene, cfg, r); break;
    case Stage::kWall: wall_stage(scene, cfg, r); break;
    case Stage::kCeiling: ceiling_stage(scene, cfg, r); break;
    case Stage::kManipuland: manipuland_stage(scene, context, cfg, r); break;
  }
  std::sort(r.collisions.begin(), r.collisions.end(),
            [](const Collision& a, const Collision& b) { return std::tie(a.a, a.b) < std::tie(b.a, b.b); });
  std::sort(r.covering_overlaps.begin(), r.covering_overlaps.end());
  auto by_ids = [](const Violation& a, const Violation& b) { return std::tie(a.object_id, a.reason) < std::tie(b.object_id, b.reason); };
  std::sort(r.boundary_violations.begin(), r.boundary_violations.end(), by_ids);
  return r;
}

nlohmann::json to_json(const PhysicsReport& r) {
  nlohmann::json j;
  j["collisions"] = nlohmann::json::array();
  for (const auto& c : r.collisions) j["collisions"].push_back({{"a", c.a}, {"b", c.b}, {"depth", c.depth}});
  j["covering_overlaps"] = nlohmann::json::array();
  for (const auto& [a, b] : r.covering_overlaps) j["covering_overlaps"].push_back({a, b});
  j["boundary_violations"] = nlohmann::json::array();
  for (const auto& v : r.boundary_violations) j["boundary_violations"].push_back({{"object", v.object_id}, {"reason", v.reason}});
  auto blockages = [](const std::vector<Blockage>& list) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& b : list) a.push_back({{"room", b.room_id}, {"element", b.element_id}, {"objects", b.object_ids}});
    return a;
  };
  j["door_blockages"] = blockages(r.door_blockages);
  j["open_connection_blockages"] = blockages(r.open_connection_blockages);
  j["window_warnings"] = blockages(r.window_warnings);
  j["clean"] = r.clean();
  return j;
}

}  // namespace scenecraft::tools
