#include "scenecraft/scene/scene.hpp"

#include <algorithm>
#include <cmath>

#include "scenecraft/error.hpp"

namespace scenecraft::scene {

std::string to_base36(std::uint64_t n) {
  static constexpr char kDigits[] = "0123456789abcdefghijklmnopqrstuvwxyz";
  std::string out;
  do {
    out.push_back(kDigits[n % 36]);
    n /= 36;
  } while (n > 0);
  std::reverse(out.begin(), out.end());
  return out;
}

RoomGeometry rectangular_room(std::string id, std::string room_type, const Vec2& origin, double width,
                              double length, double wall_height, double wall_thickness) {
  RoomGeometry r;
  r.id = std::move(id);
  r.room_type = std::move(room_type);
  r.origin = origin;
  r.floor = Polygon2::rectangle(Vec2::Zero(), Vec2(width, length));
  r.wall_height = wall_height;
  for (int k = 0; k < 4; ++k) r.walls.push_back({"wall_" + std::to_string(k), wall_thickness});
  return r;
}

int wall_index(const RoomGeometry& room, const std::string& segment_id) {
  for (size_t k = 0; k < room.walls.size(); ++k) {
    if (room.walls[k].id == segment_id) return static_cast<int>(k);
  }
  throw Error(ErrorCode::kNotFound, "room '" + room.id + "' has no wall segment '" + segment_id + "'",
              {{"room", room.id}, {"segment", segment_id}});
}

WallFrame wall_frame(const RoomGeometry& room, int k) {
  const auto& ring = room.floor.exterior;
  const int n = static_cast<int>(ring.size());
  const Vec2 a = ring[k] + room.origin;
  const Vec2 b = ring[(k + 1) % n] + room.origin;
  WallFrame f;
  f.start = Vec3(b.x(), b.y(), 0.0);
  f.end = Vec3(a.x(), a.y(), 0.0);
  f.length = (b - a).norm();
  f.x_axis = (f.end - f.start) / f.length;
  f.inward = f.x_axis.cross(Vec3::UnitZ());
  return f;
}

void RoomGeometry::validate() const {
  floor.validate();
  if (!(wall_height > 0.0)) throw Error(ErrorCode::kInvalidGeometry, "room '" + id + "' wall height must be positive");
  if (walls.size() != floor.exterior.size()) {
    throw Error(ErrorCode::kInvalidGeometry, "room '" + id + "' needs one wall segment per floor edge");
  }
  for (const auto& w : walls) {
    if (!(w.thickness > 0.0)) {
      throw Error(ErrorCode::kInvalidGeometry, "room '" + id + "' wall '" + w.id + "' thickness must be positive");
    }
  }
  for (const auto& c : open_connections) wall_index(*this, c);
  auto check = [&](const Opening& o) {
    const WallFrame f = wall_frame(*this, wall_index(*this, o.wall_segment_id));
    if (!(o.width > 0.0) || !(o.height > 0.0)) {
      throw Error(ErrorCode::kDimension, "opening '" + o.id + "' needs positive width and height");
    }
    if (o.offset_x - 0.5 * o.width < -1e-9 || o.offset_x + 0.5 * o.width > f.length + 1e-9) {
      throw Error(ErrorCode::kDimension, "opening '" + o.id + "' extends beyond its wall segment");
    }
    if (o.sill < 0.0 || o.sill + o.height > wall_height + 1e-9) {
      throw Error(ErrorCode::kDimension, "opening '" + o.id + "' exceeds the wall height");
    }
  };
  for (const auto& d : doors) check(d);
  for (const auto& w : windows) check(w);
}

const Asset& Scene::asset(const std::string& id) const {
  auto it = assets.find(id);
  if (it == assets.end()) throw Error(ErrorCode::kNotFound, "unknown asset '" + id + "'", {{"asset", id}});
  return it->second;
}

const ObjectInstance& Scene::object(const std::string& id) const {
  auto it = objects.find(id);
  if (it == objects.end()) throw Error(ErrorCode::kNotFound, "unknown object '" + id + "'", {{"object", id}});
  return it->second;
}

ObjectInstance& Scene::object(const std::string& id) {
  auto it = objects.find(id);
  if (it == objects.end()) throw Error(ErrorCode::kNotFound, "unknown object '" + id + "'", {{"object", id}});
  return it->second;
}

const Asset& Scene::asset_of(const std::string& object_id) const { return asset(object(object_id).asset_id); }

const RoomGeometry& Scene::room(const std::string& id) const {
  for (const auto& r : rooms) {
    if (r.id == id) return r;
  }
  throw Error(ErrorCode::kNotFound, "unknown room '" + id + "'", {{"room", id}});
}

RoomGeometry& Scene::room(const std::string& id) {
  for (auto& r : rooms) {
    if (r.id == id) return r;
  }
  throw Error(ErrorCode::kNotFound, "unknown room '" + id + "'", {{"room", id}});
}

std::string Scene::next_object_id(const std::string& name) {
  std::string id;
  do {
    id = name + "_" + to_base36(id_counters[name]++);
  } while (objects.count(id));
  return id;
}

void Scene::add_asset(Asset a) {
  a.validate();
  const std::string id = a.id;
  assets.insert_or_assign(id, std::move(a));
}

std::string Scene::add_object(const std::string& name, ObjectInstance obj) {
  asset(obj.asset_id);
  obj.id = next_object_id(name);
  const std::string id = obj.id;
  objects.emplace(id, std::move(obj));
  return id;
}

const RoomGeometry* Scene::room_containing(const Vec3& p) const {
  for (const auto& r : rooms) {
    if (geom::point_in_polygon(p.head<2>() - r.origin, r.floor)) return &r;
  }
  return nullptr;
}

void Scene::validate() const {
  for (const auto& r : rooms) r.validate();
  for (size_t i = 0; i < rooms.size(); ++i) {
    for (size_t j = i + 1; j < rooms.size(); ++j) {
      const double overlap = geom::intersection_area(rooms[i].world_floor(), rooms[j].world_floor());
      if (overlap > 1e-9) {
        throw Error(ErrorCode::kInvalidGeometry, "rooms '" + rooms[i].id + "' and '" + rooms[j].id + "' overlap");
      }
    }
  }
  for (const auto& [id, a] : assets) {
    if (id != a.id) throw Error(ErrorCode::kSchema, "asset key '" + id + "' does not match its id");
    a.validate();
  }
  for (const auto& [id, o] : objects) {
    if (id != o.id) throw Error(ErrorCode::kSchema, "object key '" + id + "' does not match its id");
    asset(o.asset_id);
  }
}

std::vector<WorldPiece> world_pieces(const Scene& scene, const ObjectInstance& obj) {
  return geom::pose_pieces(scene.asset(obj.asset_id).collision_pieces, obj.pose);
}

geom::Aabb3 world_aabb(const Scene& scene, const ObjectInstance& obj) {
  const auto& b = scene.asset(obj.asset_id).bbox;
  geom::Aabb3 out;
  for (int i = 0; i < 8; ++i) {
    const Vec3 c((i & 1) ? b.max.x() : b.min.x(), (i & 2) ? b.max.y() : b.min.y(), (i & 4) ? b.max.z() : b.min.z());
    out.extend(obj.pose.apply(c));
  }
  return out;
}

geom::Obb2 footprint_obb(const Scene& scene, const ObjectInstance& obj) {
  const auto& b = scene.asset(obj.asset_id).bbox;
  const double yaw = geom::deg_to_rad(obj.pose.yaw_deg());
  const Vec3 c = obj.pose.apply(b.center());
  return geom::Obb2{c.head<2>(), 0.5 * b.extents().head<2>(), yaw};
}

namespace {

struct Interval {
  double lo;
  double hi;
};

}  // namespace

std::vector<StaticPart> room_static_parts(const RoomGeometry& room, double floor_thickness) {
  std::vector<StaticPart> out;
  const auto hull = geom::convex_hull_2d(room.world_floor().exterior);
  std::vector<Vec3> slab;
  for (const auto& v : hull) {
    slab.emplace_back(v.x(), v.y(), -floor_thickness);
    slab.emplace_back(v.x(), v.y(), 0.0);
  }
  out.push_back({room.id + ":floor", ConvexPiece(std::move(slab))});

  for (size_t k = 0; k < room.walls.size(); ++k) {
    const auto& seg = room.walls[k];
    if (room.open_connections.count(seg.id)) continue;
    const WallFrame f = wall_frame(room, static_cast<int>(k));
    const double t = seg.thickness;
    // Holes in wall coordinates (x along the wall, z up).
    std::vector<std::pair<Interval, Interval>> holes;
    for (const auto* list : {&room.doors, &room.windows}) {
      for (const auto& o : *list) {
        if (o.wall_segment_id != seg.id) continue;
        holes.push_back({{o.offset_x - 0.5 * o.width, o.offset_x + 0.5 * o.width}, {o.sill, o.sill + o.height}});
      }
    }
    std::vector<double> xs{-t, f.length + t};
    for (const auto& h : holes) {
      xs.push_back(h.first.lo);
      xs.push_back(h.first.hi);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    auto emit = [&](double x0, double x1, double z0, double z1) {
      if (x1 - x0 < 1e-9 || z1 - z0 < 1e-9) return;
      std::vector<Vec3> v;
      for (double x : {x0, x1}) {
        for (double d : {0.0, t}) {
          for (double z : {z0, z1}) v.push_back(f.start + x * f.x_axis - d * f.inward + Vec3(0, 0, z));
        }
      }
      out.push_back({room.id + ":" + seg.id, ConvexPiece(std::move(v))});
    };
    for (size_t i = 0; i + 1 < xs.size(); ++i) {
      const double x0 = xs[i];
      const double x1 = xs[i + 1];
      const double mid = 0.5 * (x0 + x1);
      std::vector<Interval> blocked;
      for (const auto& h : holes) {
        if (h.first.lo <= mid && mid <= h.first.hi) blocked.push_back(h.second);
      }
      std::sort(blocked.begin(), blocked.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
      double z = 0.0;
      for (const auto& b : blocked) {
        emit(x0, x1, z, b.lo);
        z = std::max(z, b.hi);
      }
      emit(x0, x1, z, room.wall_height);
    }
  }
  return out;
}

std::vector<ConvexPiece> room_static_pieces(const RoomGeometry& room, double floor_thickness) {
  std::vector<ConvexPiece> out;
  for (auto& p : room_static_parts(room, floor_thickness)) out.push_back(std::move(p.piece));
  return out;
}

}  // namespace scenecraft::scene
