#include "scenecraft/scene/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scenecraft/error.hpp"

namespace scenecraft::scene {

using geom::Quat;

namespace {

Quat yaw_quat(double deg) { return Quat(Eigen::AngleAxisd(geom::deg_to_rad(deg), Vec3::UnitZ())); }

struct Tri {
  std::array<Vec3, 3> v;
  Vec3 normal;
  double area;
};

void triangles_of(const std::vector<Vec3>& verts, const std::vector<std::array<int, 3>>& tris, const Pose3& pose,
                  std::vector<Tri>& out) {
  for (const auto& t : tris) {
    Tri w;
    for (int k = 0; k < 3; ++k) w.v[k] = pose.apply(verts[t[k]]);
    const Vec3 c = (w.v[1] - w.v[0]).cross(w.v[2] - w.v[0]);
    w.area = 0.5 * c.norm();
    w.normal = w.area > 0.0 ? Vec3(c.normalized()) : Vec3::Zero();
    out.push_back(w);
  }
}

Polygon2 projected(const Tri& t) {
  std::vector<Vec2> pts{t.v[0].head<2>(), t.v[1].head<2>(), t.v[2].head<2>()};
  Polygon2 p;
  p.exterior = geom::convex_hull_2d(pts);
  return p;
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) i = parent[i] = parent[parent[i]];
  return i;
}

std::vector<SupportSurface> extract(const std::vector<Tri>& tris, const Pose3& owner_pose, const std::string& owner_id,
                                    const SurfaceExtractionConfig& cfg) {
  const double cos_tol = std::cos(geom::deg_to_rad(cfg.normal_tolerance_deg));
  std::vector<int> up;
  for (int i = 0; i < static_cast<int>(tris.size()); ++i) {
    if (tris[i].area > 0.0 && tris[i].normal.z() >= cos_tol) up.push_back(i);
  }
  auto top_z = [&](int i) { return std::max({tris[i].v[0].z(), tris[i].v[1].z(), tris[i].v[2].z()}); };
  std::sort(up.begin(), up.end(), [&](int a, int b) {
    const Vec3 ca = tris[a].v[0] + tris[a].v[1] + tris[a].v[2];
    const Vec3 cb = tris[b].v[0] + tris[b].v[1] + tris[b].v[2];
    return std::tie(ca.z(), ca.x(), ca.y()) < std::tie(cb.z(), cb.x(), cb.y());
  });

  struct Cluster {
    double height;
    Polygon2 hull;  // world xy
    Vec2 centroid;
  };
  std::vector<Cluster> clusters;

  size_t begin = 0;
  while (begin < up.size()) {
    const double base = top_z(up[begin]);
    size_t end = begin + 1;
    while (end < up.size() && top_z(up[end]) - base <= cfg.height_tolerance) ++end;
    const int n = static_cast<int>(end - begin);
    std::vector<Polygon2> proj;
    for (size_t i = begin; i < end; ++i) proj.push_back(projected(tris[up[i]]));
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (find_root(parent, i) == find_root(parent, j)) continue;
        if (geom::polygons_intersect(proj[i], proj[j])) parent[find_root(parent, i)] = find_root(parent, j);
      }
    }
    for (int r = 0; r < n; ++r) {
      if (find_root(parent, r) != r) continue;
      std::vector<Vec2> pts;
      double height = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        if (find_root(parent, i) != r) continue;
        for (const auto& v : tris[up[begin + i]].v) {
          pts.push_back(v.head<2>());
          height = std::max(height, v.z());
        }
      }
      Cluster c;
      c.height = height;
      c.hull.exterior = geom::convex_hull_2d(pts);
      if (c.hull.exterior.size() < 3 || c.hull.area() < cfg.min_area) continue;
      c.centroid = c.hull.centroid();
      clusters.push_back(std::move(c));
    }
    begin = end;
  }

  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    return std::tie(a.height, a.centroid.x(), a.centroid.y()) < std::tie(b.height, b.centroid.x(), b.centroid.y());
  });

  const double yaw = owner_pose.yaw_deg();
  const Quat q = yaw_quat(yaw);
  std::vector<SupportSurface> out;
  for (const auto& c : clusters) {
    double clearance = cfg.clearance_cap;
    for (const auto& t : tris) {
      const double lo = std::min({t.v[0].z(), t.v[1].z(), t.v[2].z()});
      if (lo <= c.height + cfg.height_tolerance || lo - c.height >= clearance) continue;
      const Polygon2 p = projected(t);
      if (p.exterior.size() < 3 || p.area() <= 0.0) continue;
      if (geom::intersection_area(p, c.hull) > 1e-9) clearance = lo - c.height;
    }
    SupportSurface s;
    s.id = owner_id + ":S_" + to_base36(out.size());
    s.owner_id = owner_id;
    s.kind = SurfaceKind::kObject;
    s.frame = Pose3(Vec3(c.centroid.x(), c.centroid.y(), c.height), q);
    const Pose3 inv = s.frame.inverse();
    for (const auto& v : c.hull.exterior) s.bounds.exterior.push_back(inv.apply(Vec3(v.x(), v.y(), c.height)).head<2>());
    s.clearance = clearance;
    out.push_back(std::move(s));
  }
  return out;
}

Polygon2 rect(double x0, double y0, double x1, double y1) { return Polygon2::rectangle(Vec2(x0, y0), Vec2(x1, y1)); }

}  // namespace

Pose3 lift_pose(const Pose2& local, const SupportSurface& surface) {
  const Pose3 in_frame(Vec3(local.x, local.y, 0.0), yaw_quat(local.theta_deg));
  Pose3 out = surface.frame * in_frame;
  out.rotation = (out.rotation * surface.mount).normalized();
  return out;
}

Pose2 ceiling_local_from_room(const Pose2& room_local) {
  return Pose2(room_local.x, -room_local.y, -room_local.theta_deg);
}

Pose2 unlift_pose(const Pose3& pose, const SupportSurface& surface) {
  Pose3 unmounted = pose;
  unmounted.rotation = pose.rotation * surface.mount.conjugate();
  const Pose3 local = surface.frame.inverse() * unmounted;
  return Pose2(local.translation.x(), local.translation.y(), local.yaw_deg());
}

std::vector<SupportSurface> extract_support_surfaces(const Asset& asset, const Pose3& owner_pose,
                                                     const std::string& owner_id,
                                                     const SurfaceExtractionConfig& cfg) {
  std::vector<Tri> tris;
  for (const auto& p : asset.collision_pieces) triangles_of(p.vertices(), p.triangles(), owner_pose, tris);
  return extract(tris, owner_pose, owner_id, cfg);
}

std::vector<SupportSurface> extract_support_surfaces(const geom::TriMesh& mesh, const Pose3& owner_pose,
                                                     const std::string& owner_id,
                                                     const SurfaceExtractionConfig& cfg) {
  mesh.validate();
  std::vector<Tri> tris;
  triangles_of(mesh.vertices, mesh.triangles, owner_pose, tris);
  return extract(tris, owner_pose, owner_id, cfg);
}

std::vector<SupportSurface> room_surfaces(const RoomGeometry& room) {
  std::vector<SupportSurface> out;
  const double h = room.wall_height;

  SupportSurface floor;
  floor.id = room.id + ":floor";
  floor.owner_id = room.id;
  floor.kind = SurfaceKind::kFloor;
  floor.frame = Pose3(Vec3(room.origin.x(), room.origin.y(), 0.0), Quat::Identity());
  floor.bounds = room.floor;
  floor.clearance = h;
  out.push_back(floor);

  Mat3 mount;
  mount.col(0) = -Vec3::UnitX();
  mount.col(1) = Vec3::UnitZ();
  mount.col(2) = Vec3::UnitY();
  for (size_t k = 0; k < room.walls.size(); ++k) {
    const WallFrame f = wall_frame(room, static_cast<int>(k));
    Mat3 r;
    r.col(0) = f.x_axis;
    r.col(1) = Vec3::UnitZ();
    r.col(2) = f.inward;
    SupportSurface s;
    s.id = room.id + ":" + room.walls[k].id;
    s.owner_id = room.id;
    s.kind = SurfaceKind::kWall;
    s.frame = Pose3(f.start, Quat(r));
    s.mount = Quat(mount);
    s.bounds = rect(0.0, 0.0, f.length, h);
    const auto hb = room.world_floor();
    Aabb3 box;
    for (const auto& v : hb.exterior) box.extend(Vec3(v.x(), v.y(), 0.0));
    s.clearance = box.extents().norm();
    if (room.open_connections.count(room.walls[k].id)) s.excluded.push_back(s.bounds);
    for (const auto* list : {&room.doors, &room.windows}) {
      for (const auto& o : *list) {
        if (o.wall_segment_id != room.walls[k].id) continue;
        s.excluded.push_back(rect(o.offset_x - 0.5 * o.width, o.sill, o.offset_x + 0.5 * o.width, o.sill + o.height));
      }
    }
    out.push_back(std::move(s));
  }

  SupportSurface ceiling;
  ceiling.id = room.id + ":ceiling";
  ceiling.owner_id = room.id;
  ceiling.kind = SurfaceKind::kCeiling;
  const Quat flip(Eigen::AngleAxisd(geom::kPi, Vec3::UnitX()));
  ceiling.frame = Pose3(Vec3(room.origin.x(), room.origin.y(), h), flip);
  ceiling.mount = flip;
  for (auto it = room.floor.exterior.rbegin(); it != room.floor.exterior.rend(); ++it) {
    ceiling.bounds.exterior.emplace_back(it->x(), -it->y());
  }
  ceiling.clearance = h;
  out.push_back(std::move(ceiling));
  return out;
}

namespace {

std::vector<SupportSurface> object_surfaces(const Scene& scene, const ObjectInstance& obj) {
  const Asset& a = scene.asset(obj.asset_id);
  if (!a.has_collision() || (a.category != Category::kFurniture && a.category != Category::kWall)) return {};
  auto out = extract_support_surfaces(a, obj.pose, obj.id);
  if (const RoomGeometry* room = scene.room_containing(obj.pose.translation)) {
    for (auto& s : out) s.clearance = std::max(0.0, std::min(s.clearance, room->wall_height - s.height()));
  }
  return out;
}

}  // namespace

std::vector<SupportSurface> scene_surfaces(const Scene& scene) {
  std::vector<SupportSurface> out;
  for (const auto& r : scene.rooms) {
    auto rs = room_surfaces(r);
    out.insert(out.end(), rs.begin(), rs.end());
  }
  for (const auto& [id, obj] : scene.objects) {
    auto os = object_surfaces(scene, obj);
    out.insert(out.end(), os.begin(), os.end());
  }
  return out;
}

std::string surface_owner(const std::string& surface_id) {
  const auto pos = surface_id.rfind(':');
  return pos == std::string::npos ? std::string() : surface_id.substr(0, pos);
}

SupportSurface find_surface(const Scene& scene, const std::string& surface_id) {
  const std::string owner = surface_owner(surface_id);
  std::vector<SupportSurface> candidates;
  if (scene.has_object(owner)) {
    candidates = object_surfaces(scene, scene.object(owner));
  } else {
    for (const auto& r : scene.rooms) {
      if (r.id == owner) candidates = room_surfaces(r);
    }
  }
  for (auto& s : candidates) {
    if (s.id == surface_id) return s;
  }
  throw Error(ErrorCode::kNotFound, "unknown surface '" + surface_id + "'", {{"surface", surface_id}});
}

}  // namespace scenecraft::scene
