#include "scenecraft/scene/query.hpp"

#include <cmath>
#include <limits>

#include "scenecraft/scene/serialize.hpp"
#include "scenecraft/scene/surface.hpp"

namespace scenecraft::scene {

std::vector<ObjectListing> query_scene_state(const Scene& scene, const SceneFilter& filter) {
  if (filter.room_id) scene.room(*filter.room_id);
  if (filter.surface_id) find_surface(scene, *filter.surface_id);
  std::vector<ObjectListing> out;
  for (const auto& [id, obj] : scene.objects) {
    const Asset& a = scene.asset(obj.asset_id);
    if (filter.category && a.category != *filter.category) continue;
    const RoomGeometry* room = scene.room_containing(obj.pose.translation);
    if (filter.room_id && (!room || room->id != *filter.room_id)) continue;
    if (filter.surface_id && (!obj.support || obj.support->surface_id != *filter.surface_id)) continue;
    out.push_back({id, obj.asset_id, a.category, room ? room->id : std::string(), obj.pose, obj.support, a.bbox,
                   obj.welded});
  }
  return out;
}

nlohmann::json to_json(const std::vector<ObjectListing>& listing) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& l : listing) {
    nlohmann::json j = {{"id", l.id},
                        {"asset_id", l.asset_id},
                        {"category", to_string(l.category)},
                        {"room", l.room_id},
                        {"pose", pose3_to_json(l.pose)},
                        {"bbox_min", {l.bbox.min.x(), l.bbox.min.y(), l.bbox.min.z()}},
                        {"bbox_max", {l.bbox.max.x(), l.bbox.max.y(), l.bbox.max.z()}},
                        {"dimensions", {l.bbox.extents().x(), l.bbox.extents().y(), l.bbox.extents().z()}},
                        {"welded", l.welded}};
    if (l.support) {
      j["support"] = {{"surface_id", l.support->surface_id}, {"local", pose2_to_json(l.support->local)}};
    }
    out.push_back(std::move(j));
  }
  return out;
}

namespace {

// Highest point of the piece above world (x, y), if its projection covers it.
std::optional<double> piece_top(const WorldPiece& piece, double x, double y) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const auto& f : piece.faces) {
    const double rest = f.offset - f.normal.x() * x - f.normal.y() * y;
    if (f.normal.z() > 1e-9)
      hi = std::min(hi, rest / f.normal.z());
    else if (f.normal.z() < -1e-9)
      lo = std::max(lo, rest / f.normal.z());
    else if (rest < -1e-12)
      return std::nullopt;
  }
  if (hi < lo || !std::isfinite(hi)) return std::nullopt;
  return hi;
}

}  // namespace

std::optional<std::string> supporting_object(const Scene& scene, const std::string& id, double tolerance) {
  const auto& obj = scene.object(id);
  if (obj.support) {
    const std::string owner = surface_owner(obj.support->surface_id);
    if (scene.has_object(owner)) return owner;
  }
  const auto pieces = world_pieces(scene, obj);
  if (pieces.empty()) return std::nullopt;
  double z_lo = std::numeric_limits<double>::infinity();
  geom::Aabb3 box;
  for (const auto& p : pieces) {
    box.extend(p.bounds);
    z_lo = std::min(z_lo, p.bounds.min.z());
  }
  const double x = 0.5 * (box.min.x() + box.max.x());
  const double y = 0.5 * (box.min.y() + box.max.y());
  std::optional<std::string> best;
  double best_top = -std::numeric_limits<double>::infinity();
  for (const auto& [oid, other] : scene.objects) {
    if (oid == id) continue;
    const auto wb = world_aabb(scene, other);
    if (x < wb.min.x() || x > wb.max.x() || y < wb.min.y() || y > wb.max.y()) continue;
    if (wb.min.z() > z_lo + tolerance || wb.max.z() < z_lo - tolerance) continue;
    for (const auto& p : world_pieces(scene, other)) {
      const auto top = piece_top(p, x, y);
      if (!top || std::abs(*top - z_lo) > tolerance) continue;
      if (*top > best_top) {
        best_top = *top;
        best = oid;
      }
    }
  }
  return best;
}

std::optional<std::string> supporting_entity(const Scene& scene, const std::string& id, double tolerance) {
  std::string cur = id;
  for (std::size_t hop = 0; hop <= scene.objects.size(); ++hop) {
    const auto next = supporting_object(scene, cur, tolerance);
    if (!next) return std::nullopt;
    if (scene.asset_of(*next).category != Category::kManipuland) return next;
    cur = *next;
  }
  return std::nullopt;
}

}  // namespace scenecraft::scene
