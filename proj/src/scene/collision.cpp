#include "scenecraft/scene/collision.hpp"

#include <map>

namespace scenecraft::scene {

void Body::translate(const Vec3& d) {
  for (auto& p : pieces) p.translate(d);
  bounds.min += d;
  bounds.max += d;
}

Body make_body(std::string id, std::vector<WorldPiece> pieces) {
  Body b;
  b.id = std::move(id);
  b.pieces = std::move(pieces);
  for (const auto& p : b.pieces) b.bounds.extend(p.bounds);
  return b;
}

std::vector<Body> object_bodies(const Scene& scene,
                                const std::function<bool(const ObjectInstance&, const Asset&)>& keep) {
  std::vector<Body> out;
  for (const auto& [id, obj] : scene.objects) {
    const Asset& a = scene.asset(obj.asset_id);
    if (!a.has_collision()) continue;
    if (keep && !keep(obj, a)) continue;
    out.push_back(make_body(id, world_pieces(scene, obj)));
  }
  return out;
}

std::vector<Body> static_bodies(const Scene& scene, bool include_floor) {
  std::vector<Body> out;
  for (const auto& room : scene.rooms) {
    std::map<std::string, std::vector<WorldPiece>> grouped;
    for (const auto& part : room_static_parts(room)) {
      if (!include_floor && part.id == room.id + ":floor") continue;
      grouped[part.id].push_back(WorldPiece::from(part.piece, geom::Pose3()));
    }
    for (auto& [id, pieces] : grouped) out.push_back(make_body(id, std::move(pieces)));
  }
  return out;
}

std::optional<double> body_distance(const Body& a, const Body& b, double cutoff) {
  if (!a.bounds.overlaps(b.bounds, cutoff)) return std::nullopt;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& pa : a.pieces) {
    for (const auto& pb : b.pieces) {
      if (!pa.bounds.overlaps(pb.bounds, std::min(cutoff, best))) continue;
      best = std::min(best, geom::signed_distance(pa, pb).distance);
    }
  }
  if (best > cutoff) return std::nullopt;
  return best;
}

}  // namespace scenecraft::scene
