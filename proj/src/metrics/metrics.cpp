#include "scenecraft/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "scenecraft/error.hpp"
#include "scenecraft/feasibility/feasibility.hpp"
#include "scenecraft/geometry/polygon.hpp"
#include "scenecraft/scene/collision.hpp"
#include "scenecraft/scene/surface.hpp"
#include "scenecraft/tools/placement.hpp"

namespace scenecraft::metrics {

using geom::Vec2;
using geom::Vec3;
using scene::Category;

CollisionMetrics collision_metrics(const Scene& scene, double threshold) {
  CollisionMetrics m;
  const auto bodies = scene::object_bodies(scene);
  m.object_count = static_cast<int>(bodies.size());
  std::map<std::string, double> deepest;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    for (std::size_t j = i + 1; j < bodies.size(); ++j) {
      const auto d = scene::body_distance(bodies[i], bodies[j], 0.0);
      if (!d || -*d <= threshold) continue;
      m.pairs.push_back({bodies[i].id, bodies[j].id, -*d});
      for (const auto* id : {&bodies[i].id, &bodies[j].id}) deepest[*id] = std::max(deepest[*id], -*d);
    }
  }
  if (m.object_count > 0) m.col = 100.0 * static_cast<double>(deepest.size()) / m.object_count;
  if (!deepest.empty()) {
    double sum = 0.0;
    for (const auto& [id, d] : deepest) sum += d;
    m.mpd_mm = 1000.0 * sum / static_cast<double>(deepest.size());
  }
  return m;
}

StabilityMetrics stability_metrics(const Scene& scene, const StabilityConfig& cfg) {
  std::vector<std::string> dynamic, fixed;
  for (const auto& [id, obj] : scene.objects) {
    const auto& a = scene.asset(obj.asset_id);
    if (!a.has_collision()) continue;
    const bool weld = obj.welded || a.category == Category::kWall || a.category == Category::kCeiling;
    (weld ? fixed : dynamic).push_back(id);
  }
  StabilityMetrics m;
  m.settle = feasibility::settle_scene(scene, dynamic, fixed, cfg.sim);
  m.object_count = static_cast<int>(m.settle.bodies.size());
  int stable = 0, moving = 0;
  double sum_d = 0.0, sum_r = 0.0;
  for (const auto& b : m.settle.bodies) {
    bool ok = true;
    if (!b.welded) {
      ++moving;
      sum_d += b.displacement;
      sum_r += b.rotation;
      m.xd_m = std::max(m.xd_m, b.displacement);
      ok = b.displacement < cfg.max_displacement && b.rotation < cfg.max_rotation;
    }
    m.stable[b.id] = ok;
    stable += ok;
  }
  if (m.object_count > 0) m.stb = 100.0 * stable / m.object_count;
  if (moving > 0) {
    m.md_mm = 1000.0 * sum_d / moving;
    m.mr_rad = sum_r / moving;
  }
  return m;
}

double navigability(const Scene& scene, const std::string& room_id, double robot_half_width) {
  if (!(robot_half_width >= 0.0)) throw Error(ErrorCode::kSpec, "robot half width must be non-negative");
  const auto floor = scene.room(room_id).world_floor();
  std::vector<geom::Obb2> boxes;
  for (const auto& [id, box] : tools::room_obstacles(scene, room_id)) boxes.push_back(box);
  const auto space = geom::free_space(floor, boxes, robot_half_width);
  if (space.total_area <= 0.0 || space.regions.empty()) return 1.0;
  return std::clamp(space.regions.front().area / space.total_area, 0.0, 1.0);
}

namespace {

struct Sampler {
  std::vector<std::array<Vec3, 3>> tris;
  std::vector<double> cumulative;

  explicit Sampler(const scene::Asset& a) {
    double total = 0.0;
    for (const auto& piece : a.collision_pieces) {
      const auto& v = piece.vertices();
      for (const auto& t : piece.triangles()) {
        const std::array<Vec3, 3> tri{v[t[0]], v[t[1]], v[t[2]]};
        total += 0.5 * (tri[1] - tri[0]).cross(tri[2] - tri[0]).norm();
        tris.push_back(tri);
        cumulative.push_back(total);
      }
    }
  }

  Vec3 draw(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double pick = u(rng) * cumulative.back();
    const auto k = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) -
                                            cumulative.begin());
    const auto& t = tris[std::min(k, tris.size() - 1)];
    const double r1 = std::sqrt(u(rng));
    const double r2 = u(rng);
    return (1.0 - r1) * t[0] + r1 * (1.0 - r2) * t[1] + r1 * r2 * t[2];
  }
};

}  // namespace

OobMetrics out_of_bounds(const Scene& scene, int samples, std::uint64_t seed, double pass_fraction) {
  if (samples < 1) throw Error(ErrorCode::kSpec, "sample count must be positive");
  std::vector<geom::Polygon2> floors;
  for (const auto& r : scene.rooms) floors.push_back(r.world_floor());
  OobMetrics m;
  int flagged = 0;
  for (const auto& [id, obj] : scene.objects) {
    const auto& a = scene.asset(obj.asset_id);
    if (!a.has_collision()) continue;
    const Sampler sampler(a);
    Rng rng = derive_stream(seed, 0, "oob:" + id);
    int hits = 0;
    for (int k = 0; k < samples; ++k) {
      const Vec3 p = obj.pose.apply(sampler.draw(rng));
      hits += std::any_of(floors.begin(), floors.end(), [&](const auto& f) { return geom::ray_hits_floor(p, f); });
    }
    const double frac = static_cast<double>(hits) / samples;
    m.floor_fraction[id] = frac;
    m.flagged[id] = frac < pass_fraction;
    flagged += frac < pass_fraction;
    ++m.object_count;
  }
  if (m.object_count > 0) m.oob = static_cast<double>(flagged) / m.object_count;
  return m;
}

namespace {

std::vector<geom::WorldPiece> pieces_or_box(const Scene& scene, const scene::ObjectInstance& obj) {
  auto pieces = scene::world_pieces(scene, obj);
  if (!pieces.empty()) return pieces;
  const auto& b = scene.asset(obj.asset_id).bbox;
  Vec3 hi = b.max;
  for (int k = 0; k < 3; ++k) hi[k] = std::max(hi[k], b.min[k] + 1e-4);  // thin coverings
  return {geom::WorldPiece::from(geom::ConvexPiece::box(b.min, hi), obj.pose)};
}

}  // namespace

SupportQuery support_query(const Scene& scene, const std::string& a_id, const std::string& b_id,
                           double contact_threshold) {
  const auto& a = scene.object(a_id);
  const auto& b = scene.object(b_id);
  SupportQuery q;
  const auto pa = pieces_or_box(scene, a);
  const auto pb = pieces_or_box(scene, b);
  q.signed_distance = geom::signed_distance(pa, pb).distance;
  q.in_contact = q.signed_distance < contact_threshold;
  geom::Aabb3 ba, bb;
  for (const auto& p : pa) ba.extend(p.bounds);
  for (const auto& p : pb) bb.extend(p.bounds);
  q.vertical_gap = ba.min.z() - bb.max.z();
  q.horizontal_offset = (ba.center() - bb.center()).head<2>().norm();

  const auto foot = geom::Polygon2::from_obb(scene::footprint_obb(scene, a));
  geom::Polygon2 top = geom::Polygon2::from_obb(scene::footprint_obb(scene, b));
  const auto surfaces = scene::extract_support_surfaces(scene.asset(b.asset_id), b.pose, b_id);
  if (!surfaces.empty()) {
    const auto& s = *std::max_element(surfaces.begin(), surfaces.end(),
                                      [](const auto& x, const auto& y) { return x.height() < y.height(); });
    auto world_ring = [&](const std::vector<Vec2>& ring) {
      std::vector<Vec2> out;
      for (const auto& v : ring) out.push_back(s.frame.apply(Vec3(v.x(), v.y(), 0.0)).head<2>());
      if (geom::ring_area(out) < 0) std::reverse(out.begin(), out.end());
      return out;
    };
    top.exterior = world_ring(s.bounds.exterior);
    top.holes.clear();
    for (const auto& h : s.bounds.holes) top.holes.push_back(world_ring(h));
  }
  const double area = foot.area();
  if (area > 0.0) q.overlap_pct = 100.0 * geom::intersection_area(foot, top) / area;
  return q;
}

MetricsReport metrics_report(const Scene& scene, const ReportConfig& cfg) {
  MetricsReport r;
  r.collisions = collision_metrics(scene, cfg.collision_threshold);
  r.stability = stability_metrics(scene, cfg.stability);
  r.bounds = out_of_bounds(scene, cfg.oob_samples, cfg.seed);
  r.col = r.collisions.col;
  r.mpd_mm = r.collisions.mpd_mm;
  r.stb = r.stability.stb;
  r.md_mm = r.stability.md_mm;
  r.xd_m = r.stability.xd_m;
  r.mr_rad = r.stability.mr_rad;
  r.oob = r.bounds.oob;
  r.object_count = static_cast<int>(scene.objects.size());
  double sum = 0.0;
  for (const auto& room : scene.rooms) {
    const double nav = navigability(scene, room.id, cfg.robot_half_width);
    r.nav_by_room[room.id] = nav;
    sum += nav;
  }
  r.nav = scene.rooms.empty() ? 1.0 : sum / static_cast<double>(scene.rooms.size());
  return r;
}

nlohmann::json to_json(const CollisionMetrics& m) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : m.pairs) pairs.push_back({{"a", p.a}, {"b", p.b}, {"depth", p.depth}});
  return {{"COL", m.col}, {"MPD", m.mpd_mm}, {"object_count", m.object_count}, {"pairs", pairs}};
}

nlohmann::json to_json(const StabilityMetrics& m) {
  return {{"STB", m.stb}, {"MD", m.md_mm}, {"XD", m.xd_m}, {"MR", m.mr_rad}, {"object_count", m.object_count},
          {"stable", m.stable}, {"settle", sim::to_json(m.settle)}};
}

nlohmann::json to_json(const OobMetrics& m) {
  return {{"OOB", m.oob}, {"object_count", m.object_count}, {"floor_fraction", m.floor_fraction},
          {"flagged", m.flagged}};
}

nlohmann::json to_json(const SupportQuery& q) {
  return {{"in_contact", q.in_contact},           {"signed_distance", q.signed_distance},
          {"vertical_gap", q.vertical_gap},       {"horizontal_offset", q.horizontal_offset},
          {"overlap_pct", q.overlap_pct}};
}

nlohmann::json to_json(const MetricsReport& r) {
  return {{"COL", r.col},
          {"MPD", r.mpd_mm},
          {"STB", r.stb},
          {"MD", r.md_mm},
          {"XD", r.xd_m},
          {"MR", r.mr_rad},
          {"NAV", r.nav},
          {"OOB", r.oob},
          {"object_count", r.object_count},
          {"nav_by_room", r.nav_by_room},
          {"collisions", to_json(r.collisions)},
          {"stability", to_json(r.stability)},
          {"bounds", to_json(r.bounds)}};
}

}  // namespace scenecraft::metrics
