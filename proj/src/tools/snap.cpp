#include <algorithm>
#include <cmath>

#include "scenecraft/error.hpp"
#include "scenecraft/scene/collision.hpp"
#include "scenecraft/scene/surface.hpp"
#include "scenecraft/tools/placement.hpp"

namespace scenecraft::tools {

using scene::Body;

namespace {

constexpr double kThirdTolerance = 5e-4;  // allowed growth of penetration with bystanders

struct Bystanders {
  std::vector<Body> bodies;
  std::vector<double> base_penetration;

  // True when moving the source to `src` deepens any bystander contact.
  bool worsened(const Body& src) const {
    for (size_t i = 0; i < bodies.size(); ++i) {
      const auto d = scene::body_distance(src, bodies[i], 0.0);
      if (!d) continue;
      if (std::max(0.0, -*d) > base_penetration[i] + kThirdTolerance) return true;
    }
    return false;
  }
};

double distance_to(const Body& a, const Body& b) {
  const auto d = scene::body_distance(a, b, std::numeric_limits<double>::infinity());
  return d ? *d : std::numeric_limits<double>::infinity();
}

void rotate_about_z(geom::Pose3& pose, double delta_deg) {
  const geom::Quat r(Eigen::AngleAxisd(geom::deg_to_rad(delta_deg), Vec3::UnitZ()));
  pose.rotation = (r * pose.rotation).normalized();
}

}  // namespace

SnapMode snap_mode_from_string(const std::string& s) {
  if (s == "toward") return SnapMode::kToward;
  if (s == "away") return SnapMode::kAway;
  if (s == "none") return SnapMode::kNone;
  throw Error(ErrorCode::kSpec, "snap mode must be toward, away or none, got '" + s + "'");
}

SnapResult snap_to_object(const Scene& scene, const std::string& source_id, const std::string& target_id,
                          SnapMode mode, const SnapConfig& cfg) {
  if (source_id == target_id) throw Error(ErrorCode::kPlacement, "source and target must differ");
  const auto& src0 = scene.object(source_id);
  const auto& tgt = scene.object(target_id);
  if (src0.welded) throw Error(ErrorCode::kPlacement, "source '" + source_id + "' is welded");
  const auto& src_asset = scene.asset(src0.asset_id);
  if (!src_asset.has_collision() || !scene.asset(tgt.asset_id).has_collision()) {
    throw Error(ErrorCode::kSnapFailed, "snap needs collision geometry on both objects");
  }

  SnapResult out;
  out.scene = scene;
  geom::Pose3 pose = src0.pose;
  auto body_at = [&](const geom::Pose3& p) {
    return scene::make_body(source_id, geom::pose_pieces(src_asset.collision_pieces, p));
  };
  const Body target = scene::make_body(target_id, scene::world_pieces(scene, tgt));

  Bystanders others;
  {
    const Body src = body_at(pose);
    for (auto& b : scene::object_bodies(scene, [&](const scene::ObjectInstance& o, const scene::Asset&) {
           return o.id != source_id && o.id != target_id;
         })) {
      others.bodies.push_back(std::move(b));
    }
    for (auto& b : scene::static_bodies(scene, false)) others.bodies.push_back(std::move(b));
    for (const auto& b : others.bodies) {
      const auto d = scene::body_distance(src, b, 0.0);
      others.base_penetration.push_back(d ? std::max(0.0, -*d) : 0.0);
    }
  }

  const Vec2 tlo = target.bounds.min.head<2>();
  const Vec2 thi = target.bounds.max.head<2>();

  // Phase 1: push out of the target along the axis of least overlap of the
  // square footprint.
  auto push_out = [&]() {
    if (distance_to(body_at(pose), target) >= 0.0) return;
    const Vec3 ext = src_asset.bbox.extents();
    const double h = 0.5 * std::max(ext.x(), ext.y());
    const Vec2 c = pose.apply(src_asset.bbox.center()).head<2>();
    struct Move {
      double amount;
      Vec2 dir;
    };
    std::vector<Move> moves = {{thi.x() - (c.x() - h), Vec2(1, 0)},
                               {(c.x() + h) - tlo.x(), Vec2(-1, 0)},
                               {thi.y() - (c.y() - h), Vec2(0, 1)},
                               {(c.y() + h) - tlo.y(), Vec2(0, -1)}};
    std::stable_sort(moves.begin(), moves.end(), [](const Move& a, const Move& b) { return a.amount < b.amount; });
    for (const auto& m : moves) {
      geom::Pose3 p = pose;
      p.translation.head<2>() += (std::max(0.0, m.amount) + cfg.margin) * m.dir;
      double pushed = std::max(0.0, m.amount) + cfg.margin;
      Body b = body_at(p);
      // The square may under-cover a rotated footprint; keep stepping if needed.
      while (distance_to(b, target) < cfg.margin && pushed <= cfg.max_travel) {
        p.translation.head<2>() += cfg.step * m.dir;
        b.translate(Vec3(cfg.step * m.dir.x(), cfg.step * m.dir.y(), 0.0));
        pushed += cfg.step;
      }
      if (pushed > cfg.max_travel || others.worsened(b)) continue;
      pose = p;
      out.pushed_out = true;
      return;
    }
    throw Error(ErrorCode::kSnapFailed, "cannot push '" + source_id + "' out of '" + target_id + "'",
                {{"source", source_id}, {"target", target_id}});
  };
  push_out();

  // Phase 2: orientation.
  if (mode != SnapMode::kNone) {
    scene::ObjectInstance& moved = out.scene.object(source_id);
    moved.pose = pose;
    const FacingReport f = check_facing(out.scene, source_id, target_id);
    double yaw = f.optimal_theta;
    if (mode == SnapMode::kAway) {
      const double cur = pose.yaw_deg();
      const Vec2 t = pose.translation.head<2>();
      const Vec2 o = pose.apply(src_asset.bbox.center()).head<2>();
      const double a = -geom::deg_to_rad(cur);
      const Vec2 off(std::cos(a) * (o - t).x() - std::sin(a) * (o - t).y(),
                     std::sin(a) * (o - t).x() + std::cos(a) * (o - t).y());
      const auto aim = aim_yaw(t, off, f.target_point, -1.0);
      yaw = aim ? *aim : geom::normalize_degrees(f.optimal_theta + 180.0);
    }
    rotate_about_z(pose, yaw - pose.yaw_deg());
    if (others.worsened(body_at(pose))) {
      throw Error(ErrorCode::kSnapFailed, "rotating '" + source_id + "' collides with its surroundings",
                  {{"source", source_id}});
    }
    push_out();
  }

  // Phase 3: approach in fixed steps until within the margin, then stay at the
  // last clear position.
  const Vec2 c = pose.apply(src_asset.bbox.center()).head<2>();
  Vec2 dir = c.cwiseMax(tlo).cwiseMin(thi) - c;
  if (dir.norm() < 1e-12) dir = 0.5 * (tlo + thi) - c;
  Body body = body_at(pose);
  double d = distance_to(body, target);
  if (dir.norm() > 1e-12 && d >= cfg.margin) {
    dir.normalize();
    const Vec3 step(cfg.step * dir.x(), cfg.step * dir.y(), 0.0);
    bool hit = false;
    while (out.travel + cfg.step <= cfg.max_travel + 1e-12) {
      Body next = body;
      next.translate(step);
      const double nd = distance_to(next, target);
      if (nd < cfg.margin || others.worsened(next)) {
        hit = true;
        break;
      }
      body = std::move(next);
      d = nd;
      pose.translation += step;
      out.travel += cfg.step;
    }
    if (!hit) {
      throw Error(ErrorCode::kSnapFailed, "'" + source_id + "' does not reach '" + target_id + "' within max travel",
                  {{"source", source_id}, {"target", target_id}, {"max_travel", cfg.max_travel}});
    }
  }

  scene::ObjectInstance& moved = out.scene.object(source_id);
  moved.pose = pose;
  if (moved.support) {
    const auto surf = scene::find_surface(scene, moved.support->surface_id);
    moved.support->local = scene::unlift_pose(pose, surf);
  }
  out.pose = pose;
  out.final_distance = d;
  return out;
}

}  // namespace scenecraft::tools
