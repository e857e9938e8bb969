#include <cmath>
#include <limits>

#include "scenecraft/error.hpp"
#include "scenecraft/tools/placement.hpp"

namespace scenecraft::tools {

namespace {

constexpr double kBoxTol = 1e-9;

Vec2 rotate(const Vec2& v, double rad) {
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  return Vec2(c * v.x() - s * v.y(), s * v.x() + c * v.y());
}

}  // namespace

Vec2 forward_of(double yaw_deg) {
  const double t = geom::deg_to_rad(yaw_deg);
  return Vec2(-std::sin(t), std::cos(t));
}

bool ray_hits_box(const Vec2& origin, const Vec2& dir, const Vec2& lo, const Vec2& hi) {
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 2; ++a) {
    const double l = lo[a] - kBoxTol;
    const double h = hi[a] + kBoxTol;
    if (std::abs(dir[a]) < 1e-15) {
      if (origin[a] < l || origin[a] > h) return false;
      continue;
    }
    double ta = (l - origin[a]) / dir[a];
    double tb = (h - origin[a]) / dir[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

std::optional<double> aim_yaw(const Vec2& origin, const Vec2& offset, const Vec2& point, double sign) {
  const Vec2 q = point - origin;
  const double rho2 = q.squaredNorm();
  const double disc = rho2 - offset.x() * offset.x();
  if (disc < 0.0) return std::nullopt;
  const double r = std::sqrt(disc);
  const double s = sign > 0 ? -offset.y() + r : offset.y() + r;
  if (!(s > 1e-12)) return std::nullopt;
  const Vec2 local = offset + Vec2(0.0, sign > 0 ? s : -s);
  const double t = std::atan2(q.y(), q.x()) - std::atan2(local.y(), local.x());
  return geom::normalize_degrees(geom::rad_to_deg(t));
}

FacingReport check_facing(const Scene& scene, const std::string& source_id, const std::string& target_id) {
  if (source_id == target_id) throw Error(ErrorCode::kPlacement, "source and target must differ");
  const auto& src = scene.object(source_id);
  const auto& tgt = scene.object(target_id);
  const auto& src_asset = scene.asset(src.asset_id);
  const auto& tgt_asset = scene.asset(tgt.asset_id);

  const double yaw = src.pose.yaw_deg();
  const Vec2 t = src.pose.translation.head<2>();
  const Vec2 o = src.pose.apply(src_asset.bbox.center()).head<2>();
  const Vec2 offset = rotate(o - t, -geom::deg_to_rad(yaw));

  const geom::Aabb3 box = scene::world_aabb(scene, tgt);
  const Vec2 lo = box.min.head<2>();
  const Vec2 hi = box.max.head<2>();

  FacingReport r;
  r.target_is_circular = scene::is_circular(tgt_asset);
  r.target_point = r.target_is_circular ? Vec2(0.5 * (lo + hi)) : Vec2(o.cwiseMax(lo).cwiseMin(hi));

  const Vec2 d = forward_of(yaw);
  r.faces_toward = ray_hits_box(o, d, lo, hi);
  r.faces_away = ray_hits_box(o, -d, lo, hi);

  std::optional<double> aim = aim_yaw(t, offset, r.target_point, 1.0);
  if (!aim) aim = aim_yaw(t, offset, 0.5 * (lo + hi), 1.0);
  if (aim) {
    r.optimal_theta = *aim;
  } else {
    const Vec2 delta = r.target_point - o;
    r.optimal_theta = delta.norm() > 0.0 ? geom::normalize_degrees(geom::rad_to_deg(std::atan2(-delta.x(), delta.y())))
                                         : geom::normalize_degrees(yaw);
  }
  return r;
}

nlohmann::json to_json(const FacingReport& r) {
  return {{"faces_toward", r.faces_toward},
          {"faces_away", r.faces_away},
          {"optimal_theta", r.optimal_theta},
          {"target_is_circular", r.target_is_circular},
          {"target_point", {r.target_point.x(), r.target_point.y()}}};
}

}  // namespace scenecraft::tools
