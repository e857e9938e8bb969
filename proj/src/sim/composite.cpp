#include "scenecraft/sim/composite.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scenecraft/error.hpp"
#include "scenecraft/geometry/polygon.hpp"
#include "scenecraft/geometry/rotation.hpp"
#include "scenecraft/scene/serialize.hpp"

namespace scenecraft::sim {

using geom::Aabb3;
using geom::Mat3;
using geom::Quat;

namespace {

Aabb3 posed_bounds(const Asset& a, const Pose3& pose) {
  Aabb3 b;
  for (const auto& p : a.collision_pieces)
    for (const auto& v : p.vertices()) b.extend(pose.apply(v));
  return b;
}

Aabb3 piece_bounds(const Asset& a) { return posed_bounds(a, Pose3()); }

std::vector<Vec2> scale_about_centroid(std::vector<Vec2> ring, double s) {
  if (ring.size() < 3) return ring;
  geom::Polygon2 poly;
  poly.exterior = ring;
  const Vec2 c = poly.centroid();
  for (auto& p : ring) p = c + s * (p - c);
  return ring;
}

bool inside_ring(const Vec2& p, const std::vector<Vec2>& ring) {
  if (ring.size() < 3) return false;
  geom::Polygon2 poly;
  poly.exterior = ring;
  return geom::point_in_polygon(p, poly);
}

// Smallest distance between parallel supporting lines of a convex ring.
double min_width(const std::vector<Vec2>& hull) {
  if (hull.size() < 3) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2 e = hull[(i + 1) % hull.size()] - hull[i];
    const double len = e.norm();
    if (len <= 0.0) continue;
    const Vec2 n(-e.y() / len, e.x() / len);
    double far = 0.0;
    for (const auto& p : hull) far = std::max(far, std::abs(n.dot(p - hull[i])));
    best = std::min(best, far);
  }
  return best;
}

std::vector<Vec2> footprint_hull(const Asset& a, const Quat& q) {
  std::vector<Vec2> pts;
  for (const auto& p : a.collision_pieces)
    for (const auto& v : p.vertices()) pts.push_back((q * v).head<2>());
  return geom::convex_hull_2d(std::move(pts));
}

std::vector<Vec2> transform_ring(const std::vector<Vec2>& ring, const Pose3& pose) {
  std::vector<Vec2> out;
  for (const auto& p : ring) out.push_back(pose.apply(Vec3(p.x(), p.y(), 0.0)).head<2>());
  return out;
}

// Top of the asset's collision geometry above canonical (x, y), if any piece covers it.
std::optional<double> top_at(const Asset& a, double x, double y) {
  std::optional<double> best;
  for (const auto& piece : a.collision_pieces) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (const auto& f : piece.faces()) {
      const double rest = f.offset - f.normal.x() * x - f.normal.y() * y;
      if (f.normal.z() > 1e-9)
        hi = std::min(hi, rest / f.normal.z());
      else if (f.normal.z() < -1e-9)
        lo = std::max(lo, rest / f.normal.z());
      else if (rest < -1e-12)
        ok = false;
    }
    if (ok && hi >= lo && std::isfinite(hi)) best = best ? std::max(*best, hi) : hi;
  }
  return best;
}

CompositeItem make_item(int index, const Asset& a, const Pose3& frame, const Pose3& world) {
  CompositeItem it;
  it.index = index;
  it.asset = a;
  it.world = world;
  it.local = frame.inverse() * world;
  return it;
}

SimBody make_body(std::string id, const Asset& a, const Pose3& pose, bool welded) {
  SimBody b;
  b.id = std::move(id);
  b.asset = a;
  b.pose = pose;
  b.welded = welded;
  return b;
}

std::string item_id(int i) { return "item_" + std::to_string(i); }

void require_collision(const Asset& a) {
  if (!a.has_collision() || !(a.mass > 0.0))
    throw Error(ErrorCode::kSpec, "asset " + a.id + " needs collision geometry and positive mass",
                {{"asset", a.id}});
}

}  // namespace

Pose3 composite_frame(const SupportSurface& surface, const Pose2& local) { return scene::lift_pose(local, surface); }

// ---- stack -----------------------------------------------------------------

StackResult create_stack(const std::vector<Asset>& items, const SupportSurface& surface, const Pose2& base_local,
                         const std::vector<ConvexPiece>& env, const StackConfig& cfg) {
  if (items.empty()) throw Error(ErrorCode::kArity, "create_stack needs at least one item");
  for (const auto& a : items) require_collision(a);
  const Pose3 frame = composite_frame(surface, base_local);

  std::vector<SimBody> bodies;
  std::vector<double> heights;
  double z = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Aabb3 b = piece_bounds(items[i]);
    const Vec3 c = b.center();
    z += cfg.spawn_gap;
    const Pose3 local(Vec3(-c.x(), -c.y(), z - b.min.z()), Quat::Identity());
    bodies.push_back(make_body(item_id(static_cast<int>(i)), items[i], frame * local, false));
    heights.push_back(b.extents().z());
    z += b.extents().z();
  }

  StackResult res;
  res.settle = settle(bodies, env, cfg.sim);
  double top = -std::numeric_limits<double>::infinity();
  bool prefix = true;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& r = res.settle.bodies[i];
    const double z0 = posed_bounds(items[i], bodies[i].pose).min.z();
    const Aabb3 fb = posed_bounds(items[i], r.final);
    const Vec3 d = r.final.translation - r.initial.translation;
    const bool fell = fb.min.z() < z0 - (0.5 * heights[i] + 0.005);
    const bool unstable = std::hypot(d.x(), d.y()) > cfg.lateral_threshold;
    res.fallen.push_back(fell);
    res.stable.push_back(!fell && !unstable);
    prefix = prefix && res.stable.back();
    if (prefix) ++res.stable_count;
    top = std::max(top, fb.max.z());
    res.items.push_back(make_item(static_cast<int>(i), items[i], frame, r.final));
  }
  res.height = top - surface.height();
  res.success = std::none_of(res.fallen.begin(), res.fallen.end(), [](bool f) { return f; });
  if (res.success && res.height > surface.clearance + 1e-9)
    throw Error(ErrorCode::kClearance, "stack height exceeds surface clearance",
                {{"required", res.height}, {"available", surface.clearance}, {"surface", surface.id}});
  return res;
}

// ---- fill ------------------------------------------------------------------

std::vector<Vec2> container_interior(const Asset& container, double top_fraction, double scale) {
  const Aabb3 b = piece_bounds(container);
  const double cut = b.max.z() - top_fraction * b.extents().z();
  std::vector<Vec2> pts;
  for (const auto& p : container.collision_pieces)
    for (const auto& v : p.vertices())
      if (v.z() >= cut - 1e-12) pts.push_back(v.head<2>());
  return scale_about_centroid(geom::convex_hull_2d(std::move(pts)), scale);
}

std::pair<double, double> half_footprints(const Asset& item, const Quat& q) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : item.collision_pieces)
    for (const auto& v : p.vertices()) {
      const double z = (q * v).z();
      lo = std::min(lo, z);
      hi = std::max(hi, z);
    }
  const double mid = 0.5 * (lo + hi);
  std::vector<Vec2> up, down;
  for (const auto& p : item.collision_pieces) {
    std::vector<Vec3> vs;
    for (const auto& v : p.vertices()) vs.push_back(q * v);
    for (const auto& v : vs) (v.z() >= mid ? up : down).push_back(v.head<2>());
    for (const auto& e : p.edges()) {
      const Vec3& a = vs[e[0]];
      const Vec3& b = vs[e[1]];
      if ((a.z() - mid) * (b.z() - mid) < 0.0) {
        const Vec3 x = a + (mid - a.z()) / (b.z() - a.z()) * (b - a);
        up.push_back(x.head<2>());
        down.push_back(x.head<2>());
      }
    }
  }
  auto area = [](std::vector<Vec2> pts) {
    const auto h = geom::convex_hull_2d(std::move(pts));
    return h.size() < 3 ? 0.0 : geom::ring_area(h);
  };
  return {area(up), area(down)};
}

Quat fill_orientation(const Asset& item, double aspect_threshold, const Vec3& long_axis) {
  const Vec3 e = piece_bounds(item).extents();
  std::array<int, 3> ax{0, 1, 2};
  std::stable_sort(ax.begin(), ax.end(), [&](int a, int b) { return e[a] > e[b]; });
  if (!(e[ax[1]] > 0.0) || e[ax[0]] / e[ax[1]] <= aspect_threshold) return Quat::Identity();
  Mat3 src, dst;
  src.col(0) = Vec3::Unit(ax[0]);
  src.col(1) = Vec3::Unit(ax[1]);
  src.col(2) = Vec3::Unit(ax[2]);
  const Vec3 l = long_axis.normalized();
  dst.col(0) = Vec3::UnitZ();
  dst.col(1) = l;
  dst.col(2) = Vec3::UnitZ().cross(l);
  Mat3 r = dst * src.transpose();
  if (r.determinant() < 0.0) {
    dst.col(2) = -dst.col(2);
    r = dst * src.transpose();
  }
  Quat q(r);
  const auto [top, bottom] = half_footprints(item, q);
  if (bottom > top) q = Quat(Eigen::AngleAxisd(geom::kPi, l)) * q;
  return q.normalized();
}

FillResult fill_container(const Asset& container, const std::vector<Asset>& fills, const SupportSurface& surface,
                          const Pose2& local, const std::vector<ConvexPiece>& env, Rng& rng,
                          const FillConfig& cfg) {
  if (fills.empty()) throw Error(ErrorCode::kArity, "fill_container needs at least one fill item");
  require_collision(container);
  for (const auto& a : fills) require_collision(a);
  const Pose3 frame = composite_frame(surface, local);
  const Aabb3 cb = piece_bounds(container);
  const Vec3 cc = cb.center();
  const Pose3 container_local(Vec3(-cc.x(), -cc.y(), -cb.min.z()), Quat::Identity());
  const Pose3 container_world = frame * container_local;

  FillResult res;
  res.container = make_item(-1, container, frame, container_world);
  const Vec2 shift(-cc.x(), -cc.y());
  for (auto p : container_interior(container, cfg.top_fraction, cfg.hull_scale)) res.interior.push_back(p + shift);
  std::vector<Vec2> rim;
  for (auto p : container_interior(container, cfg.top_fraction, 1.0)) rim.push_back(p + shift);
  const std::vector<Vec2> rim_world = transform_ring(rim, frame);
  const double height = cb.extents().z();
  const double base = surface.height();
  const double threshold = base + cfg.inside_fraction * height;
  const double rim_top = base + height;
  const Vec3 long_axis = cb.extents().x() >= cb.extents().y() ? Vec3::UnitX() : Vec3::UnitY();
  const double interior_width = min_width(res.interior);

  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  for (const auto& p : res.interior) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }

  const int n = static_cast<int>(fills.size());
  std::vector<Quat> orient(n);
  std::vector<int> pending;
  std::vector<int> unfit;
  for (int i = 0; i < n; ++i) {
    orient[i] = fill_orientation(fills[i], cfg.aspect_threshold, long_axis);
    if (min_width(footprint_hull(fills[i], orient[i])) > interior_width)
      unfit.push_back(i);
    else
      pending.push_back(i);
  }

  std::map<int, Pose3> placed;  // inside items, world poses
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y()), uyaw(0.0, 360.0);
  for (int iter = 0; iter < cfg.max_iterations && !pending.empty() && res.interior.size() >= 3; ++iter) {
    res.iterations = iter + 1;
    std::vector<SimBody> bodies{make_body("container", container, container_world, true)};
    std::vector<int> order;
    for (const auto& [i, pose] : placed) {
      bodies.push_back(make_body(item_id(i), fills[i], pose, false));
      order.push_back(i);
    }
    double z = height + cfg.spawn_gap;
    for (int i : pending) {
      Vec2 xy = Vec2::Zero();
      bool found = false;
      for (int t = 0; t < 1000 && !found; ++t) {
        xy = Vec2(ux(rng), uy(rng));
        found = inside_ring(xy, res.interior);
      }
      if (!found) {
        geom::Polygon2 poly;
        poly.exterior = res.interior;
        xy = poly.centroid();
      }
      Quat q = orient[i];
      if (q.isApprox(Quat::Identity(), 0.0)) q = Quat(Eigen::AngleAxisd(geom::deg_to_rad(uyaw(rng)), Vec3::UnitZ()));
      const Aabb3 rb = posed_bounds(fills[i], Pose3(Vec3::Zero(), q));
      const Vec3 c = rb.center();
      const Pose3 l(Vec3(xy.x() - c.x(), xy.y() - c.y(), z - rb.min.z()), q);
      bodies.push_back(make_body(item_id(i), fills[i], frame * l, false));
      order.push_back(i);
      z += rb.extents().z() + cfg.spawn_gap;
    }

    const SettleReport rep = settle(bodies, env, cfg.sim);
    placed.clear();
    pending.clear();
    for (std::size_t k = 0; k < order.size(); ++k) {
      const int i = order[k];
      const Pose3& pose = rep.bodies[k + 1].final;
      const Aabb3 fb = posed_bounds(fills[i], pose);
      const Vec3 com = pose.apply(fills[i].com);
      const bool inside = fb.min.z() >= threshold && fb.min.z() < rim_top && inside_ring(com.head<2>(), rim_world);
      if (inside)
        placed[i] = pose;
      else
        pending.push_back(i);
    }
    std::sort(pending.begin(), pending.end());
  }

  for (const auto& [i, pose] : placed) res.inside.push_back(make_item(i, fills[i], frame, pose));
  res.removed = pending;
  res.removed.insert(res.removed.end(), unfit.begin(), unfit.end());
  std::sort(res.removed.begin(), res.removed.end());
  if (res.inside.empty())
    throw Error(ErrorCode::kFillFailed, "no fill item settled inside the container",
                {{"removed", res.removed}, {"iterations", res.iterations}});
  return res;
}

// ---- arrangement -----------------------------------------------------------

ContainerBounds container_bounds(const Asset& container) {
  const Aabb3 b = piece_bounds(container);
  ContainerBounds cb;
  cb.circular = scene::is_circular(container);
  cb.center = b.center().head<2>();
  cb.half_extents = 0.5 * b.extents().head<2>();
  cb.radius = cb.half_extents.maxCoeff();
  return cb;
}

ArrangementResult create_arrangement(const Asset& container, const std::vector<ArrangementItem>& items,
                                     const SupportSurface& surface, const Pose2& local,
                                     const std::vector<ConvexPiece>& env, const ArrangeConfig& cfg) {
  if (items.empty()) throw Error(ErrorCode::kArity, "create_arrangement needs at least one item");
  require_collision(container);
  for (const auto& it : items) require_collision(it.asset);
  const Pose3 frame = composite_frame(surface, local);
  const Aabb3 cbox = piece_bounds(container);
  const Vec3 cc = cbox.center();
  const Pose3 container_world = frame * Pose3(Vec3(-cc.x(), -cc.y(), -cbox.min.z()), Quat::Identity());

  ArrangementResult res;
  res.bounds = container_bounds(container);
  res.container = make_item(-1, container, frame, container_world);
  const auto bounds_json = to_json(res.bounds);

  for (std::size_t i = 0; i < items.size(); ++i) {
    const Vec2 p(items[i].local.x, items[i].local.y);
    const bool ok = res.bounds.circular ? p.norm() <= res.bounds.radius + 1e-12
                                        : std::abs(p.x()) <= res.bounds.half_extents.x() + 1e-12 &&
                                              std::abs(p.y()) <= res.bounds.half_extents.y() + 1e-12;
    if (!ok)
      throw Error(ErrorCode::kBounds, "item " + std::to_string(i) + " center lies outside the container",
                  {{"item", i}, {"asset", items[i].asset.id}, {"position", {p.x(), p.y()}}, {"bounds", bounds_json}});
  }

  // Spawn poses: resting just above the container top under the footprint.
  std::vector<SimBody> bodies{make_body("container", container, container_world, true)};
  std::vector<double> rest;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Asset& a = items[i].asset;
    const Quat q(Eigen::AngleAxisd(geom::deg_to_rad(items[i].local.theta_deg), Vec3::UnitZ()));
    const Aabb3 rb = posed_bounds(a, Pose3(Vec3::Zero(), q));
    const Vec3 c = rb.center();
    // Container canonical coordinates of the item center.
    const Vec2 at = Vec2(items[i].local.x, items[i].local.y) + cc.head<2>();
    double support = cbox.min.z();
    const auto hull = footprint_hull(a, q);
    std::vector<Vec2> probes{at};
    for (const auto& h : hull) probes.push_back(at + h - c.head<2>());
    for (const auto& p : probes)
      if (auto t = top_at(container, p.x(), p.y())) support = std::max(support, *t);
    rest.push_back(top_at(container, at.x(), at.y()).value_or(cbox.min.z()) - cbox.min.z());
    const double bottom = support - cbox.min.z() + cfg.spawn_gap;
    const Pose3 l(Vec3(items[i].local.x - c.x(), items[i].local.y - c.y(), bottom - rb.min.z()), q);
    bodies.push_back(make_body(item_id(static_cast<int>(i)), a, frame * l, false));
  }

  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto wi = geom::pose_pieces(items[i].asset.collision_pieces, bodies[i + 1].pose);
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      const auto wj = geom::pose_pieces(items[j].asset.collision_pieces, bodies[j + 1].pose);
      const double d = geom::signed_distance(wi, wj).distance;
      if (d < 0.0)
        throw Error(ErrorCode::kCollision,
                    "items " + std::to_string(i) + " and " + std::to_string(j) + " overlap",
                    {{"a", i}, {"b", j}, {"asset_a", items[i].asset.id}, {"asset_b", items[j].asset.id}, {"depth", -d}});
    }
  }

  const SettleReport rep = settle(bodies, env, cfg.sim);
  nlohmann::json fallen = nlohmann::json::array();
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Pose3& pose = rep.bodies[i + 1].final;
    const double lowest = posed_bounds(items[i].asset, pose).min.z();
    if (lowest < surface.height() + cfg.fall_fraction * rest[i])
      fallen.push_back({{"item", i}, {"asset", items[i].asset.id}, {"z", lowest}});
    res.items.push_back(make_item(static_cast<int>(i), items[i].asset, frame, pose));
  }
  if (!fallen.empty())
    throw Error(ErrorCode::kArrangementFailed, "items fell off the container",
                {{"fallen", fallen}, {"bounds", bounds_json}});
  return res;
}

// ---- pile ------------------------------------------------------------------

Vec2 sample_disk(double radius, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius * std::sqrt(u(rng));
  const double phi = 2.0 * geom::kPi * u(rng);
  return Vec2(r * std::cos(phi), r * std::sin(phi));
}

PileResult create_pile(const std::vector<Asset>& items, const SupportSurface& surface, const Pose2& local,
                       const std::vector<ConvexPiece>& env, Rng& rng, const PileConfig& cfg) {
  if (items.size() < 2)
    throw Error(ErrorCode::kArity, "create_pile needs at least 2 items", {{"given", items.size()}});
  for (const auto& a : items) require_collision(a);
  const Pose3 frame = composite_frame(surface, local);

  PileResult res;
  double mean_diag = 0.0;
  for (const auto& a : items) mean_diag += piece_bounds(a).extents().norm();
  mean_diag /= static_cast<double>(items.size());
  res.spawn_radius = cfg.radius_factor * mean_diag;

  std::vector<SimBody> bodies;
  double z = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Vec2 xy = sample_disk(res.spawn_radius, rng);
    const Quat q = geom::sample_rotation_uniform(rng);
    const Aabb3 b = piece_bounds(items[i]);
    const double half = 0.5 * b.extents().norm();
    z += cfg.spawn_gap + half;
    const Vec3 target(xy.x(), xy.y(), z);
    bodies.push_back(make_body(item_id(static_cast<int>(i)), items[i],
                               frame * Pose3(target - q * b.center(), q), false));
    z += half;
  }

  const SettleReport rep = settle(bodies, env, cfg.sim);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Pose3& pose = rep.bodies[i].final;
    if (posed_bounds(items[i], pose).min.z() < surface.height() - cfg.fall_drop)
      res.fallen.push_back(static_cast<int>(i));
    else
      res.on.push_back(make_item(static_cast<int>(i), items[i], frame, pose));
  }
  if (res.on.size() < 2) {
    nlohmann::json on = nlohmann::json::array();
    for (const auto& it : res.on) on.push_back(it.index);
    throw Error(ErrorCode::kPileFailed, "fewer than 2 items stayed on the surface",
                {{"on", on},
                 {"fallen", res.fallen},
                 {"suggestion", "move the pile away from surface edges or use fewer items"}});
  }
  return res;
}

std::vector<ConvexPiece> composite_environment(const scene::Scene& scene, const SupportSurface& surface) {
  std::vector<ConvexPiece> env;
  const scene::RoomGeometry* room = nullptr;
  for (const auto& r : scene.rooms)
    if (r.id == surface.owner_id) room = &r;
  if (!room) {
    const Vec3 at = scene.has_object(surface.owner_id) ? scene.object(surface.owner_id).pose.translation
                                                        : surface.frame.translation;
    room = scene.room_containing(at);
  }
  if (room) env = scene::room_static_pieces(*room);
  if (scene.has_object(surface.owner_id)) {
    const auto& obj = scene.object(surface.owner_id);
    for (const auto& p : scene.asset(obj.asset_id).collision_pieces) {
      std::vector<Vec3> vs;
      for (const auto& v : p.input_vertices()) vs.push_back(obj.pose.apply(v));
      ConvexPiece world(std::move(vs));
      if (world.bounds().min.z() <= surface.height() + 1e-3) env.push_back(std::move(world));
    }
  }
  return env;
}

std::vector<std::string> commit_composite(scene::Scene& scene, const std::vector<CompositeItem>& items) {
  std::vector<std::string> ids;
  for (const auto& it : items) {
    if (!scene.assets.count(it.asset.id)) scene.add_asset(it.asset);
    scene::ObjectInstance obj;
    obj.asset_id = it.asset.id;
    obj.pose = it.world;
    ids.push_back(scene.add_object(it.asset.id, std::move(obj)));
  }
  return ids;
}

nlohmann::json to_json(const ContainerBounds& b) {
  nlohmann::json j = {{"shape", b.circular ? "circular" : "rectangular"}, {"center", {b.center.x(), b.center.y()}}};
  if (b.circular)
    j["radius"] = b.radius;
  else
    j["half_extents"] = {b.half_extents.x(), b.half_extents.y()};
  return j;
}

nlohmann::json to_json(const CompositeItem& item) {
  return {{"index", item.index},
          {"asset_id", item.asset.id},
          {"local", scene::pose3_to_json(item.local)},
          {"world", scene::pose3_to_json(item.world)}};
}

}  // namespace scenecraft::sim
