#include "scenecraft/geometry/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>

#include "scenecraft/error.hpp"

namespace bg = boost::geometry;

namespace scenecraft::geom {
namespace {

using BPoint = bg::model::d2::point_xy<double>;
using BPolygon = bg::model::polygon<BPoint, /*clockwise=*/false, /*closed=*/true>;
using BMulti = bg::model::multi_polygon<BPolygon>;

BPolygon to_boost(const Polygon2& p) {
  BPolygon out;
  for (const auto& v : p.exterior) out.outer().emplace_back(v.x(), v.y());
  if (!p.exterior.empty()) out.outer().emplace_back(p.exterior.front().x(), p.exterior.front().y());
  for (const auto& h : p.holes) {
    BPolygon::ring_type ring;
    for (const auto& v : h) ring.emplace_back(v.x(), v.y());
    if (!h.empty()) ring.emplace_back(h.front().x(), h.front().y());
    out.inners().push_back(std::move(ring));
  }
  return out;
}

std::vector<Vec2> ring_from_boost(const BPolygon::ring_type& ring) {
  std::vector<Vec2> out;
  for (const auto& p : ring) out.emplace_back(p.x(), p.y());
  if (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return out;
}

Polygon2 from_boost(const BPolygon& p) {
  Polygon2 out;
  out.exterior = ring_from_boost(p.outer());
  for (const auto& h : p.inners()) out.holes.push_back(ring_from_boost(h));
  return out;
}

std::vector<Polygon2> from_boost(const BMulti& m) {
  std::vector<Polygon2> out;
  for (const auto& p : m) {
    if (std::abs(bg::area(p)) > 0.0) out.push_back(from_boost(p));
  }
  return out;
}

BMulti buffer(const BMulti& in, double r) {
  BMulti out;
  const bg::strategy::buffer::distance_symmetric<double> distance(r);
  const bg::strategy::buffer::join_round join(4 * kArcSegmentsPerQuarter);
  const bg::strategy::buffer::end_flat end;
  const bg::strategy::buffer::point_circle circle(4 * kArcSegmentsPerQuarter);
  const bg::strategy::buffer::side_straight side;
  bg::buffer(in, out, distance, side, join, end, circle);
  return out;
}

}  // namespace

Polygon2 Polygon2::rectangle(const Vec2& lo, const Vec2& hi) {
  Polygon2 p;
  p.exterior = {lo, Vec2(hi.x(), lo.y()), hi, Vec2(lo.x(), hi.y())};
  return p;
}

Polygon2 Polygon2::from_obb(const Obb2& box) {
  Polygon2 p;
  const auto c = box.corners();
  p.exterior.assign(c.begin(), c.end());
  return p;
}

double ring_area(std::span<const Vec2> ring) {
  double a = 0.0;
  const size_t n = ring.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& p = ring[i];
    const Vec2& q = ring[(i + 1) % n];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

double Polygon2::area() const {
  double a = ring_area(exterior);
  for (const auto& h : holes) a += ring_area(h);
  return a;
}

Vec2 Polygon2::centroid() const {
  BPoint c(0.0, 0.0);
  bg::centroid(to_boost(*this), c);
  return Vec2(c.x(), c.y());
}

void Polygon2::validate() const {
  if (exterior.size() < 3) throw Error(ErrorCode::kInvalidGeometry, "polygon needs at least 3 vertices");
  for (const auto& v : exterior) {
    if (!v.allFinite()) throw Error(ErrorCode::kInvalidGeometry, "polygon has non-finite vertex");
  }
  std::string reason;
  if (!bg::is_valid(to_boost(*this), reason)) {
    throw Error(ErrorCode::kInvalidGeometry, "polygon is not simple: " + reason);
  }
  if (!(area() > 0.0)) throw Error(ErrorCode::kInvalidGeometry, "polygon has non-positive area");
}

Polygon2 Polygon2::translated(const Vec2& d) const {
  Polygon2 out = *this;
  for (auto& v : out.exterior) v += d;
  for (auto& h : out.holes) {
    for (auto& v : h) v += d;
  }
  return out;
}

std::vector<Polygon2> offset_polygon(const Polygon2& polygon, double r) {
  polygon.validate();
  if (r == 0.0) return {polygon};
  BMulti in;
  in.push_back(to_boost(polygon));
  return from_boost(buffer(in, r));
}

FreeSpace free_space(const Polygon2& floor, std::span<const Obb2> obstacles, double r) {
  floor.validate();
  if (!(r >= 0.0)) throw Error(ErrorCode::kInvalidGeometry, "free space radius must be non-negative");

  BMulti walkable;
  walkable.push_back(to_boost(floor));
  if (r > 0.0) walkable = buffer(walkable, -r);

  if (!obstacles.empty()) {
    BMulti blocked;
    for (const auto& o : obstacles) {
      if (!o.center.allFinite() || !o.half_extents.allFinite() || !std::isfinite(o.angle_rad)) {
        throw Error(ErrorCode::kInvalidGeometry, "obstacle is not finite");
      }
      BMulti single;
      single.push_back(to_boost(Polygon2::from_obb(o)));
      BMulti grown = r > 0.0 ? buffer(single, r) : single;
      BMulti merged;
      bg::union_(blocked, grown, merged);
      blocked = std::move(merged);
    }
    BMulti diff;
    bg::difference(walkable, blocked, diff);
    walkable = std::move(diff);
  }

  FreeSpace out;
  for (const auto& p : walkable) {
    const double a = bg::area(p);
    if (!(a > 0.0)) continue;
    out.regions.push_back({from_boost(p), a});
    out.total_area += a;
  }
  std::stable_sort(out.regions.begin(), out.regions.end(),
                   [](const FreeSpaceRegion& x, const FreeSpaceRegion& y) { return x.area > y.area; });
  return out;
}

bool point_in_polygon(const Vec2& p, const Polygon2& polygon) {
  return bg::covered_by(BPoint(p.x(), p.y()), to_boost(polygon));
}

bool ray_hits_floor(const Vec3& point, const Polygon2& floor) { return point_in_polygon(point.head<2>(), floor); }

std::vector<Vec2> convex_hull_2d(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Vec2> hull(2 * pts.size());
  size_t k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0.0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

double intersection_area(const Polygon2& a, const Polygon2& b) {
  BMulti out;
  bg::intersection(to_boost(a), to_boost(b), out);
  return bg::area(out);
}

bool polygons_intersect(const Polygon2& a, const Polygon2& b) { return bg::intersects(to_boost(a), to_boost(b)); }

bool polygon_within(const Polygon2& inner, const Polygon2& outer) {
  return bg::covered_by(to_boost(inner), to_boost(outer));
}

}  // namespace scenecraft::geom
