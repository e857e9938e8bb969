#pragma once

#include <span>
#include <vector>

#include "scenecraft/geometry/types.hpp"

namespace scenecraft::geom {

// Simple polygon with optional holes. Exterior ring counter-clockwise, holes
// clockwise; rings are stored open (first vertex not repeated).
struct Polygon2 {
  std::vector<Vec2> exterior;
  std::vector<std::vector<Vec2>> holes;

  static Polygon2 rectangle(const Vec2& min, const Vec2& max);
  static Polygon2 from_obb(const Obb2& box);

  double area() const;
  Vec2 centroid() const;
  // Throws InvalidGeometry when the polygon is not simple or has no area.
  void validate() const;
  Polygon2 translated(const Vec2& d) const;

  bool operator==(const Polygon2&) const = default;
};

// Corner arcs of dilations use this many chords per quarter turn.
inline constexpr int kArcSegmentsPerQuarter = 16;

// Inward (r < 0) or outward (r > 0) offset. Over-erosion yields an empty set.
std::vector<Polygon2> offset_polygon(const Polygon2& polygon, double r);

struct FreeSpaceRegion {
  Polygon2 polygon;
  double area = 0.0;
};

struct FreeSpace {
  std::vector<FreeSpaceRegion> regions;  // one per connected component, sorted by area descending
  double total_area = 0.0;
};

// Walkable area for a disk of radius r: (floor eroded by r) minus the union of
// obstacles dilated by r, split into connected components.
FreeSpace free_space(const Polygon2& floor, std::span<const Obb2> obstacles, double r);

// True iff the xy projection of the point lies inside the floor polygon;
// boundary points count as inside.
bool ray_hits_floor(const Vec3& point, const Polygon2& floor);

bool point_in_polygon(const Vec2& p, const Polygon2& polygon);

// Convex hull of planar points, counter-clockwise, collinear points dropped.
std::vector<Vec2> convex_hull_2d(std::vector<Vec2> points);

double ring_area(std::span<const Vec2> ring);  // signed, CCW positive

// Area of the intersection of two polygons.
double intersection_area(const Polygon2& a, const Polygon2& b);
bool polygons_intersect(const Polygon2& a, const Polygon2& b);
bool polygon_within(const Polygon2& inner, const Polygon2& outer);

}  // namespace scenecraft::geom
