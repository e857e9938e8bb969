#pragma once

#include <span>
#include <vector>

#include "scenecraft/geometry/types.hpp"

namespace scenecraft::geom {

struct Plane {
  Vec3 normal;    // unit, outward
  double offset;  // normal . x <= offset for interior points
};

// A convex collision piece: the convex hull of its input vertices. The input
// vertex list is kept verbatim so that serialization round-trips exactly; the
// hull structure (faces, edges) is derived once at construction.
class ConvexPiece {
 public:
  ConvexPiece() = default;
  // Throws InvalidGeometry for fewer than 4 vertices, non-finite input or a
  // coplanar vertex set.
  explicit ConvexPiece(std::vector<Vec3> vertices);

  static ConvexPiece box(const Vec3& min, const Vec3& max);
  static ConvexPiece cylinder(double radius, double z0, double z1, int segments, const Vec2& center = Vec2::Zero());

  const std::vector<Vec3>& input_vertices() const { return input_; }
  const std::vector<Vec3>& vertices() const { return hull_vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<Plane>& faces() const { return faces_; }
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  const std::vector<Vec3>& edge_directions() const { return edge_dirs_; }

  Aabb3 bounds() const;
  double volume() const { return volume_; }
  Vec3 centroid() const { return centroid_; }
  TriMesh mesh() const;

  bool operator==(const ConvexPiece& other) const { return input_ == other.input_; }

 private:
  std::vector<Vec3> input_;
  std::vector<Vec3> hull_vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Plane> faces_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<Vec3> edge_dirs_;
  double volume_ = 0.0;
  Vec3 centroid_ = Vec3::Zero();
};

// A piece expressed in world coordinates.
struct WorldPiece {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Plane> faces;
  std::vector<std::array<int, 2>> edges;
  std::vector<Vec3> edge_dirs;
  Aabb3 bounds;

  static WorldPiece from(const ConvexPiece& piece, const Pose3& pose);
  void translate(const Vec3& delta);
};

struct SignedDistance {
  double distance = 0.0;  // negative: penetration depth
  // Unit direction along which b moves away from a: translating b by
  // max(0, -distance) * normal (or a by the opposite) separates the pair.
  Vec3 normal = Vec3::UnitZ();
  Vec3 point_a = Vec3::Zero();
  Vec3 point_b = Vec3::Zero();
};

// Signed distance between two convex pieces. Separated pairs return the exact
// Euclidean gap; overlapping pairs return minus the minimum translation
// distance, found on the separating-axis candidates of the two polytopes.
SignedDistance signed_distance(const WorldPiece& a, const WorldPiece& b);

// Minimum over all piece pairs. Throws InvalidGeometry when either set is empty.
SignedDistance signed_distance(std::span<const WorldPiece> a, std::span<const WorldPiece> b);

// Posed piece sets, for callers that hold canonical pieces and a pose.
std::vector<WorldPiece> pose_pieces(std::span<const ConvexPiece> pieces, const Pose3& pose);

bool contains_point(const WorldPiece& piece, const Vec3& p, double tolerance = 0.0);

// Closest points between segments [p0,p1] and [q0,q1].
void closest_points_segments(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1, Vec3& on_p, Vec3& on_q);
Vec3 closest_point_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace scenecraft::geom
