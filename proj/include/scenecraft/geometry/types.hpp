#pragma once

#include <array>
#include <limits>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace scenecraft::geom {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle in degrees into (-180, 180].
double normalize_degrees(double deg);

// Planar pose on a surface: position in meters, yaw in degrees about the
// surface normal.
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta_deg = 0.0;

  Pose2() = default;
  Pose2(double x_, double y_, double theta) : x(x_), y(y_), theta_deg(normalize_degrees(theta)) {}

  bool operator==(const Pose2&) const = default;
};

// Rigid transform. The rotation is kept as a unit quaternion so that a pose
// survives serialization bit-for-bit.
struct Pose3 {
  Vec3 translation = Vec3::Zero();
  Quat rotation = Quat::Identity();

  Pose3() = default;
  Pose3(const Vec3& t, const Quat& q) : translation(t), rotation(q.normalized()) {}

  static Pose3 from_yaw(const Vec3& t, double yaw_deg);
  static Pose3 from_matrix(const Eigen::Matrix4d& m);

  Mat3 rotation_matrix() const { return rotation.toRotationMatrix(); }
  Eigen::Matrix4d matrix() const;

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_vector(const Vec3& v) const { return rotation * v; }

  Pose3 inverse() const;
  Pose3 operator*(const Pose3& other) const;

  // Yaw of the rotated +X axis projected onto the XY plane, degrees.
  double yaw_deg() const;

  bool operator==(const Pose3& other) const {
    return translation == other.translation && rotation.coeffs() == other.rotation.coeffs();
  }
};

// Geodesic angle between two rotations, radians in [0, pi].
double rotation_angle_between(const Quat& a, const Quat& b);

struct Aabb3 {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  bool empty() const { return (min.array() > max.array()).any(); }
  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void extend(const Aabb3& o) {
    min = min.cwiseMin(o.min);
    max = max.cwiseMax(o.max);
  }
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extents() const { return max - min; }
  bool overlaps(const Aabb3& o, double margin = 0.0) const {
    return (min.array() <= o.max.array() + margin).all() &&
           (o.min.array() <= max.array() + margin).all();
  }
  bool operator==(const Aabb3&) const = default;
};

// Oriented rectangle in the plane.
struct Obb2 {
  Vec2 center = Vec2::Zero();
  Vec2 half_extents = Vec2::Zero();
  double angle_rad = 0.0;

  std::array<Vec2, 4> corners() const;  // counter-clockwise
};

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;

  // Throws InvalidGeometry on out-of-range indices.
  void validate() const;
  TriMesh transformed(const Pose3& pose) const;
};

// Closed axis-aligned box mesh with outward-facing triangles.
TriMesh box_mesh(const Vec3& min, const Vec3& max);
// Geodesic icosphere: 20 * 4^subdivisions triangles.
TriMesh icosphere_mesh(double radius, int subdivisions);

}  // namespace scenecraft::geom
