#include "scenecraft/geometry/types.hpp"

#include <cmath>
#include <map>
#include <string>

#include "scenecraft/error.hpp"

namespace scenecraft::geom {

double normalize_degrees(double deg) {
  if (!std::isfinite(deg)) return deg;
  double r = std::fmod(deg, 360.0);
  if (r <= -180.0) r += 360.0;
  if (r > 180.0) r -= 360.0;
  return r;
}

Pose3 Pose3::from_yaw(const Vec3& t, double yaw_deg) {
  return Pose3(t, Quat(Eigen::AngleAxisd(deg_to_rad(yaw_deg), Vec3::UnitZ())));
}

Pose3 Pose3::from_matrix(const Eigen::Matrix4d& m) {
  const Mat3 r = m.topLeftCorner<3, 3>();
  return Pose3(m.topRightCorner<3, 1>(), Quat(r));
}

Eigen::Matrix4d Pose3::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_matrix();
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Pose3 Pose3::inverse() const {
  const Quat inv = rotation.conjugate();
  Pose3 out;
  out.rotation = inv;
  out.translation = -(inv * translation);
  return out;
}

Pose3 Pose3::operator*(const Pose3& other) const {
  Pose3 out;
  out.rotation = (rotation * other.rotation).normalized();
  out.translation = rotation * other.translation + translation;
  return out;
}

double Pose3::yaw_deg() const {
  const Vec3 x = rotation * Vec3::UnitX();
  return rad_to_deg(std::atan2(x.y(), x.x()));
}

double rotation_angle_between(const Quat& a, const Quat& b) {
  const double d = std::abs(a.normalized().dot(b.normalized()));
  return 2.0 * std::acos(std::min(1.0, d));
}

std::array<Vec2, 4> Obb2::corners() const {
  const Vec2 u(std::cos(angle_rad), std::sin(angle_rad));
  const Vec2 v(-u.y(), u.x());
  const Vec2 a = u * half_extents.x();
  const Vec2 b = v * half_extents.y();
  return {center - a - b, center + a - b, center + a + b, center - a + b};
}

void TriMesh::validate() const {
  const int n = static_cast<int>(vertices.size());
  for (const auto& t : triangles) {
    for (int i : t) {
      if (i < 0 || i >= n) {
        throw Error(ErrorCode::kInvalidGeometry, "triangle index " + std::to_string(i) + " out of range");
      }
    }
  }
  for (const auto& v : vertices) {
    if (!v.allFinite()) throw Error(ErrorCode::kInvalidGeometry, "non-finite mesh vertex");
  }
}

TriMesh TriMesh::transformed(const Pose3& pose) const {
  TriMesh out = *this;
  for (auto& v : out.vertices) v = pose.apply(v);
  return out;
}

TriMesh box_mesh(const Vec3& lo, const Vec3& hi) {
  TriMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.emplace_back((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(), (i & 4) ? hi.z() : lo.z());
  }
  m.triangles = {{0, 2, 1}, {1, 2, 3},   // -z
                 {4, 5, 6}, {5, 7, 6},   // +z
                 {0, 1, 4}, {1, 5, 4},   // -y
                 {2, 6, 3}, {3, 6, 7},   // +y
                 {0, 4, 2}, {2, 4, 6},   // -x
                 {1, 3, 5}, {3, 7, 5}};  // +x
  return m;
}

TriMesh icosphere_mesh(double radius, int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  m.triangles = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                 {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
                 {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  for (auto& v : m.vertices) v.normalize();
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoints;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      const int idx = static_cast<int>(m.vertices.size()) - 1;
      midpoints.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(m.triangles.size() * 4);
    for (const auto& tri : m.triangles) {
      const int a = midpoint(tri[0], tri[1]);
      const int b = midpoint(tri[1], tri[2]);
      const int c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    m.triangles = std::move(next);
  }
  for (auto& v : m.vertices) v *= radius;
  return m;
}

}  // namespace scenecraft::geom
