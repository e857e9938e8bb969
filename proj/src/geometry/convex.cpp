#include "scenecraft/geometry/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "scenecraft/error.hpp"

namespace scenecraft::geom {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct HullTri {
  std::array<int, 3> v;
  Vec3 n;
  double d;
  bool alive;
};

HullTri make_tri(const std::vector<Vec3>& p, int a, int b, int c) {
  Vec3 n = (p[b] - p[a]).cross(p[c] - p[a]);
  const double len = n.norm();
  if (len > 0.0) n /= len;
  return HullTri{{a, b, c}, n, n.dot(p[a]), true};
}

// Incremental 3D convex hull. Returns outward-oriented triangles indexing into p.
std::vector<std::array<int, 3>> incremental_hull(const std::vector<Vec3>& p) {
  const int n = static_cast<int>(p.size());
  Aabb3 box;
  for (const auto& v : p) box.extend(v);
  const double scale = std::max(box.extents().maxCoeff(), 1e-12);
  const double eps = 1e-10 * scale;

  int i0 = 0;
  for (int i = 1; i < n; ++i) {
    if (std::tie(p[i].x(), p[i].y(), p[i].z()) < std::tie(p[i0].x(), p[i0].y(), p[i0].z())) i0 = i;
  }
  int i1 = -1;
  double best = eps;
  for (int i = 0; i < n; ++i) {
    const double d = (p[i] - p[i0]).norm();
    if (d > best) best = d, i1 = i;
  }
  if (i1 < 0) throw Error(ErrorCode::kInvalidGeometry, "convex piece vertices are coincident");
  const Vec3 dir = (p[i1] - p[i0]).normalized();
  int i2 = -1;
  best = eps;
  for (int i = 0; i < n; ++i) {
    const Vec3 r = p[i] - p[i0];
    const double d = (r - dir * dir.dot(r)).norm();
    if (d > best) best = d, i2 = i;
  }
  if (i2 < 0) throw Error(ErrorCode::kInvalidGeometry, "convex piece vertices are collinear");
  const Vec3 pn = (p[i1] - p[i0]).cross(p[i2] - p[i0]).normalized();
  int i3 = -1;
  best = eps;
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(pn.dot(p[i] - p[i0]));
    if (d > best) best = d, i3 = i;
  }
  if (i3 < 0) throw Error(ErrorCode::kInvalidGeometry, "convex piece vertices are coplanar");

  std::vector<HullTri> tris;
  const Vec3 inner = (p[i0] + p[i1] + p[i2] + p[i3]) / 4.0;
  auto add_oriented = [&](int a, int b, int c) {
    HullTri t = make_tri(p, a, b, c);
    if (t.n.dot(inner) - t.d > 0.0) t = make_tri(p, a, c, b);
    tris.push_back(t);
  };
  add_oriented(i0, i1, i2);
  add_oriented(i0, i1, i3);
  add_oriented(i0, i2, i3);
  add_oriented(i1, i2, i3);

  std::vector<int> visible;
  std::map<std::pair<int, int>, int> edge_owner;
  for (int i = 0; i < n; ++i) {
    if (i == i0 || i == i1 || i == i2 || i == i3) continue;
    visible.clear();
    for (int f = 0; f < static_cast<int>(tris.size()); ++f) {
      if (tris[f].alive && tris[f].n.dot(p[i]) - tris[f].d > eps) visible.push_back(f);
    }
    if (visible.empty()) continue;
    edge_owner.clear();
    for (int f = 0; f < static_cast<int>(tris.size()); ++f) {
      if (!tris[f].alive) continue;
      const auto& v = tris[f].v;
      for (int k = 0; k < 3; ++k) edge_owner[{v[k], v[(k + 1) % 3]}] = f;
    }
    std::vector<char> is_visible(tris.size(), 0);
    for (int f : visible) is_visible[f] = 1;
    std::vector<std::pair<int, int>> horizon;
    for (int f : visible) {
      const auto& v = tris[f].v;
      for (int k = 0; k < 3; ++k) {
        const int a = v[k];
        const int b = v[(k + 1) % 3];
        auto it = edge_owner.find({b, a});
        if (it == edge_owner.end() || !is_visible[it->second]) horizon.emplace_back(a, b);
      }
    }
    for (int f : visible) tris[f].alive = false;
    for (const auto& [a, b] : horizon) tris.push_back(make_tri(p, a, b, i));
  }

  std::vector<std::array<int, 3>> out;
  for (const auto& t : tris) {
    if (t.alive) out.push_back(t.v);
  }
  return out;
}

}  // namespace

ConvexPiece::ConvexPiece(std::vector<Vec3> vertices) : input_(std::move(vertices)) {
  if (input_.size() < 4) throw Error(ErrorCode::kInvalidGeometry, "convex piece needs at least 4 vertices");
  for (const auto& v : input_) {
    if (!v.allFinite()) throw Error(ErrorCode::kInvalidGeometry, "convex piece has non-finite vertex");
  }
  const auto raw = incremental_hull(input_);

  std::map<int, int> remap;
  for (const auto& t : raw) {
    for (int i : t) {
      if (remap.emplace(i, static_cast<int>(hull_vertices_.size())).second) hull_vertices_.push_back(input_[i]);
    }
  }
  triangles_.reserve(raw.size());
  for (const auto& t : raw) triangles_.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});

  Aabb3 box;
  for (const auto& v : hull_vertices_) box.extend(v);
  const double scale = std::max(box.extents().maxCoeff(), 1e-12);

  // Group coplanar triangles into faces.
  std::vector<int> group(triangles_.size(), -1);
  std::vector<Plane> tri_planes;
  for (const auto& t : triangles_) {
    const auto& p = hull_vertices_;
    Vec3 nrm = (p[t[1]] - p[t[0]]).cross(p[t[2]] - p[t[0]]);
    nrm.normalize();
    tri_planes.push_back({nrm, nrm.dot(p[t[0]])});
  }
  for (size_t i = 0; i < triangles_.size(); ++i) {
    if (group[i] >= 0) continue;
    group[i] = static_cast<int>(faces_.size());
    for (size_t j = i + 1; j < triangles_.size(); ++j) {
      if (group[j] < 0 && (tri_planes[i].normal - tri_planes[j].normal).norm() < 1e-7 &&
          std::abs(tri_planes[i].offset - tri_planes[j].offset) < 1e-7 * scale) {
        group[j] = group[i];
      }
    }
    faces_.push_back(tri_planes[i]);
  }

  std::map<std::pair<int, int>, std::vector<int>> edge_tris;
  for (size_t i = 0; i < triangles_.size(); ++i) {
    const auto& t = triangles_[i];
    for (int k = 0; k < 3; ++k) {
      edge_tris[std::minmax(t[k], t[(k + 1) % 3])].push_back(static_cast<int>(i));
    }
  }
  for (const auto& [e, ts] : edge_tris) {
    if (ts.size() == 2 && group[ts[0]] == group[ts[1]]) continue;
    edges_.push_back({e.first, e.second});
    Vec3 d = (hull_vertices_[e.second] - hull_vertices_[e.first]).normalized();
    bool dup = false;
    for (const auto& existing : edge_dirs_) {
      if (existing.cross(d).norm() < 1e-9) {
        dup = true;
        break;
      }
    }
    if (!dup) edge_dirs_.push_back(d);
  }

  const Vec3 origin = hull_vertices_.front();
  Vec3 moment = Vec3::Zero();
  for (const auto& t : triangles_) {
    const Vec3 a = hull_vertices_[t[0]] - origin;
    const Vec3 b = hull_vertices_[t[1]] - origin;
    const Vec3 c = hull_vertices_[t[2]] - origin;
    const double v = a.dot(b.cross(c)) / 6.0;
    volume_ += v;
    moment += v * (a + b + c) / 4.0;
  }
  centroid_ = origin + (volume_ > 0.0 ? Vec3(moment / volume_) : Vec3::Zero());
}

ConvexPiece ConvexPiece::box(const Vec3& lo, const Vec3& hi) {
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) {
    v.emplace_back((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(), (i & 4) ? hi.z() : lo.z());
  }
  return ConvexPiece(std::move(v));
}

ConvexPiece ConvexPiece::cylinder(double radius, double z0, double z1, int segments, const Vec2& center) {
  std::vector<Vec3> v;
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * kPi * i / segments;
    const double x = center.x() + radius * std::cos(a);
    const double y = center.y() + radius * std::sin(a);
    v.emplace_back(x, y, z0);
    v.emplace_back(x, y, z1);
  }
  return ConvexPiece(std::move(v));
}

Aabb3 ConvexPiece::bounds() const {
  Aabb3 b;
  for (const auto& v : hull_vertices_) b.extend(v);
  return b;
}

TriMesh ConvexPiece::mesh() const { return TriMesh{hull_vertices_, triangles_}; }

WorldPiece WorldPiece::from(const ConvexPiece& piece, const Pose3& pose) {
  WorldPiece w;
  const Mat3 r = pose.rotation_matrix();
  w.vertices.reserve(piece.vertices().size());
  for (const auto& v : piece.vertices()) {
    w.vertices.push_back(r * v + pose.translation);
    w.bounds.extend(w.vertices.back());
  }
  w.triangles = piece.triangles();
  w.faces.reserve(piece.faces().size());
  for (const auto& f : piece.faces()) {
    const Vec3 n = r * f.normal;
    w.faces.push_back({n, f.offset + n.dot(pose.translation)});
  }
  w.edges = piece.edges();
  w.edge_dirs.reserve(piece.edge_directions().size());
  for (const auto& d : piece.edge_directions()) w.edge_dirs.push_back(r * d);
  return w;
}

void WorldPiece::translate(const Vec3& delta) {
  for (auto& v : vertices) v += delta;
  for (auto& f : faces) f.offset += f.normal.dot(delta);
  bounds.min += delta;
  bounds.max += delta;
}

Vec3 closest_point_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

void closest_points_segments(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1, Vec3& on_p,
                             Vec3& on_q) {
  const Vec3 d1 = p1 - p0;
  const Vec3 d2 = q1 - q0;
  const Vec3 r = p0 - q0;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  constexpr double kTiny = 1e-300;
  double s = 0.0;
  double t = 0.0;
  if (a <= kTiny && e <= kTiny) {
    on_p = p0;
    on_q = q0;
    return;
  }
  if (a <= kTiny) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= kTiny) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  on_p = p0 + d1 * s;
  on_q = q0 + d2 * t;
}

namespace {

struct Projection {
  double min = kInf;
  double max = -kInf;
  int argmin = 0;
  int argmax = 0;
};

Projection project(const std::vector<Vec3>& verts, const Vec3& axis) {
  Projection p;
  for (int i = 0; i < static_cast<int>(verts.size()); ++i) {
    const double d = axis.dot(verts[i]);
    if (d < p.min) p.min = d, p.argmin = i;
    if (d > p.max) p.max = d, p.argmax = i;
  }
  return p;
}

void consider_vertex_faces(const WorldPiece& verts_of, const WorldPiece& tris_of, bool swapped, double& best,
                           Vec3& best_a, Vec3& best_b) {
  for (const auto& v : verts_of.vertices) {
    for (const auto& t : tris_of.triangles) {
      const Vec3 q = closest_point_triangle(v, tris_of.vertices[t[0]], tris_of.vertices[t[1]], tris_of.vertices[t[2]]);
      const double d = (q - v).squaredNorm();
      if (d < best) {
        best = d;
        best_a = swapped ? q : v;
        best_b = swapped ? v : q;
      }
    }
  }
}

}  // namespace

SignedDistance signed_distance(const WorldPiece& a, const WorldPiece& b) {
  double min_overlap = kInf;
  Vec3 min_axis = Vec3::UnitZ();
  int support_a = 0;
  int support_b = 0;
  bool separated = false;

  auto test_axis = [&](const Vec3& axis) {
    const Projection pa = project(a.vertices, axis);
    const Projection pb = project(b.vertices, axis);
    const double push_pos = pa.max - pb.min;  // move b along +axis
    const double push_neg = pb.max - pa.min;  // move b along -axis
    if (push_pos <= 0.0 || push_neg <= 0.0) separated = true;
    if (push_pos < min_overlap) {
      min_overlap = push_pos;
      min_axis = axis;
      support_a = pa.argmax;
      support_b = pb.argmin;
    }
    if (push_neg < min_overlap) {
      min_overlap = push_neg;
      min_axis = -axis;
      support_a = pa.argmin;
      support_b = pb.argmax;
    }
  };

  for (const auto& f : a.faces) {
    test_axis(f.normal);
    if (separated) break;
  }
  if (!separated) {
    for (const auto& f : b.faces) {
      test_axis(f.normal);
      if (separated) break;
    }
  }
  if (!separated) {
    for (const auto& ea : a.edge_dirs) {
      for (const auto& eb : b.edge_dirs) {
        Vec3 axis = ea.cross(eb);
        const double len = axis.norm();
        if (len < 1e-9) continue;
        test_axis(axis / len);
        if (separated) break;
      }
      if (separated) break;
    }
  }

  SignedDistance out;
  if (!separated) {
    out.distance = -min_overlap;
    out.normal = min_axis;
    out.point_a = a.vertices[support_a];
    out.point_b = b.vertices[support_b];
    return out;
  }

  double best = kInf;
  Vec3 pa = a.vertices.front();
  Vec3 pb = b.vertices.front();
  consider_vertex_faces(a, b, false, best, pa, pb);
  consider_vertex_faces(b, a, true, best, pa, pb);
  for (const auto& ea : a.edges) {
    for (const auto& eb : b.edges) {
      Vec3 cp;
      Vec3 cq;
      closest_points_segments(a.vertices[ea[0]], a.vertices[ea[1]], b.vertices[eb[0]], b.vertices[eb[1]], cp, cq);
      const double d = (cq - cp).squaredNorm();
      if (d < best) {
        best = d;
        pa = cp;
        pb = cq;
      }
    }
  }
  out.distance = std::sqrt(best);
  out.point_a = pa;
  out.point_b = pb;
  if (out.distance > 0.0) {
    out.normal = (pb - pa) / out.distance;
  } else {
    out.normal = min_axis;
  }
  return out;
}

namespace {

double aabb_gap(const Aabb3& a, const Aabb3& b) {
  const Vec3 gap = (a.min - b.max).cwiseMax(b.min - a.max).cwiseMax(Vec3::Zero());
  return gap.norm();
}

}  // namespace

SignedDistance signed_distance(std::span<const WorldPiece> a, std::span<const WorldPiece> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::kInvalidGeometry, "signed distance needs non-empty piece sets");
  SignedDistance best;
  best.distance = kInf;
  for (const auto& pa : a) {
    for (const auto& pb : b) {
      if (aabb_gap(pa.bounds, pb.bounds) >= best.distance) continue;
      const SignedDistance sd = signed_distance(pa, pb);
      if (sd.distance < best.distance) best = sd;
    }
  }
  return best;
}

std::vector<WorldPiece> pose_pieces(std::span<const ConvexPiece> pieces, const Pose3& pose) {
  std::vector<WorldPiece> out;
  out.reserve(pieces.size());
  for (const auto& p : pieces) out.push_back(WorldPiece::from(p, pose));
  return out;
}

bool contains_point(const WorldPiece& piece, const Vec3& p, double tolerance) {
  for (const auto& f : piece.faces) {
    if (f.normal.dot(p) - f.offset > tolerance) return false;
  }
  return true;
}

}  // namespace scenecraft::geom
