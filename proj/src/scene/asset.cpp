#include "scenecraft/scene/asset.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "scenecraft/error.hpp"
#include "scenecraft/geometry/mass.hpp"

namespace scenecraft::scene {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::kFurniture: return "furniture";
    case Category::kWall: return "wall";
    case Category::kCeiling: return "ceiling";
    case Category::kManipuland: return "manipuland";
    case Category::kThinCovering: return "thin_covering";
  }
  return "furniture";
}

Category category_from_string(std::string_view name) {
  if (name == "furniture") return Category::kFurniture;
  if (name == "wall") return Category::kWall;
  if (name == "ceiling") return Category::kCeiling;
  if (name == "manipuland") return Category::kManipuland;
  if (name == "thin_covering") return Category::kThinCovering;
  throw Error(ErrorCode::kCategory, "unknown category '" + std::string(name) + "'", {{"category", name}});
}

void Asset::validate() const {
  if (id.empty()) throw Error(ErrorCode::kInvalidGeometry, "asset id is empty");
  if (collision_pieces.empty()) {
    if (category != Category::kThinCovering) {
      throw Error(ErrorCode::kInvalidGeometry, "asset '" + id + "' has no collision pieces");
    }
  } else {
    if (!(mass > 0.0)) throw Error(ErrorCode::kInvalidGeometry, "asset '" + id + "' must have positive mass");
    const double tol = 1e-9 * std::max(1.0, bbox.extents().norm());
    for (const auto& p : collision_pieces) {
      for (const auto& v : p.vertices()) {
        if ((v.array() < bbox.min.array() - tol).any() || (v.array() > bbox.max.array() + tol).any()) {
          throw Error(ErrorCode::kInvalidGeometry, "asset '" + id + "' bbox does not enclose its pieces");
        }
      }
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (inertia + inertia.transpose()));
    if (eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, inertia.norm())) {
      throw Error(ErrorCode::kInvalidGeometry, "asset '" + id + "' inertia is not positive semi-definite");
    }
  }
  if (!(friction >= 0.0) || !std::isfinite(friction)) {
    throw Error(ErrorCode::kInvalidGeometry, "asset '" + id + "' friction must be finite and non-negative");
  }
}

double volume_ratio(const Asset& asset) {
  if (!asset.has_collision()) return 1.0;
  const Vec3 e = asset.bbox.extents();
  const double box = e.x() * e.y() * e.z();
  if (!(box > 0.0)) return 1.0;
  std::vector<Vec3> pts;
  for (const auto& p : asset.collision_pieces) pts.insert(pts.end(), p.vertices().begin(), p.vertices().end());
  return ConvexPiece(std::move(pts)).volume() / box;
}

Asset make_asset(std::string id, Category category, std::vector<ConvexPiece> pieces, double mass, double friction,
                 std::string visual_ref) {
  Asset a;
  a.id = std::move(id);
  a.category = category;
  a.friction = friction;
  a.visual_ref = std::move(visual_ref);
  for (const auto& p : pieces) a.bbox.extend(p.bounds());
  if (!pieces.empty()) {
    const auto props = geom::pieces_mass_properties(pieces, mass);
    a.mass = props.mass;
    a.com = props.com;
    a.inertia = props.inertia;
  }
  a.collision_pieces = std::move(pieces);
  a.validate();
  return a;
}

namespace primitives {
namespace {

// Shifts a z-up, bottom-at-zero footprint into the category's canonical origin.
Vec3 canonical_offset(Category category, const Vec3& size) {
  switch (category) {
    case Category::kCeiling: return Vec3(0, 0, -size.z());
    case Category::kWall: return Vec3(0, 0.5 * size.y(), 0);
    default: return Vec3::Zero();
  }
}

}  // namespace

Asset box(std::string id, Category category, const Vec3& size, double mass, double friction) {
  const Vec3 off = canonical_offset(category, size);
  const Vec3 lo(-0.5 * size.x(), -0.5 * size.y(), 0.0);
  const Vec3 hi(0.5 * size.x(), 0.5 * size.y(), size.z());
  return make_asset(std::move(id), category, {ConvexPiece::box(lo + off, hi + off)}, mass, friction);
}

Asset cylinder(std::string id, Category category, double radius, double height, double mass, int segments,
               double friction) {
  const Vec3 off = canonical_offset(category, Vec3(2 * radius, 2 * radius, height));
  return make_asset(std::move(id), category,
                    {ConvexPiece::cylinder(radius, off.z(), off.z() + height, segments, off.head<2>())}, mass,
                    friction);
}

Asset sphere(std::string id, double radius, double mass, double friction) {
  auto mesh = geom::icosphere_mesh(radius, 1);
  for (auto& v : mesh.vertices) v.z() += radius;
  return make_asset(std::move(id), Category::kManipuland, {ConvexPiece(mesh.vertices)}, mass, friction);
}

Asset table(std::string id, const Vec2& top_size, double height, double top_thickness, double leg_width,
            double mass, double friction) {
  std::vector<ConvexPiece> pieces;
  const double hx = 0.5 * top_size.x();
  const double hy = 0.5 * top_size.y();
  pieces.push_back(ConvexPiece::box(Vec3(-hx, -hy, height - top_thickness), Vec3(hx, hy, height)));
  for (int sx : {-1, 1}) {
    for (int sy : {-1, 1}) {
      const Vec3 c(sx * (hx - 0.5 * leg_width), sy * (hy - 0.5 * leg_width), 0.0);
      pieces.push_back(ConvexPiece::box(c + Vec3(-0.5 * leg_width, -0.5 * leg_width, 0.0),
                                        c + Vec3(0.5 * leg_width, 0.5 * leg_width, height - top_thickness)));
    }
  }
  return make_asset(std::move(id), Category::kFurniture, std::move(pieces), mass, friction);
}

Asset shelf(std::string id, Category category, const Vec3& size, const std::vector<double>& shelf_heights,
            double board_thickness, double mass, double friction) {
  const Vec3 off = canonical_offset(category, size);
  const double hx = 0.5 * size.x();
  const double hy = 0.5 * size.y();
  const double t = board_thickness;
  std::vector<ConvexPiece> pieces;
  auto add = [&](const Vec3& lo, const Vec3& hi) { pieces.push_back(ConvexPiece::box(lo + off, hi + off)); };
  add(Vec3(-hx, -hy, 0), Vec3(-hx + t, hy, size.z()));
  add(Vec3(hx - t, -hy, 0), Vec3(hx, hy, size.z()));
  add(Vec3(-hx + t, -hy, 0), Vec3(hx - t, hy, t));
  add(Vec3(-hx + t, -hy, size.z() - t), Vec3(hx - t, hy, size.z()));
  for (double h : shelf_heights) add(Vec3(-hx + t, -hy, h - t), Vec3(hx - t, hy, h));
  return make_asset(std::move(id), category, std::move(pieces), mass, friction);
}

Asset tray(std::string id, const Vec3& size, double wall_thickness, double mass, double friction) {
  const double hx = 0.5 * size.x();
  const double hy = 0.5 * size.y();
  const double t = wall_thickness;
  std::vector<ConvexPiece> pieces;
  pieces.push_back(ConvexPiece::box(Vec3(-hx, -hy, 0), Vec3(hx, hy, t)));
  pieces.push_back(ConvexPiece::box(Vec3(-hx, -hy, t), Vec3(-hx + t, hy, size.z())));
  pieces.push_back(ConvexPiece::box(Vec3(hx - t, -hy, t), Vec3(hx, hy, size.z())));
  pieces.push_back(ConvexPiece::box(Vec3(-hx + t, -hy, t), Vec3(hx - t, -hy + t, size.z())));
  pieces.push_back(ConvexPiece::box(Vec3(-hx + t, hy - t, t), Vec3(hx - t, hy, size.z())));
  return make_asset(std::move(id), Category::kManipuland, std::move(pieces), mass, friction);
}

Asset bowl(std::string id, double radius, double height, double wall_thickness, int sides, double mass,
           double friction) {
  std::vector<ConvexPiece> pieces;
  pieces.push_back(ConvexPiece::cylinder(radius, 0.0, wall_thickness, sides));
  const double inner = radius - wall_thickness;
  for (int i = 0; i < sides; ++i) {
    const double a0 = 2.0 * geom::kPi * i / sides;
    const double a1 = 2.0 * geom::kPi * (i + 1) / sides;
    std::vector<Vec3> v;
    for (double a : {a0, a1}) {
      for (double r : {inner, radius}) {
        for (double z : {wall_thickness, height}) v.emplace_back(r * std::cos(a), r * std::sin(a), z);
      }
    }
    pieces.emplace_back(std::move(v));
  }
  return make_asset(std::move(id), Category::kManipuland, std::move(pieces), mass, friction);
}

Asset thin_covering(std::string id, const Vec2& size, double thickness) {
  Asset a;
  a.id = std::move(id);
  a.category = Category::kThinCovering;
  a.bbox.min = Vec3(-0.5 * size.x(), -0.5 * size.y(), 0.0);
  a.bbox.max = Vec3(0.5 * size.x(), 0.5 * size.y(), thickness);
  a.validate();
  return a;
}

}  // namespace primitives
}  // namespace scenecraft::scene
