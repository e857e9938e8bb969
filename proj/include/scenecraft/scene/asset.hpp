#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "scenecraft/geometry/convex.hpp"
#include "scenecraft/geometry/types.hpp"

namespace scenecraft::scene {

using geom::Aabb3;
using geom::ConvexPiece;
using geom::Mat3;
using geom::Vec2;
using geom::Vec3;

enum class Category { kFurniture, kWall, kCeiling, kManipuland, kThinCovering };

std::string_view to_string(Category c);
// Throws kCategory on an unknown name.
Category category_from_string(std::string_view name);

// Simulation-ready asset in its canonical frame (Z up, Y forward). Origin
// convention by category: floor-standing and manipulands have their bottom at
// z=0, ceiling fixtures their top at z=0, wall objects their back at y=0.
struct Asset {
  std::string id;
  Category category = Category::kFurniture;
  std::vector<ConvexPiece> collision_pieces;
  Aabb3 bbox;
  double mass = 0.0;
  Vec3 com = Vec3::Zero();
  Mat3 inertia = Mat3::Zero();
  double friction = 0.5;
  std::string visual_ref;

  bool has_collision() const { return !collision_pieces.empty(); }
  // Throws kInvalidGeometry when an invariant fails.
  void validate() const;

  bool operator==(const Asset&) const = default;
};

// Volume of the convex hull of all collision vertices over bbox volume; 1 for
// assets without pieces.
double volume_ratio(const Asset& asset);
inline constexpr double kCircularRatio = 0.80;
inline bool is_circular(const Asset& asset) { return volume_ratio(asset) < kCircularRatio; }

// Builds an asset from collision pieces: bbox and uniform-density mass
// properties are derived from the pieces.
Asset make_asset(std::string id, Category category, std::vector<ConvexPiece> pieces, double mass,
                 double friction = 0.5, std::string visual_ref = {});

// Primitive assets, each honoring the canonical origin of its category.
namespace primitives {

Asset box(std::string id, Category category, const Vec3& size, double mass, double friction = 0.5);
Asset cylinder(std::string id, Category category, double radius, double height, double mass, int segments = 24,
               double friction = 0.5);
Asset sphere(std::string id, double radius, double mass, double friction = 0.5);
// Four legs under a slab; knee clearance below the top equals height - top_thickness.
Asset table(std::string id, const Vec2& top_size, double height, double top_thickness, double leg_width,
            double mass, double friction = 0.5);
// Open-front bookcase: side panels, bottom, top and one board per entry of
// shelf_heights (board top surfaces at those heights).
Asset shelf(std::string id, Category category, const Vec3& size, const std::vector<double>& shelf_heights,
            double board_thickness, double mass, double friction = 0.5);
// Open-top tray: a base plate and four walls.
Asset tray(std::string id, const Vec3& size, double wall_thickness, double mass, double friction = 0.5);
// Open-top polygonal bowl: base plate and one vertical wall slab per side.
Asset bowl(std::string id, double radius, double height, double wall_thickness, int sides, double mass,
           double friction = 0.5);
// Flat decorative element without collision geometry.
Asset thin_covering(std::string id, const Vec2& size, double thickness = 0.01);

}  // namespace primitives

}  // namespace scenecraft::scene
