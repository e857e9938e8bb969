#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scenecraft/scene/scene.hpp"

namespace scenecraft::scene {

using geom::WorldPiece;

// A rigid set of world-posed pieces with its bounding box.
struct Body {
  std::string id;
  std::vector<WorldPiece> pieces;
  geom::Aabb3 bounds;

  void translate(const Vec3& d);
};

Body make_body(std::string id, std::vector<WorldPiece> pieces);

// Bodies of every collision-bearing object accepted by `keep` (all when empty),
// ordered by id.
std::vector<Body> object_bodies(const Scene& scene,
                                const std::function<bool(const ObjectInstance&, const Asset&)>& keep = {});

// Architectural bodies of all rooms: "<room>:floor" and "<room>:wall_<k>".
std::vector<Body> static_bodies(const Scene& scene, bool include_floor = true);

// Signed distance, or nullopt when the bounding boxes are farther apart than
// `cutoff` (the true distance then exceeds cutoff).
std::optional<double> body_distance(const Body& a, const Body& b, double cutoff);

}  // namespace scenecraft::scene
