#pragma once

#include <span>

#include "scenecraft/geometry/convex.hpp"
#include "scenecraft/geometry/types.hpp"

namespace scenecraft::geom {

struct MassProperties {
  double volume = 0.0;   // m^3
  double density = 0.0;  // kg/m^3
  double mass = 0.0;     // kg
  Vec3 com = Vec3::Zero();
  Mat3 inertia = Mat3::Zero();  // about com, axes of the input frame
};

// Uniform-density mass properties of a closed, outward-oriented mesh:
// density = mass / volume and inertia = density * unit-density inertia.
// Throws InvalidGeometry when the signed volume is not positive or mass <= 0.
MassProperties mesh_mass_properties(const TriMesh& mesh, double mass);

// Same, for a union of disjoint convex pieces.
MassProperties pieces_mass_properties(std::span<const ConvexPiece> pieces, double mass);

}  // namespace scenecraft::geom
