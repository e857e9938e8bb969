#include "scenecraft/geometry/mass.hpp"

#include <array>

#include "scenecraft/error.hpp"

namespace scenecraft::geom {
namespace {

// Unit-density volume integrals over a closed mesh: 1, x, y, z, x^2, y^2, z^2,
// xy, yz, zx (divergence theorem, per-triangle closed forms).
using Integrals = std::array<double, 10>;

void subexpressions(double w0, double w1, double w2, double& f1, double& f2, double& f3, double& g0, double& g1,
                    double& g2) {
  const double temp0 = w0 + w1;
  f1 = temp0 + w2;
  const double temp1 = w0 * w0;
  const double temp2 = temp1 + w1 * temp0;
  f2 = temp2 + w2 * f1;
  f3 = w0 * temp1 + w1 * temp2 + w2 * f2;
  g0 = f2 + w0 * (f1 + w0);
  g1 = f2 + w1 * (f1 + w1);
  g2 = f2 + w2 * (f1 + w2);
}

void accumulate(Integrals& acc, const Vec3& p0, const Vec3& p1, const Vec3& p2) {
  const Vec3 d = (p1 - p0).cross(p2 - p0);
  double f1x, f2x, f3x, g0x, g1x, g2x;
  double f1y, f2y, f3y, g0y, g1y, g2y;
  double f1z, f2z, f3z, g0z, g1z, g2z;
  subexpressions(p0.x(), p1.x(), p2.x(), f1x, f2x, f3x, g0x, g1x, g2x);
  subexpressions(p0.y(), p1.y(), p2.y(), f1y, f2y, f3y, g0y, g1y, g2y);
  subexpressions(p0.z(), p1.z(), p2.z(), f1z, f2z, f3z, g0z, g1z, g2z);
  acc[0] += d.x() * f1x;
  acc[1] += d.x() * f2x;
  acc[2] += d.y() * f2y;
  acc[3] += d.z() * f2z;
  acc[4] += d.x() * f3x;
  acc[5] += d.y() * f3y;
  acc[6] += d.z() * f3z;
  acc[7] += d.x() * (p0.y() * g0x + p1.y() * g1x + p2.y() * g2x);
  acc[8] += d.y() * (p0.z() * g0y + p1.z() * g1y + p2.z() * g2y);
  acc[9] += d.z() * (p0.x() * g0z + p1.x() * g1z + p2.x() * g2z);
}

MassProperties finish(Integrals in, double mass) {
  in[0] /= 6.0;
  for (int i = 1; i <= 3; ++i) in[i] /= 24.0;
  for (int i = 4; i <= 6; ++i) in[i] /= 60.0;
  for (int i = 7; i <= 9; ++i) in[i] /= 120.0;
  const double volume = in[0];
  if (!(volume > 0.0)) throw Error(ErrorCode::kInvalidGeometry, "mesh volume is not positive");
  if (!(mass > 0.0)) throw Error(ErrorCode::kInvalidGeometry, "mass must be positive");

  MassProperties out;
  out.volume = volume;
  out.mass = mass;
  out.density = mass / volume;
  out.com = Vec3(in[1], in[2], in[3]) / volume;
  const Vec3& c = out.com;
  Mat3 unit;
  unit(0, 0) = in[5] + in[6] - volume * (c.y() * c.y() + c.z() * c.z());
  unit(1, 1) = in[4] + in[6] - volume * (c.z() * c.z() + c.x() * c.x());
  unit(2, 2) = in[4] + in[5] - volume * (c.x() * c.x() + c.y() * c.y());
  unit(0, 1) = unit(1, 0) = -(in[7] - volume * c.x() * c.y());
  unit(1, 2) = unit(2, 1) = -(in[8] - volume * c.y() * c.z());
  unit(0, 2) = unit(2, 0) = -(in[9] - volume * c.z() * c.x());
  out.inertia = out.density * unit;
  return out;
}

}  // namespace

MassProperties mesh_mass_properties(const TriMesh& mesh, double mass) {
  mesh.validate();
  Integrals acc{};
  for (const auto& t : mesh.triangles) {
    accumulate(acc, mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
  }
  return finish(acc, mass);
}

MassProperties pieces_mass_properties(std::span<const ConvexPiece> pieces, double mass) {
  Integrals acc{};
  for (const auto& piece : pieces) {
    for (const auto& t : piece.triangles()) {
      accumulate(acc, piece.vertices()[t[0]], piece.vertices()[t[1]], piece.vertices()[t[2]]);
    }
  }
  return finish(acc, mass);
}

}  // namespace scenecraft::geom
