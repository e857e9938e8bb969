#include "scenecraft/geometry/rotation.hpp"

#include <cmath>
#include <random>

namespace scenecraft::geom {

Quat sample_rotation_uniform(Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u1 = unit(rng);
  const double u2 = unit(rng);
  const double u3 = unit(rng);
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  Quat q(a * std::sin(2.0 * kPi * u2), a * std::cos(2.0 * kPi * u2), b * std::sin(2.0 * kPi * u3),
         b * std::cos(2.0 * kPi * u3));
  return q.normalized();
}

}  // namespace scenecraft::geom
