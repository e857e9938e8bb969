#pragma once

#include "scenecraft/geometry/types.hpp"
#include "scenecraft/rng.hpp"

namespace scenecraft::geom {

// Haar-uniform rotation (Shoemake's subgroup algorithm).
Quat sample_rotation_uniform(Rng& rng);

}  // namespace scenecraft::geom
