#pragma once

#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "scenecraft/geometry/types.hpp"
#include "scenecraft/rng.hpp"
#include "scenecraft/scene/asset.hpp"

namespace scenecraft::stochastic {

enum class Style { kNatural, kPerfect };

std::string_view to_string(Style s);
// "natural" or "perfect"; throws kSpec otherwise.
Style style_from_string(std::string_view s);

// Case-insensitive substring match. Perfect wins only when no natural keyword
// is present; everything else, including no match, is natural.
Style select_style(std::string_view prompt);

// Standard deviations for one (category, style). Positions in meters along the
// two Pose2 axes (for wall objects: along the wall and height), yaw in degrees.
struct Sigma {
  double x = 0.0;
  double y = 0.0;
  double yaw_deg = 0.0;

  bool operator==(const Sigma&) const = default;
};

class NoiseProfile {
 public:
  // The default placement noise table.
  static NoiseProfile defaults();
  // All deviations zero.
  static NoiseProfile none();

  // Throws kCategory for categories without noise entries.
  const Sigma& sigma(scene::Category c, Style s) const;
  void set(scene::Category c, Style s, const Sigma& sigma);

 private:
  std::map<std::pair<scene::Category, Style>, Sigma> table_;
};

// Adds independent zero-mean Gaussian offsets to x, y and yaw. Draw order is
// x, y, yaw, so results depend only on the rng state.
geom::Pose2 apply_noise(const geom::Pose2& pose, scene::Category category, Style style, Rng& rng,
                        const NoiseProfile& profile = NoiseProfile::defaults());

nlohmann::json to_json(const NoiseProfile& p);

}  // namespace scenecraft::stochastic
