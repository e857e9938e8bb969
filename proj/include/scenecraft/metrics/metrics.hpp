#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenecraft/rng.hpp"
#include "scenecraft/scene/scene.hpp"
#include "scenecraft/sim/settle.hpp"

namespace scenecraft::metrics {

using scene::Scene;

// ---- collisions --------------------------------------------------------------

struct PairDepth {
  std::string a;  // a < b
  std::string b;
  double depth = 0.0;  // meters
};

struct CollisionMetrics {
  double col = 0.0;     // percent of collision-bearing objects in a colliding pair
  double mpd_mm = 0.0;  // mean over colliding objects of their deepest penetration
  int object_count = 0;
  std::vector<PairDepth> pairs;  // sorted by (a, b)
};

// Object pairs penetrating deeper than `threshold`. Objects without collision
// geometry are neither tested nor counted.
CollisionMetrics collision_metrics(const Scene& scene, double threshold = 0.001);

// ---- stability ---------------------------------------------------------------

struct StabilityConfig {
  sim::SimConfig sim;
  double max_displacement = 0.01;
  double max_rotation = 0.1;
};

struct StabilityMetrics {
  double stb = 100.0;  // percent
  double md_mm = 0.0;  // mean displacement of non-welded objects
  double xd_m = 0.0;   // largest displacement
  double mr_rad = 0.0; // mean rotation of non-welded objects
  int object_count = 0;
  std::map<std::string, bool> stable;
  sim::SettleReport settle;
};

// Settles every collision-bearing object with wall, ceiling and welded objects
// fixed; an object is stable when it moves less than both thresholds.
StabilityMetrics stability_metrics(const Scene& scene, const StabilityConfig& cfg = {});

// ---- navigability and bounds -------------------------------------------------

// Largest connected walkable area over total walkable area for a robot of
// half width h_r; 1 when nothing is walkable.
double navigability(const Scene& scene, const std::string& room_id, double robot_half_width);

struct OobMetrics {
  double oob = 0.0;  // fraction of sampled objects flagged
  int object_count = 0;
  std::map<std::string, double> floor_fraction;  // share of samples above some floor
  std::map<std::string, bool> flagged;
};

// Samples surface points of each collision-bearing object (area weighted over
// its hull faces, drawn in the object frame from a stream keyed by the object
// id) and flags the object when fewer than `pass_fraction` lie above a floor.
OobMetrics out_of_bounds(const Scene& scene, int samples = 256, std::uint64_t seed = 0, double pass_fraction = 0.99);

// ---- support queries ---------------------------------------------------------

struct SupportQuery {
  bool in_contact = false;
  double signed_distance = 0.0;
  double vertical_gap = 0.0;       // bottom of a minus top of b
  double horizontal_offset = 0.0;  // xy distance between bounding box centers
  double overlap_pct = 0.0;        // a's footprint over b's top surface, percent of a's footprint
};

SupportQuery support_query(const Scene& scene, const std::string& a_id, const std::string& b_id,
                           double contact_threshold = 0.002);

// ---- report ------------------------------------------------------------------

struct ReportConfig {
  double collision_threshold = 0.001;
  StabilityConfig stability;
  double robot_half_width = 0.35;
  int oob_samples = 256;
  std::uint64_t seed = 0;
};

struct MetricsReport {
  double col = 0.0;
  double mpd_mm = 0.0;
  double stb = 100.0;
  double md_mm = 0.0;
  double xd_m = 0.0;
  double mr_rad = 0.0;
  double nav = 1.0;  // mean over rooms
  double oob = 0.0;
  int object_count = 0;
  std::map<std::string, double> nav_by_room;
  CollisionMetrics collisions;
  StabilityMetrics stability;
  OobMetrics bounds;
};

MetricsReport metrics_report(const Scene& scene, const ReportConfig& cfg = {});

nlohmann::json to_json(const CollisionMetrics& m);
nlohmann::json to_json(const StabilityMetrics& m);
nlohmann::json to_json(const OobMetrics& m);
nlohmann::json to_json(const SupportQuery& q);
nlohmann::json to_json(const MetricsReport& r);

}  // namespace scenecraft::metrics
