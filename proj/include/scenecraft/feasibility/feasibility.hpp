#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenecraft/scene/scene.hpp"
#include "scenecraft/sim/settle.hpp"

namespace scenecraft::feasibility {

using geom::Vec3;
using scene::Scene;

struct ProjectionConfig {
  double epsilon = 1e-5;
  int max_iterations = 50;      // outer passes that add newly violated pairs
  int max_sweeps = 200000;      // constraint sweeps per solve
  double tolerance = 1e-12;     // sweep stops once no multiplier moves more than this
  int insert_options = 6;       // axes tried when a newly violated pair joins
  int trial_sweeps = 5000;      // sweep limit while comparing those axes
  double search_budget = 2e5;   // axis assignments above which the exhaustive search gives way to local search
  int axis_alternatives = 4;    // next-best axes tried per pair by the local search
  int refine_limit = 12;        // local axis swaps only with at most this many constrained pairs

  void validate() const;
};

// One linear separation constraint kept by the solver: piece `piece_a` of `a`
// and piece `piece_b` of `b` are at least epsilon apart along `axis`.
struct ActivePair {
  std::string a;
  std::string b;
  int piece_a = 0;
  int piece_b = 0;
  Vec3 axis = Vec3::UnitZ();  // b moves along +axis away from a
  double multiplier = 0.0;
};

struct ProjectionResult {
  Scene scene;
  double total_displacement = 0.0;  // sum of squared translation changes
  std::map<std::string, Vec3> displacement;  // movable objects only
  std::vector<ActivePair> active;
  int iterations = 0;
};

// Translates the movable objects to the nearest configuration where every pair
// of collision-bearing objects, and each movable object against the floor and
// walls of its room, is at least epsilon apart. Rotations are left untouched.
// Moved objects lose their support reference unless the move stayed in plane.
// Throws kProjectionFailed naming the worst remaining pair.
ProjectionResult project_nonpenetration(const Scene& scene, const std::vector<std::string>& movable,
                                        const ProjectionConfig& cfg = {});

enum class StageKind { kPostFurniture, kPerEntity, kPostManipulands };

struct Stage {
  StageKind kind = StageKind::kPostFurniture;
  std::string entity;  // per-entity stage only

  static Stage post_furniture() { return {StageKind::kPostFurniture, {}}; }
  static Stage per_entity(std::string id) { return {StageKind::kPerEntity, std::move(id)}; }
  static Stage post_manipulands() { return {StageKind::kPostManipulands, {}}; }
};

// "post_furniture", "per_entity:<id>", "post_manipulands".
Stage stage_from_string(const std::string& s);
std::string to_string(const Stage& s);

struct FeasibilityConfig {
  ProjectionConfig projection;
  sim::SimConfig sim;
};

struct FeasibilityReport {
  Scene scene;
  std::vector<std::string> movable;
  std::vector<std::string> welded;
  double projection_displacement = 0.0;
  std::map<std::string, Vec3> projection_moves;
  sim::SettleReport settle;
};

// Objects taking part in a stage: furniture and manipulands move after furniture
// placement; an entity stays fixed while the manipulands resting on it move;
// after manipulation only manipulands move. Wall, ceiling and welded objects
// never move.
struct StageSets {
  std::vector<std::string> movable;
  std::vector<std::string> fixed;  // collision-bearing participants that do not move
};
StageSets stage_sets(const Scene& scene, const Stage& stage);

// Projection of the stage's movable set, then settling with everything else in
// the stage welded. Rooms settle independently against their own floor and walls.
FeasibilityReport enforce_feasibility(const Scene& scene, const Stage& stage, const FeasibilityConfig& cfg = {});

// Settles the given objects (rooms independently); objects in `welded` stay fixed.
sim::SettleReport settle_scene(const Scene& scene, const std::vector<std::string>& dynamic,
                               const std::vector<std::string>& welded, const sim::SimConfig& cfg);

// Writes settled poses back; moved objects lose their support reference.
void apply_settle(Scene& scene, const sim::SettleReport& report);

struct FallenConfig {
  double tilt_threshold = 0.7853981633974483;  // 45 degrees
  double floor_penetration = 0.005;
  double near_floor = 0.1;
  double drop = 0.3;
  double floor_z = 0.0;
};

struct Removal {
  std::string id;
  std::string reason;  // "tilt", "floor_penetration", "fell_from_support"
};

struct FallenResult {
  Scene scene;
  std::vector<Removal> removed;
};

// Removes tipped furniture and manipulands that sank into or dropped to the
// floor during the settle described by `report`.
FallenResult remove_fallen(const Scene& scene, const sim::SettleReport& report, const FallenConfig& cfg = {});

nlohmann::json to_json(const ProjectionResult& r);
nlohmann::json to_json(const FeasibilityReport& r);
nlohmann::json to_json(const FallenResult& r);

}  // namespace scenecraft::feasibility
