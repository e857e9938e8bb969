#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scenecraft/geometry/types.hpp"
#include "scenecraft/scene/scene.hpp"

namespace scenecraft::layout {

using geom::Vec2;

struct RoomSpec {
  std::string name;
  std::string room_type;
  double width = 0.0;   // x extent before rotation
  double length = 0.0;  // y extent before rotation
  std::vector<std::string> required_adjacent;
  std::string prompt;

  double area() const { return width * length; }
  bool square() const { return width == length; }
};

struct ScoreWeights {
  double s_base = 1.0;
  double w_adj = 10.0;
  double w_dist = 0.5;  // per meter
  double w_compact = 10.0;
  double w_stable = 1.0;
};

// Minimum shared boundary length for two rooms to count as adjacent.
inline constexpr double kMinSharedEdge = 0.5;
inline constexpr int kPositionsPerEdge = 11;

struct PlacedRoom {
  RoomSpec spec;
  Vec2 origin = Vec2::Zero();  // min corner
  bool rotated90 = false;

  Vec2 size() const { return rotated90 ? Vec2(spec.length, spec.width) : Vec2(spec.width, spec.length); }
  Vec2 max() const { return origin + size(); }
  Vec2 center() const { return origin + 0.5 * size(); }
};

struct FloorPlan {
  std::vector<PlacedRoom> rooms;  // in placement order
  std::vector<std::pair<std::string, std::string>> adjacencies;  // achieved, each pair sorted, list sorted

  const PlacedRoom* find(const std::string& name) const;
};

struct Candidate {
  Vec2 origin;
  bool rotated90 = false;
  int index = 0;  // generation order, the tie-breaker
};

struct LayoutScore {
  double compactness = 0.0;
  double stability = 0.0;  // 0 when no previous plan
  double total = 0.0;
};

// Length of the boundary shared by two axis-aligned rectangles (0 if none).
double shared_edge_length(const Vec2& a_min, const Vec2& a_max, const Vec2& b_min, const Vec2& b_max);
bool rooms_adjacent(const PlacedRoom& a, const PlacedRoom& b);
bool rooms_overlap(const PlacedRoom& a, const PlacedRoom& b);

// Symmetric closure of the declared adjacency lists. Throws kSpec on a
// dangling reference, a duplicate name or non-positive dimensions.
std::vector<std::vector<int>> adjacency_graph(const std::vector<RoomSpec>& specs);

// Anchors (empty declared adjacency list) first by area descending; then
// connectors, each time the largest one with an already ordered neighbor, or
// the largest remaining when none qualifies. Returns indices into specs.
std::vector<int> order_rooms(const std::vector<RoomSpec>& specs);

// 11 flush-to-flush positions per edge of every placed room, per orientation
// (one orientation for square rooms). Overlapping candidates are included.
std::vector<Candidate> candidate_positions(const RoomSpec& room, const FloorPlan& plan);

// nullopt when the candidate misses a required neighbor that is already placed.
std::optional<double> score_candidate(const PlacedRoom& candidate, const FloorPlan& plan,
                                      const std::vector<std::string>& required, const ScoreWeights& w);

LayoutScore score_layout(const FloorPlan& plan, const FloorPlan* previous, const ScoreWeights& w);

struct SolveOptions {
  ScoreWeights weights;
  std::optional<std::uint64_t> node_budget;  // expanded placements
  std::optional<double> timeout_seconds;
  std::optional<FloorPlan> previous;
};

struct SolveResult {
  FloorPlan plan;
  LayoutScore score;
  std::uint64_t nodes = 0;
  bool exhausted = false;  // search space fully explored
  std::vector<int> order;
};

// Best-first backtracking over the fixed ordering. Throws kInfeasible naming
// the first room that could never be placed when no complete layout exists.
SolveResult solve_layout(const std::vector<RoomSpec>& specs, const SolveOptions& opts = {});

// Rectangular rooms in world coordinates, one wall segment per edge.
std::vector<scene::RoomGeometry> plan_to_rooms(const FloorPlan& plan, double wall_height = 2.5,
                                               double wall_thickness = 0.1);

}  // namespace scenecraft::layout
