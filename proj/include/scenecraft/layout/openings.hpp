#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scenecraft/rng.hpp"
#include "scenecraft/scene/scene.hpp"

namespace scenecraft::layout {

enum class Coarse { kLeft, kCenter, kRight };

// Throws kSpec for anything but "left", "center", "right".
Coarse coarse_from_string(const std::string& s);

struct OpeningRequest {
  std::string id;
  scene::OpeningKind kind = scene::OpeningKind::kDoor;
  std::string wall_segment_id;
  Coarse coarse = Coarse::kCenter;
  double width = 0.9;
  double height = 2.1;
  std::optional<double> sill;  // required for windows
  bool exterior = false;
};

// Feasible centre offsets for the request: the chosen third of the segment,
// shrunk by half the width, minus positions overlapping existing openings.
// Throws kDimension / kPlacement as add_opening does.
std::vector<std::pair<double, double>> feasible_offsets(const scene::RoomGeometry& room, const OpeningRequest& req);

// Samples the centre uniformly over feasible_offsets. Segment thirds are
// taken along the wall frame x axis (left to right seen from inside).
scene::RoomGeometry add_opening(const scene::RoomGeometry& room, const OpeningRequest& req, Rng& rng);

// True when no other room's floor lies directly behind the opening.
bool opening_is_exterior(const std::vector<scene::RoomGeometry>& rooms, const scene::RoomGeometry& room,
                         const scene::Opening& opening);

// Rooms reached through an interior door or an open connection of `room`.
std::vector<std::string> rooms_behind(const std::vector<scene::RoomGeometry>& rooms, const scene::RoomGeometry& room,
                                      const std::string& segment_id, std::optional<double> offset_x);

struct ConnectivityReport {
  bool ok = false;
  std::vector<std::string> errors;
  std::vector<std::string> unreachable;  // sorted
};

// BFS from every room with an exterior door through interior doors and open
// connections; the room behind each opening is resolved geometrically.
ConnectivityReport validate_connectivity(const std::vector<scene::RoomGeometry>& rooms);

}  // namespace scenecraft::layout
