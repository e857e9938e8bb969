#include "scenecraft/layout/openings.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include "scenecraft/error.hpp"
#include "scenecraft/geometry/polygon.hpp"

namespace scenecraft::layout {

using scene::Opening;
using scene::OpeningKind;
using scene::RoomGeometry;

namespace {

constexpr double kProbe = 0.01;  // outward probe distance behind a wall, meters

}  // namespace

Coarse coarse_from_string(const std::string& s) {
  if (s == "left") return Coarse::kLeft;
  if (s == "center") return Coarse::kCenter;
  if (s == "right") return Coarse::kRight;
  throw Error(ErrorCode::kSpec, "coarse position must be left, center or right, got '" + s + "'");
}

std::vector<std::pair<double, double>> feasible_offsets(const RoomGeometry& room, const OpeningRequest& req) {
  const int k = scene::wall_index(room, req.wall_segment_id);
  const double length = scene::wall_frame(room, k).length;
  const double third = length / 3.0;
  if (!(req.width > 0.0) || !(req.height > 0.0)) {
    throw Error(ErrorCode::kDimension, "opening needs positive width and height");
  }
  if (req.width > third + 1e-12) {
    throw Error(ErrorCode::kDimension, "opening wider than a third of the segment",
                {{"width", req.width}, {"third", third}});
  }
  double sill = 0.0;
  if (req.kind == OpeningKind::kWindow) {
    if (!req.sill) throw Error(ErrorCode::kDimension, "window requires a sill height");
    sill = *req.sill;
    if (sill < 0.0) throw Error(ErrorCode::kDimension, "window sill must be non-negative");
  }
  if (sill + req.height > room.wall_height + 1e-12) {
    throw Error(ErrorCode::kDimension, "opening taller than the wall",
                {{"top", sill + req.height}, {"wall_height", room.wall_height}});
  }
  if (room.open_connections.count(req.wall_segment_id)) {
    throw Error(ErrorCode::kPlacement, "segment '" + req.wall_segment_id + "' is an open connection");
  }
  const int j = static_cast<int>(req.coarse);
  std::vector<std::pair<double, double>> free{{j * third + 0.5 * req.width, (j + 1) * third - 0.5 * req.width}};
  for (const auto* list : {&room.doors, &room.windows}) {
    for (const auto& o : *list) {
      if (o.wall_segment_id != req.wall_segment_id) continue;
      const double half = 0.5 * (o.width + req.width);
      const double lo = o.offset_x - half;
      const double hi = o.offset_x + half;
      std::vector<std::pair<double, double>> next;
      for (const auto& [a, b] : free) {
        if (hi <= a || lo >= b) {
          next.emplace_back(a, b);
          continue;
        }
        if (lo > a) next.emplace_back(a, lo);
        if (hi < b) next.emplace_back(hi, b);
      }
      free = std::move(next);
    }
  }
  double total = 0.0;
  for (const auto& [a, b] : free) total += b - a;
  if (free.empty() || !(total > 0.0)) {
    if (free.empty()) {
      throw Error(ErrorCode::kPlacement, "no room for the opening on segment '" + req.wall_segment_id + "'",
                  {{"segment", req.wall_segment_id}});
    }
  }
  return free;
}

RoomGeometry add_opening(const RoomGeometry& room, const OpeningRequest& req, Rng& rng) {
  const auto free = feasible_offsets(room, req);
  double total = 0.0;
  for (const auto& [a, b] : free) total += b - a;
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  double offset = free.back().second;
  for (const auto& [a, b] : free) {
    if (u <= b - a) {
      offset = a + u;
      break;
    }
    u -= b - a;
  }
  Opening o;
  o.kind = req.kind;
  o.wall_segment_id = req.wall_segment_id;
  o.offset_x = offset;
  o.width = req.width;
  o.height = req.height;
  o.sill = req.kind == OpeningKind::kWindow ? *req.sill : 0.0;
  o.exterior = req.exterior;
  RoomGeometry out = room;
  auto& list = req.kind == OpeningKind::kDoor ? out.doors : out.windows;
  o.id = req.id.empty() ? std::string(req.kind == OpeningKind::kDoor ? "door_" : "window_") + std::to_string(list.size())
                        : req.id;
  list.push_back(std::move(o));
  out.validate();
  return out;
}

std::vector<std::string> rooms_behind(const std::vector<RoomGeometry>& rooms, const RoomGeometry& room,
                                      const std::string& segment_id, std::optional<double> offset_x) {
  const scene::WallFrame f = scene::wall_frame(room, scene::wall_index(room, segment_id));
  std::vector<std::string> out;
  if (offset_x) {
    const geom::Vec3 p = f.start + *offset_x * f.x_axis - kProbe * f.inward;
    for (const auto& r : rooms) {
      if (r.id != room.id && geom::point_in_polygon(p.head<2>() - r.origin, r.floor)) out.push_back(r.id);
    }
    return out;
  }
  // Thin strip just outside the whole segment.
  geom::Polygon2 strip;
  const geom::Vec3 out_dir = -kProbe * f.inward;
  strip.exterior = {f.start.head<2>(), (f.start + out_dir).head<2>(), (f.end + out_dir).head<2>(), f.end.head<2>()};
  if (geom::ring_area(strip.exterior) < 0.0) std::reverse(strip.exterior.begin(), strip.exterior.end());
  for (const auto& r : rooms) {
    if (r.id != room.id && geom::intersection_area(strip, r.world_floor()) > 1e-9) out.push_back(r.id);
  }
  return out;
}

bool opening_is_exterior(const std::vector<RoomGeometry>& rooms, const RoomGeometry& room, const Opening& opening) {
  return rooms_behind(rooms, room, opening.wall_segment_id, opening.offset_x).empty();
}

ConnectivityReport validate_connectivity(const std::vector<RoomGeometry>& rooms) {
  ConnectivityReport rep;
  if (rooms.empty()) {
    rep.errors.push_back("no rooms");
    return rep;
  }
  std::map<std::string, std::vector<std::string>> edges;
  std::deque<std::string> queue;
  std::map<std::string, bool> seen;
  for (const auto& r : rooms) {
    seen[r.id] = false;
    for (const auto& d : r.doors) {
      if (d.exterior) {
        if (!seen[r.id]) queue.push_back(r.id);
        seen[r.id] = true;
        continue;
      }
      for (const auto& other : rooms_behind(rooms, r, d.wall_segment_id, d.offset_x)) {
        edges[r.id].push_back(other);
        edges[other].push_back(r.id);
      }
    }
    for (const auto& c : r.open_connections) {
      for (const auto& other : rooms_behind(rooms, r, c, std::nullopt)) {
        edges[r.id].push_back(other);
        edges[other].push_back(r.id);
      }
    }
  }
  if (queue.empty()) {
    rep.errors.push_back("no exterior door");
    for (const auto& [id, s] : seen) rep.unreachable.push_back(id);
    return rep;
  }
  while (!queue.empty()) {
    const std::string cur = queue.front();
    queue.pop_front();
    for (const auto& n : edges[cur]) {
      if (!seen[n]) {
        seen[n] = true;
        queue.push_back(n);
      }
    }
  }
  for (const auto& [id, s] : seen) {
    if (!s) {
      rep.unreachable.push_back(id);
      rep.errors.push_back("room '" + id + "' is not reachable from an exterior door");
    }
  }
  rep.ok = rep.errors.empty();
  return rep;
}

}  // namespace scenecraft::layout
