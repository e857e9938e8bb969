#pragma once

// Independent references for the floor-plan solver and the connectivity
// validator. Candidate grids, overlap and adjacency are re-derived here from
// rectangle coordinates; only the room ordering is taken from the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "scenecraft/layout/layout.hpp"
#include "scenecraft/scene/scene.hpp"

namespace scenecraft::oracle {

struct Rect {
  double x0, y0, x1, y1;
};

inline double rect_shared(const Rect& a, const Rect& b) {
  const double eps = 1e-9;
  double best = 0.0;
  if (std::abs(a.x1 - b.x0) <= eps || std::abs(b.x1 - a.x0) <= eps) {
    best = std::max(best, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
  }
  if (std::abs(a.y1 - b.y0) <= eps || std::abs(b.y1 - a.y0) <= eps) {
    best = std::max(best, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
  }
  return best;
}

inline bool rect_overlap(const Rect& a, const Rect& b) {
  return std::min(a.x1, b.x1) - std::max(a.x0, b.x0) > 1e-9 && std::min(a.y1, b.y1) - std::max(a.y0, b.y0) > 1e-9;
}

// Exhaustive enumeration of every candidate sequence; returns the best total
// (weights.w_compact * compactness) or -inf when nothing is feasible.
class BruteForceLayout {
 public:
  BruteForceLayout(const std::vector<layout::RoomSpec>& specs, std::vector<int> order, double w_compact)
      : specs_(specs), order_(std::move(order)), w_(w_compact) {}

  double solve() {
    best_ = -std::numeric_limits<double>::infinity();
    leaves_ = 0;
    placed_.clear();
    const auto& s = specs_[order_[0]];
    placed_.push_back({0.0, 0.0, s.width, s.length});
    recurse();
    return best_;
  }

  long leaves() const { return leaves_; }

 private:
  bool required(int a, int b) const {
    auto has = [](const layout::RoomSpec& s, const std::string& n) {
      return std::find(s.required_adjacent.begin(), s.required_adjacent.end(), n) != s.required_adjacent.end();
    };
    return has(specs_[a], specs_[b].name) || has(specs_[b], specs_[a].name);
  }

  void recurse() {
    const size_t d = placed_.size();
    if (d == order_.size()) {
      ++leaves_;
      double area = 0.0;
      Rect bb = placed_[0];
      for (size_t i = 0; i < d; ++i) {
        const auto& s = specs_[order_[i]];
        area += s.width * s.length;
        bb.x0 = std::min(bb.x0, placed_[i].x0);
        bb.y0 = std::min(bb.y0, placed_[i].y0);
        bb.x1 = std::max(bb.x1, placed_[i].x1);
        bb.y1 = std::max(bb.y1, placed_[i].y1);
      }
      best_ = std::max(best_, w_ * (area / ((bb.x1 - bb.x0) * (bb.y1 - bb.y0))));
      return;
    }
    const auto& spec = specs_[order_[d]];
    std::vector<std::pair<double, double>> dims{{spec.width, spec.length}};
    if (spec.width != spec.length) dims.emplace_back(spec.length, spec.width);
    const std::vector<Rect> fixed = placed_;
    for (const Rect& p : fixed) {
      for (auto [w, l] : dims) {
        for (int k = 0; k <= 10; ++k) {
          const double f = k / 10.0;
          const double sx = p.x0 + f * ((p.x1 - p.x0) - w);
          const double sy = p.y0 + f * ((p.y1 - p.y0) - l);
          const Rect cands[4] = {{sx, p.y0 - l, sx + w, p.y0},
                                 {p.x1, sy, p.x1 + w, sy + l},
                                 {sx, p.y1, sx + w, p.y1 + l},
                                 {p.x0 - w, sy, p.x0, sy + l}};
          for (const Rect& c : cands) {
            bool ok = true;
            for (size_t i = 0; i < d && ok; ++i) {
              if (rect_overlap(c, placed_[i])) ok = false;
              if (ok && required(order_[d], order_[i]) && rect_shared(c, placed_[i]) < 0.5 - 1e-9) ok = false;
            }
            if (!ok) continue;
            placed_.push_back(c);
            recurse();
            placed_.pop_back();
          }
        }
      }
    }
  }

  const std::vector<layout::RoomSpec>& specs_;
  std::vector<int> order_;
  double w_;
  std::vector<Rect> placed_;
  double best_ = 0.0;
  long leaves_ = 0;
};

// Random specs on a 0.5 m grid with a random forest of adjacency requirements.
inline std::vector<layout::RoomSpec> random_specs(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> dim(4, 12);  // half meters
  std::bernoulli_distribution coin(0.5);
  std::vector<layout::RoomSpec> specs;
  for (int i = 0; i < n; ++i) {
    layout::RoomSpec s;
    s.name = "room_" + std::to_string(i);
    s.room_type = "generic";
    s.width = 0.5 * dim(rng);
    s.length = coin(rng) ? s.width : 0.5 * dim(rng);
    if (i > 0 && coin(rng)) {
      s.required_adjacent.push_back("room_" + std::to_string(std::uniform_int_distribution<int>(0, i - 1)(rng)));
    }
    specs.push_back(std::move(s));
  }
  return specs;
}

struct ConnectivityCase {
  std::vector<scene::RoomGeometry> rooms;
  std::vector<std::pair<int, int>> links;  // intended interior links, room indices
  std::set<int> exterior;                  // rooms given an exterior door
};

namespace detail {

inline Rect room_rect(const scene::RoomGeometry& r) {
  double x1 = r.floor.exterior[0].x(), y1 = r.floor.exterior[0].y();
  for (const auto& v : r.floor.exterior) {
    x1 = std::max(x1, v.x());
    y1 = std::max(y1, v.y());
  }
  return {r.origin.x(), r.origin.y(), r.origin.x() + x1, r.origin.y() + y1};
}

// Interval shared by wall k of a with rectangle b, as [lo, hi] along the wall
// line (x for walls 0 and 2, y for walls 1 and 3). Empty when hi <= lo.
inline std::pair<double, double> wall_share(const Rect& a, int k, const Rect& b) {
  const double eps = 1e-9;
  switch (k) {
    case 0:
      if (std::abs(b.y1 - a.y0) > eps) return {0, 0};
      return {std::max(a.x0, b.x0), std::min(a.x1, b.x1)};
    case 1:
      if (std::abs(b.x0 - a.x1) > eps) return {0, 0};
      return {std::max(a.y0, b.y0), std::min(a.y1, b.y1)};
    case 2:
      if (std::abs(b.y0 - a.y1) > eps) return {0, 0};
      return {std::max(a.x0, b.x0), std::min(a.x1, b.x1)};
    default:
      if (std::abs(b.x1 - a.x0) > eps) return {0, 0};
      return {std::max(a.y0, b.y0), std::min(a.y1, b.y1)};
  }
}

// Distance from the wall's start vertex (wall k runs from ring vertex k+1 to
// vertex k of the counter-clockwise rectangle) to coordinate m on the wall line.
inline double wall_offset(const Rect& a, int k, double m) {
  switch (k) {
    case 0: return a.x1 - m;
    case 1: return a.y1 - m;
    case 2: return m - a.x0;
    default: return m - a.y0;
  }
}

inline double wall_length(const Rect& a, int k) { return k % 2 == 0 ? a.x1 - a.x0 : a.y1 - a.y0; }

}  // namespace detail

inline ConnectivityCase random_connectivity_case(std::mt19937_64& rng, int n_rooms) {
  ConnectivityCase out;
  for (int attempt = 0;; ++attempt) {
    try {
      layout::SolveOptions opts;
      opts.node_budget = 200;
      out.rooms = layout::plan_to_rooms(layout::solve_layout(random_specs(rng, n_rooms), opts).plan);
      break;
    } catch (const std::exception&) {
      if (attempt > 50) throw;
    }
  }
  const int n = static_cast<int>(out.rooms.size());
  std::vector<Rect> rects;
  for (const auto& r : out.rooms) rects.push_back(detail::room_rect(r));
  std::bernoulli_distribution link(0.55), open(0.3), ext(0.3);
  std::set<std::pair<int, int>> used_walls;
  int door_id = 0;
  auto add_door = [&](int i, int k, double offset, double width, bool exterior) {
    scene::Opening d;
    d.id = "door_" + std::to_string(door_id++);
    d.kind = scene::OpeningKind::kDoor;
    d.wall_segment_id = "wall_" + std::to_string(k);
    d.offset_x = offset;
    d.width = width;
    d.height = 2.1;
    d.exterior = exterior;
    out.rooms[i].doors.push_back(d);
    used_walls.insert({i, k});
  };
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < 4; ++k) {
      if (used_walls.count({i, k})) continue;
      std::vector<std::pair<int, double>> neighbours;  // (room, shared length)
      std::pair<double, double> first{0, 0};
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const auto iv = detail::wall_share(rects[i], k, rects[j]);
        if (iv.second - iv.first > 1e-9) {
          if (neighbours.empty()) first = iv;
          neighbours.emplace_back(j, iv.second - iv.first);
        }
      }
      if (neighbours.empty()) continue;
      const auto [j, shared] = neighbours.front();
      if (shared < 0.5 || !link(rng)) continue;
      if (neighbours.size() == 1 && open(rng)) {
        out.rooms[i].open_connections.insert("wall_" + std::to_string(k));
        used_walls.insert({i, k});
      } else {
        const double mid = 0.5 * (first.first + first.second);
        add_door(i, k, detail::wall_offset(rects[i], k, mid), std::min(0.9, 0.8 * shared), false);
      }
      out.links.emplace_back(i, j);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!ext(rng)) continue;
    for (int k = 0; k < 4; ++k) {
      if (used_walls.count({i, k})) continue;
      bool free_wall = true;
      for (int j = 0; j < n && free_wall; ++j) {
        if (j == i) continue;
        const auto iv = detail::wall_share(rects[i], k, rects[j]);
        if (iv.second - iv.first > 1e-9) free_wall = false;
      }
      if (!free_wall) continue;
      add_door(i, k, 0.5 * detail::wall_length(rects[i], k), 0.9, true);
      out.exterior.insert(i);
      break;
    }
  }
  for (auto& r : out.rooms) r.validate();
  return out;
}

struct ConnectivityVerdict {
  bool ok = false;
  std::vector<std::string> unreachable;  // sorted
};

// Union-find over the intended links; a room is reachable when its set holds
// a room with an exterior door.
inline ConnectivityVerdict union_find_verdict(const ConnectivityCase& c) {
  const int n = static_cast<int>(c.rooms.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [a, b] : c.links) parent[find(a)] = find(b);
  std::set<int> good;
  for (int e : c.exterior) good.insert(find(e));
  ConnectivityVerdict v;
  for (int i = 0; i < n; ++i) {
    if (!good.count(find(i))) v.unreachable.push_back(c.rooms[i].id);
  }
  std::sort(v.unreachable.begin(), v.unreachable.end());
  v.ok = !c.exterior.empty() && v.unreachable.empty();
  return v;
}

}  // namespace scenecraft::oracle
