#include "scenecraft/layout/layout.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "scenecraft/error.hpp"

namespace scenecraft::layout {
namespace {

constexpr double kTol = 1e-9;

}  // namespace

const PlacedRoom* FloorPlan::find(const std::string& name) const {
  for (const auto& r : rooms) {
    if (r.spec.name == name) return &r;
  }
  return nullptr;
}

double shared_edge_length(const Vec2& a_min, const Vec2& a_max, const Vec2& b_min, const Vec2& b_max) {
  double best = 0.0;
  if (std::abs(a_max.x() - b_min.x()) <= kTol || std::abs(b_max.x() - a_min.x()) <= kTol) {
    best = std::max(best, std::min(a_max.y(), b_max.y()) - std::max(a_min.y(), b_min.y()));
  }
  if (std::abs(a_max.y() - b_min.y()) <= kTol || std::abs(b_max.y() - a_min.y()) <= kTol) {
    best = std::max(best, std::min(a_max.x(), b_max.x()) - std::max(a_min.x(), b_min.x()));
  }
  return best;
}

bool rooms_adjacent(const PlacedRoom& a, const PlacedRoom& b) {
  return shared_edge_length(a.origin, a.max(), b.origin, b.max()) >= kMinSharedEdge - kTol;
}

bool rooms_overlap(const PlacedRoom& a, const PlacedRoom& b) {
  const Vec2 lo = a.origin.cwiseMax(b.origin);
  const Vec2 hi = a.max().cwiseMin(b.max());
  return hi.x() - lo.x() > kTol && hi.y() - lo.y() > kTol;
}

std::vector<std::vector<int>> adjacency_graph(const std::vector<RoomSpec>& specs) {
  std::map<std::string, int> index;
  for (int i = 0; i < static_cast<int>(specs.size()); ++i) {
    const auto& s = specs[i];
    if (!(s.width > 0.0) || !(s.length > 0.0) || !std::isfinite(s.width) || !std::isfinite(s.length)) {
      throw Error(ErrorCode::kSpec, "room '" + s.name + "' needs positive finite dimensions", {{"room", s.name}});
    }
    if (!index.emplace(s.name, i).second) {
      throw Error(ErrorCode::kSpec, "duplicate room name '" + s.name + "'", {{"room", s.name}});
    }
  }
  std::vector<std::vector<int>> g(specs.size());
  for (int i = 0; i < static_cast<int>(specs.size()); ++i) {
    for (const auto& n : specs[i].required_adjacent) {
      auto it = index.find(n);
      if (it == index.end()) {
        throw Error(ErrorCode::kSpec, "room '" + specs[i].name + "' requires unknown room '" + n + "'",
                    {{"room", specs[i].name}, {"reference", n}});
      }
      if (it->second == i) continue;
      g[i].push_back(it->second);
      g[it->second].push_back(i);
    }
  }
  for (auto& adj : g) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return g;
}

std::vector<int> order_rooms(const std::vector<RoomSpec>& specs) {
  const auto g = adjacency_graph(specs);
  const int n = static_cast<int>(specs.size());
  auto larger = [&](int a, int b) {
    if (specs[a].area() != specs[b].area()) return specs[a].area() > specs[b].area();
    return specs[a].name < specs[b].name;
  };
  std::vector<int> anchors;
  std::vector<int> connectors;
  for (int i = 0; i < n; ++i) (specs[i].required_adjacent.empty() ? anchors : connectors).push_back(i);
  std::sort(anchors.begin(), anchors.end(), larger);
  std::sort(connectors.begin(), connectors.end(), larger);

  std::vector<int> order = anchors;
  std::vector<char> placed(n, 0);
  for (int a : anchors) placed[a] = 1;
  while (order.size() < static_cast<size_t>(n)) {
    int pick = -1;
    for (int c : connectors) {
      if (placed[c]) continue;
      const bool has_neighbor = std::any_of(g[c].begin(), g[c].end(), [&](int m) { return placed[m] != 0; });
      if (has_neighbor) {
        pick = c;
        break;
      }
    }
    if (pick < 0) {
      for (int c : connectors) {
        if (!placed[c]) {
          pick = c;
          break;
        }
      }
    }
    placed[pick] = 1;
    order.push_back(pick);
  }
  return order;
}

std::vector<Candidate> candidate_positions(const RoomSpec& room, const FloorPlan& plan) {
  std::vector<Candidate> out;
  int index = 0;
  for (const auto& p : plan.rooms) {
    const Vec2 lo = p.origin;
    const Vec2 hi = p.max();
    const Vec2 ps = p.size();
    for (int edge = 0; edge < 4; ++edge) {
      for (int rot = 0; rot < (room.square() ? 1 : 2); ++rot) {
        const Vec2 s = rot ? Vec2(room.length, room.width) : Vec2(room.width, room.length);
        for (int k = 0; k < kPositionsPerEdge; ++k) {
          const double f = static_cast<double>(k) / (kPositionsPerEdge - 1);
          Vec2 o;
          switch (edge) {
            case 0: o = Vec2(lo.x() + f * (ps.x() - s.x()), lo.y() - s.y()); break;  // below
            case 1: o = Vec2(hi.x(), lo.y() + f * (ps.y() - s.y())); break;          // right
            case 2: o = Vec2(lo.x() + f * (ps.x() - s.x()), hi.y()); break;          // above
            default: o = Vec2(lo.x() - s.x(), lo.y() + f * (ps.y() - s.y())); break;  // left
          }
          out.push_back({o, rot != 0, index++});
        }
      }
    }
  }
  return out;
}

std::optional<double> score_candidate(const PlacedRoom& candidate, const FloorPlan& plan,
                                      const std::vector<std::string>& required, const ScoreWeights& w) {
  int satisfied = 0;
  for (const auto& name : required) {
    const PlacedRoom* other = plan.find(name);
    if (!other) continue;
    if (!rooms_adjacent(candidate, *other)) return std::nullopt;
    ++satisfied;
  }
  double dist = 0.0;
  if (!plan.rooms.empty()) {
    Vec2 centroid = Vec2::Zero();
    for (const auto& r : plan.rooms) centroid += r.center();
    centroid /= static_cast<double>(plan.rooms.size());
    dist = (candidate.center() - centroid).norm();
  }
  return w.s_base + w.w_adj * satisfied - w.w_dist * dist;
}

LayoutScore score_layout(const FloorPlan& plan, const FloorPlan* previous, const ScoreWeights& w) {
  LayoutScore s;
  if (plan.rooms.empty()) return s;
  double area = 0.0;
  Vec2 lo = plan.rooms.front().origin;
  Vec2 hi = plan.rooms.front().max();
  for (const auto& r : plan.rooms) {
    area += r.spec.area();
    lo = lo.cwiseMin(r.origin);
    hi = hi.cwiseMax(r.max());
  }
  s.compactness = area / ((hi.x() - lo.x()) * (hi.y() - lo.y()));
  if (previous) {
    for (const auto& r : plan.rooms) {
      if (const PlacedRoom* p = previous->find(r.spec.name)) s.stability += std::exp(-(r.center() - p->center()).norm() / 2.0);
    }
  }
  s.total = w.w_compact * s.compactness + (previous ? w.w_stable * s.stability : 0.0);
  return s;
}

namespace {

class Search {
 public:
  Search(const std::vector<RoomSpec>& specs, const SolveOptions& opts)
      : specs_(specs), opts_(opts), graph_(adjacency_graph(specs)), order_(order_rooms(specs)) {
    for (size_t i = 0; i < specs.size(); ++i) {
      std::vector<std::string> names;
      for (int j : graph_[i]) names.push_back(specs[j].name);
      required_.push_back(std::move(names));
    }
    start_ = std::chrono::steady_clock::now();
  }

  SolveResult run() {
    SolveResult out;
    out.order = order_;
    if (specs_.empty()) {
      out.exhausted = true;
      return out;
    }
    FloorPlan plan;
    plan.rooms.push_back({specs_[order_[0]], Vec2::Zero(), false});
    deepest_ = 1;
    const bool finished = descend(plan);
    out.nodes = nodes_;
    out.exhausted = finished;
    if (!best_) {
      if (finished) {
        const auto& room = specs_[order_[deepest_]];
        throw Error(ErrorCode::kInfeasible, "no valid placement for room '" + room.name + "'",
                    {{"room", room.name}, {"nodes", nodes_}});
      }
      throw Error(ErrorCode::kInfeasible, "search budget exhausted before a complete layout was found",
                  {{"room", specs_[order_[deepest_ < order_.size() ? deepest_ : 0]].name}, {"nodes", nodes_}});
    }
    out.plan = *best_;
    out.score = best_score_;
    for (size_t i = 0; i < out.plan.rooms.size(); ++i) {
      for (size_t j = i + 1; j < out.plan.rooms.size(); ++j) {
        if (rooms_adjacent(out.plan.rooms[i], out.plan.rooms[j])) {
          out.plan.adjacencies.push_back(std::minmax(out.plan.rooms[i].spec.name, out.plan.rooms[j].spec.name));
        }
      }
    }
    std::sort(out.plan.adjacencies.begin(), out.plan.adjacencies.end());
    return out;
  }

 private:
  bool out_of_budget() const {
    if (opts_.node_budget && nodes_ >= *opts_.node_budget) return true;
    if (opts_.timeout_seconds) {
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
      if (elapsed.count() >= *opts_.timeout_seconds) return true;
    }
    return false;
  }

  // Returns false when the budget ran out.
  bool descend(FloorPlan& plan) {
    const size_t depth = plan.rooms.size();
    if (depth == order_.size()) {
      const FloorPlan* prev = opts_.previous ? &*opts_.previous : nullptr;
      const LayoutScore s = score_layout(plan, prev, opts_.weights);
      if (!best_ || s.total > best_score_.total) {
        best_ = plan;
        best_score_ = s;
      }
      return true;
    }
    const int room_index = order_[depth];
    const RoomSpec& spec = specs_[room_index];
    struct Scored {
      double score;
      Candidate cand;
    };
    std::vector<Scored> ranked;
    for (const auto& c : candidate_positions(spec, plan)) {
      const PlacedRoom placed{spec, c.origin, c.rotated90};
      bool clash = false;
      for (const auto& r : plan.rooms) {
        if (rooms_overlap(placed, r)) {
          clash = true;
          break;
        }
      }
      if (clash) continue;
      if (auto s = score_candidate(placed, plan, required_[room_index], opts_.weights)) ranked.push_back({*s, c});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const Scored& a, const Scored& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.cand.index < b.cand.index;
    });
    for (const auto& r : ranked) {
      if (out_of_budget()) return false;
      ++nodes_;
      plan.rooms.push_back({spec, r.cand.origin, r.cand.rotated90});
      deepest_ = std::max(deepest_, plan.rooms.size());
      const bool ok = descend(plan);
      plan.rooms.pop_back();
      if (!ok) return false;
    }
    return true;
  }

  const std::vector<RoomSpec>& specs_;
  const SolveOptions& opts_;
  std::vector<std::vector<int>> graph_;
  std::vector<int> order_;
  std::vector<std::vector<std::string>> required_;
  std::chrono::steady_clock::time_point start_;
  std::uint64_t nodes_ = 0;
  size_t deepest_ = 0;
  std::optional<FloorPlan> best_;
  LayoutScore best_score_;
};

}  // namespace

SolveResult solve_layout(const std::vector<RoomSpec>& specs, const SolveOptions& opts) {
  return Search(specs, opts).run();
}

std::vector<scene::RoomGeometry> plan_to_rooms(const FloorPlan& plan, double wall_height, double wall_thickness) {
  std::vector<scene::RoomGeometry> out;
  for (const auto& r : plan.rooms) {
    const Vec2 s = r.size();
    auto g = scene::rectangular_room(r.spec.name, r.spec.room_type, r.origin, s.x(), s.y(), wall_height,
                                     wall_thickness);
    g.prompt = r.spec.prompt;
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace scenecraft::layout
