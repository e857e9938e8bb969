#include "scenecraft/feasibility/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include "scenecraft/error.hpp"
#include "scenecraft/scene/query.hpp"
#include "scenecraft/scene/serialize.hpp"
#include "scenecraft/scene/surface.hpp"

namespace scenecraft::feasibility {

using geom::Aabb3;
using geom::WorldPiece;
using scene::Category;

void ProjectionConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw Error(ErrorCode::kSpec, "epsilon must be positive");
  if (max_iterations < 1 || max_sweeps < 1) throw Error(ErrorCode::kSpec, "iteration limits must be positive");
  if (!(tolerance > 0.0)) throw Error(ErrorCode::kSpec, "tolerance must be positive");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PBody {
  std::string id;
  std::vector<WorldPiece> pieces;  // original placement
  Aabb3 bounds;
  int var = -1;    // movable variable index, -1 when fixed
  int room = -1;   // room of a movable object; statics carry their own room
  bool architecture = false;
};

struct Candidate {
  Vec3 axis;
  double gap0;  // separation along axis at the original placement
};

struct Constraint {
  int a, pa, b, pb;
  Vec3 axis;
  double gap0;
  double lambda = 0.0;
};

using PairKey = std::tuple<int, int, int, int>;

double support_min(const WorldPiece& p, const Vec3& n) {
  double m = kInf;
  for (const auto& v : p.vertices) m = std::min(m, n.dot(v));
  return m;
}
double support_max(const WorldPiece& p, const Vec3& n) {
  double m = -kInf;
  for (const auto& v : p.vertices) m = std::max(m, n.dot(v));
  return m;
}

// Separating-axis candidates of a piece pair, both signs, best gap first.
std::vector<Candidate> candidates(const WorldPiece& a, const WorldPiece& b) {
  std::vector<Vec3> axes;
  auto add = [&](Vec3 n) {
    const double len = n.norm();
    if (len < 1e-9) return;
    n /= len;
    for (const auto& m : axes)
      if (std::abs(m.dot(n)) > 1.0 - 1e-10) return;
    axes.push_back(n);
  };
  for (const auto& f : a.faces) add(f.normal);
  for (const auto& f : b.faces) add(f.normal);
  for (const auto& ea : a.edge_dirs)
    for (const auto& eb : b.edge_dirs) add(ea.cross(eb));
  std::vector<Candidate> out;
  out.reserve(2 * axes.size());
  for (const auto& n : axes) {
    out.push_back({n, support_min(b, n) - support_max(a, n)});
    out.push_back({-n, support_min(a, n) - support_max(b, n)});
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& x, const Candidate& y) { return x.gap0 > y.gap0; });
  return out;
}

class Solver {
 public:
  Solver(std::vector<PBody> bodies, int nvars, const ProjectionConfig& cfg)
      : bodies_(std::move(bodies)), nvars_(nvars), cfg_(cfg) {}

  // Returns false when the constraint set cannot be satisfied.
  bool run(std::vector<Constraint>& active, std::vector<Vec3>& delta, int& iterations) {
    delta.assign(nvars_, Vec3::Zero());
    for (auto& c : active) c.lambda = 0.0;
    iterations = 0;
    for (int it = 0; it < cfg_.max_iterations; ++it) {
      ++iterations;
      if (!active.empty() && !solve(active, delta)) return false;
      auto fresh = violated(active, delta);
      if (fresh.empty()) return true;
      for (auto& c : fresh) insert(active, delta, c);
    }
    return false;
  }

  // Adds a new row on whichever of its best few axes gives the cheapest
  // feasible solution together with the rows already present.
  void insert(std::vector<Constraint>& active, std::vector<Vec3>& delta, Constraint c) {
    const Vec3 rel = shift(c.b, delta) - shift(c.a, delta);
    std::vector<Candidate> options = cands(c);
    std::stable_sort(options.begin(), options.end(), [&](const Candidate& x, const Candidate& y) {
      return x.gap0 + x.axis.dot(rel) > y.gap0 + y.axis.dot(rel);
    });
    if (static_cast<int>(options.size()) > cfg_.insert_options) options.resize(cfg_.insert_options);
    double best = kInf;
    std::vector<Constraint> best_rows;
    std::vector<Vec3> best_delta;
    for (const auto& opt : options) {
      auto rows = active;
      c.axis = opt.axis;
      c.gap0 = opt.gap0;
      c.lambda = 0.0;
      rows.push_back(c);
      auto d = delta;
      if (!solve(rows, d, cfg_.trial_sweeps)) continue;
      const double v = cost(d);
      if (v < best) {
        best = v;
        best_rows = std::move(rows);
        best_delta = std::move(d);
      }
    }
    if (best_rows.empty()) {
      c.axis = options.front().axis;
      c.gap0 = options.front().gap0;
      c.lambda = 0.0;
      active.push_back(c);
      return;
    }
    active = std::move(best_rows);
    delta = std::move(best_delta);
  }

  double cost(const std::vector<Vec3>& delta) const {
    double s = 0.0;
    for (const auto& d : delta) s += d.squaredNorm();
    return s;
  }

  // Solves the rows alone from zero displacement; infinity when infeasible.
  double fresh_cost(std::vector<Constraint>& rows, std::vector<Vec3>& delta) const {
    delta.assign(nvars_, Vec3::Zero());
    for (auto& c : rows) c.lambda = 0.0;
    if (!rows.empty() && !solve(rows, delta)) return kInf;
    return cost(delta);
  }

  // Piece pairs closer than epsilon at `delta` that have no row yet, each with
  // the candidate axis of largest current gap.
  std::vector<Constraint> violated(const std::vector<Constraint>& active, const std::vector<Vec3>& delta) {
    std::set<PairKey> have;
    for (const auto& c : active) have.insert({c.a, c.pa, c.b, c.pb});
    std::vector<Constraint> out;
    for_each_close_pair(delta, [&](int i, int pi, int j, int pj, double d) {
      if (d >= cfg_.epsilon - 1e-9 || have.count({i, pi, j, pj})) return;
      Constraint c{i, pi, j, pj, Vec3::UnitZ(), 0.0, 0.0};
      const Candidate& best = best_axis(c, delta);
      c.axis = best.axis;
      c.gap0 = best.gap0;
      out.push_back(c);
    });
    return out;
  }

  const Candidate& best_axis(const Constraint& c, const std::vector<Vec3>& delta) {
    const Vec3 rel = shift(c.b, delta) - shift(c.a, delta);
    const auto& all = cands(c);
    std::size_t best = 0;
    double g_best = -kInf;
    for (std::size_t k = 0; k < all.size(); ++k) {
      const double g = all[k].gap0 + all[k].axis.dot(rel);
      if (g > g_best) {
        g_best = g;
        best = k;
      }
    }
    return all[best];
  }

  // Switches the row to the axis of largest gap at `delta`; true when it changed.
  bool realign(Constraint& c, const std::vector<Vec3>& delta) {
    const Candidate& b = best_axis(c, delta);
    const Vec3 rel = shift(c.b, delta) - shift(c.a, delta);
    if (b.gap0 + b.axis.dot(rel) <= value(c, delta) + 1e-12) return false;
    c.axis = b.axis;
    c.gap0 = b.gap0;
    return true;
  }

  const std::vector<Candidate>& cands(const Constraint& c) {
    const PairKey key{c.a, c.pa, c.b, c.pb};
    auto it = cache_.find(key);
    if (it == cache_.end())
      it = cache_.emplace(key, candidates(bodies_[c.a].pieces[c.pa], bodies_[c.b].pieces[c.pb])).first;
    return it->second;
  }

  // Worst remaining pair at the given displacement, for error reports.
  std::tuple<std::string, std::string, double> worst(const std::vector<Vec3>& delta) const {
    std::tuple<std::string, std::string, double> w{"", "", kInf};
    for_each_close_pair(delta, [&](int i, int pi, int j, int pj, double d) {
      if (d < std::get<2>(w)) w = {bodies_[i].id, bodies_[j].id, d};
      (void)pi;
      (void)pj;
    });
    return w;
  }

  const std::vector<PBody>& bodies() const { return bodies_; }

  Vec3 shift(int body, const std::vector<Vec3>& delta) const {
    const int v = bodies_[body].var;
    return v < 0 ? Vec3::Zero() : delta[v];
  }

  double value(const Constraint& c, const std::vector<Vec3>& delta) const {
    return c.gap0 + c.axis.dot(shift(c.b, delta) - shift(c.a, delta));
  }

  // Dual coordinate ascent: each sweep projects onto one violated or loaded
  // pair at a time, splitting the correction over its movable members.
  bool solve(std::vector<Constraint>& active, std::vector<Vec3>& delta, int sweeps = 0) const {
    const double target = cfg_.epsilon + 1e-9;
    if (sweeps <= 0) sweeps = cfg_.max_sweeps;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
      double moved = 0.0;
      for (auto& c : active) {
        const int va = bodies_[c.a].var;
        const int vb = bodies_[c.b].var;
        const double w = (va >= 0 ? 1.0 : 0.0) + (vb >= 0 ? 1.0 : 0.0);
        const double r = (target - value(c, delta)) / w;
        const double step = std::max(-c.lambda, r);
        if (step == 0.0) continue;
        c.lambda += step;
        if (va >= 0) delta[va] -= step * c.axis;
        if (vb >= 0) delta[vb] += step * c.axis;
        moved = std::max(moved, std::abs(step));
      }
      if (moved <= cfg_.tolerance) break;
    }
    for (const auto& c : active)
      if (value(c, delta) < cfg_.epsilon - 1e-9) return false;
    return true;
  }

  template <class F>
  void for_each_close_pair(const std::vector<Vec3>& delta, F&& f) const {
    const double reach = cfg_.epsilon + 1e-9;
    for (std::size_t i = 0; i < bodies_.size(); ++i) {
      for (std::size_t j = i + 1; j < bodies_.size(); ++j) {
        const auto& bi = bodies_[i];
        const auto& bj = bodies_[j];
        if (bi.var < 0 && bj.var < 0) continue;
        // Architecture only constrains movable objects of its own room.
        if (bi.architecture && bi.room != bj.room) continue;
        if (bj.architecture && bj.room != bi.room) continue;
        const Vec3 si = shift(static_cast<int>(i), delta);
        const Vec3 sj = shift(static_cast<int>(j), delta);
        Aabb3 ai{bi.bounds.min + si, bi.bounds.max + si};
        Aabb3 aj{bj.bounds.min + sj, bj.bounds.max + sj};
        if (!ai.overlaps(aj, reach)) continue;
        for (std::size_t pi = 0; pi < bi.pieces.size(); ++pi) {
          WorldPiece wa = bi.pieces[pi];
          wa.translate(si);
          for (std::size_t pj = 0; pj < bj.pieces.size(); ++pj) {
            const auto& raw = bj.pieces[pj];
            Aabb3 bb{raw.bounds.min + sj, raw.bounds.max + sj};
            if (!wa.bounds.overlaps(bb, reach)) continue;
            WorldPiece wb = raw;
            wb.translate(sj);
            const double d = geom::signed_distance(wa, wb).distance;
            f(static_cast<int>(i), static_cast<int>(pi), static_cast<int>(j), static_cast<int>(pj), d);
          }
        }
      }
    }
  }

 private:
  std::vector<PBody> bodies_;
  int nvars_;
  ProjectionConfig cfg_;
  std::map<PairKey, std::vector<Candidate>> cache_;
};

// Exhaustive search over the separating axis of every constrained pair, with
// the QP value of a partial assignment as the pruning bound. Pairs that become
// violated at a leaf join the set and the search repeats. Returns false when
// the assignment space exceeds the budget.
bool exact_search(Solver& solver, std::vector<Constraint>& active, std::vector<Vec3>& delta, double& best_cost,
                  const ProjectionConfig& cfg) {
  for (int round = 0; round < cfg.max_iterations; ++round) {
    double space = 1.0;
    for (const auto& c : active) space *= static_cast<double>(solver.cands(c).size());
    if (space > cfg.search_budget) return false;

    std::vector<Constraint> rows = active;
    std::vector<Constraint> best_rows = active;
    std::vector<Vec3> best_delta = delta;
    std::vector<Constraint> pending;
    std::set<PairKey> pending_keys;
    std::vector<Vec3> scratch;
    auto dfs = [&](auto&& self, std::size_t k) -> void {
      if (k == rows.size()) {
        std::vector<Constraint> leaf = rows;
        const double c = solver.fresh_cost(leaf, scratch);
        if (!(c < best_cost - 1e-12 * (1.0 + best_cost))) return;
        auto extra = solver.violated(leaf, scratch);
        if (!extra.empty()) {
          for (auto& e : extra)
            if (pending_keys.insert({e.a, e.pa, e.b, e.pb}).second) pending.push_back(e);
          return;
        }
        best_cost = c;
        best_rows = std::move(leaf);
        best_delta = scratch;
        return;
      }
      for (const auto& cand : solver.cands(rows[k])) {
        rows[k].axis = cand.axis;
        rows[k].gap0 = cand.gap0;
        std::vector<Constraint> prefix(rows.begin(), rows.begin() + static_cast<long>(k) + 1);
        if (solver.fresh_cost(prefix, scratch) < best_cost - 1e-12 * (1.0 + best_cost)) self(self, k + 1);
      }
    };
    dfs(dfs, 0);
    active = std::move(best_rows);
    delta = std::move(best_delta);
    if (pending.empty()) return true;
    for (auto& e : pending) active.push_back(e);
    int iters = 0;
    if (!solver.run(active, delta, iters)) return true;  // keep the last feasible answer
    best_cost = solver.cost(delta);
  }
  return true;
}

// Local search for larger clusters: move each loaded pair to the axis of
// largest gap at the current solution, then try the next-best initial axes
// one pair at a time; keep any change that lowers the cost.
void greedy_search(Solver& solver, std::vector<Constraint>& active, std::vector<Vec3>& delta, double& best_cost,
                   const ProjectionConfig& cfg) {
  auto accept = [&](std::vector<Constraint>& trial) {
    std::vector<Vec3> d;
    int iters = 0;
    if (!solver.run(trial, d, iters)) return false;
    const double c = solver.cost(d);
    if (!(c < best_cost - 1e-12 * (1.0 + best_cost))) return false;
    best_cost = c;
    active = std::move(trial);
    delta = std::move(d);
    return true;
  };
  for (int round = 0; round < 8; ++round) {
    bool improved = false;
    auto aligned = active;
    bool moved = false;
    for (auto& c : aligned) moved = solver.realign(c, delta) || moved;
    if (moved && accept(aligned)) improved = true;
    for (std::size_t k = 0; k < active.size() && static_cast<int>(active.size()) <= cfg.refine_limit; ++k) {
      int tried = 0;
      const auto options = solver.cands(active[k]);
      for (const auto& alt : options) {
        if (tried++ >= cfg.axis_alternatives) break;
        if ((alt.axis - active[k].axis).norm() < 1e-12) continue;
        auto trial = active;
        trial[k].axis = alt.axis;
        trial[k].gap0 = alt.gap0;
        if (accept(trial)) improved = true;
      }
    }
    if (!improved) break;
  }
}

int room_index(const Scene& scene, const Vec3& p) {
  const auto* r = scene.room_containing(p);
  if (!r) return -1;
  for (std::size_t i = 0; i < scene.rooms.size(); ++i)
    if (&scene.rooms[i] == r) return static_cast<int>(i);
  return -1;
}

void clear_support_if_lifted(scene::ObjectInstance& obj, const scene::Scene& scene) {
  if (!obj.support) return;
  try {
    const auto surf = scene::find_surface(scene, obj.support->surface_id);
    const auto local = scene::unlift_pose(obj.pose, surf);
    const auto back = scene::lift_pose(local, surf);
    if ((back.translation - obj.pose.translation).norm() <= 1e-6 &&
        geom::rotation_angle_between(back.rotation, obj.pose.rotation) <= 1e-6) {
      obj.support->local = local;
      return;
    }
  } catch (const Error&) {
  }
  obj.support.reset();
}

}  // namespace

ProjectionResult project_nonpenetration(const Scene& scene, const std::vector<std::string>& movable,
                                        const ProjectionConfig& cfg) {
  cfg.validate();
  std::set<std::string> moving;
  for (const auto& id : movable) {
    const auto& obj = scene.object(id);
    if (obj.welded) throw Error(ErrorCode::kSpec, "object '" + id + "' is welded and cannot move", {{"id", id}});
    moving.insert(id);
  }

  std::vector<PBody> bodies;
  std::vector<std::string> var_ids;
  std::set<int> rooms_used;
  for (const auto& [id, obj] : scene.objects) {
    auto pieces = scene::world_pieces(scene, obj);
    if (pieces.empty()) continue;
    PBody b;
    b.id = id;
    b.pieces = std::move(pieces);
    for (const auto& p : b.pieces) b.bounds.extend(p.bounds);
    if (moving.count(id)) {
      b.var = static_cast<int>(var_ids.size());
      var_ids.push_back(id);
      b.room = room_index(scene, obj.pose.translation);
      if (b.room >= 0) rooms_used.insert(b.room);
    }
    bodies.push_back(std::move(b));
  }
  for (int r : rooms_used) {
    std::map<std::string, std::vector<WorldPiece>> parts;
    for (const auto& part : scene::room_static_parts(scene.rooms[r]))
      parts[part.id].push_back(WorldPiece::from(part.piece, geom::Pose3()));
    for (auto& [pid, pieces] : parts) {
      PBody b;
      b.id = pid;
      b.pieces = std::move(pieces);
      for (const auto& p : b.pieces) b.bounds.extend(p.bounds);
      b.room = r;
      b.architecture = true;
      bodies.push_back(std::move(b));
    }
  }

  Solver solver(std::move(bodies), static_cast<int>(var_ids.size()), cfg);
  std::vector<Constraint> active;
  std::vector<Vec3> delta;
  int iterations = 0;
  if (!solver.run(active, delta, iterations)) {
    const auto [a, b, d] = solver.worst(delta);
    throw Error(ErrorCode::kProjectionFailed, "projection did not reach a separated configuration",
                {{"a", a}, {"b", b}, {"distance", d}, {"epsilon", cfg.epsilon}});
  }
  double cost = solver.cost(delta);
  if (!active.empty() && !exact_search(solver, active, delta, cost, cfg))
    greedy_search(solver, active, delta, cost, cfg);

  ProjectionResult out;
  out.scene = scene;
  out.iterations = iterations;
  out.total_displacement = cost;
  for (std::size_t v = 0; v < var_ids.size(); ++v) {
    const auto& id = var_ids[v];
    out.displacement[id] = delta[v];
    if (delta[v] == Vec3::Zero()) continue;
    auto& obj = out.scene.object(id);
    obj.pose.translation += delta[v];
  }
  for (std::size_t v = 0; v < var_ids.size(); ++v)
    if (delta[v] != Vec3::Zero()) clear_support_if_lifted(out.scene.object(var_ids[v]), out.scene);
  const auto& pb = solver.bodies();
  for (const auto& c : active) {
    if (c.lambda <= 0.0) continue;
    out.active.push_back({pb[c.a].id, pb[c.b].id, c.pa, c.pb, c.axis, c.lambda});
  }
  return out;
}

// ---- stages ------------------------------------------------------------------

Stage stage_from_string(const std::string& s) {
  if (s == "post_furniture") return Stage::post_furniture();
  if (s == "post_manipulands") return Stage::post_manipulands();
  const std::string prefix = "per_entity:";
  if (s.rfind(prefix, 0) == 0 && s.size() > prefix.size()) return Stage::per_entity(s.substr(prefix.size()));
  throw Error(ErrorCode::kSpec, "stage must be post_furniture, per_entity:<id> or post_manipulands, got '" + s + "'");
}

std::string to_string(const Stage& s) {
  switch (s.kind) {
    case StageKind::kPostFurniture: return "post_furniture";
    case StageKind::kPerEntity: return "per_entity:" + s.entity;
    default: return "post_manipulands";
  }
}

StageSets stage_sets(const Scene& scene, const Stage& stage) {
  StageSets sets;
  if (stage.kind == StageKind::kPerEntity) {
    const auto& entity = scene.object(stage.entity);
    if (scene.asset(entity.asset_id).has_collision()) sets.fixed.push_back(stage.entity);
    for (const auto& [id, obj] : scene.objects) {
      const auto& a = scene.asset(obj.asset_id);
      if (id == stage.entity || a.category != Category::kManipuland || !a.has_collision()) continue;
      if (scene::supporting_entity(scene, id) != stage.entity) continue;
      (obj.welded ? sets.fixed : sets.movable).push_back(id);
    }
    return sets;
  }
  for (const auto& [id, obj] : scene.objects) {
    const auto& a = scene.asset(obj.asset_id);
    if (!a.has_collision()) continue;
    bool moves = !obj.welded && (a.category == Category::kManipuland ||
                                 (a.category == Category::kFurniture && stage.kind == StageKind::kPostFurniture));
    (moves ? sets.movable : sets.fixed).push_back(id);
  }
  return sets;
}

sim::SettleReport settle_scene(const Scene& scene, const std::vector<std::string>& dynamic,
                               const std::vector<std::string>& welded, const sim::SimConfig& cfg) {
  std::map<int, std::vector<sim::SimBody>> groups;
  std::map<int, bool> any_dynamic;
  auto add = [&](const std::string& id, bool weld) {
    const auto& obj = scene.object(id);
    const auto& a = scene.asset(obj.asset_id);
    if (!a.has_collision()) return;
    sim::SimBody b;
    b.id = id;
    b.asset = a;
    b.pose = obj.pose;
    b.welded = weld || obj.welded;
    const int r = room_index(scene, obj.pose.translation);
    groups[r].push_back(std::move(b));
    if (!weld && !obj.welded) any_dynamic[r] = true;
  };
  for (const auto& id : dynamic) add(id, false);
  for (const auto& id : welded) add(id, true);

  sim::SettleReport merged;
  merged.at_rest = true;
  for (auto& [r, bodies] : groups) {
    std::sort(bodies.begin(), bodies.end(), [](const sim::SimBody& x, const sim::SimBody& y) { return x.id < y.id; });
    if (!any_dynamic[r]) {
      for (const auto& b : bodies) merged.bodies.push_back({b.id, b.pose, b.pose, 0.0, 0.0, false, true});
      continue;
    }
    std::vector<geom::ConvexPiece> env;
    if (r >= 0) env = scene::room_static_pieces(scene.rooms[r]);
    auto rep = sim::settle(bodies, env, cfg);
    merged.simulated_time = std::max(merged.simulated_time, rep.simulated_time);
    merged.steps = std::max(merged.steps, rep.steps);
    merged.at_rest = merged.at_rest && rep.at_rest;
    for (auto& b : rep.bodies) merged.bodies.push_back(std::move(b));
  }
  std::sort(merged.bodies.begin(), merged.bodies.end(),
            [](const sim::BodyResult& x, const sim::BodyResult& y) { return x.id < y.id; });
  return merged;
}

void apply_settle(Scene& scene, const sim::SettleReport& report) {
  for (const auto& b : report.bodies) {
    if (b.welded || !scene.has_object(b.id)) continue;
    auto& obj = scene.object(b.id);
    if (b.final == obj.pose) continue;
    obj.pose = b.final;
    obj.support.reset();
  }
}

FeasibilityReport enforce_feasibility(const Scene& scene, const Stage& stage, const FeasibilityConfig& cfg) {
  const StageSets sets = stage_sets(scene, stage);
  Scene work = scene;
  if (stage.kind == StageKind::kPerEntity) {
    std::set<std::string> keep(sets.movable.begin(), sets.movable.end());
    keep.insert(sets.fixed.begin(), sets.fixed.end());
    std::erase_if(work.objects, [&](const auto& kv) { return !keep.count(kv.first); });
  }
  auto proj = project_nonpenetration(work, sets.movable, cfg.projection);
  auto settle = settle_scene(proj.scene, sets.movable, sets.fixed, cfg.sim);

  FeasibilityReport out;
  out.scene = scene;
  for (const auto& id : sets.movable) out.scene.object(id) = proj.scene.object(id);
  apply_settle(out.scene, settle);
  out.movable = sets.movable;
  out.welded = sets.fixed;
  out.projection_displacement = proj.total_displacement;
  out.projection_moves = std::move(proj.displacement);
  out.settle = std::move(settle);
  return out;
}

// ---- fallen objects ----------------------------------------------------------

FallenResult remove_fallen(const Scene& scene, const sim::SettleReport& report, const FallenConfig& cfg) {
  FallenResult out;
  out.scene = scene;
  for (const auto& b : report.bodies) {
    if (b.welded || !scene.has_object(b.id)) continue;
    const auto& a = scene.asset_of(b.id);
    if (a.category == Category::kFurniture) {
      const Vec3 up = b.final.rotation * Vec3::UnitZ();
      const double tilt = std::acos(std::clamp(up.z(), -1.0, 1.0));
      if (tilt > cfg.tilt_threshold) out.removed.push_back({b.id, "tilt"});
    } else if (a.category == Category::kManipuland && a.has_collision()) {
      auto lowest = [&](const geom::Pose3& pose) {
        double lo = kInf;
        for (const auto& p : a.collision_pieces)
          for (const auto& v : p.vertices()) lo = std::min(lo, pose.apply(v).z());
        return lo;
      };
      const double start = lowest(b.initial);
      const double end = lowest(b.final);
      if (end < cfg.floor_z - cfg.floor_penetration) {
        out.removed.push_back({b.id, "floor_penetration"});
      } else if (start >= cfg.floor_z + cfg.near_floor && end < cfg.floor_z + cfg.near_floor &&
                 b.initial.translation.z() - b.final.translation.z() > cfg.drop) {
        out.removed.push_back({b.id, "fell_from_support"});
      }
    }
  }
  std::set<std::string> gone;
  for (const auto& r : out.removed) {
    out.scene.objects.erase(r.id);
    gone.insert(r.id);
  }
  for (auto& [id, obj] : out.scene.objects)
    if (obj.support && gone.count(scene::surface_owner(obj.support->surface_id))) obj.support.reset();
  return out;
}

// ---- reports -----------------------------------------------------------------

namespace {
nlohmann::json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
}  // namespace

nlohmann::json to_json(const ProjectionResult& r) {
  nlohmann::json moves = nlohmann::json::object();
  for (const auto& [id, d] : r.displacement) moves[id] = vec_json(d);
  nlohmann::json active = nlohmann::json::array();
  for (const auto& a : r.active)
    active.push_back({{"a", a.a}, {"b", a.b}, {"piece_a", a.piece_a}, {"piece_b", a.piece_b},
                      {"axis", vec_json(a.axis)}, {"multiplier", a.multiplier}});
  return {{"total_displacement", r.total_displacement}, {"displacement", moves}, {"active", active},
          {"iterations", r.iterations}};
}

nlohmann::json to_json(const FeasibilityReport& r) {
  nlohmann::json moves = nlohmann::json::object();
  for (const auto& [id, d] : r.projection_moves) moves[id] = vec_json(d);
  return {{"movable", r.movable},
          {"welded", r.welded},
          {"projection", {{"total_displacement", r.projection_displacement}, {"displacement", moves}}},
          {"settle", sim::to_json(r.settle)}};
}

nlohmann::json to_json(const FallenResult& r) {
  nlohmann::json removed = nlohmann::json::array();
  for (const auto& x : r.removed) removed.push_back({{"id", x.id}, {"reason", x.reason}});
  return {{"removed", removed}};
}

}  // namespace scenecraft::feasibility
