#include "scenecraft/script/driver.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>

#include "scenecraft/error.hpp"
#include "scenecraft/feasibility/feasibility.hpp"
#include "scenecraft/layout/layout.hpp"
#include "scenecraft/layout/openings.hpp"
#include "scenecraft/metrics/metrics.hpp"
#include "scenecraft/scene/serialize.hpp"
#include "scenecraft/scene/surface.hpp"
#include "scenecraft/sim/composite.hpp"
#include "scenecraft/stochastic/noise.hpp"
#include "scenecraft/tools/placement.hpp"

namespace scenecraft::script {

using geom::Pose2;
using geom::Pose3;
using geom::Vec2;
using geom::Vec3;
using scene::Category;

namespace {

// ---- argument schema -------------------------------------------------------

enum class T { kString, kNumber, kInteger, kBool, kObject, kArray, kStrings, kNumbers };

struct Field {
  const char* name;
  T type;
  bool required = false;
};

using Extra = std::function<void(const json&, const std::string&)>;
using Run = std::function<json(Scene&, const json&, Rng&, const OpContext&)>;

struct OpSpec {
  std::vector<Field> fields;
  Run run;
  Extra extra;
};

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kSchema, path + ": " + what, {{"path", path}});
}

bool type_ok(const json& v, T t) {
  switch (t) {
    case T::kString: return v.is_string();
    case T::kNumber: return v.is_number();
    case T::kInteger: return v.is_number_integer();
    case T::kBool: return v.is_boolean();
    case T::kObject: return v.is_object();
    case T::kArray: return v.is_array();
    case T::kStrings:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); });
    case T::kNumbers:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
  }
  return false;
}

const char* type_name(T t) {
  switch (t) {
    case T::kString: return "a string";
    case T::kNumber: return "a number";
    case T::kInteger: return "an integer";
    case T::kBool: return "a boolean";
    case T::kObject: return "an object";
    case T::kArray: return "an array";
    case T::kStrings: return "an array of strings";
    case T::kNumbers: return "an array of numbers";
  }
  return "?";
}

void check_fields(const json& args, const std::vector<Field>& fields, const std::string& path) {
  if (!args.is_object()) schema_error(path, "must be an object");
  for (const auto& f : fields) {
    const auto it = args.find(f.name);
    if (it == args.end()) {
      if (f.required) schema_error(path + "." + f.name, "missing required field");
      continue;
    }
    if (!type_ok(*it, f.type)) schema_error(path + "." + f.name, std::string("must be ") + type_name(f.type));
  }
  for (auto it = args.begin(); it != args.end(); ++it) {
    const bool known = std::any_of(fields.begin(), fields.end(), [&](const Field& f) { return it.key() == f.name; });
    if (!known) schema_error(path + "." + it.key(), "unknown field");
  }
}

void one_of(const json& args, const char* key, std::initializer_list<const char*> values, const std::string& path) {
  if (!args.contains(key)) return;
  const auto v = args.at(key).get<std::string>();
  if (std::none_of(values.begin(), values.end(), [&](const char* s) { return v == s; }))
    schema_error(path + "." + key, "unexpected value \"" + v + "\"");
}

void vec_size(const json& args, const char* key, std::size_t n, const std::string& path) {
  if (args.contains(key) && args.at(key).size() != n)
    schema_error(path + "." + key, "must have " + std::to_string(n) + " entries");
}

double num(const json& a, const char* key, double dflt) { return a.contains(key) ? a.at(key).get<double>() : dflt; }
std::string str(const json& a, const char* key, const std::string& dflt = {}) {
  return a.contains(key) ? a.at(key).get<std::string>() : dflt;
}
bool flag(const json& a, const char* key, bool dflt = false) { return a.contains(key) ? a.at(key).get<bool>() : dflt; }
Vec3 vec3(const json& a) { return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>()); }
Vec2 vec2(const json& a) { return Vec2(a[0].get<double>(), a[1].get<double>()); }

Pose2 local_pose(const json& a) { return Pose2(num(a, "x", 0.0), num(a, "y", 0.0), num(a, "theta_deg", 0.0)); }

// ---- op bodies ---------------------------------------------------------------

const std::vector<Field> kRoomFields{{"name", T::kString, true},       {"room_type", T::kString},
                                     {"width", T::kNumber, true},      {"length", T::kNumber, true},
                                     {"adjacent", T::kStrings},        {"prompt", T::kString}};

json layout_solve(Scene& scene, const json& a, Rng&, const OpContext&) {
  std::vector<layout::RoomSpec> specs;
  for (const auto& r : a.at("rooms")) {
    layout::RoomSpec s;
    s.name = r.at("name").get<std::string>();
    s.room_type = str(r, "room_type", s.name);
    s.width = r.at("width").get<double>();
    s.length = r.at("length").get<double>();
    if (r.contains("adjacent")) s.required_adjacent = r.at("adjacent").get<std::vector<std::string>>();
    s.prompt = str(r, "prompt");
    specs.push_back(std::move(s));
  }
  layout::SolveOptions opts;
  if (a.contains("node_budget")) opts.node_budget = a.at("node_budget").get<std::uint64_t>();
  if (a.contains("timeout")) opts.timeout_seconds = a.at("timeout").get<double>();
  const auto res = layout::solve_layout(specs, opts);
  scene.rooms = layout::plan_to_rooms(res.plan, num(a, "wall_height", 2.5), num(a, "wall_thickness", 0.1));
  json rooms = json::array();
  for (const auto& p : res.plan.rooms)
    rooms.push_back({{"name", p.spec.name}, {"origin", {p.origin.x(), p.origin.y()}}, {"rotated90", p.rotated90}});
  return {{"score", {{"compactness", res.score.compactness}, {"total", res.score.total}}},
          {"nodes", res.nodes},
          {"exhausted", res.exhausted},
          {"order", res.order},
          {"adjacencies", res.plan.adjacencies},
          {"rooms", rooms}};
}

json layout_opening(Scene& scene, const json& a, Rng& rng, const OpContext&) {
  layout::OpeningRequest req;
  req.id = a.at("id").get<std::string>();
  req.kind = str(a, "kind", "door") == "window" ? scene::OpeningKind::kWindow : scene::OpeningKind::kDoor;
  req.wall_segment_id = a.at("wall").get<std::string>();
  req.coarse = layout::coarse_from_string(str(a, "coarse", "center"));
  req.width = num(a, "width", req.kind == scene::OpeningKind::kWindow ? 1.0 : 0.9);
  req.height = num(a, "height", req.kind == scene::OpeningKind::kWindow ? 1.2 : 2.1);
  if (a.contains("sill")) req.sill = a.at("sill").get<double>();
  req.exterior = flag(a, "exterior");
  auto& room = scene.room(a.at("room").get<std::string>());
  room = layout::add_opening(room, req, rng);
  const auto& list = req.kind == scene::OpeningKind::kWindow ? room.windows : room.doors;
  for (const auto& o : list)
    if (o.id == req.id) return {{"id", o.id}, {"offset_x", o.offset_x}, {"wall", o.wall_segment_id}};
  return {{"id", req.id}};
}

json layout_open_connection(Scene& scene, const json& a, Rng&, const OpContext&) {
  auto& room = scene.room(a.at("room").get<std::string>());
  const auto wall = a.at("wall").get<std::string>();
  scene::wall_index(room, wall);
  room.open_connections.insert(wall);
  return {{"room", room.id}, {"wall", wall}};
}

json layout_validate(Scene& scene, const json&, Rng&, const OpContext&) {
  const auto r = layout::validate_connectivity(scene.rooms);
  json out{{"ok", r.ok}, {"errors", r.errors}, {"unreachable", r.unreachable}};
  if (!r.ok) throw Error(ErrorCode::kInfeasible, "room connectivity check failed", out);
  return out;
}

const std::map<std::string, std::vector<Field>>& primitive_fields() {
  static const std::map<std::string, std::vector<Field>> m{
      {"box", {{"category", T::kString, true}, {"size", T::kNumbers, true}, {"mass", T::kNumber, true}}},
      {"cylinder",
       {{"category", T::kString, true}, {"radius", T::kNumber, true}, {"height", T::kNumber, true},
        {"mass", T::kNumber, true}, {"segments", T::kInteger}}},
      {"sphere", {{"radius", T::kNumber, true}, {"mass", T::kNumber, true}}},
      {"table",
       {{"top_size", T::kNumbers, true}, {"height", T::kNumber, true}, {"top_thickness", T::kNumber, true},
        {"leg_width", T::kNumber, true}, {"mass", T::kNumber, true}}},
      {"shelf",
       {{"category", T::kString, true}, {"size", T::kNumbers, true}, {"shelf_heights", T::kNumbers, true},
        {"board_thickness", T::kNumber, true}, {"mass", T::kNumber, true}}},
      {"tray", {{"size", T::kNumbers, true}, {"wall_thickness", T::kNumber, true}, {"mass", T::kNumber, true}}},
      {"bowl",
       {{"radius", T::kNumber, true}, {"height", T::kNumber, true}, {"wall_thickness", T::kNumber, true},
        {"sides", T::kInteger, true}, {"mass", T::kNumber, true}}},
      {"thin_covering", {{"size", T::kNumbers, true}, {"thickness", T::kNumber}}},
  };
  return m;
}

void check_asset_args(const json& a, const std::string& path) {
  if (a.contains("asset") == a.contains("primitive")) schema_error(path, "needs exactly one of asset, primitive");
  if (a.contains("asset")) {
    if (a.contains("id") || a.contains("params")) schema_error(path, "id/params only go with primitive");
    return;
  }
  if (!a.contains("id")) schema_error(path + ".id", "missing required field");
  const auto kind = a.at("primitive").get<std::string>();
  const auto& table = primitive_fields();
  const auto it = table.find(kind);
  if (it == table.end()) schema_error(path + ".primitive", "unknown primitive \"" + kind + "\"");
  const json params = a.value("params", json::object());
  check_fields(params, it->second, path + ".params");
  vec_size(params, "size", kind == "thin_covering" ? 2 : 3, path + ".params");
  vec_size(params, "top_size", 2, path + ".params");
  if (params.contains("category")) {
    try {
      scene::category_from_string(params.at("category").get<std::string>());
    } catch (const Error&) {
      schema_error(path + ".params.category", "unknown category");
    }
  }
}

scene::Asset build_primitive(const std::string& kind, const std::string& id, const json& p) {
  namespace prim = scene::primitives;
  auto cat = [&] { return scene::category_from_string(p.at("category").get<std::string>()); };
  const double mass = num(p, "mass", 1.0);
  if (kind == "box") return prim::box(id, cat(), vec3(p.at("size")), mass);
  if (kind == "cylinder")
    return prim::cylinder(id, cat(), p.at("radius").get<double>(), p.at("height").get<double>(), mass,
                          p.value("segments", 24));
  if (kind == "sphere") return prim::sphere(id, p.at("radius").get<double>(), mass);
  if (kind == "table")
    return prim::table(id, vec2(p.at("top_size")), p.at("height").get<double>(), p.at("top_thickness").get<double>(),
                       p.at("leg_width").get<double>(), mass);
  if (kind == "shelf")
    return prim::shelf(id, cat(), vec3(p.at("size")), p.at("shelf_heights").get<std::vector<double>>(),
                       p.at("board_thickness").get<double>(), mass);
  if (kind == "tray") return prim::tray(id, vec3(p.at("size")), p.at("wall_thickness").get<double>(), mass);
  if (kind == "bowl")
    return prim::bowl(id, p.at("radius").get<double>(), p.at("height").get<double>(),
                      p.at("wall_thickness").get<double>(), p.at("sides").get<int>(), mass);
  return prim::thin_covering(id, vec2(p.at("size")), num(p, "thickness", 0.01));
}

json asset_add(Scene& scene, const json& a, Rng&, const OpContext&) {
  scene::Asset asset = a.contains("asset")
                           ? scene::asset_from_json(a.at("asset"), "args.asset")
                           : build_primitive(a.at("primitive").get<std::string>(), a.at("id").get<std::string>(),
                                             a.value("params", json::object()));
  const auto id = asset.id;
  if (scene.assets.count(id)) throw Error(ErrorCode::kPlacement, "asset id already in use: " + id, {{"id", id}});
  scene.add_asset(std::move(asset));
  return {{"id", id}};
}

stochastic::Style resolve_style(const std::string& style, const std::string& prompt) {
  return style == "auto" ? stochastic::select_style(prompt) : stochastic::style_from_string(style);
}

// Pose noise for a placement; thin coverings have no table row and stay exact.
Pose2 noisy(const Pose2& p, Category cat, const json& a, Rng& rng, const OpContext& ctx) {
  const auto style = str(a, "style", ctx.style);
  if (style == "none" || cat == Category::kThinCovering) return p;
  return stochastic::apply_noise(p, cat, resolve_style(style, str(a, "prompt", ctx.prompt)), rng);
}

json object_add(Scene& scene, const json& a, Rng& rng, const OpContext& ctx) {
  const auto asset_id = a.at("asset").get<std::string>();
  const auto& asset = scene.asset(asset_id);
  scene::ObjectInstance o;
  o.asset_id = asset_id;
  o.welded = flag(a, "welded");
  const Pose2 p = noisy(local_pose(a), asset.category, a, rng, ctx);
  if (a.contains("surface")) {
    const auto surf = scene::find_surface(scene, a.at("surface").get<std::string>());
    o.pose = scene::lift_pose(p, surf);
    o.support = scene::SupportRef{surf.id, p};
  } else {
    o.pose = Pose3::from_yaw(Vec3(p.x, p.y, num(a, "z", 0.0)), p.theta_deg);
  }
  const auto id = scene.add_object(str(a, "name", asset_id), o);
  return {{"id", id}, {"pose", scene::pose3_to_json(o.pose)}, {"local", scene::pose2_to_json(p)}};
}

json object_remove(Scene& scene, const json& a, Rng&, const OpContext&) {
  const auto id = a.at("id").get<std::string>();
  scene.object(id);
  scene.objects.erase(id);
  std::vector<std::string> released;
  for (auto& [oid, o] : scene.objects) {
    if (o.support && scene::surface_owner(o.support->surface_id) == id) {
      o.support.reset();
      released.push_back(oid);
    }
  }
  return {{"id", id}, {"released", released}};
}

json object_move(Scene& scene, const json& a, Rng& rng, const OpContext& ctx) {
  auto& o = scene.object(a.at("id").get<std::string>());
  const Pose2 p = noisy(local_pose(a), scene.asset(o.asset_id).category, a, rng, ctx);
  o.pose = Pose3::from_yaw(Vec3(p.x, p.y, num(a, "z", o.pose.translation.z())), p.theta_deg);
  o.support.reset();
  return {{"id", a.at("id")}, {"pose", scene::pose3_to_json(o.pose)}};
}

json tool_facing(Scene& scene, const json& a, Rng&, const OpContext&) {
  const auto src = a.at("source").get<std::string>();
  const auto r = tools::check_facing(scene, src, a.at("target").get<std::string>());
  if (flag(a, "apply")) {
    auto& o = scene.object(src);
    o.pose = Pose3::from_yaw(o.pose.translation, r.optimal_theta);
    o.support.reset();
  }
  return tools::to_json(r);
}

json tool_snap(Scene& scene, const json& a, Rng&, const OpContext&) {
  const auto src = a.at("source").get<std::string>();
  tools::SnapConfig cfg;
  cfg.max_travel = num(a, "max_travel", cfg.max_travel);
  auto r = tools::snap_to_object(scene, src, a.at("target").get<std::string>(),
                                 tools::snap_mode_from_string(str(a, "mode", "toward")), cfg);
  scene = std::move(r.scene);
  return {{"id", src},
          {"pose", scene::pose3_to_json(r.pose)},
          {"pushed_out", r.pushed_out},
          {"travel", r.travel},
          {"final_distance", r.final_distance}};
}

json tool_reach(Scene& scene, const json& a, Rng&, const OpContext&) {
  const auto r = tools::check_reachability(scene, a.at("room").get<std::string>(), num(a, "hr", 0.35));
  json out = tools::to_json(r);
  if (flag(a, "require") && !r.fully_reachable) throw Error(ErrorCode::kPlacement, "room not fully reachable", out);
  return out;
}

json tool_physics(Scene& scene, const json& a, Rng&, const OpContext&) {
  std::optional<std::string> context;
  if (a.contains("context")) context = a.at("context").get<std::string>();
  const auto r = tools::check_physics(scene, tools::stage_from_string(a.at("stage").get<std::string>()), context);
  json out = tools::to_json(r);
  if (flag(a, "require_clean") && !r.clean()) throw Error(ErrorCode::kCollision, "physics check not clean", out);
  return out;
}

std::vector<scene::Asset> assets_of(const Scene& scene, const json& ids) {
  std::vector<scene::Asset> out;
  for (const auto& id : ids) out.push_back(scene.asset(id.get<std::string>()));
  return out;
}

json committed(Scene& scene, const std::vector<sim::CompositeItem>& items) {
  const auto ids = sim::commit_composite(scene, items);
  json list = json::array();
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto j = sim::to_json(items[i]);
    j["id"] = ids[i];
    list.push_back(j);
  }
  return list;
}

json compose_stack(Scene& scene, const json& a, Rng&, const OpContext&) {
  const auto surf = scene::find_surface(scene, a.at("surface").get<std::string>());
  const auto r = sim::create_stack(assets_of(scene, a.at("items")), surf, local_pose(a),
                                   sim::composite_environment(scene, surf));
  if (!r.success)
    throw Error(ErrorCode::kPlacement, "stack rejected: an item fell",
                {{"stable_count", r.stable_count}, {"fallen", r.fallen}});
  return {{"items", committed(scene, r.items)}, {"height", r.height}, {"stable_count", r.stable_count}};
}

json compose_fill(Scene& scene, const json& a, Rng& rng, const OpContext&) {
  const auto surf = scene::find_surface(scene, a.at("surface").get<std::string>());
  const auto r = sim::fill_container(scene.asset(a.at("container").get<std::string>()),
                                     assets_of(scene, a.at("items")), surf, local_pose(a),
                                     sim::composite_environment(scene, surf), rng);
  std::vector<sim::CompositeItem> all{r.container};
  all.insert(all.end(), r.inside.begin(), r.inside.end());
  return {{"items", committed(scene, all)}, {"removed", r.removed}, {"iterations", r.iterations}};
}

void check_arrange_items(const json& a, const std::string& path) {
  if (!a.contains("items")) return;
  const std::vector<Field> f{{"asset", T::kString, true}, {"x", T::kNumber}, {"y", T::kNumber},
                             {"theta_deg", T::kNumber}};
  for (std::size_t i = 0; i < a.at("items").size(); ++i)
    check_fields(a.at("items")[i], f, path + ".items[" + std::to_string(i) + "]");
}

json compose_arrange(Scene& scene, const json& a, Rng&, const OpContext&) {
  const auto surf = scene::find_surface(scene, a.at("surface").get<std::string>());
  std::vector<sim::ArrangementItem> items;
  for (const auto& it : a.at("items")) items.push_back({scene.asset(it.at("asset").get<std::string>()), local_pose(it)});
  const auto r = sim::create_arrangement(scene.asset(a.at("container").get<std::string>()), items, surf,
                                         local_pose(a), sim::composite_environment(scene, surf));
  std::vector<sim::CompositeItem> all{r.container};
  all.insert(all.end(), r.items.begin(), r.items.end());
  return {{"items", committed(scene, all)}, {"bounds", sim::to_json(r.bounds)}};
}

json compose_pile(Scene& scene, const json& a, Rng& rng, const OpContext&) {
  const auto surf = scene::find_surface(scene, a.at("surface").get<std::string>());
  const auto r = sim::create_pile(assets_of(scene, a.at("items")), surf, local_pose(a),
                                  sim::composite_environment(scene, surf), rng);
  return {{"items", committed(scene, r.on)}, {"fallen", r.fallen}, {"spawn_radius", r.spawn_radius}};
}

void check_stage(const json& a, const std::string& path) {
  if (!a.contains("stage")) return;
  try {
    feasibility::stage_from_string(a.at("stage").get<std::string>());
  } catch (const Error&) {
    schema_error(path + ".stage", "unknown stage");
  }
}

feasibility::Stage stage_of(const json& a) {
  return feasibility::stage_from_string(str(a, "stage", "post_furniture"));
}

json feas_project(Scene& scene, const json& a, Rng&, const OpContext&) {
  const auto sets = feasibility::stage_sets(scene, stage_of(a));
  auto r = feasibility::project_nonpenetration(scene, sets.movable);
  scene = r.scene;
  return feasibility::to_json(r);
}

json feas_settle(Scene& scene, const json& a, Rng&, const OpContext&) {
  const auto sets = feasibility::stage_sets(scene, stage_of(a));
  const auto r = feasibility::settle_scene(scene, sets.movable, sets.fixed, sim::SimConfig{});
  feasibility::apply_settle(scene, r);
  return sim::to_json(r);
}

json feas_enforce(Scene& scene, const json& a, Rng&, const OpContext&) {
  auto r = feasibility::enforce_feasibility(scene, stage_of(a));
  json out = feasibility::to_json(r);
  scene = r.scene;
  if (flag(a, "remove_fallen")) {
    auto f = feasibility::remove_fallen(scene, r.settle);
    out["fallen"] = feasibility::to_json(f);
    scene = std::move(f.scene);
  }
  return out;
}

json metrics_report(Scene& scene, const json& a, Rng&, const OpContext&) {
  metrics::ReportConfig cfg;
  cfg.robot_half_width = num(a, "hr", cfg.robot_half_width);
  cfg.oob_samples = a.value("samples", cfg.oob_samples);
  cfg.seed = a.contains("seed") ? a.at("seed").get<std::uint64_t>() : scene.seed;
  const auto r = metrics::metrics_report(scene, cfg);
  json out = metrics::to_json(r);
  const auto check = [&](const char* key, double value, bool ok) {
    if (!ok) throw Error(ErrorCode::kPlacement, std::string("metric ") + key + " outside requested bound",
                         {{"metric", key}, {"value", value}, {"report", out}});
  };
  if (a.contains("max_col")) check("COL", r.col, r.col <= a.at("max_col").get<double>());
  if (a.contains("min_stb")) check("STB", r.stb, r.stb >= a.at("min_stb").get<double>());
  return out;
}

void check_style(const json& a, const std::string& path) { one_of(a, "style", {"none", "natural", "perfect", "auto"}, path); }

const std::vector<Field> kPose{{"x", T::kNumber}, {"y", T::kNumber}, {"theta_deg", T::kNumber}};

std::vector<Field> with_pose(std::vector<Field> f) {
  f.insert(f.end(), kPose.begin(), kPose.end());
  return f;
}

const std::map<std::string, OpSpec>& registry() {
  static const std::map<std::string, OpSpec> r{
      {"checkpoint", {{{"label", T::kString}}, nullptr, nullptr}},
      {"rollback", {{{"label", T::kString}}, nullptr, nullptr}},
      {"layout.solve",
       {{{"rooms", T::kArray, true},
         {"node_budget", T::kInteger},
         {"timeout", T::kNumber},
         {"wall_height", T::kNumber},
         {"wall_thickness", T::kNumber}},
        layout_solve,
        [](const json& a, const std::string& p) {
          for (std::size_t i = 0; i < a.at("rooms").size(); ++i)
            check_fields(a.at("rooms")[i], kRoomFields, p + ".rooms[" + std::to_string(i) + "]");
        }}},
      {"layout.opening",
       {{{"room", T::kString, true},
         {"id", T::kString, true},
         {"wall", T::kString, true},
         {"kind", T::kString},
         {"coarse", T::kString},
         {"width", T::kNumber},
         {"height", T::kNumber},
         {"sill", T::kNumber},
         {"exterior", T::kBool}},
        layout_opening,
        [](const json& a, const std::string& p) {
          one_of(a, "kind", {"door", "window"}, p);
          one_of(a, "coarse", {"left", "center", "right"}, p);
        }}},
      {"layout.open_connection", {{{"room", T::kString, true}, {"wall", T::kString, true}}, layout_open_connection, nullptr}},
      {"layout.validate", {{}, layout_validate, nullptr}},
      {"asset.add",
       {{{"asset", T::kObject}, {"primitive", T::kString}, {"id", T::kString}, {"params", T::kObject}},
        asset_add,
        check_asset_args}},
      {"object.add",
       {with_pose({{"asset", T::kString, true},
                   {"name", T::kString},
                   {"z", T::kNumber},
                   {"surface", T::kString},
                   {"welded", T::kBool},
                   {"style", T::kString},
                   {"prompt", T::kString}}),
        object_add,
        check_style}},
      {"object.remove", {{{"id", T::kString, true}}, object_remove, nullptr}},
      {"object.move",
       {with_pose({{"id", T::kString, true}, {"z", T::kNumber}, {"style", T::kString}, {"prompt", T::kString}}),
        object_move,
        check_style}},
      {"tool.facing",
       {{{"source", T::kString, true}, {"target", T::kString, true}, {"apply", T::kBool}}, tool_facing, nullptr}},
      {"tool.snap",
       {{{"source", T::kString, true}, {"target", T::kString, true}, {"mode", T::kString}, {"max_travel", T::kNumber}},
        tool_snap,
        [](const json& a, const std::string& p) { one_of(a, "mode", {"toward", "away", "none"}, p); }}},
      {"tool.reach", {{{"room", T::kString, true}, {"hr", T::kNumber}, {"require", T::kBool}}, tool_reach, nullptr}},
      {"tool.physics",
       {{{"stage", T::kString, true}, {"context", T::kString}, {"require_clean", T::kBool}},
        tool_physics,
        [](const json& a, const std::string& p) {
          one_of(a, "stage", {"furniture", "wall", "ceiling", "manipuland"}, p);
        }}},
      {"compose.stack",
       {with_pose({{"surface", T::kString, true}, {"items", T::kStrings, true}}), compose_stack, nullptr}},
      {"compose.fill",
       {with_pose({{"surface", T::kString, true}, {"container", T::kString, true}, {"items", T::kStrings, true}}),
        compose_fill,
        nullptr}},
      {"compose.arrange",
       {with_pose({{"surface", T::kString, true}, {"container", T::kString, true}, {"items", T::kArray, true}}),
        compose_arrange,
        check_arrange_items}},
      {"compose.pile",
       {with_pose({{"surface", T::kString, true}, {"items", T::kStrings, true}}), compose_pile, nullptr}},
      {"feasibility.project", {{{"stage", T::kString}}, feas_project, check_stage}},
      {"feasibility.settle", {{{"stage", T::kString}}, feas_settle, check_stage}},
      {"feasibility.enforce", {{{"stage", T::kString}, {"remove_fallen", T::kBool}}, feas_enforce, check_stage}},
      {"metrics.report",
       {{{"hr", T::kNumber},
         {"samples", T::kInteger},
         {"seed", T::kInteger},
         {"max_col", T::kNumber},
         {"min_stb", T::kNumber}},
        metrics_report,
        nullptr}},
  };
  return r;
}

const OpSpec& spec_of(const std::string& op, const std::string& path) {
  const auto& r = registry();
  const auto it = r.find(op);
  if (it == r.end()) schema_error(path, "unknown operation \"" + op + "\"");
  return it->second;
}

json error_json(const Error& e) {
  return {{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"details", e.details()}};
}

}  // namespace

std::vector<std::string> op_names() {
  std::vector<std::string> out;
  for (const auto& [name, spec] : registry()) out.push_back(name);
  return out;
}

void validate_args(const std::string& op, const json& args, const std::string& path) {
  const auto& spec = spec_of(op, path);
  check_fields(args, spec.fields, path);
  if (spec.extra) spec.extra(args, path);
}

BuildScript parse_script(const json& j) {
  check_fields(j, {{"seed", T::kInteger}, {"style", T::kString}, {"prompt", T::kString}, {"steps", T::kArray, true}},
               "script");
  BuildScript s;
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) schema_error("script.seed", "must be non-negative");
    s.seed = j.at("seed").get<std::uint64_t>();
  }
  check_style(j, "script");
  s.style = str(j, "style", "none");
  s.prompt = str(j, "prompt");
  const auto& steps = j.at("steps");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string path = "script.steps[" + std::to_string(i) + "]";
    check_fields(steps[i], {{"op", T::kString, true}, {"args", T::kObject}, {"on_error", T::kString}}, path);
    one_of(steps[i], "on_error", {"abort", "skip", "rollback"}, path);
    Step st;
    st.op = steps[i].at("op").get<std::string>();
    st.args = steps[i].value("args", json::object());
    const auto policy = str(steps[i], "on_error", "abort");
    st.on_error = policy == "skip" ? OnError::kSkip : policy == "rollback" ? OnError::kRollback : OnError::kAbort;
    spec_of(st.op, path + ".op");
    validate_args(st.op, st.args, path + ".args");
    s.steps.push_back(std::move(st));
  }
  return s;
}

BuildScript load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open script " + path, {{"path", path}});
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchema, std::string("script is not valid JSON: ") + e.what(), {{"path", path}});
  }
  return parse_script(j);
}

json apply_op(Scene& scene, const std::string& op, const json& args, Rng& rng, const OpContext& ctx) {
  const auto& spec = spec_of(op, "op");
  if (!spec.run) throw Error(ErrorCode::kSpec, op + " is a driver step", {{"op", op}});
  validate_args(op, args);
  Scene work = scene;  // a throwing op leaves the scene untouched
  try {
    json out = spec.run(work, args, rng, ctx);
    scene = std::move(work);
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("bad argument value: ") + e.what(), {{"op", op}});
  }
}

RunResult run_script(const BuildScript& script, const Scene& initial, const RunOptions& opts) {
  RunResult res;
  res.scene = initial;
  if (script.seed) res.scene.seed = *script.seed;
  const std::uint64_t seed = res.scene.seed;
  const OpContext ctx{opts.style.value_or(script.style), script.prompt};
  std::vector<Checkpoint> checkpoints;

  auto latest = [&](const std::string& label) -> const Checkpoint* {
    for (auto it = checkpoints.rbegin(); it != checkpoints.rend(); ++it)
      if (label.empty() || it->label == label) return &*it;
    return nullptr;
  };

  for (std::size_t k = 0; k < script.steps.size(); ++k) {
    const auto& st = script.steps[k];
    StepLog log;
    log.index = opts.first_index + static_cast<int>(k);
    log.op = st.op;
    try {
      if (st.op == "checkpoint") {
        checkpoints.push_back({str(st.args, "label"), res.scene, log.index});
        log.payload = {{"label", checkpoints.back().label}, {"objects", res.scene.objects.size()}};
      } else if (st.op == "rollback") {
        const auto label = str(st.args, "label");
        const auto* cp = latest(label);
        if (!cp) throw Error(ErrorCode::kNotFound, "no checkpoint to roll back to", {{"label", label}});
        res.scene = cp->scene;
        log.payload = {{"label", cp->label}, {"step", cp->step_index}};
      } else {
        Rng rng = derive_stream(seed, static_cast<std::uint64_t>(log.index), st.op);
        log.payload = apply_op(res.scene, st.op, st.args, rng, ctx);
      }
      log.status = "ok";
    } catch (const Error& e) {
      log.error = error_json(e);
      if (st.on_error == OnError::kSkip) {
        log.status = "skipped";
      } else if (st.on_error == OnError::kRollback) {
        const auto* cp = latest("");
        res.scene = cp ? cp->scene : initial;
        if (!cp && script.seed) res.scene.seed = *script.seed;
        log.status = "rolled_back";
        log.payload = {{"restored", cp ? json(cp->label) : json("initial")}};
      } else {
        log.status = "failed";
        res.aborted = true;
        res.failed_step = log.index;
      }
    }
    res.log.push_back(std::move(log));
    if (res.aborted) {
      for (std::size_t r = k + 1; r < script.steps.size(); ++r)
        res.log.push_back({opts.first_index + static_cast<int>(r), script.steps[r].op, "not_run", nullptr, nullptr});
      break;
    }
  }
  return res;
}

json to_json(const StepLog& s) {
  json j{{"index", s.index}, {"op", s.op}, {"status", s.status}};
  if (!s.payload.is_null()) j["payload"] = s.payload;
  if (!s.error.is_null()) j["error"] = s.error;
  return j;
}

json log_to_json(const RunResult& r) {
  json steps = json::array();
  for (const auto& s : r.log) steps.push_back(to_json(s));
  return {{"aborted", r.aborted}, {"failed_step", r.failed_step}, {"steps", steps}};
}

}  // namespace scenecraft::script
