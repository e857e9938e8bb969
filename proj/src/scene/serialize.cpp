#include "scenecraft/scene/serialize.hpp"

#include <fstream>
#include <sstream>

#include "scenecraft/error.hpp"

namespace scenecraft::scene {
namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kSchema, "schema error at '" + path + "': " + what, {{"field", path}});
}

const json& field(const json& j, const std::string& key, const std::string& path) {
  const std::string full = path.empty() ? key : path + "." + key;
  if (!j.is_object()) schema_error(path.empty() ? "<root>" : path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) schema_error(full, "missing required field");
  return *it;
}

std::string sub(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string idx(const std::string& path, size_t i) { return path + "[" + std::to_string(i) + "]"; }

double number(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  return j.get<double>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) schema_error(path, "expected a string");
  return j.get<std::string>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) schema_error(path, "expected a boolean");
  return j.get<bool>();
}

const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array");
  return j;
}

template <int N>
Eigen::Matrix<double, N, 1> vec(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != N) schema_error(path, "expected an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v[i] = number(j[i], idx(path, i));
  return v;
}

json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }
json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json ring_json(const std::vector<Vec2>& ring) {
  json out = json::array();
  for (const auto& v : ring) out.push_back(vec_json(v));
  return out;
}

std::vector<Vec2> ring_from(const json& j, const std::string& path) {
  std::vector<Vec2> out;
  const auto& a = array(j, path);
  for (size_t i = 0; i < a.size(); ++i) out.push_back(vec<2>(a[i], idx(path, i)));
  return out;
}

json opening_json(const Opening& o) {
  return {{"id", o.id},         {"wall_segment_id", o.wall_segment_id},
          {"offset_x", o.offset_x}, {"width", o.width},
          {"height", o.height}, {"sill", o.sill},
          {"exterior", o.exterior}};
}

Opening opening_from(const json& j, const std::string& path, OpeningKind kind) {
  Opening o;
  o.kind = kind;
  o.id = text(field(j, "id", path), sub(path, "id"));
  o.wall_segment_id = text(field(j, "wall_segment_id", path), sub(path, "wall_segment_id"));
  o.offset_x = number(field(j, "offset_x", path), sub(path, "offset_x"));
  o.width = number(field(j, "width", path), sub(path, "width"));
  o.height = number(field(j, "height", path), sub(path, "height"));
  o.sill = j.contains("sill") ? number(j["sill"], sub(path, "sill")) : 0.0;
  o.exterior = j.contains("exterior") ? boolean(j["exterior"], sub(path, "exterior")) : false;
  if (kind == OpeningKind::kWindow && !j.contains("sill")) schema_error(sub(path, "sill"), "missing required field");
  return o;
}

}  // namespace

json pose2_to_json(const Pose2& p) { return {{"x", p.x}, {"y", p.y}, {"theta_deg", p.theta_deg}}; }

json pose3_to_json(const Pose3& p) {
  const auto& q = p.rotation;
  return {{"xyz", vec_json(p.translation)}, {"quaternion", json::array({q.w(), q.x(), q.y(), q.z()})}};
}

Pose3 pose3_from_json(const json& j, const std::string& path) {
  Pose3 p;
  p.translation = vec<3>(field(j, "xyz", path), sub(path, "xyz"));
  const auto q = vec<4>(field(j, "quaternion", path), sub(path, "quaternion"));
  const double n = q.norm();
  if (!(std::abs(n - 1.0) < 1e-6)) schema_error(sub(path, "quaternion"), "quaternion is not unit length");
  // Stored verbatim: renormalizing would perturb the last bits.
  p.rotation = geom::Quat(q[0], q[1], q[2], q[3]);
  return p;
}

json asset_to_json(const Asset& a) {
  json pieces = json::array();
  for (const auto& p : a.collision_pieces) {
    json verts = json::array();
    for (const auto& v : p.input_vertices()) verts.push_back(vec_json(v));
    pieces.push_back(std::move(verts));
  }
  json inertia = json::array();
  for (int r = 0; r < 3; ++r) inertia.push_back(json::array({a.inertia(r, 0), a.inertia(r, 1), a.inertia(r, 2)}));
  json bbox = a.bbox.empty() ? json(nullptr) : json{{"min", vec_json(a.bbox.min)}, {"max", vec_json(a.bbox.max)}};
  return {{"id", a.id},
          {"category", to_string(a.category)},
          {"collision_pieces", std::move(pieces)},
          {"bbox", std::move(bbox)},
          {"mass", a.mass},
          {"com", vec_json(a.com)},
          {"inertia", std::move(inertia)},
          {"friction", a.friction},
          {"visual_ref", a.visual_ref}};
}

Asset asset_from_json(const json& j, const std::string& path) {
  Asset a;
  a.id = text(field(j, "id", path), sub(path, "id"));
  const std::string cat = text(field(j, "category", path), sub(path, "category"));
  try {
    a.category = category_from_string(cat);
  } catch (const Error&) {
    schema_error(sub(path, "category"), "unknown category '" + cat + "'");
  }
  const auto& pieces = array(field(j, "collision_pieces", path), sub(path, "collision_pieces"));
  for (size_t i = 0; i < pieces.size(); ++i) {
    const std::string pp = idx(sub(path, "collision_pieces"), i);
    std::vector<Vec3> verts;
    const auto& vs = array(pieces[i], pp);
    for (size_t k = 0; k < vs.size(); ++k) verts.push_back(vec<3>(vs[k], idx(pp, k)));
    a.collision_pieces.emplace_back(std::move(verts));
  }
  const auto& bbox = field(j, "bbox", path);
  if (!bbox.is_null()) {
    a.bbox.min = vec<3>(field(bbox, "min", sub(path, "bbox")), sub(path, "bbox.min"));
    a.bbox.max = vec<3>(field(bbox, "max", sub(path, "bbox")), sub(path, "bbox.max"));
  }
  a.mass = number(field(j, "mass", path), sub(path, "mass"));
  a.com = vec<3>(field(j, "com", path), sub(path, "com"));
  const auto& inertia = field(j, "inertia", path);
  if (!inertia.is_array() || inertia.size() != 3) schema_error(sub(path, "inertia"), "expected a 3x3 array");
  for (int r = 0; r < 3; ++r) a.inertia.row(r) = vec<3>(inertia[r], idx(sub(path, "inertia"), r)).transpose();
  a.friction = number(field(j, "friction", path), sub(path, "friction"));
  a.visual_ref = j.contains("visual_ref") ? text(j["visual_ref"], sub(path, "visual_ref")) : std::string();
  return a;
}

json room_to_json(const RoomGeometry& r) {
  json walls = json::array();
  for (const auto& w : r.walls) walls.push_back({{"id", w.id}, {"thickness", w.thickness}});
  json doors = json::array();
  for (const auto& d : r.doors) doors.push_back(opening_json(d));
  json windows = json::array();
  for (const auto& w : r.windows) windows.push_back(opening_json(w));
  json holes = json::array();
  for (const auto& h : r.floor.holes) holes.push_back(ring_json(h));
  return {{"id", r.id},
          {"room_type", r.room_type},
          {"origin", vec_json(r.origin)},
          {"floor", ring_json(r.floor.exterior)},
          {"floor_holes", std::move(holes)},
          {"wall_height", r.wall_height},
          {"walls", std::move(walls)},
          {"doors", std::move(doors)},
          {"windows", std::move(windows)},
          {"open_connections", json(std::vector<std::string>(r.open_connections.begin(), r.open_connections.end()))},
          {"prompt", r.prompt}};
}

RoomGeometry room_from_json(const json& j, const std::string& path) {
  RoomGeometry r;
  r.id = text(field(j, "id", path), sub(path, "id"));
  r.room_type = j.contains("room_type") ? text(j["room_type"], sub(path, "room_type")) : std::string();
  r.origin = vec<2>(field(j, "origin", path), sub(path, "origin"));
  r.floor.exterior = ring_from(field(j, "floor", path), sub(path, "floor"));
  if (j.contains("floor_holes")) {
    const auto& hs = array(j["floor_holes"], sub(path, "floor_holes"));
    for (size_t i = 0; i < hs.size(); ++i) r.floor.holes.push_back(ring_from(hs[i], idx(sub(path, "floor_holes"), i)));
  }
  r.wall_height = number(field(j, "wall_height", path), sub(path, "wall_height"));
  const auto& walls = array(field(j, "walls", path), sub(path, "walls"));
  for (size_t i = 0; i < walls.size(); ++i) {
    const std::string wp = idx(sub(path, "walls"), i);
    r.walls.push_back({text(field(walls[i], "id", wp), sub(wp, "id")),
                       number(field(walls[i], "thickness", wp), sub(wp, "thickness"))});
  }
  const auto& doors = array(field(j, "doors", path), sub(path, "doors"));
  for (size_t i = 0; i < doors.size(); ++i) {
    r.doors.push_back(opening_from(doors[i], idx(sub(path, "doors"), i), OpeningKind::kDoor));
  }
  const auto& windows = array(field(j, "windows", path), sub(path, "windows"));
  for (size_t i = 0; i < windows.size(); ++i) {
    r.windows.push_back(opening_from(windows[i], idx(sub(path, "windows"), i), OpeningKind::kWindow));
  }
  const auto& open = array(field(j, "open_connections", path), sub(path, "open_connections"));
  for (size_t i = 0; i < open.size(); ++i) r.open_connections.insert(text(open[i], idx(sub(path, "open_connections"), i)));
  r.prompt = j.contains("prompt") ? text(j["prompt"], sub(path, "prompt")) : std::string();
  return r;
}

json object_to_json(const ObjectInstance& o) {
  json out = {{"id", o.id}, {"asset_id", o.asset_id}, {"pose", pose3_to_json(o.pose)}, {"welded", o.welded}};
  if (o.support) {
    out["support"] = {{"surface_id", o.support->surface_id},
                      {"x", o.support->local.x},
                      {"y", o.support->local.y},
                      {"theta_deg", o.support->local.theta_deg}};
  }
  return out;
}

ObjectInstance object_from_json(const json& j, const std::string& path) {
  ObjectInstance o;
  o.id = text(field(j, "id", path), sub(path, "id"));
  o.asset_id = text(field(j, "asset_id", path), sub(path, "asset_id"));
  o.pose = pose3_from_json(field(j, "pose", path), sub(path, "pose"));
  o.welded = boolean(field(j, "welded", path), sub(path, "welded"));
  if (j.contains("support") && !j["support"].is_null()) {
    const auto& s = j["support"];
    const std::string sp = sub(path, "support");
    SupportRef ref;
    ref.surface_id = text(field(s, "surface_id", sp), sub(sp, "surface_id"));
    ref.local = Pose2(number(field(s, "x", sp), sub(sp, "x")), number(field(s, "y", sp), sub(sp, "y")),
                      number(field(s, "theta_deg", sp), sub(sp, "theta_deg")));
    o.support = ref;
  }
  return o;
}

json scene_to_json(const Scene& s) {
  json rooms = json::array();
  for (const auto& r : s.rooms) rooms.push_back(room_to_json(r));
  json assets = json::array();
  for (const auto& [id, a] : s.assets) assets.push_back(asset_to_json(a));
  json objects = json::array();
  for (const auto& [id, o] : s.objects) objects.push_back(object_to_json(o));
  json counters = json::object();
  for (const auto& [name, n] : s.id_counters) counters[name] = n;
  return {{"format_version", Scene::kFormatVersion},
          {"seed", s.seed},
          {"rooms", std::move(rooms)},
          {"assets", std::move(assets)},
          {"objects", std::move(objects)},
          {"id_counters", std::move(counters)}};
}

Scene scene_from_json(const json& j) {
  const auto& version = field(j, "format_version", "");
  if (!version.is_string() || version.get<std::string>() != Scene::kFormatVersion) {
    throw Error(ErrorCode::kVersion, "unsupported format_version " + version.dump(), {{"format_version", version}});
  }
  Scene s;
  const auto& seed = field(j, "seed", "");
  if (!seed.is_number_integer() || seed.is_number_float()) schema_error("seed", "expected an unsigned integer");
  s.seed = seed.get<std::uint64_t>();
  const auto& rooms = array(field(j, "rooms", ""), "rooms");
  for (size_t i = 0; i < rooms.size(); ++i) s.rooms.push_back(room_from_json(rooms[i], idx("rooms", i)));
  const auto& assets = array(field(j, "assets", ""), "assets");
  for (size_t i = 0; i < assets.size(); ++i) {
    Asset a = asset_from_json(assets[i], idx("assets", i));
    const std::string id = a.id;
    if (!s.assets.emplace(id, std::move(a)).second) schema_error(idx("assets", i), "duplicate asset id '" + id + "'");
  }
  const auto& objects = array(field(j, "objects", ""), "objects");
  for (size_t i = 0; i < objects.size(); ++i) {
    ObjectInstance o = object_from_json(objects[i], idx("objects", i));
    const std::string id = o.id;
    if (!s.objects.emplace(id, std::move(o)).second) schema_error(idx("objects", i), "duplicate object id '" + id + "'");
  }
  if (j.contains("id_counters")) {
    for (const auto& [name, n] : j["id_counters"].items()) {
      if (!n.is_number_unsigned()) schema_error("id_counters." + name, "expected an unsigned integer");
      s.id_counters[name] = n.get<std::uint64_t>();
    }
  }
  s.validate();
  return s;
}

std::string serialize_scene(const Scene& s) { return scene_to_json(s).dump(1) + "\n"; }

Scene deserialize_scene(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed scene document: ") + e.what(),
                {{"byte", e.byte}, {"field", "<document>"}});
  }
  return scene_from_json(j);
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open scene file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return deserialize_scene(buf.str());
}

void save_scene(const std::filesystem::path& path, const Scene& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kNotFound, "cannot write scene file '" + path.string() + "'");
  out << serialize_scene(s);
}

}  // namespace scenecraft::scene
