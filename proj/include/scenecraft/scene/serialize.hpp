#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "scenecraft/scene/scene.hpp"

namespace scenecraft::scene {

using nlohmann::json;

json pose2_to_json(const Pose2& p);
json pose3_to_json(const Pose3& p);
json asset_to_json(const Asset& a);
json room_to_json(const RoomGeometry& r);
json object_to_json(const ObjectInstance& o);
json scene_to_json(const Scene& s);

// `path` prefixes field names in schema errors, e.g. "assets[3].mass".
Pose3 pose3_from_json(const json& j, const std::string& path);
Asset asset_from_json(const json& j, const std::string& path);
RoomGeometry room_from_json(const json& j, const std::string& path);
ObjectInstance object_from_json(const json& j, const std::string& path);
// Throws kVersion on an unknown format_version, kSchema on a missing or
// mistyped field (message and details name the field path).
Scene scene_from_json(const json& j);

// UTF-8 JSON text; doubles use the shortest representation that round-trips.
std::string serialize_scene(const Scene& s);
Scene deserialize_scene(std::string_view text);

Scene load_scene(const std::filesystem::path& path);
void save_scene(const std::filesystem::path& path, const Scene& s);

}  // namespace scenecraft::scene
