// Command-line front end. Every subcommand maps onto one driver operation so
// that the CLI and build scripts share argument handling and semantics.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "scenecraft/error.hpp"
#include "scenecraft/scene/serialize.hpp"
#include "scenecraft/script/driver.hpp"

using namespace scenecraft;
using nlohmann::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path, {{"path", path}});
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchema, path + " is not valid JSON: " + e.what(), {{"path", path}});
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kNotFound, "cannot write " + path, {{"path", path}});
  out << text;
}

int exit_code(const Error& e) {
  return e.code() == ErrorCode::kSchema || e.code() == ErrorCode::kVersion ? 2 : 1;
}

// Options shared by the subcommands that run one operation on a scene.
struct Common {
  std::string scene_path;
  std::string out;
  std::uint64_t seed = 0;
  std::string style = "none";
  std::string prompt;
};

// Runs `op` and prints the report; the updated scene goes to --out.
int run_op(const Common& c, const std::string& op, const json& args, scene::Scene scene) {
  Rng rng = derive_stream(c.seed, 0, op);
  const json report = script::apply_op(scene, op, args, rng, {c.style, c.prompt});
  if (!c.out.empty()) write_text(c.out, scene::serialize_scene(scene));
  std::cout << report.dump(2) << "\n";
  return 0;
}

scene::Scene load(const Common& c) { return scene::load_scene(c.scene_path); }

void add_scene_opts(CLI::App* app, Common& c, bool writes) {
  app->add_option("--scene", c.scene_path, "Scene JSON file")->required()->check(CLI::ExistingFile);
  if (writes) app->add_option("--out", c.out, "Write the updated scene here");
  app->add_option("--seed", c.seed, "Random seed");
}

void add_pose_opts(CLI::App* app, json& args) {
  app->add_option_function<double>("--x", [&args](double v) { args["x"] = v; }, "Local x (m)");
  app->add_option_function<double>("--y", [&args](double v) { args["y"] = v; }, "Local y (m)");
  app->add_option_function<double>("--theta", [&args](double v) { args["theta_deg"] = v; }, "Yaw (deg)");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Procedural indoor scene construction toolkit"};
  app.require_subcommand(1);
  Common c;
  json args = json::object();
  std::function<int()> action;

  // ---- layout ----
  auto* layout = app.add_subcommand("layout", "Floor plan generation")->require_subcommand(1);
  {
    auto* solve = layout->add_subcommand("solve", "Place rooms from a spec list");
    static std::string specs;
    static std::optional<std::uint64_t> budget;
    static std::optional<double> timeout;
    solve->add_option("--specs", specs, "Room specs JSON (array or {rooms: [...]})")->required();
    auto* b = solve->add_option("--node-budget", budget, "Expanded placement limit");
    solve->add_option("--timeout", timeout, "Wall-clock limit (s)")->excludes(b);
    solve->add_option("--seed", c.seed, "Random seed");
    solve->add_option("--out", c.out, "Write a scene holding the rooms here");
    solve->callback([&] {
      action = [&] {
        json j = read_json(specs);
        args = {{"rooms", j.is_object() && j.contains("rooms") ? j.at("rooms") : j}};
        if (budget) args["node_budget"] = *budget;
        if (timeout) args["timeout"] = *timeout;
        scene::Scene s;
        s.seed = c.seed;
        return run_op(c, "layout.solve", args, s);
      };
    });
  }

  // ---- placement ----
  {
    auto* place = app.add_subcommand("place", "Add an object, with optional placement noise");
    add_scene_opts(place, c, true);
    static std::string asset, surface, name;
    static double z = 0;
    place->add_option("--asset", asset, "Asset id")->required();
    place->add_option("--surface", surface, "Support surface id (pose is then surface-local)");
    place->add_option("--name", name, "Object name");
    place->add_option("--z", z, "World height when not on a surface");
    add_pose_opts(place, args);
    place->add_option("--style", c.style, "Placement noise style")
        ->check(CLI::IsMember({"none", "natural", "perfect", "auto"}));
    place->add_option("--prompt", c.prompt, "Text read by --style auto");
    place->callback([&] {
      action = [&] {
        args["asset"] = asset;
        if (!surface.empty()) args["surface"] = surface;
        else args["z"] = z;
        if (!name.empty()) args["name"] = name;
        return run_op(c, "object.add", args, load(c));
      };
    });
  }

  // ---- tools ----
  auto* tool = app.add_subcommand("tool", "Placement checks and adjustments")->require_subcommand(1);
  {
    static std::string source, target, mode = "toward", room, stage, context;
    static double hr = 0.35;
    auto* facing = tool->add_subcommand("facing", "Does the source face the target");
    add_scene_opts(facing, c, true);
    facing->add_option("--source", source)->required();
    facing->add_option("--target", target)->required();
    static bool apply = false;
    facing->add_flag("--apply", apply, "Rotate the source to the facing yaw");
    facing->callback([&] {
      action = [&] {
        return run_op(c, "tool.facing", {{"source", source}, {"target", target}, {"apply", apply}}, load(c));
      };
    });

    auto* snap = tool->add_subcommand("snap", "Move the source into contact with the target");
    add_scene_opts(snap, c, true);
    snap->add_option("--source", source)->required();
    snap->add_option("--target", target)->required();
    snap->add_option("--mode", mode)->check(CLI::IsMember({"toward", "away", "none"}));
    snap->add_option("--style", c.style)->check(CLI::IsMember({"none", "natural", "perfect", "auto"}));
    snap->callback([&] {
      action = [&] { return run_op(c, "tool.snap", {{"source", source}, {"target", target}, {"mode", mode}}, load(c)); };
    });

    auto* reach = tool->add_subcommand("reach", "Free-floor connectivity for a robot");
    add_scene_opts(reach, c, false);
    reach->add_option("--room", room)->required();
    reach->add_option("--hr", hr, "Robot half width (m)");
    reach->callback([&] { action = [&] { return run_op(c, "tool.reach", {{"room", room}, {"hr", hr}}, load(c)); }; });

    auto* physics = tool->add_subcommand("physics", "Collisions, bounds and blocked openings");
    add_scene_opts(physics, c, false);
    physics->add_option("--stage", stage)->required()->check(
        CLI::IsMember({"furniture", "wall", "ceiling", "manipuland"}));
    physics->add_option("--context", context, "Supporting entity for the manipuland stage");
    physics->callback([&] {
      action = [&] {
        json a{{"stage", stage}};
        if (!context.empty()) a["context"] = context;
        return run_op(c, "tool.physics", a, load(c));
      };
    });
  }

  // ---- composites ----
  auto* compose = app.add_subcommand("compose", "Physics-settled composites on a surface")->require_subcommand(1);
  {
    static std::string surface, items, container;
    static std::vector<std::string> arranged;
    for (const char* kind : {"stack", "fill", "arrange", "pile"}) {
      auto* sub = compose->add_subcommand(kind, std::string("create_") + kind);
      add_scene_opts(sub, c, true);
      sub->add_option("--surface", surface, "Support surface id")->required();
      add_pose_opts(sub, args);
      const std::string k = kind;
      if (k == "fill" || k == "arrange") sub->add_option("--container", container, "Container asset id")->required();
      if (k == "arrange")
        sub->add_option("--item", arranged, "asset:x:y[:theta] relative to the container centre")->required();
      else
        sub->add_option("--items", items, "Comma separated asset ids")->required();
      sub->callback([&, k] {
        action = [&, k] {
          args["surface"] = surface;
          if (k == "fill" || k == "arrange") args["container"] = container;
          if (k == "arrange") {
            args["items"] = json::array();
            for (const auto& spec : arranged) {
              const auto f = split(spec, ':');
              if (f.size() < 3 || f.size() > 4) throw Error(ErrorCode::kSchema, "bad --item " + spec, {{"item", spec}});
              json it{{"asset", f[0]}, {"x", std::stod(f[1])}, {"y", std::stod(f[2])}};
              if (f.size() == 4) it["theta_deg"] = std::stod(f[3]);
              args["items"].push_back(it);
            }
          } else {
            args["items"] = split(items, ',');
          }
          return run_op(c, "compose." + k, args, load(c));
        };
      });
    }
  }

  // ---- feasibility ----
  auto* feas = app.add_subcommand("feasibility", "Non-penetration projection and settling")->require_subcommand(1);
  {
    static std::string stage = "post_furniture";
    for (const char* kind : {"project", "settle", "clean"}) {
      auto* sub = feas->add_subcommand(kind);
      add_scene_opts(sub, c, true);
      sub->add_option("--stage", stage, "post_furniture | per_entity:<id> | post_manipulands")->required();
      const std::string k = kind;
      sub->callback([&, k] {
        action = [&, k] {
          if (k == "clean") return run_op(c, "feasibility.enforce", {{"stage", stage}, {"remove_fallen", true}}, load(c));
          return run_op(c, "feasibility." + k, {{"stage", stage}}, load(c));
        };
      });
    }
  }

  // ---- metrics ----
  auto* metrics = app.add_subcommand("metrics", "Scene quality metrics")->require_subcommand(1);
  {
    auto* report = metrics->add_subcommand("report", "COL, STB, NAV and OOB");
    static std::string scene_path, out;
    static double hr = 0.35;
    static int samples = 256;
    report->add_option("--scene", scene_path)->required()->check(CLI::ExistingFile);
    report->add_option("--hr", hr, "Robot half width (m)");
    report->add_option("--samples", samples, "Surface samples per object for OOB");
    report->add_option("--seed", c.seed);
    report->add_option("--out", out, "Report JSON path (stdout if omitted)");
    report->callback([&] {
      action = [&] {
        auto s = scene::load_scene(scene_path);
        Rng rng = derive_stream(c.seed, 0, "metrics.report");
        const auto r = script::apply_op(s, "metrics.report",
                                        {{"hr", hr}, {"samples", samples}, {"seed", c.seed}}, rng);
        if (out.empty()) std::cout << r.dump(2) << "\n";
        else write_text(out, r.dump(2) + "\n");
        return 0;
      };
    });
  }

  // ---- script ----
  auto* scr = app.add_subcommand("script", "Declarative build scripts")->require_subcommand(1);
  {
    auto* run = scr->add_subcommand("run", "Execute a build script");
    static std::string build, in, out, log;
    static std::optional<std::string> style;
    run->add_option("script", build, "BUILD.json")->required();
    run->add_option("--scene", in, "Initial scene (empty when omitted)");
    run->add_option("--out", out, "Final scene path");
    run->add_option("--log", log, "Step log path");
    run->add_option("--style", style, "Override the script's placement style")
        ->check(CLI::IsMember({"none", "natural", "perfect", "auto"}));
    run->callback([&] {
      action = [&] {
        const auto script = script::parse_script(read_json(build));
        const auto initial = in.empty() ? scene::Scene{} : scene::load_scene(in);
        script::RunOptions opts;
        opts.style = style;
        const auto r = script::run_script(script, initial, opts);
        const auto log_json = script::log_to_json(r);
        if (!out.empty()) write_text(out, scene::serialize_scene(r.scene));
        if (!log.empty()) write_text(log, log_json.dump(2) + "\n");
        else std::cout << log_json.dump(2) << "\n";
        return r.aborted ? 1 : 0;
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    return action ? action() : 2;
  } catch (const Error& e) {
    std::cerr << json{{"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()},
                                 {"details", e.details()}}}}
                     .dump(2)
              << "\n";
    return exit_code(e);
  }
}
