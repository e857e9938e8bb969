#include <gtest/gtest.h>

#include <random>

#include "scenecraft/error.hpp"
#include "scenecraft/metrics/metrics.hpp"
#include "scenecraft/scene/serialize.hpp"
#include "scenecraft/script/driver.hpp"
#include "scene_builders.hpp"
#include "script_builders.hpp"

using namespace scenecraft;
using namespace scenecraft::script;
using oracle::step;

namespace {

json with_steps(json steps, std::uint64_t seed = 7) { return {{"seed", seed}, {"steps", std::move(steps)}}; }

scene::Scene base_scene() {
  auto s = oracle::room_scene(5, 4);
  s.add_asset(scene::primitives::box("crate", scene::Category::kFurniture, geom::Vec3(0.6, 0.6, 0.5), 8.0));
  return s;
}

ErrorCode schema_code(const json& j) {
  try {
    parse_script(j);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kSpec;
}

}  // namespace

TEST(Script, EmptyScriptLeavesSceneUnchanged) {
  const auto s = base_scene();
  const auto r = run_script(parse_script({{"steps", json::array()}}), s);
  EXPECT_EQ(r.scene, s);
  EXPECT_TRUE(r.log.empty());
  EXPECT_FALSE(r.aborted);
}

TEST(Script, SchemaViolationsAreRejectedUpFront) {
  EXPECT_EQ(schema_code({{"seed", 1}}), ErrorCode::kSchema);
  EXPECT_EQ(schema_code(with_steps({step("no.such.op", json::object())})), ErrorCode::kSchema);
  EXPECT_EQ(schema_code(with_steps({step("object.add", {{"x", 1.0}})})), ErrorCode::kSchema);
  EXPECT_EQ(schema_code(with_steps({step("object.add", {{"asset", "crate"}, {"colour", "red"}})})),
            ErrorCode::kSchema);
  EXPECT_EQ(schema_code(with_steps({step("object.add", {{"asset", "crate"}, {"x", "1"}})})), ErrorCode::kSchema);
  EXPECT_EQ(schema_code(with_steps({step("checkpoint", json::object(), "retry")})), ErrorCode::kSchema);
  EXPECT_EQ(schema_code(with_steps({step("feasibility.enforce", {{"stage", "whenever"}})})), ErrorCode::kSchema);
  EXPECT_EQ(schema_code(with_steps({step("asset.add", {{"primitive", "box"}, {"id", "b"},
                                                       {"params", {{"category", "furniture"}, {"size", {1, 2}},
                                                                   {"mass", 1.0}}}})})),
            ErrorCode::kSchema);
  try {
    parse_script(with_steps({step("checkpoint", json::object()), step("tool.snap", {{"source", "a"}})}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.details().at("path"), "script.steps[1].args.target");
  }
}

TEST(Script, AbortStopsAndLogsTheRest) {
  const auto script = parse_script(with_steps({step("object.add", {{"asset", "crate"}, {"x", 1.0}, {"y", 1.0}}),
                                               step("object.remove", {{"id", "ghost"}}),
                                               step("object.add", {{"asset", "crate"}, {"x", 3.0}, {"y", 1.0}})}));
  const auto r = run_script(script, base_scene());
  EXPECT_TRUE(r.aborted);
  EXPECT_EQ(r.failed_step, 1);
  ASSERT_EQ(r.log.size(), 3u);
  EXPECT_EQ(r.log[0].status, "ok");
  EXPECT_EQ(r.log[1].status, "failed");
  EXPECT_EQ(r.log[1].error.at("code"), "not_found");
  EXPECT_EQ(r.log[2].status, "not_run");
  EXPECT_EQ(r.scene.objects.size(), 1u);
}

TEST(Script, SkipContinues) {
  const auto script =
      parse_script(with_steps({step("object.remove", {{"id", "ghost"}}, "skip"),
                               step("object.add", {{"asset", "crate"}, {"x", 3.0}, {"y", 1.0}})}));
  const auto r = run_script(script, base_scene());
  EXPECT_FALSE(r.aborted);
  EXPECT_EQ(r.log[0].status, "skipped");
  EXPECT_EQ(r.scene.objects.size(), 1u);
}

TEST(Script, RollbackRestoresCheckpoint) {
  auto s = base_scene();
  oracle::place(s, "crate", geom::Vec3(1, 1, 0), 0.0, true, "anchor");
  oracle::place(s, "crate", geom::Vec3(3, 1, 0), 0.0, false, "mover");
  const auto script = parse_script(with_steps({
      step("checkpoint", {{"label", "start"}}),
      step("object.add", {{"asset", "crate"}, {"x", 2.0}, {"y", 3.0}}),
      step("tool.snap", {{"source", "anchor_0"}, {"target", "mover_0"}}, "rollback"),  // welded source
      step("metrics.report", json::object()),
  }));
  const auto r = run_script(script, s);
  EXPECT_EQ(r.log[2].status, "rolled_back");
  EXPECT_EQ(r.log[2].error.at("code"), "placement");
  EXPECT_EQ(r.log[3].status, "ok");
  auto expect = s;
  expect.seed = 7;
  EXPECT_EQ(r.scene, expect);
  EXPECT_EQ(r.log[3].payload.at("object_count"), 2);
}

TEST(Script, RollbackRestoresIdCounters) {
  const auto script = parse_script(with_steps({
      step("checkpoint", json::object()),
      step("object.add", {{"asset", "crate"}, {"x", 1.0}, {"y", 1.0}}),
      step("rollback", json::object()),
      step("object.add", {{"asset", "crate"}, {"x", 2.0}, {"y", 1.0}}),
  }));
  const auto r = run_script(script, base_scene());
  ASSERT_FALSE(r.aborted);
  EXPECT_EQ(r.log[1].payload.at("id"), "crate_0");
  EXPECT_EQ(r.log[3].payload.at("id"), "crate_0");
  EXPECT_EQ(r.scene.objects.size(), 1u);
}

TEST(Script, RollbackWithoutCheckpointIsAStepFailure) {
  const auto r = run_script(parse_script(with_steps({step("rollback", json::object())})), base_scene());
  EXPECT_TRUE(r.aborted);
}

TEST(Script, StyleNoiseIsSeededPerStep) {
  auto run = [](const std::string& style, std::uint64_t seed) {
    json j = with_steps({step("object.add", {{"asset", "crate"}, {"x", 2.0}, {"y", 2.0}})}, seed);
    j["style"] = style;
    return run_script(parse_script(j), base_scene()).scene.objects.at("crate_0").pose;
  };
  const auto none = run("none", 1);
  EXPECT_EQ(none.translation, geom::Vec3(2, 2, 0));
  const auto a = run("natural", 1), b = run("natural", 1), c = run("natural", 2);
  EXPECT_EQ(a.translation, b.translation);
  EXPECT_NE(a.translation, c.translation);
  EXPECT_NE(a.translation, none.translation);
  EXPECT_LT((run("perfect", 1).translation - none.translation).norm(), 0.01);
  // an override from the caller wins over the script
  json j = with_steps({step("object.add", {{"asset", "crate"}, {"x", 2.0}, {"y", 2.0}})}, 1);
  j["style"] = "natural";
  RunOptions opts;
  opts.style = "none";
  EXPECT_EQ(run_script(parse_script(j), base_scene(), opts).scene.objects.at("crate_0").pose.translation,
            geom::Vec3(2, 2, 0));
}

TEST(Script, EndToEndRoomHasNoCollisions) {
  std::mt19937_64 rng(5);
  const auto script = parse_script(oracle::furnished_room_script(rng, 11));
  const auto r = run_script(script, scene::Scene{});
  ASSERT_FALSE(r.aborted) << log_to_json(r).dump(2);
  const auto& report = r.log.back().payload;
  EXPECT_EQ(report.at("COL"), 0.0);
  EXPECT_GE(report.at("STB").get<double>(), 95.0);
  EXPECT_GT(r.scene.objects.size(), 6u);
}

TEST(Script, ReplayIsByteIdenticalAndResumable) {
  std::mt19937_64 rng(9);
  const json j = oracle::furnished_room_script(rng, 21);
  const auto script = parse_script(j);
  const auto r1 = run_script(script, scene::Scene{});
  const auto r2 = run_script(script, scene::Scene{});
  EXPECT_EQ(scene::serialize_scene(r1.scene), scene::serialize_scene(r2.scene));
  EXPECT_EQ(log_to_json(r1).dump(), log_to_json(r2).dump());

  // split after the checkpoint, save, load, resume
  const std::size_t cut = 14;
  BuildScript head = script, tail = script;
  head.steps.resize(cut);
  tail.steps.erase(tail.steps.begin(), tail.steps.begin() + cut);
  const auto h = run_script(head, scene::Scene{});
  const auto loaded = scene::deserialize_scene(scene::serialize_scene(h.scene));
  RunOptions opts;
  opts.first_index = static_cast<int>(cut);
  const auto t = run_script(tail, loaded, opts);
  EXPECT_EQ(scene::serialize_scene(t.scene), scene::serialize_scene(r1.scene));
}

TEST(Script, ApplyOpRefusesDriverSteps) {
  auto s = base_scene();
  Rng rng(1);
  EXPECT_THROW(apply_op(s, "checkpoint", json::object(), rng), Error);
  EXPECT_THROW(apply_op(s, "object.add", {{"asset", "crate"}, {"bogus", 1}}, rng), Error);
  const auto before = s;
  EXPECT_THROW(apply_op(s, "object.add", {{"asset", "crate"}, {"surface", "nowhere:S_0"}}, rng), Error);
  EXPECT_EQ(s, before);
}
