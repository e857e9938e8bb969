#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenecraft/rng.hpp"
#include "scenecraft/scene/scene.hpp"

namespace scenecraft::script {

using nlohmann::json;
using scene::Scene;

enum class OnError { kAbort, kSkip, kRollback };

struct Step {
  std::string op;
  json args = json::object();
  OnError on_error = OnError::kAbort;
};

struct BuildScript {
  std::optional<std::uint64_t> seed;  // falls back to the scene seed
  std::string style = "none";         // none | natural | perfect | auto
  std::string prompt;                 // read by style "auto"
  std::vector<Step> steps;
};

// Validates the whole document, including every step's arguments, before
// anything runs. Throws kSchema with a JSON path.
BuildScript parse_script(const json& j);
BuildScript load_script(const std::string& path);

// Registered operation names, sorted.
std::vector<std::string> op_names();

// Throws kSchema when `args` do not fit the operation.
void validate_args(const std::string& op, const json& args, const std::string& path = "args");

struct OpContext {
  std::string style = "none";
  std::string prompt;
};

// Runs one operation in place and returns its report payload. `checkpoint`
// and `rollback` are driver steps and are rejected here.
json apply_op(Scene& scene, const std::string& op, const json& args, Rng& rng, const OpContext& ctx = {});

struct StepLog {
  int index = 0;
  std::string op;
  std::string status;  // ok | failed | skipped | rolled_back | not_run
  json payload;
  json error;
};

struct Checkpoint {
  std::string label;
  Scene scene;
  int step_index = -1;
};

struct RunOptions {
  std::optional<std::string> style;  // overrides the script
  int first_index = 0;               // numbering of the first step, for resuming a split script
};

struct RunResult {
  Scene scene;
  std::vector<StepLog> log;
  bool aborted = false;
  int failed_step = -1;
};

// Steps run in order; step k draws from derive_stream(seed, k, op). A failing
// step follows its on_error policy: abort stops, skip continues, rollback
// restores the latest checkpoint (the initial scene if there is none) and
// continues.
RunResult run_script(const BuildScript& script, const Scene& initial, const RunOptions& opts = {});

json to_json(const StepLog& s);
json log_to_json(const RunResult& r);

}  // namespace scenecraft::script
