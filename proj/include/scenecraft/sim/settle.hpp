#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenecraft/scene/asset.hpp"

namespace scenecraft::sim {

using geom::ConvexPiece;
using geom::Pose3;
using geom::Vec3;

struct SimConfig {
  double time_step = 0.001;
  double duration = 5.0;
  double gravity = 9.81;
  int iterations = 30;             // velocity solver sweeps per step
  double contact_margin = 0.002;   // speculative contact distance
  double slop = 2e-4;              // penetration left uncorrected
  double baumgarte = 0.2;          // fraction of excess penetration removed per step
  double max_speed = 100.0;        // beyond this the state counts as diverged
  // Stop before `duration` once every body stays below these speeds for rest_time.
  bool early_stop = true;
  double rest_linear = 2e-3;
  double rest_angular = 2e-2;
  double rest_time = 0.3;
  double contact_angular_damping = 2.0;  // 1/s, stands in for rolling resistance
  double static_friction = 0.5;  // friction of the static environment
  double fall_drop = 0.1;  // bottom dropping this far below its start marks fell_off
  bool record_energy = false;
  std::uint64_t seed = 0;  // the integrator is deterministic; kept for reports
};

struct SimBody {
  std::string id;
  scene::Asset asset;
  Pose3 pose;
  bool welded = false;
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
};

struct BodyResult {
  std::string id;
  Pose3 initial;
  Pose3 final;
  double displacement = 0.0;  // meters, object origin
  double rotation = 0.0;      // radians, geodesic
  bool fell_off = false;
  bool welded = false;
};

struct SettleReport {
  std::vector<BodyResult> bodies;  // input order
  double simulated_time = 0.0;
  int steps = 0;
  bool at_rest = false;
  std::vector<double> energy;  // kinetic + potential per step when recorded

  const BodyResult& body(const std::string& id) const;
};

// Fixed-step rigid-body settling under gravity with frictional contacts.
// Welded bodies are immobile. Throws kSimulationDiverged naming the first
// body whose state becomes non-finite or exceeds max_speed.
SettleReport settle(const std::vector<SimBody>& bodies, const std::vector<ConvexPiece>& static_env,
                    const SimConfig& cfg = {});

nlohmann::json to_json(const SettleReport& r);

}  // namespace scenecraft::sim
