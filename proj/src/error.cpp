#include "scenecraft/error.hpp"

namespace scenecraft {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidGeometry: return "invalid_geometry";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kVersion: return "version";
    case ErrorCode::kSpec: return "spec";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kDimension: return "dimension";
    case ErrorCode::kPlacement: return "placement";
    case ErrorCode::kCategory: return "category";
    case ErrorCode::kSnapFailed: return "snap_failed";
    case ErrorCode::kSimulationDiverged: return "simulation_diverged";
    case ErrorCode::kProjectionFailed: return "projection_failed";
    case ErrorCode::kClearance: return "clearance";
    case ErrorCode::kFillFailed: return "fill_failed";
    case ErrorCode::kBounds: return "bounds";
    case ErrorCode::kCollision: return "collision";
    case ErrorCode::kArrangementFailed: return "arrangement_failed";
    case ErrorCode::kArity: return "arity";
    case ErrorCode::kPileFailed: return "pile_failed";
  }
  return "unknown";
}

}  // namespace scenecraft
