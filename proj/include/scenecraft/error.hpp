#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace scenecraft {

enum class ErrorCode {
  kInvalidGeometry,
  kNotFound,
  kSchema,
  kVersion,
  kSpec,
  kInfeasible,
  kDimension,
  kPlacement,
  kCategory,
  kSnapFailed,
  kSimulationDiverged,
  kProjectionFailed,
  kClearance,
  kFillFailed,
  kBounds,
  kCollision,
  kArrangementFailed,
  kArity,
  kPileFailed,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-readable code and an
// optional JSON payload (colliding pair, removed ids, ...) for callers that
// need more than the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, nlohmann::json details = {})
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

}  // namespace scenecraft
