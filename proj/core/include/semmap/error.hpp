#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semmap {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidDepth,
  kBehindCamera,
  kEmptyTrajectory,
  kEmptyCloud,
  kNoClusters,
  kDegenerateCloud,
  kInsufficientConsensus,
  kPoseOutsideGrid,
  kFootprintOutsideGrid,
  kGeometryMismatch,
  kNoPath,
  kStartOrGoalLethal,
  kFormat,
  kSchemaVersion,
  kIo,
  kConfig,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a code so callers can branch
// on the kind of failure without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace semmap
