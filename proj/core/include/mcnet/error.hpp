#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcnet {

enum class ErrorCode {
  InvalidArgument,
  // netmodel
  OverlappingVoxels,
  NonPositiveParameter,
  EventBeyondHorizon,
  IndexOutOfLattice,
  NonMonotoneTimes,
  EmptyDevice,
  DuplicateVoxel,
  // stochsim
  StepRejectionLimit,
  // moments
  NonlinearKinetics,
  IntegratorFailure,
  DimensionCap,
  TruncationMassExceeded,
  // xfer
  ZeroDisplacement,
  DegenerateRoots,
  QuadratureNotConverged,
  PoleHit,
  SingularSystem,
  // invlaplace
  ContourEvaluationFailure,
  AccuracyNotMet,
  // expcli
  ConfigParseError,
  NonDivisibleDelta,
  EmptyWindow,
  GridMismatch,
};

std::string_view toString(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(toString(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct Violation {
  ErrorCode code;
  std::string message;
};

/// Thrown by validate(); carries every violated invariant, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

}  // namespace mcnet
