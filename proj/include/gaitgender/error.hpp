#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gaitgender {

enum class ErrorCode {
  EmptySilhouette,
  DegenerateBox,
  EmptyWindow,
  ShapeMismatch,
  MissingView,
  UnknownView,
  EvenWindow,
  SingleClass,
  DimensionMismatch,
  InsufficientSubjects,
  MissingManifest,
  UnknownGender,
  CorruptImage,
  FrameOrder,
  VersionMismatch,
  ChecksumMismatch,
  ShapeInconsistency,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// The single exception type thrown by the library. `code()` is stable and
/// machine-readable; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gaitgender
