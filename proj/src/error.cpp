#include "gaitgender/error.hpp"

namespace gaitgender {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptySilhouette: return "EmptySilhouette";
    case ErrorCode::DegenerateBox: return "DegenerateBox";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MissingView: return "MissingView";
    case ErrorCode::UnknownView: return "UnknownView";
    case ErrorCode::EvenWindow: return "EvenWindow";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InsufficientSubjects: return "InsufficientSubjects";
    case ErrorCode::MissingManifest: return "MissingManifest";
    case ErrorCode::UnknownGender: return "UnknownGender";
    case ErrorCode::CorruptImage: return "CorruptImage";
    case ErrorCode::FrameOrder: return "FrameOrder";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::ShapeInconsistency: return "ShapeInconsistency";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace gaitgender
