#include "skelvol/error.hpp"

namespace skelvol {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::MissingJoint: return "MissingJoint";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::SequenceTooShort: return "SequenceTooShort";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NumericError: return "NumericError";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::InvalidTarget: return "InvalidTarget";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::ClassMissing: return "ClassMissing";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::MissingMetadata: return "MissingMetadata";
    case ErrorCode::EmptyPartition: return "EmptyPartition";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::IncompatibleCheckpoint: return "IncompatibleCheckpoint";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
  }
  return "Unknown";
}

}  // namespace skelvol
