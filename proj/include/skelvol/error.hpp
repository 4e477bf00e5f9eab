#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skelvol {

enum class ErrorCode {
  MalformedFile,
  EmptySequence,
  MissingJoint,
  IoError,
  VersionMismatch,
  SequenceTooShort,
  EmptyInput,
  OutOfBounds,
  ShapeMismatch,
  NumericError,
  InvalidProbability,
  InvalidTarget,
  EmptyDataset,
  ClassMissing,
  LengthMismatch,
  MissingMetadata,
  EmptyPartition,
  TooFewSamples,
  InvalidParams,
  IncompatibleCheckpoint,
  IndexOutOfRange,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure surfaced by the library is an Error carrying a code, so
/// callers can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Same code, message prefixed with context (typically a file path).
  Error with_context(const std::string& context) const { return Error(code_, context + ": " + detail_); }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace skelvol
