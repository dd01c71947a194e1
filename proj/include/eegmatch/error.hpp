#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eegmatch {

enum class ErrorKind {
  InvalidArgument,
  DegenerateChannel,
  EmptyInput,
  InvalidBand,
  TooShort,
  UnsortedWords,
  RankDeficient,
  WidthMismatch,
  LengthMismatch,
  MissingFeature,
  ShapeMismatch,
  StaleTape,
  NonScalarLoss,
  MissingGradient,
  NoNegativesAvailable,
  UnknownSubject,
  EmptyValidation,
  ConfigMismatch,
  InvalidManifest,
  FormatError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers and tests can
// dispatch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace eegmatch
