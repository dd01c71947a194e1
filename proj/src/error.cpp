#include "eegmatch/error.hpp"

namespace eegmatch {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DegenerateChannel: return "DegenerateChannel";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::InvalidBand: return "InvalidBand";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::UnsortedWords: return "UnsortedWords";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::WidthMismatch: return "WidthMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::MissingFeature: return "MissingFeature";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::StaleTape: return "StaleTape";
    case ErrorKind::NonScalarLoss: return "NonScalarLoss";
    case ErrorKind::MissingGradient: return "MissingGradient";
    case ErrorKind::NoNegativesAvailable: return "NoNegativesAvailable";
    case ErrorKind::UnknownSubject: return "UnknownSubject";
    case ErrorKind::EmptyValidation: return "EmptyValidation";
    case ErrorKind::ConfigMismatch: return "ConfigMismatch";
    case ErrorKind::InvalidManifest: return "InvalidManifest";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace eegmatch
