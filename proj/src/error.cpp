#include "onsetwarn/error.hpp"

namespace onsetwarn {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::DuplicateDate: return "DuplicateDate";
    case ErrorCode::UnparseableDate: return "UnparseableDate";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::MissingYear: return "MissingYear";
    case ErrorCode::NonChronologicalSplit: return "NonChronologicalSplit";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ConfigSeriesMismatch: return "ConfigSeriesMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string_view module, const std::string& detail)
    : std::runtime_error(std::string(module) + ": " + std::string(to_string(code)) + ": " + detail),
      code_(code),
      module_(module) {}

}  // namespace onsetwarn
