#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace onsetwarn {

enum class ErrorCode {
  MissingColumn,
  DuplicateDate,
  UnparseableDate,
  InvalidValue,
  MissingYear,
  NonChronologicalSplit,
  EmptyTrainingSet,
  DimensionMismatch,
  LengthMismatch,
  DegenerateLabels,
  ShapeMismatch,
  NonFiniteLoss,
  SingleClass,
  InvalidConfig,
  ConfigSeriesMismatch,
  ConfigError,
  IoError,
  FormatError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every module failure is reported as an Error carrying the module name, so
/// the CLI can print "<module>: <Code>: <detail>" without further context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string_view module, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorCode code_;
  std::string module_;
};

}  // namespace onsetwarn
