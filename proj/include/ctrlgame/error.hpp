#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ctrlgame {

enum class ErrorCode {
  ParseError,
  DuplicateControl,
  UnknownControl,
  UnknownControlInDependency,
  UnknownRating,
  InvalidArgument,
  ExpansionLimitExceeded,
  CaseLimitExceeded,
  UnresolvedUncertainCell,
  NoFeasibleCombination,
  TooLargeForOracle,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateControl: return "DuplicateControl";
    case ErrorCode::UnknownControl: return "UnknownControl";
    case ErrorCode::UnknownControlInDependency: return "UnknownControlInDependency";
    case ErrorCode::UnknownRating: return "UnknownRating";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ExpansionLimitExceeded: return "ExpansionLimitExceeded";
    case ErrorCode::CaseLimitExceeded: return "CaseLimitExceeded";
    case ErrorCode::UnresolvedUncertainCell: return "UnresolvedUncertainCell";
    case ErrorCode::NoFeasibleCombination: return "NoFeasibleCombination";
    case ErrorCode::TooLargeForOracle: return "TooLargeForOracle";
  }
  return "Unknown";
}

/// Base of every error raised by the library. The code is stable and is what
/// callers (CLI exit codes, HTTP status mapping) switch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Input-format error with a 1-based position. `line` is the physical row in
/// CSV input (0 when unknown); `field` names the column or JSON path.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::size_t line, std::string field, const std::string& reason)
      : Error(code, format(line, field, reason)), line_(line), field_(std::move(field)) {}

  ParseError(std::size_t line, std::string field, const std::string& reason)
      : ParseError(ErrorCode::ParseError, line, std::move(field), reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(std::size_t line, const std::string& field, const std::string& reason) {
    std::string out;
    if (line > 0) out += "row " + std::to_string(line);
    if (!field.empty()) {
      if (!out.empty()) out += ", ";
      out += "column " + field;
    }
    if (!out.empty()) out += ": ";
    return out + reason;
  }

  std::size_t line_;
  std::string field_;
};

}  // namespace ctrlgame
