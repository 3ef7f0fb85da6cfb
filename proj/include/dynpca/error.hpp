#pragma once

#include <stdexcept>
#include <string>

namespace dynpca {

enum class ErrorCode {
  NonFinite,
  NoConvergence,
  EmptyResult,
  NotUnit,
  Degenerate,
  ApexOutside,
  KindMismatch,
  NotPresent,
  EmptyGrid,
  EmptyInput,
  InvalidArgument,
  Parse,
  DimensionMismatch,
  IndexOutOfRange,
  Io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::EmptyResult: return "EmptyResult";
    case ErrorCode::NotUnit: return "NotUnit";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::ApexOutside: return "ApexOutside";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::NotPresent: return "NotPresent";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
/// `line()` is non-zero only for errors raised while parsing text input.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::size_t line = 0)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::size_t line_;
};

}  // namespace dynpca
