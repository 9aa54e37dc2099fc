#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vcm {

enum class ErrorCode {
  BadMagic,
  BadVersion,
  UnsupportedDtype,
  TruncatedFile,
  SizeMismatch,
  DimOverflow,
  IoFailure,
  ParseError,
  InvariantViolation,
  EmptyGroundTruth,
  DimMismatch,
  DomainError,
  ZeroPixels,
  ZeroFrames,
  EmptyCurve,
  EmptyAfterCutoff,
  NoOverlap,
  DegenerateCurve,
  UnitMismatch,
  DegenerateRange,
  BadParams,
  WrongChannelCount,
  CorruptStream,
  CommandNotFound,
  CommandFailed,
  OutputMissing,
  DimChanged,
  ConfigError,
};

inline constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::BadVersion: return "BadVersion";
    case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::DimOverflow: return "DimOverflow";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::ZeroPixels: return "ZeroPixels";
    case ErrorCode::ZeroFrames: return "ZeroFrames";
    case ErrorCode::EmptyCurve: return "EmptyCurve";
    case ErrorCode::EmptyAfterCutoff: return "EmptyAfterCutoff";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::DegenerateCurve: return "DegenerateCurve";
    case ErrorCode::UnitMismatch: return "UnitMismatch";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::WrongChannelCount: return "WrongChannelCount";
    case ErrorCode::CorruptStream: return "CorruptStream";
    case ErrorCode::CommandNotFound: return "CommandFailed";
    case ErrorCode::CommandFailed: return "CommandFailed";
    case ErrorCode::OutputMissing: return "OutputMissing";
    case ErrorCode::DimChanged: return "DimChanged";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable code.
/// what() is "<CodeName>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Same code, with context prepended to the detail.
  Error with_context(const std::string& context) const { return Error(code_, context + ": " + detail_); }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

/// Process exit status for a failure: 3 when an external command ran and failed,
/// 2 for every input or contract error.
inline int exit_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::CommandFailed:
    case ErrorCode::OutputMissing:
    case ErrorCode::DimChanged:
      return 3;
    default:
      return 2;
  }
}

}  // namespace vcm
