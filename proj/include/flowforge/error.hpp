#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flowforge {

// Machine-readable failure categories. The string form (to_string) is the
// stable code surfaced by the HTTP API and the CLI diagnostics.
enum class ErrorCode {
  MalformedDocument,
  DanglingConnection,
  UnsupportedFormat,
  MissingPosition,
  DuplicateNodeName,
  InvalidGraph,
  InvalidSegment,
  AnnotatorUnavailable,
  AnnotatorViolation,
  ProviderUnavailable,
  StorageFailure,
  NotFound,
  EmptyRequirement,
  AnalyzerViolation,
  GeneratorUnavailable,
  AssemblyFailure,
  UnsupportedPlatform,
  CorpusError,
  BindFailure,
  InvalidArgument,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::MalformedDocument: return "MalformedDocument";
  case ErrorCode::DanglingConnection: return "DanglingConnection";
  case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
  case ErrorCode::MissingPosition: return "MissingPosition";
  case ErrorCode::DuplicateNodeName: return "DuplicateNodeName";
  case ErrorCode::InvalidGraph: return "InvalidGraph";
  case ErrorCode::InvalidSegment: return "InvalidSegment";
  case ErrorCode::AnnotatorUnavailable: return "AnnotatorUnavailable";
  case ErrorCode::AnnotatorViolation: return "AnnotatorViolation";
  case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
  case ErrorCode::StorageFailure: return "StorageFailure";
  case ErrorCode::NotFound: return "NotFound";
  case ErrorCode::EmptyRequirement: return "EmptyRequirement";
  case ErrorCode::AnalyzerViolation: return "AnalyzerViolation";
  case ErrorCode::GeneratorUnavailable: return "GeneratorUnavailable";
  case ErrorCode::AssemblyFailure: return "AssemblyFailure";
  case ErrorCode::UnsupportedPlatform: return "UnsupportedPlatform";
  case ErrorCode::CorpusError: return "CorpusError";
  case ErrorCode::BindFailure: return "BindFailure";
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code), detail_(message) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] const std::string &detail() const noexcept { return detail_; }

private:
  ErrorCode code_;
  std::string detail_;
};

} // namespace flowforge
