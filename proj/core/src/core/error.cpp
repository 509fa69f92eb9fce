#include "hallucount/core/error.hpp"

namespace hallucount {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kEmptyDocument: return "EmptyDocument";
    case ErrorCode::kEmptyTranscript: return "EmptyTranscript";
    case ErrorCode::kEmptySummary: return "EmptySummary";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kAuthFailure: return "AuthFailure";
    case ErrorCode::kFixtureMiss: return "FixtureMiss";
    case ErrorCode::kProviderFailure: return "ProviderFailure";
    case ErrorCode::kPromptOverflow: return "PromptOverflow";
    case ErrorCode::kParseFailure: return "ParseFailure";
    case ErrorCode::kNoChangeProduced: return "NoChangeProduced";
    case ErrorCode::kInsufficientOrthogonalFacts: return "InsufficientOrthogonalFacts";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kDegenerateDataset: return "DegenerateDataset";
    case ErrorCode::kMissingCategory: return "MissingCategory";
    case ErrorCode::kArityMismatch: return "ArityMismatch";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kConfig: return "Config";
  }
  return "Unknown";
}

bool is_provider_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kTimeout:
    case ErrorCode::kRateLimited:
    case ErrorCode::kAuthFailure:
    case ErrorCode::kFixtureMiss:
    case ErrorCode::kProviderFailure:
    case ErrorCode::kPromptOverflow:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ParseFailure::ParseFailure(const std::string& message, std::string raw)
    : Error(ErrorCode::kParseFailure, message), raw_(std::move(raw)) {}

SchemaViolation::SchemaViolation(std::size_t line, const std::string& message)
    : Error(ErrorCode::kSchemaViolation, "line " + std::to_string(line) + ": " + message),
      line_(line) {}

}  // namespace hallucount
