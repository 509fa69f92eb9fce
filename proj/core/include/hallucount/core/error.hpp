#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hallucount {

enum class ErrorCode {
  kInvalidArgument,
  kZeroVector,
  kDimensionMismatch,
  kEmptyInput,
  kEmptyDocument,
  kEmptyTranscript,
  kEmptySummary,
  // provider failures
  kTimeout,
  kRateLimited,
  kAuthFailure,
  kFixtureMiss,
  kProviderFailure,
  kPromptOverflow,
  // parsing / alignment
  kParseFailure,
  kNoChangeProduced,
  kInsufficientOrthogonalFacts,
  // statistics
  kTooFewSamples,
  kDegenerateDataset,
  // data
  kMissingCategory,
  kArityMismatch,
  kSchemaViolation,
  kVersionMismatch,
  kIo,
  kConfig,
};

std::string_view to_string(ErrorCode code);

/// True for failures raised by a completion or embedding backend.
bool is_provider_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Unparseable model output. Keeps the raw completion so a repair prompt can
/// quote it back to the model.
class ParseFailure : public Error {
 public:
  ParseFailure(const std::string& message, std::string raw);

  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class SchemaViolation : public Error {
 public:
  SchemaViolation(std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace hallucount
