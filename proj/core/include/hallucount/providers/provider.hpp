#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hallucount/core/embedding.hpp"

namespace hallucount::providers {

struct CompletionRequest {
  std::string prompt;
  std::size_t max_output_length = 2048;
  double temperature = 0.0;
  std::optional<std::int64_t> seed;

  /// Throws kInvalidArgument on an empty prompt, zero length or negative temperature.
  void validate() const;

  bool operator==(const CompletionRequest&) const = default;
};

/// Text completion backend. Implementations must accept concurrent calls.
class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;

  virtual std::string complete(const CompletionRequest& request) const = 0;

  virtual std::string id() const = 0;

  /// Longest prompt (in bytes) the backend accepts, if it has a limit.
  virtual std::optional<std::size_t> max_prompt_length() const { return std::nullopt; }
};

/// Text embedding backend. Implementations must accept concurrent calls and
/// return identical vectors for identical strings.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  /// One vector per input, same order, equal dims. Throws kEmptyInput for an
  /// empty batch or an empty string.
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const = 0;

  virtual std::string id() const = 0;
};

/// Shared precondition check for embed_batch implementations.
void check_embed_inputs(std::span<const std::string> texts);

}  // namespace hallucount::providers
