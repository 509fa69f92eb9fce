#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "hallucount/providers/provider.hpp"

namespace hallucount::providers {

inline constexpr std::size_t kMinHashDim = 16;

/// Bucket a token lands in for a given dimension (exposed for collision checks).
std::size_t hash_bucket(std::string_view token, std::size_t dim);

/// Bag-of-words feature hashing: lowercase, split on non-alphanumeric runs,
/// count tokens into dim buckets with a fixed salt, unit-normalize.
/// Throws kInvalidArgument for dim < 16 and kZeroVector when there are no tokens.
EmbeddingVector hash_embed(std::string_view text, std::size_t dim);

/// Offline deterministic embedder built on hash_embed.
class HashEmbedder final : public EmbeddingProvider {
 public:
  explicit HashEmbedder(std::size_t dim = 256, std::string id = "hash");

  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;
  std::string id() const override { return id_; }
  std::size_t dim() const { return dim_; }

 private:
  std::size_t dim_;
  std::string id_;
};

}  // namespace hallucount::providers
