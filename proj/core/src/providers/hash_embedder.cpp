#include "hallucount/providers/hash_embedder.hpp"

#include "hallucount/core/error.hpp"
#include "hallucount/core/text.hpp"

namespace hallucount::providers {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
constexpr std::string_view kSalt = "hallucount/hash-embed/v1:";

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace

std::size_t hash_bucket(std::string_view token, std::size_t dim) {
  const std::uint64_t h = fnv1a(fnv1a(kFnvOffset, kSalt), token);
  // fold the high bits in; FNV's low bits are weak for small moduli
  return static_cast<std::size_t>((h ^ (h >> 29)) % dim);
}

EmbeddingVector hash_embed(std::string_view text, std::size_t dim) {
  if (dim < kMinHashDim) {
    throw Error(ErrorCode::kInvalidArgument, "hash_embed dim must be >= 16");
  }
  const auto tokens = text::word_tokens(text);
  if (tokens.empty()) throw Error(ErrorCode::kZeroVector, "text has no tokens");
  std::vector<double> counts(dim, 0.0);
  for (const auto& t : tokens) counts[hash_bucket(t, dim)] += 1.0;
  return unit_normalize(EmbeddingVector(std::move(counts)));
}

HashEmbedder::HashEmbedder(std::size_t dim, std::string id) : dim_(dim), id_(std::move(id)) {
  if (dim_ < kMinHashDim) throw Error(ErrorCode::kInvalidArgument, "hash embedder dim must be >= 16");
}

std::vector<EmbeddingVector> HashEmbedder::embed_batch(std::span<const std::string> texts) const {
  check_embed_inputs(texts);
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(hash_embed(t, dim_));
  return out;
}

}  // namespace hallucount::providers
