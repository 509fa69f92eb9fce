#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "hallucount/providers/provider.hpp"

namespace hallucount::providers {

enum class FixtureKind { kCompletion, kEmbedding };

struct FixtureEntry {
  std::string digest;
  FixtureKind kind = FixtureKind::kCompletion;
  nlohmann::json response;

  bool operator==(const FixtureEntry&) const = default;
};

/// Digest-keyed store of recorded provider responses.
///
/// On disk: one JSON object per line, {"digest", "kind", "response"} where
/// kind is "completion" (response: string) or "embedding" (response: array of
/// numbers). Lines are written sorted by (kind, digest) so a re-recorded
/// session produces an identical file.
class FixtureStore {
 public:
  FixtureStore() = default;
  FixtureStore(FixtureStore&& other) noexcept;
  FixtureStore& operator=(FixtureStore&&) = delete;

  static FixtureStore load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  /// Keeps the first response recorded for a digest; returns false on a duplicate.
  bool insert(FixtureEntry entry);

  std::optional<nlohmann::json> find(FixtureKind kind, const std::string& digest) const;

  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::pair<FixtureKind, std::string>, nlohmann::json> entries_;
};

class ReplayCompletionProvider final : public CompletionProvider {
 public:
  ReplayCompletionProvider(std::string id, std::shared_ptr<const FixtureStore> store,
                           std::optional<std::size_t> max_prompt_length = std::nullopt);

  /// Throws kFixtureMiss when the request digest was never recorded.
  std::string complete(const CompletionRequest& request) const override;
  std::string id() const override { return id_; }
  std::optional<std::size_t> max_prompt_length() const override { return max_prompt_length_; }

 private:
  std::string id_;
  std::shared_ptr<const FixtureStore> store_;
  std::optional<std::size_t> max_prompt_length_;
};

class ReplayEmbeddingProvider final : public EmbeddingProvider {
 public:
  ReplayEmbeddingProvider(std::string id, std::shared_ptr<const FixtureStore> store);

  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;
  std::string id() const override { return id_; }

 private:
  std::string id_;
  std::shared_ptr<const FixtureStore> store_;
};

/// Forwards to a live provider and records every response into a store.
class RecordingCompletionProvider final : public CompletionProvider {
 public:
  RecordingCompletionProvider(std::shared_ptr<const CompletionProvider> inner,
                              std::shared_ptr<FixtureStore> store);

  std::string complete(const CompletionRequest& request) const override;
  std::string id() const override { return inner_->id(); }
  std::optional<std::size_t> max_prompt_length() const override {
    return inner_->max_prompt_length();
  }

 private:
  std::shared_ptr<const CompletionProvider> inner_;
  std::shared_ptr<FixtureStore> store_;
};

class RecordingEmbeddingProvider final : public EmbeddingProvider {
 public:
  RecordingEmbeddingProvider(std::shared_ptr<const EmbeddingProvider> inner,
                             std::shared_ptr<FixtureStore> store);

  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;
  std::string id() const override { return inner_->id(); }

 private:
  std::shared_ptr<const EmbeddingProvider> inner_;
  std::shared_ptr<FixtureStore> store_;
};

}  // namespace hallucount::providers
