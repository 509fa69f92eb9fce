#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hallucount/core/random.hpp"
#include "hallucount/datasets/records.hpp"
#include "hallucount/providers/provider.hpp"

namespace hallucount::testing {

/// Completion provider driven by a callback; counts calls.
class ScriptedCompletion final : public providers::CompletionProvider {
 public:
  using Fn = std::function<std::string(const providers::CompletionRequest&)>;

  explicit ScriptedCompletion(Fn fn, std::string id = "scripted",
                              std::optional<std::size_t> max_prompt = std::nullopt)
      : fn_(std::move(fn)), id_(std::move(id)), max_prompt_(max_prompt) {}

  std::string complete(const providers::CompletionRequest& r) const override {
    ++calls_;
    return fn_(r);
  }
  std::string id() const override { return id_; }
  std::optional<std::size_t> max_prompt_length() const override { return max_prompt_; }
  int calls() const { return calls_; }

 private:
  Fn fn_;
  std::string id_;
  std::optional<std::size_t> max_prompt_;
  mutable std::atomic<int> calls_{0};
};

/// Answers by looking for a marker substring in the prompt; first match wins.
ScriptedCompletion::Fn reply_by_marker(std::vector<std::pair<std::string, std::string>> table,
                                       std::string fallback = "NONE");

/// Embedder with hand-set vectors; unknown strings throw.
class TableEmbedder final : public providers::EmbeddingProvider {
 public:
  explicit TableEmbedder(std::map<std::string, std::vector<double>> table) : table_(std::move(table)) {}
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;
  std::string id() const override { return "table"; }

 private:
  std::map<std::string, std::vector<double>> table_;
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Randomized records for serialization round trips. Strings mix ASCII,
// escapes (quotes, backslashes, tabs, newlines) and multi-byte UTF-8; every
// record carries a few unknown "x_*" fields of assorted JSON types.
std::string random_text(SeededRng& rng, std::size_t max_words = 12);
nlohmann::json random_extra(SeededRng& rng);
datasets::LnoRecord random_lno(SeededRng& rng, std::size_t index);
datasets::NhRecord random_nh(SeededRng& rng, std::size_t index);
datasets::XsumRecord random_xsum(SeededRng& rng, std::size_t index);

std::string read_file(const std::filesystem::path& p);

}  // namespace hallucount::testing
