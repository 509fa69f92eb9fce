#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hallucount/datasets/jsonl.hpp"
#include "hallucount/detectors/detector.hpp"
#include "hallucount/eval/eval.hpp"
#include "hallucount/providers/provider.hpp"
#include "hallucount/providers/replay.hpp"

namespace hallucount::cli {

/// Provider kinds: "hash-embedding" {dim}, "replay" {fixture[, max_prompt_length]},
/// "remote-completion" / "remote-embedding" {endpoint, credential_ref, ...},
/// "recording" {inner, fixture}.
struct ProviderEntry {
  std::string kind;
  nlohmann::json settings = nlohmann::json::object();
};

struct DatasetEntry {
  std::filesystem::path path;  // as written in the config
  datasets::SchemaKind schema = datasets::SchemaKind::kLno;
};

struct EvalSettings {
  int trials = 3;
  std::size_t bootstrap_resamples = eval::kDefaultResamples;
  std::optional<std::uint64_t> seed;
  std::vector<eval::SeverityFilter> severity_filters = {eval::SeverityFilter::kAll,
                                                        eval::SeverityFilter::kHighSeverity};
};

struct RunConfig {
  std::map<std::string, ProviderEntry> providers;
  std::vector<detectors::DetectorSpec> detectors;
  std::map<std::string, DatasetEntry> datasets;
  EvalSettings eval;
  std::filesystem::path output_dir = "out";
  std::filesystem::path base_dir = ".";  // relative config paths resolve here

  /// Throws kConfig. Keys that look like inline credentials are rejected
  /// anywhere in the document.
  static RunConfig from_json(const nlohmann::json& j, std::filesystem::path base_dir);
  static RunConfig load(const std::filesystem::path& path);

  /// Provider references resolve and fit the detector kinds; seed is set.
  void validate() const;

  nlohmann::json to_json() const;
  /// SHA-256 over the canonical JSON form (after flag overrides).
  std::string hash() const;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  std::filesystem::path output_path(const std::filesystem::path& name) const;

  const detectors::DetectorSpec& detector(const std::string& id) const;
  const DatasetEntry& dataset(const std::string& id) const;
};

/// Builds providers on first use so fixtures produced mid-pipeline can be
/// referenced before they exist. Thread-safe.
class ProviderRegistry {
 public:
  explicit ProviderRegistry(const RunConfig& config);

  std::shared_ptr<const providers::CompletionProvider> completion(const std::string& id);
  std::shared_ptr<const providers::EmbeddingProvider> embedding(const std::string& id);

  /// Writes every recording provider's fixture file.
  void flush();

 private:
  std::shared_ptr<providers::FixtureStore> fixture(const std::filesystem::path& path);
  std::shared_ptr<providers::FixtureStore> recording_store(const std::string& id);

  const RunConfig& config_;
  std::recursive_mutex mu_;
  std::map<std::string, std::shared_ptr<const providers::CompletionProvider>> completions_;
  std::map<std::string, std::shared_ptr<const providers::EmbeddingProvider>> embeddings_;
  std::map<std::filesystem::path, std::shared_ptr<providers::FixtureStore>> fixtures_;
  std::map<std::string, std::shared_ptr<providers::FixtureStore>> recordings_;
};

detectors::DetectorSpec detector_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const detectors::DetectorSpec& spec);

}  // namespace hallucount::cli
