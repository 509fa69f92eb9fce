#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "hallucount/providers/provider.hpp"
#include "hallucount/providers/rate_limiter.hpp"

namespace hallucount::providers {

/// Connection settings for an HTTP backend. The secret itself is never stored
/// here: credential_ref names the environment variable that holds it, and it
/// is read only when a request is sent.
struct ProviderConfig {
  std::string endpoint;        // e.g. "http://localhost:8080/v1/complete"
  std::string credential_ref;  // env var name; empty means no Authorization header
  std::optional<std::string> model;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;
  std::size_t requests_per_minute = 60;
  std::chrono::milliseconds backoff_base{500};
  std::optional<std::size_t> max_prompt_length;

  void validate() const;

  bool operator==(const ProviderConfig&) const = default;
};

void to_json(nlohmann::json& j, const ProviderConfig& c);
void from_json(const nlohmann::json& j, ProviderConfig& c);

/// Blocking JSON-over-HTTP transport shared by the remote providers.
///
/// Retries 429, 5xx and transport timeouts with exponential backoff plus
/// jitter; 401/403 fail immediately with kAuthFailure. Error messages never
/// contain the credential value.
class HttpTransport {
 public:
  explicit HttpTransport(ProviderConfig config, LimiterClock clock = {});
  ~HttpTransport();

  nlohmann::json post(const nlohmann::json& body) const;

  const ProviderConfig& config() const { return config_; }

 private:
  struct Impl;
  ProviderConfig config_;
  std::unique_ptr<Impl> impl_;
};

/// Request body: {"prompt", "max_tokens", "temperature", "seed"?, "model"?}.
/// Accepted response shapes: {"text": s}, {"completion": s} or
/// {"choices": [{"text": s}]}.
class RemoteCompletionProvider final : public CompletionProvider {
 public:
  RemoteCompletionProvider(std::string id, ProviderConfig config, LimiterClock clock = {});

  std::string complete(const CompletionRequest& request) const override;
  std::string id() const override { return id_; }
  std::optional<std::size_t> max_prompt_length() const override;

 private:
  std::string id_;
  HttpTransport transport_;
};

/// Request body: {"input": [..], "model"?}. Accepted response shapes:
/// {"embeddings": [[..], ..]} or {"data": [{"embedding": [..]}, ..]}.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
 public:
  RemoteEmbeddingProvider(std::string id, ProviderConfig config, LimiterClock clock = {});

  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;
  std::string id() const override { return id_; }

 private:
  std::string id_;
  HttpTransport transport_;
};

}  // namespace hallucount::providers
