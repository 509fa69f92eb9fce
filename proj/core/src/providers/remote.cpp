#include "hallucount/providers/remote.hpp"

#include <cstdlib>
#include <random>
#include <regex>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "hallucount/core/error.hpp"
#include "hallucount/core/random.hpp"

namespace hallucount::providers {
namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw Error(ErrorCode::kConfig, "endpoint must be an http(s) URL: '" + url + "'");
  }
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

std::string redact(std::string msg, const std::string& secret) {
  if (secret.empty()) return msg;
  for (auto pos = msg.find(secret); pos != std::string::npos; pos = msg.find(secret, pos)) {
    msg.replace(pos, secret.size(), "***");
  }
  return msg;
}

}  // namespace

void ProviderConfig::validate() const {
  parse_url(endpoint);
  if (timeout.count() <= 0) throw Error(ErrorCode::kConfig, "timeout must be positive");
  if (max_retries < 0 || max_retries > 10) throw Error(ErrorCode::kConfig, "max_retries must be in [0, 10]");
  if (requests_per_minute == 0) throw Error(ErrorCode::kConfig, "requests_per_minute must be positive");
}

void to_json(nlohmann::json& j, const ProviderConfig& c) {
  j = {{"endpoint", c.endpoint},
       {"credential_ref", c.credential_ref},
       {"timeout_ms", c.timeout.count()},
       {"max_retries", c.max_retries},
       {"requests_per_minute", c.requests_per_minute},
       {"backoff_base_ms", c.backoff_base.count()}};
  if (c.model) j["model"] = *c.model;
  if (c.max_prompt_length) j["max_prompt_length"] = *c.max_prompt_length;
}

void from_json(const nlohmann::json& j, ProviderConfig& c) {
  c.endpoint = j.at("endpoint").get<std::string>();
  c.credential_ref = j.value("credential_ref", std::string{});
  if (j.contains("model")) c.model = j["model"].get<std::string>();
  c.timeout = std::chrono::milliseconds(j.value("timeout_ms", 30000));
  c.max_retries = j.value("max_retries", 3);
  c.requests_per_minute = j.value("requests_per_minute", std::size_t{60});
  c.backoff_base = std::chrono::milliseconds(j.value("backoff_base_ms", 500));
  if (j.contains("max_prompt_length")) c.max_prompt_length = j["max_prompt_length"].get<std::size_t>();
  if (j.contains("api_key") || j.contains("secret")) {
    throw Error(ErrorCode::kConfig, "secrets may not appear in config; use credential_ref");
  }
}

struct HttpTransport::Impl {
  Impl(const ProviderConfig& c, LimiterClock clock)
      : url(parse_url(c.endpoint)),
        sleep(clock.sleep),
        limiter(RateLimiter::per_minute(c.requests_per_minute, std::move(clock))),
        jitter_rng(std::random_device{}()) {}

  ParsedUrl url;
  std::function<void(LimiterClock::duration)> sleep;
  RateLimiter limiter;
  std::mutex jitter_mu;
  SeededRng jitter_rng;

  std::chrono::milliseconds backoff(std::chrono::milliseconds base, int attempt) {
    std::lock_guard lock(jitter_mu);
    const auto exp = base * (1LL << attempt);
    return exp + std::chrono::milliseconds(
                     static_cast<long long>(jitter_rng.unit() * static_cast<double>(base.count())));
  }
};

HttpTransport::HttpTransport(ProviderConfig config, LimiterClock clock)
    : config_(std::move(config)) {
  config_.validate();
  impl_ = std::make_unique<Impl>(config_, std::move(clock));
}

HttpTransport::~HttpTransport() = default;

nlohmann::json HttpTransport::post(const nlohmann::json& body) const {
  std::string secret;
  if (!config_.credential_ref.empty()) {
    const char* v = std::getenv(config_.credential_ref.c_str());
    if (v == nullptr || *v == '\0') {
      throw Error(ErrorCode::kAuthFailure,
                  "environment variable " + config_.credential_ref + " is not set");
    }
    secret = v;
  }

  const std::string payload = body.dump();
  ErrorCode last_code = ErrorCode::kProviderFailure;
  std::string last_msg;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) impl_->sleep(impl_->backoff(config_.backoff_base, attempt - 1));
    impl_->limiter.acquire();

    httplib::Client client(impl_->url.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!secret.empty()) headers.emplace("Authorization", "Bearer " + secret);

    auto res = client.Post(impl_->url.path, headers, payload, "application/json");
    if (!res) {
      const auto err = res.error();
      last_code = (err == httplib::Error::Read || err == httplib::Error::Write ||
                   err == httplib::Error::ConnectionTimeout)
                      ? ErrorCode::kTimeout
                      : ErrorCode::kProviderFailure;
      last_msg = "transport error: " + httplib::to_string(err);
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw Error(ErrorCode::kAuthFailure,
                  redact("endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")",
                         secret));
    }
    if (res->status == 429) {
      last_code = ErrorCode::kRateLimited;
      last_msg = "HTTP 429 after " + std::to_string(attempt + 1) + " attempt(s)";
      continue;
    }
    if (res->status >= 500) {
      last_code = ErrorCode::kProviderFailure;
      last_msg = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error(ErrorCode::kProviderFailure,
                  redact("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200),
                         secret));
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
      throw Error(ErrorCode::kProviderFailure, "response body is not JSON");
    }
  }
  throw Error(last_code, redact(last_msg, secret));
}

RemoteCompletionProvider::RemoteCompletionProvider(std::string id, ProviderConfig config,
                                                   LimiterClock clock)
    : id_(std::move(id)), transport_(std::move(config), std::move(clock)) {}

std::optional<std::size_t> RemoteCompletionProvider::max_prompt_length() const {
  return transport_.config().max_prompt_length;
}

std::string RemoteCompletionProvider::complete(const CompletionRequest& request) const {
  request.validate();
  nlohmann::json body = {{"prompt", request.prompt},
                         {"max_tokens", request.max_output_length},
                         {"temperature", request.temperature}};
  if (request.seed) body["seed"] = *request.seed;
  if (transport_.config().model) body["model"] = *transport_.config().model;
  const nlohmann::json res = transport_.post(body);
  if (res.contains("text") && res["text"].is_string()) return res["text"].get<std::string>();
  if (res.contains("completion") && res["completion"].is_string()) {
    return res["completion"].get<std::string>();
  }
  if (res.contains("choices") && res["choices"].is_array() && !res["choices"].empty() &&
      res["choices"][0].contains("text")) {
    return res["choices"][0]["text"].get<std::string>();
  }
  throw Error(ErrorCode::kProviderFailure, "completion response has no text field");
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(std::string id, ProviderConfig config,
                                                 LimiterClock clock)
    : id_(std::move(id)), transport_(std::move(config), std::move(clock)) {}

std::vector<EmbeddingVector> RemoteEmbeddingProvider::embed_batch(
    std::span<const std::string> texts) const {
  check_embed_inputs(texts);
  nlohmann::json body = {{"input", std::vector<std::string>(texts.begin(), texts.end())}};
  if (transport_.config().model) body["model"] = *transport_.config().model;
  const nlohmann::json res = transport_.post(body);

  std::vector<EmbeddingVector> out;
  if (res.contains("embeddings")) {
    for (const auto& v : res["embeddings"]) out.emplace_back(v.get<std::vector<double>>());
  } else if (res.contains("data")) {
    for (const auto& item : res["data"]) {
      out.emplace_back(item.at("embedding").get<std::vector<double>>());
    }
  } else {
    throw Error(ErrorCode::kProviderFailure, "embedding response has no vectors");
  }
  if (out.size() != texts.size()) {
    throw Error(ErrorCode::kProviderFailure, "embedding count does not match input count");
  }
  for (const auto& v : out) {
    if (v.dim() != out.front().dim()) {
      throw Error(ErrorCode::kDimensionMismatch, "backend returned mixed embedding dims");
    }
  }
  return out;
}

}  // namespace hallucount::providers
