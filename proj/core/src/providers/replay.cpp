#include "hallucount/providers/replay.hpp"

#include <fstream>

#include "hallucount/core/error.hpp"
#include "hallucount/core/text.hpp"
#include "hallucount/providers/digest.hpp"

namespace hallucount::providers {
namespace {

std::string_view kind_name(FixtureKind k) {
  return k == FixtureKind::kCompletion ? "completion" : "embedding";
}

FixtureKind parse_kind(const std::string& s, std::size_t line) {
  if (s == "completion") return FixtureKind::kCompletion;
  if (s == "embedding") return FixtureKind::kEmbedding;
  throw SchemaViolation(line, "unknown fixture kind '" + s + "'");
}

}  // namespace

FixtureStore::FixtureStore(FixtureStore&& other) noexcept {
  std::lock_guard lock(other.mu_);
  entries_ = std::move(other.entries_);
}

FixtureStore FixtureStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open fixture file " + path.string());
  FixtureStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaViolation(line_no, e.what());
    }
    if (!j.is_object() || !j.contains("digest") || !j.contains("kind") || !j.contains("response")) {
      throw SchemaViolation(line_no, "fixture line needs digest, kind and response");
    }
    FixtureEntry e{j["digest"].get<std::string>(), parse_kind(j["kind"].get<std::string>(), line_no),
                   j["response"]};
    if (e.kind == FixtureKind::kCompletion && !e.response.is_string()) {
      throw SchemaViolation(line_no, "completion response must be a string");
    }
    if (e.kind == FixtureKind::kEmbedding && !e.response.is_array()) {
      throw SchemaViolation(line_no, "embedding response must be an array");
    }
    store.insert(std::move(e));
  }
  return store;
}

void FixtureStore::save(const std::filesystem::path& path) const {
  std::lock_guard lock(mu_);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write fixture file " + path.string());
  for (const auto& [key, response] : entries_) {
    nlohmann::json j = {{"digest", key.second}, {"kind", kind_name(key.first)}, {"response", response}};
    out << j.dump() << '\n';
  }
}

bool FixtureStore::insert(FixtureEntry entry) {
  std::lock_guard lock(mu_);
  return entries_.emplace(std::make_pair(entry.kind, std::move(entry.digest)), std::move(entry.response))
      .second;
}

std::optional<nlohmann::json> FixtureStore::find(FixtureKind kind, const std::string& digest) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find({kind, digest});
  if (it == entries_.end()) return std::nullopt;
  return std::optional<nlohmann::json>(std::in_place, it->second);
}

std::size_t FixtureStore::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

ReplayCompletionProvider::ReplayCompletionProvider(std::string id,
                                                   std::shared_ptr<const FixtureStore> store,
                                                   std::optional<std::size_t> max_prompt_length)
    : id_(std::move(id)), store_(std::move(store)), max_prompt_length_(max_prompt_length) {}

std::string ReplayCompletionProvider::complete(const CompletionRequest& request) const {
  request.validate();
  const std::string digest = request_digest(request);
  auto hit = store_->find(FixtureKind::kCompletion, digest);
  if (!hit) throw Error(ErrorCode::kFixtureMiss, "no recorded completion for digest " + digest);
  return hit->get<std::string>();
}

ReplayEmbeddingProvider::ReplayEmbeddingProvider(std::string id,
                                                 std::shared_ptr<const FixtureStore> store)
    : id_(std::move(id)), store_(std::move(store)) {}

std::vector<EmbeddingVector> ReplayEmbeddingProvider::embed_batch(
    std::span<const std::string> texts) const {
  check_embed_inputs(texts);
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    const std::string digest = embedding_digest(t);
    auto hit = store_->find(FixtureKind::kEmbedding, digest);
    if (!hit) throw Error(ErrorCode::kFixtureMiss, "no recorded embedding for digest " + digest);
    out.emplace_back(hit->get<std::vector<double>>());
  }
  return out;
}

RecordingCompletionProvider::RecordingCompletionProvider(
    std::shared_ptr<const CompletionProvider> inner, std::shared_ptr<FixtureStore> store)
    : inner_(std::move(inner)), store_(std::move(store)) {}

std::string RecordingCompletionProvider::complete(const CompletionRequest& request) const {
  std::string response = inner_->complete(request);
  store_->insert({request_digest(request), FixtureKind::kCompletion, response});
  return response;
}

RecordingEmbeddingProvider::RecordingEmbeddingProvider(
    std::shared_ptr<const EmbeddingProvider> inner, std::shared_ptr<FixtureStore> store)
    : inner_(std::move(inner)), store_(std::move(store)) {}

std::vector<EmbeddingVector> RecordingEmbeddingProvider::embed_batch(
    std::span<const std::string> texts) const {
  auto vectors = inner_->embed_batch(texts);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto v = vectors[i].values();
    store_->insert({embedding_digest(texts[i]), FixtureKind::kEmbedding,
                    nlohmann::json(std::vector<double>(v.begin(), v.end()))});
  }
  return vectors;
}

}  // namespace hallucount::providers
