#include "config.hpp"

#include <cctype>
#include <fstream>
#include <set>

#include "hallucount/core/error.hpp"
#include "hallucount/providers/digest.hpp"
#include "hallucount/providers/hash_embedder.hpp"
#include "hallucount/providers/remote.hpp"

namespace hallucount::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::kConfig, msg); }

bool looks_like_secret(std::string key) {
  for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (const char* bad : {"api_key", "apikey", "secret", "password", "token", "authorization", "bearer"}) {
    if (key.find(bad) != std::string::npos) return true;
  }
  return false;
}

void reject_inline_secrets(const json& j, const std::string& where) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (looks_like_secret(it.key())) {
        config_error("config key '" + where + it.key() +
                     "' looks like a credential; name an environment variable in credential_ref instead");
      }
      reject_inline_secrets(it.value(), where + it.key() + ".");
    }
  } else if (j.is_array()) {
    for (const json& v : j) reject_inline_secrets(v, where);
  }
}

const std::set<std::string> kProviderKinds = {"hash-embedding", "replay", "remote-completion",
                                              "remote-embedding", "recording"};

bool can_complete(const RunConfig& c, const std::string& id, int depth = 0) {
  auto it = c.providers.find(id);
  if (it == c.providers.end() || depth > 8) return false;
  const std::string& k = it->second.kind;
  if (k == "recording") return can_complete(c, it->second.settings.value("inner", ""), depth + 1);
  return k == "replay" || k == "remote-completion";
}

bool can_embed(const RunConfig& c, const std::string& id, int depth = 0) {
  auto it = c.providers.find(id);
  if (it == c.providers.end() || depth > 8) return false;
  const std::string& k = it->second.kind;
  if (k == "recording") return can_embed(c, it->second.settings.value("inner", ""), depth + 1);
  return k == "replay" || k == "hash-embedding" || k == "remote-embedding";
}

}  // namespace

detectors::DetectorSpec detector_spec_from_json(const json& j) {
  detectors::DetectorSpec s;
  s.id = j.at("id").get<std::string>();
  const std::string kind = j.at("kind").get<std::string>();
  auto k = detectors::detector_kind_from_string(kind);
  if (!k) config_error("detector '" + s.id + "': unknown kind '" + kind + "'");
  s.kind = *k;
  if (j.contains("threshold")) s.threshold = j["threshold"].get<double>();
  else if (detectors::uses_embeddings(s.kind)) s.threshold = detectors::kDefaultThreshold;
  s.completion_provider = j.value("completion_provider", std::string{});
  s.embedding_provider = j.value("embedding_provider", std::string{});
  s.trial_seed = j.value("trial_seed", std::int64_t{0});
  if (auto p = j.find("prompt"); p != j.end()) {
    s.prompt.max_output_length = p->value("max_output_length", s.prompt.max_output_length);
    s.prompt.temperature = p->value("temperature", s.prompt.temperature);
    s.prompt.max_repairs = p->value("max_repairs", s.prompt.max_repairs);
  }
  return s;
}

json to_json(const detectors::DetectorSpec& s) {
  json j = {{"id", s.id},
            {"kind", detectors::to_string(s.kind)},
            {"trial_seed", s.trial_seed},
            {"prompt",
             {{"max_output_length", s.prompt.max_output_length},
              {"temperature", s.prompt.temperature},
              {"max_repairs", s.prompt.max_repairs}}}};
  if (s.threshold) j["threshold"] = *s.threshold;
  if (!s.completion_provider.empty()) j["completion_provider"] = s.completion_provider;
  if (!s.embedding_provider.empty()) j["embedding_provider"] = s.embedding_provider;
  return j;
}

RunConfig RunConfig::from_json(const json& j, fs::path base_dir) {
  if (!j.is_object()) config_error("run config must be a JSON object");
  reject_inline_secrets(j, "");
  RunConfig c;
  c.base_dir = std::move(base_dir);
  try {
    if (auto p = j.find("providers"); p != j.end()) {
      for (auto it = p->begin(); it != p->end(); ++it) {
        ProviderEntry e{it.value().at("kind").get<std::string>(), it.value()};
        e.settings.erase("kind");
        if (!kProviderKinds.count(e.kind)) config_error("provider '" + it.key() + "': unknown kind '" + e.kind + "'");
        c.providers[it.key()] = std::move(e);
      }
    }
    if (auto d = j.find("detectors"); d != j.end()) {
      for (const json& s : *d) c.detectors.push_back(detector_spec_from_json(s));
    }
    if (auto d = j.find("datasets"); d != j.end()) {
      for (auto it = d->begin(); it != d->end(); ++it) {
        const std::string schema = it.value().at("schema").get<std::string>();
        auto kind = datasets::schema_kind_from_string(schema);
        if (!kind) config_error("dataset '" + it.key() + "': unknown schema '" + schema + "'");
        c.datasets[it.key()] = {it.value().at("path").get<std::string>(), *kind};
      }
    }
    if (auto e = j.find("eval"); e != j.end()) {
      c.eval.trials = e->value("trials", c.eval.trials);
      c.eval.bootstrap_resamples = e->value("bootstrap_resamples", c.eval.bootstrap_resamples);
      if (e->contains("seed")) c.eval.seed = (*e)["seed"].get<std::uint64_t>();
      if (auto f = e->find("severity_filters"); f != e->end()) {
        c.eval.severity_filters.clear();
        for (const json& v : *f) {
          auto sf = eval::severity_filter_from_string(v.get<std::string>());
          if (!sf) config_error("unknown severity filter '" + v.get<std::string>() + "'");
          c.eval.severity_filters.push_back(*sf);
        }
      }
    }
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  } catch (const json::exception& e) {
    config_error(std::string("malformed run config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    config_error("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

void RunConfig::validate() const {
  if (!eval.seed) config_error("eval.seed is required for reproducible runs");
  if (eval.trials < 1) config_error("eval.trials must be >= 1");
  if (eval.bootstrap_resamples < eval::kMinResamples) {
    config_error("eval.bootstrap_resamples must be >= " + std::to_string(eval::kMinResamples));
  }
  std::set<std::string> ids;
  for (const auto& d : detectors) {
    if (!ids.insert(d.id).second) config_error("duplicate detector id '" + d.id + "'");
    d.validate();
    if (detectors::uses_completion(d.kind) && !can_complete(*this, d.completion_provider)) {
      config_error("detector '" + d.id + "': '" + d.completion_provider + "' is not a completion provider");
    }
    if (detectors::uses_embeddings(d.kind) && !can_embed(*this, d.embedding_provider)) {
      config_error("detector '" + d.id + "': '" + d.embedding_provider + "' is not an embedding provider");
    }
  }
  for (const auto& [id, p] : providers) {
    if (p.kind == "recording" && !providers.count(p.settings.value("inner", ""))) {
      config_error("recording provider '" + id + "' wraps unknown provider");
    }
  }
}

json RunConfig::to_json() const {
  json provs = json::object();
  for (const auto& [id, p] : providers) {
    json e = p.settings;
    e["kind"] = p.kind;
    provs[id] = std::move(e);
  }
  json dets = json::array();
  for (const auto& d : detectors) dets.push_back(cli::to_json(d));
  json data = json::object();
  for (const auto& [id, d] : datasets) {
    data[id] = {{"path", d.path.generic_string()}, {"schema", datasets::to_string(d.schema)}};
  }
  json filters = json::array();
  for (auto f : eval.severity_filters) filters.push_back(eval::to_string(f));
  json ev = {{"trials", eval.trials},
             {"bootstrap_resamples", eval.bootstrap_resamples},
             {"severity_filters", std::move(filters)}};
  if (eval.seed) ev["seed"] = *eval.seed;
  return {{"providers", std::move(provs)},
          {"detectors", std::move(dets)},
          {"datasets", std::move(data)},
          {"eval", std::move(ev)},
          {"output_dir", output_dir.generic_string()}};
}

std::string RunConfig::hash() const { return providers::sha256_hex(to_json().dump()); }

fs::path RunConfig::resolve(const fs::path& p) const { return p.is_absolute() ? p : base_dir / p; }

fs::path RunConfig::output_path(const fs::path& name) const { return resolve(output_dir) / name; }

const detectors::DetectorSpec& RunConfig::detector(const std::string& id) const {
  for (const auto& d : detectors) {
    if (d.id == id) return d;
  }
  config_error("unknown detector '" + id + "'");
}

const DatasetEntry& RunConfig::dataset(const std::string& id) const {
  auto it = datasets.find(id);
  if (it == datasets.end()) config_error("unknown dataset '" + id + "'");
  return it->second;
}

// ---------------------------------------------------------------------------

ProviderRegistry::ProviderRegistry(const RunConfig& config) : config_(config) {}

std::shared_ptr<providers::FixtureStore> ProviderRegistry::fixture(const fs::path& path) {
  auto& slot = fixtures_[path];
  if (!slot) slot = std::make_shared<providers::FixtureStore>(providers::FixtureStore::load(path));
  return slot;
}

std::shared_ptr<providers::FixtureStore> ProviderRegistry::recording_store(const std::string& id) {
  auto& slot = recordings_[id];
  if (!slot) {
    const fs::path path = config_.resolve(config_.providers.at(id).settings.at("fixture").get<std::string>());
    // extend an existing session rather than start over
    slot = std::make_shared<providers::FixtureStore>(fs::exists(path) ? providers::FixtureStore::load(path)
                                                                      : providers::FixtureStore());
  }
  return slot;
}

std::shared_ptr<const providers::CompletionProvider> ProviderRegistry::completion(const std::string& id) {
  std::lock_guard lock(mu_);
  if (auto it = completions_.find(id); it != completions_.end()) return it->second;
  auto p = config_.providers.find(id);
  if (p == config_.providers.end()) config_error("unknown provider '" + id + "'");
  const ProviderEntry& e = p->second;
  std::shared_ptr<const providers::CompletionProvider> out;
  try {
    if (e.kind == "replay") {
      std::optional<std::size_t> limit;
      if (e.settings.contains("max_prompt_length")) limit = e.settings["max_prompt_length"].get<std::size_t>();
      out = std::make_shared<providers::ReplayCompletionProvider>(
          id, fixture(config_.resolve(e.settings.at("fixture").get<std::string>())), limit);
    } else if (e.kind == "remote-completion") {
      out = std::make_shared<providers::RemoteCompletionProvider>(id, e.settings.get<providers::ProviderConfig>());
    } else if (e.kind == "recording") {
      out = std::make_shared<providers::RecordingCompletionProvider>(
          completion(e.settings.at("inner").get<std::string>()), recording_store(id));
    } else {
      config_error("provider '" + id + "' (" + e.kind + ") cannot complete prompts");
    }
  } catch (const json::exception& ex) {
    config_error("provider '" + id + "': " + ex.what());
  }
  completions_[id] = out;
  return out;
}

std::shared_ptr<const providers::EmbeddingProvider> ProviderRegistry::embedding(const std::string& id) {
  std::lock_guard lock(mu_);
  if (auto it = embeddings_.find(id); it != embeddings_.end()) return it->second;
  auto p = config_.providers.find(id);
  if (p == config_.providers.end()) config_error("unknown provider '" + id + "'");
  const ProviderEntry& e = p->second;
  std::shared_ptr<const providers::EmbeddingProvider> out;
  try {
    if (e.kind == "hash-embedding") {
      out = std::make_shared<providers::HashEmbedder>(e.settings.value("dim", std::size_t{256}), id);
    } else if (e.kind == "replay") {
      out = std::make_shared<providers::ReplayEmbeddingProvider>(
          id, fixture(config_.resolve(e.settings.at("fixture").get<std::string>())));
    } else if (e.kind == "remote-embedding") {
      out = std::make_shared<providers::RemoteEmbeddingProvider>(id, e.settings.get<providers::ProviderConfig>());
    } else if (e.kind == "recording") {
      out = std::make_shared<providers::RecordingEmbeddingProvider>(
          embedding(e.settings.at("inner").get<std::string>()), recording_store(id));
    } else {
      config_error("provider '" + id + "' (" + e.kind + ") cannot embed text");
    }
  } catch (const json::exception& ex) {
    config_error("provider '" + id + "': " + ex.what());
  }
  embeddings_[id] = out;
  return out;
}

void ProviderRegistry::flush() {
  std::lock_guard lock(mu_);
  for (const auto& [id, store] : recordings_) {
    store->save(config_.resolve(config_.providers.at(id).settings.at("fixture").get<std::string>()));
  }
}

}  // namespace hallucount::cli
