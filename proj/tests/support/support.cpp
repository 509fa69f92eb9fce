#include "support.hpp"

#include <array>
#include <chrono>
#include <fstream>
#include <sstream>

#include "hallucount/core/error.hpp"
#include "hallucount/core/text.hpp"

namespace hallucount::testing {

namespace fs = std::filesystem;

ScriptedCompletion::Fn reply_by_marker(std::vector<std::pair<std::string, std::string>> table,
                                       std::string fallback) {
  return [table = std::move(table), fallback = std::move(fallback)](const providers::CompletionRequest& r) {
    for (const auto& [marker, reply] : table) {
      if (r.prompt.find(marker) != std::string::npos) return reply;
    }
    return fallback;
  };
}

std::vector<EmbeddingVector> TableEmbedder::embed_batch(std::span<const std::string> texts) const {
  providers::check_embed_inputs(texts);
  std::vector<EmbeddingVector> out;
  for (const auto& t : texts) {
    auto it = table_.find(t);
    if (it == table_.end()) throw Error(ErrorCode::kFixtureMiss, "no vector for '" + t + "'");
    out.emplace_back(it->second);
  }
  return out;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  path_ = fs::temp_directory_path() /
          ("hallucount-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

namespace {

constexpr std::array<std::string_view, 16> kWords = {
    "knee",   "pain",  "mg",     "twice",   "daily",  "ECG",   "\"quoted\"", "back\\slash",
    "tab\there", "café", "naïve", "日本語", "–dash", "x-ray", "{brace}", "50%"};

std::string pick_word(SeededRng& rng) { return std::string(kWords[rng.below(kWords.size())]); }

Transcript random_transcript(SeededRng& rng, const std::string& id) {
  if (rng.below(2) == 0) return Transcript(id, random_text(rng) + "\n" + random_text(rng));
  std::vector<Turn> turns;
  const std::size_t n = 1 + rng.below(4);
  for (std::size_t i = 0; i < n; ++i) turns.push_back({i % 2 ? "Patient" : "Doctor", random_text(rng)});
  return Transcript::from_turns(id, std::move(turns));
}

SummaryDoc random_summary(SeededRng& rng, const std::string& id) {
  const std::string text = random_text(rng);
  if (rng.below(2) == 0) return SummaryDoc(id, text);
  std::map<std::string, std::string> sections;
  for (const char* name : {"Subjective", "Objective", "Assessment", "Plan"}) {
    if (rng.below(2) == 0) sections[name] = random_text(rng, 4);
  }
  return SummaryDoc(id, text, sections);
}

}  // namespace

std::string random_text(SeededRng& rng, std::size_t max_words) {
  std::string s = pick_word(rng);
  const std::size_t n = rng.below(max_words);
  for (std::size_t i = 0; i < n; ++i) s += " " + pick_word(rng);
  return s;
}

nlohmann::json random_extra(SeededRng& rng) {
  nlohmann::json extra = nlohmann::json::object();
  const std::size_t n = rng.below(4);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string key = "x_" + std::to_string(rng.below(1000));
    switch (rng.below(6)) {
      case 0: extra[key] = random_text(rng, 3); break;
      case 1: extra[key] = static_cast<std::int64_t>(rng.below(1u << 20)) - (1 << 19); break;
      case 2: extra[key] = rng.unit() * 1e6 - 5e5; break;
      case 3: extra[key] = rng.below(2) == 1; break;
      case 4: extra[key] = nullptr; break;
      default: extra[key] = {{"nested", {1, "two", nullptr}}, {"tag", random_text(rng, 2)}};
    }
  }
  return extra;
}

datasets::LnoRecord random_lno(SeededRng& rng, std::size_t index) {
  const std::string id = "lno-" + std::to_string(index);
  Transcript original = random_transcript(rng, id + ":t");
  std::vector<AtomicFact> removed;
  const std::size_t n = rng.below(5);
  for (std::size_t i = 0; i < n; ++i) {
    AtomicFact f{"S" + std::to_string(i + 1), random_text(rng, 5), kAllCategories[rng.below(7)],
                 rng.below(2) ? FactSource::kFromSummary : FactSource::kFromTranscript, std::nullopt};
    if (rng.below(2)) f.span = CharSpan{rng.below(50), 50 + rng.below(50)};
    removed.push_back(std::move(f));
  }
  Transcript edited = n == 0 ? original : random_transcript(rng, id + ":t:lno");
  std::vector<datasets::EditLogEntry> edits;
  for (std::size_t i = 0, k = rng.below(4); i < k; ++i) {
    edits.push_back({1 + rng.below(20), random_text(rng, 4), rng.below(2) ? random_text(rng, 4) : ""});
  }
  return {id, std::move(original), std::move(edited), random_summary(rng, id + ":s"), std::move(removed),
          std::move(edits), random_extra(rng)};
}

datasets::NhRecord random_nh(SeededRng& rng, std::size_t index) {
  const std::string id = "nh-" + std::to_string(index);
  std::vector<datasets::NhAnnotation> anns;
  for (std::size_t i = 0, k = rng.below(8); i < k; ++i) {
    datasets::NhAnnotation a{random_text(rng, 6), datasets::kAllNhLabels[rng.below(4)],
                             kAllCategories[rng.below(7)], std::nullopt};
    if (rng.below(5) == 0) a.category.reset();
    if (rng.below(2)) a.annotator_id = "ann-" + std::to_string(rng.below(5));
    anns.push_back(std::move(a));
  }
  std::optional<datasets::GeneratorMeta> meta;
  if (rng.below(3)) {
    meta = datasets::GeneratorMeta{"model-" + std::to_string(rng.below(4)),
                                   static_cast<datasets::PromptComplexity>(rng.below(3))};
  }
  return {id, random_transcript(rng, id + ":t"), random_summary(rng, id + ":s"), std::move(anns),
          std::move(meta), random_extra(rng)};
}

datasets::XsumRecord random_xsum(SeededRng& rng, std::size_t index) {
  const std::string id = "xsum-" + std::to_string(index);
  std::vector<std::vector<datasets::XsumSpan>> judgements(datasets::kXsumJudgementArity);
  for (auto& spans : judgements) {
    for (std::size_t i = 0, k = rng.below(4); i < k; ++i) {
      spans.push_back({random_text(rng, 3), rng.below(2) ? datasets::XsumKind::kIntrinsic
                                                         : datasets::XsumKind::kExtrinsic});
    }
  }
  return {id, random_transcript(rng, id + ":doc"), random_summary(rng, id + ":s"), std::move(judgements),
          random_extra(rng)};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hallucount::testing
