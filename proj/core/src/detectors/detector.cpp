#include "hallucount/detectors/detector.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>
#include <unordered_map>

#include "hallucount/core/error.hpp"
#include "hallucount/core/text.hpp"
#include "hallucount/detectors/sentences.hpp"
#include "hallucount/facts/prompts.hpp"

namespace hallucount::detectors {
namespace {

using facts::FactSet;
using nlohmann::json;
using providers::CompletionProvider;
using providers::EmbeddingProvider;

constexpr std::array<std::pair<DetectorKind, std::string_view>, 7> kKindNames = {{
    {DetectorKind::kSinglePromptCount, "single_prompt_count"},
    {DetectorKind::kSinglePromptList, "single_prompt_list"},
    {DetectorKind::kFactAlignLlm, "fact_align_llm"},
    {DetectorKind::kFactAlignEmbedding, "fact_align_embedding"},
    {DetectorKind::kTranscriptLookupLlm, "transcript_lookup_llm"},
    {DetectorKind::kTranscriptLookupEmbedding, "transcript_lookup_embedding"},
    {DetectorKind::kSemanticSimilarity, "semantic_similarity"},
}};

std::string id_or(const RunOptions& opts, DetectorKind kind) {
  return opts.detector_id.empty() ? std::string(to_string(kind)) : opts.detector_id;
}

json facts_json(const FactSet& fs) {
  json arr = json::array();
  for (const auto& f : fs.facts()) {
    arr.push_back({{"id", f.id}, {"text", f.text}, {"category", to_string(f.category)}});
  }
  return arr;
}

std::string numbered(const FactSet& fs) {
  if (fs.empty()) return "(none)";
  std::string out;
  for (const auto& f : fs.facts()) out += f.id + ". " + f.text + "\n";
  return out;
}

// Units without any word token cannot be embedded meaningfully (and the
// hash embedder rejects them); they are left out of sentence-level scoring.
std::vector<std::string> wordy(std::vector<std::string> sentences) {
  std::erase_if(sentences, [](const std::string& s) { return text::word_tokens(s).empty(); });
  return sentences;
}

void require_texts(const Transcript& t, const SummaryDoc& s) {
  if (text::is_blank(t.text())) throw Error(ErrorCode::kEmptyTranscript, "transcript is empty");
  if (text::is_blank(s.text())) throw Error(ErrorCode::kEmptySummary, "summary is empty");
}

void check_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "threshold must be in (0, 1]");
  }
}

std::size_t parse_count(std::string_view raw) {
  static const std::regex kInt(R"(-?\d+)");
  std::cmatch m;
  if (!std::regex_search(raw.data(), raw.data() + raw.size(), m, kInt)) {
    throw ParseFailure("no integer in reply", std::string(raw));
  }
  const std::string digits = m.str();
  if (digits.front() == '-') throw ParseFailure("negative count in reply", std::string(raw));
  try {
    return static_cast<std::size_t>(std::stoull(digits));
  } catch (const std::out_of_range&) {
    throw ParseFailure("count out of range", std::string(raw));
  }
}

std::vector<NamedFact> parse_or_repair_unsupported(std::string_view raw, const CompletionProvider& llm,
                                                   const RunOptions& opts) {
  if (facts::is_none_marker(raw)) return {};
  try {
    return parse_unsupported_list(raw);
  } catch (const ParseFailure&) {
    return facts::repair_with(facts::templates::kRepairUnsupportedList, raw, llm, opts.prompt,
                              opts.trial_seed, [](std::string_view reply) {
                                if (facts::is_none_marker(reply)) return std::vector<NamedFact>{};
                                return parse_unsupported_list(reply);
                              });
  }
}

// Turns an unsupported-fact reply into one verdict per summary fact.
HallucinationReport verdicts_from_named(std::string detector_id, const FactSet& summary_facts,
                                        const std::vector<NamedFact>& named,
                                        std::vector<std::string> warnings) {
  std::map<std::size_t, std::optional<std::string>> unsupported;
  for (const auto& n : named) {
    if (auto idx = resolve_named_fact(summary_facts, n, warnings)) {
      unsupported.emplace(*idx, n.rationale);
    }
  }
  std::vector<FactVerdict> verdicts;
  verdicts.reserve(summary_facts.size());
  for (std::size_t i = 0; i < summary_facts.size(); ++i) {
    auto it = unsupported.find(i);
    FactVerdict v = FactVerdict::for_fact(summary_facts.facts()[i], it == unsupported.end());
    if (it != unsupported.end()) v.rationale = it->second;
    verdicts.push_back(std::move(v));
  }
  auto report = HallucinationReport::from_verdicts(std::move(detector_id), std::move(verdicts));
  report.warnings = std::move(warnings);
  return report;
}

// Shared embedding alignment: each unit is supported iff its best cosine
// against the evidence reaches the threshold (inclusive).
std::vector<FactVerdict> embedding_verdicts(const std::vector<std::string>& units,
                                            const std::vector<std::optional<AtomicFact>>& unit_facts,
                                            const std::vector<std::string>& evidence,
                                            const EmbeddingProvider& embedder, double threshold) {
  const auto matches = best_matches(units, evidence, embedder);
  std::vector<FactVerdict> verdicts;
  verdicts.reserve(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) {
    const bool supported = matches[i].similarity >= threshold;
    FactVerdict v = unit_facts[i] ? FactVerdict::for_fact(*unit_facts[i], supported)
                                  : FactVerdict::for_sentence(units[i], supported);
    v.similarity = matches[i].similarity;
    v.matched_evidence = evidence[matches[i].evidence_index];
    verdicts.push_back(std::move(v));
  }
  return verdicts;
}

std::vector<std::optional<AtomicFact>> as_unit_facts(const FactSet& fs) {
  return {fs.facts().begin(), fs.facts().end()};
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(DetectorKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<DetectorKind> detector_kind_from_string(std::string_view s) {
  for (const auto& [k, name] : kKindNames) {
    if (name == s) return k;
  }
  return std::nullopt;
}

bool uses_embeddings(DetectorKind kind) {
  return kind == DetectorKind::kFactAlignEmbedding || kind == DetectorKind::kTranscriptLookupEmbedding ||
         kind == DetectorKind::kSemanticSimilarity;
}

bool uses_completion(DetectorKind kind) { return kind != DetectorKind::kSemanticSimilarity; }

void DetectorSpec::validate() const {
  if (id.empty()) throw Error(ErrorCode::kConfig, "detector id must not be empty");
  if (uses_embeddings(kind)) {
    if (!threshold) throw Error(ErrorCode::kConfig, "detector " + id + " needs a threshold");
    if (!(*threshold > 0.0 && *threshold <= 1.0)) {
      throw Error(ErrorCode::kConfig, "detector " + id + ": threshold must be in (0, 1]");
    }
    if (embedding_provider.empty()) {
      throw Error(ErrorCode::kConfig, "detector " + id + " needs an embedding provider");
    }
  } else if (threshold) {
    throw Error(ErrorCode::kConfig, "detector " + id + " does not use a threshold");
  }
  if (uses_completion(kind) && completion_provider.empty()) {
    throw Error(ErrorCode::kConfig, "detector " + id + " needs a completion provider");
  }
}

// ---------------------------------------------------------------------------

std::vector<BestMatch> best_matches(const std::vector<std::string>& units,
                                    const std::vector<std::string>& evidence,
                                    const EmbeddingProvider& embedder) {
  if (units.empty() || evidence.empty()) {
    throw Error(ErrorCode::kEmptyInput, "best_matches needs units and evidence");
  }
  std::vector<std::string> distinct;
  std::unordered_map<std::string, std::size_t> slot;
  auto intern = [&](const std::string& s) {
    auto [it, fresh] = slot.emplace(s, distinct.size());
    if (fresh) distinct.push_back(s);
    return it->second;
  };
  std::vector<std::size_t> unit_slots, evidence_slots;
  for (const auto& u : units) unit_slots.push_back(intern(u));
  for (const auto& e : evidence) evidence_slots.push_back(intern(e));

  const auto vectors = embedder.embed_batch(distinct);
  if (vectors.size() != distinct.size()) {
    throw Error(ErrorCode::kProviderFailure, "embedding provider returned the wrong number of vectors");
  }

  std::vector<BestMatch> out(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) {
    for (std::size_t j = 0; j < evidence.size(); ++j) {
      const double sim = cosine_similarity(vectors[unit_slots[i]], vectors[evidence_slots[j]]);
      if (sim > out[i].similarity) out[i] = {j, sim};
    }
  }
  return out;
}

std::vector<NamedFact> parse_unsupported_list(std::string_view raw) {
  auto objects = facts::scan_json_lines(raw, [](const json& j) {
    const bool has_id = j.contains("id") && j["id"].is_string();
    const bool has_fact = j.contains("fact") && j["fact"].is_string();
    return has_id || has_fact;
  });
  std::vector<NamedFact> out;
  for (auto& j : objects) {
    NamedFact n;
    if (j.contains("id") && j["id"].is_string()) n.id = j["id"].get<std::string>();
    if (j.contains("fact") && j["fact"].is_string()) n.text = j["fact"].get<std::string>();
    if (j.contains("rationale") && j["rationale"].is_string()) n.rationale = j["rationale"].get<std::string>();
    out.push_back(std::move(n));
  }
  return out;
}

std::optional<std::size_t> resolve_named_fact(const FactSet& summary_facts, const NamedFact& named,
                                              std::vector<std::string>& warnings) {
  const auto& facts = summary_facts.facts();
  if (named.id) {
    for (std::size_t i = 0; i < facts.size(); ++i) {
      if (facts[i].id == *named.id) return i;
    }
  }
  if (named.text.empty()) {
    warnings.push_back("AlignmentMismatch: unknown fact id '" + named.id.value_or("") + "' dropped");
    return std::nullopt;
  }
  const std::string key = FactSet::dedup_key(named.text);
  for (std::size_t i = 0; i < facts.size(); ++i) {
    if (FactSet::dedup_key(facts[i].text) == key) return i;
  }
  std::optional<std::size_t> best;
  std::size_t best_dist = 0;
  bool tied = false;
  for (std::size_t i = 0; i < facts.size(); ++i) {
    const std::string other = FactSet::dedup_key(facts[i].text);
    const std::size_t d = text::edit_distance(key, other);
    const double bound = 0.3 * static_cast<double>(std::max(key.size(), other.size()));
    if (static_cast<double>(d) > bound) continue;
    if (!best || d < best_dist) {
      best = i;
      best_dist = d;
      tied = false;
    } else if (d == best_dist) {
      tied = true;
    }
  }
  if (best && !tied) return best;
  warnings.push_back(std::string("AlignmentMismatch: ") +
                     (tied ? "ambiguous match for '" : "no summary fact matches '") + named.text +
                     "', dropped");
  return std::nullopt;
}

// ---------------------------------------------------------------------------

HallucinationReport detect_single_prompt_count(const Transcript& t, const SummaryDoc& s,
                                               const CompletionProvider& llm, const RunOptions& opts) {
  require_texts(t, s);
  const std::string prompt =
      facts::templates::kSinglePromptCount.render({{"transcript", t.text()}, {"summary", s.text()}});
  const std::string raw = facts::checked_complete(llm, facts::make_request(prompt, opts.prompt, opts.trial_seed));
  std::size_t count = 0;
  try {
    count = parse_count(raw);
  } catch (const ParseFailure&) {
    count = facts::repair_with(facts::templates::kRepairCount, raw, llm, opts.prompt, opts.trial_seed,
                               parse_count);
  }
  HallucinationReport r;
  r.detector_id = id_or(opts, DetectorKind::kSinglePromptCount);
  r.count = count;
  r.provenance = {{"template", facts::templates::kSinglePromptCount.id}, {"response", raw}};
  return r;
}

HallucinationReport detect_single_prompt_list(const Transcript& t, const SummaryDoc& s,
                                              const CompletionProvider& llm, const RunOptions& opts) {
  require_texts(t, s);
  const std::string prompt =
      facts::templates::kSinglePromptList.render({{"transcript", t.text()}, {"summary", s.text()}});
  const std::string raw = facts::checked_complete(llm, facts::make_request(prompt, opts.prompt, opts.trial_seed));
  std::vector<facts::ParsedFact> items;
  if (!facts::is_none_marker(raw)) {
    try {
      items = facts::parse_fact_list(raw);
    } catch (const ParseFailure&) {
      items = facts::repair_parse(raw, llm, opts.prompt, opts.trial_seed);
    }
  }
  std::vector<FactVerdict> verdicts;
  for (std::size_t i = 0; i < items.size(); ++i) {
    AtomicFact f{"U" + std::to_string(i + 1), items[i].text, items[i].category, FactSource::kFromSummary,
                 std::nullopt};
    if (auto pos = s.text().find(f.text); pos != std::string::npos) f.span = CharSpan{pos, pos + f.text.size()};
    FactVerdict v = FactVerdict::for_fact(std::move(f), false);
    v.rationale = items[i].rationale;
    verdicts.push_back(std::move(v));
  }
  auto r = HallucinationReport::from_verdicts(id_or(opts, DetectorKind::kSinglePromptList), std::move(verdicts));
  r.provenance = {{"template", facts::templates::kSinglePromptList.id}};
  return r;
}

HallucinationReport detect_fact_align_llm(const Transcript& t, const SummaryDoc& s,
                                          const CompletionProvider& llm, const RunOptions& opts) {
  require_texts(t, s);
  const FactSet tfacts = facts::extract_facts(t.text(), t.id(), FactSource::kFromTranscript, llm,
                                              opts.trial_seed, opts.prompt);
  const FactSet sfacts = facts::extract_facts(s.text(), s.id(), FactSource::kFromSummary, llm,
                                              opts.trial_seed, opts.prompt);
  const std::string detector_id = id_or(opts, DetectorKind::kFactAlignLlm);
  json prov = {{"template", facts::templates::kAlignFacts.id},
               {"summary_facts", facts_json(sfacts)},
               {"transcript_facts", facts_json(tfacts)}};
  if (sfacts.empty()) {
    HallucinationReport r;
    r.detector_id = detector_id;
    r.warnings.push_back("EmptySummaryFacts: no facts extracted from the summary");
    r.provenance = std::move(prov);
    return r;
  }
  const std::string prompt = facts::templates::kAlignFacts.render(
      {{"transcript_facts", numbered(tfacts)}, {"summary_facts", numbered(sfacts)}});
  const std::string raw = facts::checked_complete(llm, facts::make_request(prompt, opts.prompt, opts.trial_seed));
  auto named = parse_or_repair_unsupported(raw, llm, opts);
  auto r = verdicts_from_named(detector_id, sfacts, named, {});
  r.provenance = std::move(prov);
  return r;
}

HallucinationReport detect_fact_align_embedding(const Transcript& t, const SummaryDoc& s,
                                                const CompletionProvider& extractor,
                                                const EmbeddingProvider& embedder, double threshold,
                                                const RunOptions& opts) {
  require_texts(t, s);
  check_threshold(threshold);
  const FactSet tfacts = facts::extract_facts(t.text(), t.id(), FactSource::kFromTranscript, extractor,
                                              opts.trial_seed, opts.prompt);
  const FactSet sfacts = facts::extract_facts(s.text(), s.id(), FactSource::kFromSummary, extractor,
                                              opts.trial_seed, opts.prompt);
  const std::string detector_id = id_or(opts, DetectorKind::kFactAlignEmbedding);
  json prov = {{"embedding_provider", embedder.id()},
               {"threshold", threshold},
               {"summary_facts", facts_json(sfacts)},
               {"transcript_facts", facts_json(tfacts)}};

  HallucinationReport r;
  if (sfacts.empty()) {
    r.detector_id = detector_id;
    r.warnings.push_back("EmptySummaryFacts: no facts extracted from the summary");
  } else if (tfacts.empty()) {
    std::vector<FactVerdict> verdicts;
    for (const auto& f : sfacts.facts()) verdicts.push_back(FactVerdict::for_fact(f, false));
    r = HallucinationReport::from_verdicts(detector_id, std::move(verdicts));
    r.warnings.push_back("EmptyTranscriptFacts: no facts extracted from the transcript; every summary fact is unsupported");
  } else {
    r = HallucinationReport::from_verdicts(
        detector_id,
        embedding_verdicts(sfacts.texts(), as_unit_facts(sfacts), tfacts.texts(), embedder, threshold));
  }
  r.provenance = std::move(prov);
  return r;
}

HallucinationReport detect_transcript_lookup_llm(const Transcript& t, const SummaryDoc& s,
                                                 const CompletionProvider& llm, const RunOptions& opts) {
  require_texts(t, s);
  const FactSet sfacts = facts::extract_facts(s.text(), s.id(), FactSource::kFromSummary, llm,
                                              opts.trial_seed, opts.prompt);
  const std::string detector_id = id_or(opts, DetectorKind::kTranscriptLookupLlm);
  json prov = {{"template", facts::templates::kTranscriptLookup.id}, {"summary_facts", facts_json(sfacts)}};
  if (sfacts.empty()) {
    HallucinationReport r;
    r.detector_id = detector_id;
    r.warnings.push_back("EmptySummaryFacts: no facts extracted from the summary");
    r.provenance = std::move(prov);
    return r;
  }
  const std::string prompt = facts::templates::kTranscriptLookup.render(
      {{"transcript", t.text()}, {"summary_facts", numbered(sfacts)}});
  const std::string raw = facts::checked_complete(llm, facts::make_request(prompt, opts.prompt, opts.trial_seed));
  auto named = parse_or_repair_unsupported(raw, llm, opts);
  auto r = verdicts_from_named(detector_id, sfacts, named, {});
  r.provenance = std::move(prov);
  return r;
}

HallucinationReport detect_transcript_lookup_embedding(const Transcript& t, const SummaryDoc& s,
                                                       const CompletionProvider& extractor,
                                                       const EmbeddingProvider& embedder, double threshold,
                                                       const RunOptions& opts) {
  require_texts(t, s);
  check_threshold(threshold);
  const auto sentences = wordy(split_sentences(t.text()));
  if (sentences.empty()) throw Error(ErrorCode::kEmptyTranscript, "transcript has no sentences");
  const FactSet sfacts = facts::extract_facts(s.text(), s.id(), FactSource::kFromSummary, extractor,
                                              opts.trial_seed, opts.prompt);
  const std::string detector_id = id_or(opts, DetectorKind::kTranscriptLookupEmbedding);
  HallucinationReport r;
  if (sfacts.empty()) {
    r.detector_id = detector_id;
    r.warnings.push_back("EmptySummaryFacts: no facts extracted from the summary");
  } else {
    r = HallucinationReport::from_verdicts(
        detector_id, embedding_verdicts(sfacts.texts(), as_unit_facts(sfacts), sentences, embedder, threshold));
  }
  r.provenance = {{"embedding_provider", embedder.id()},
                  {"threshold", threshold},
                  {"summary_facts", facts_json(sfacts)},
                  {"transcript_sentences", sentences.size()}};
  return r;
}

HallucinationReport detect_semantic_similarity(const Transcript& t, const SummaryDoc& s,
                                               const EmbeddingProvider& embedder, double threshold,
                                               const RunOptions& opts) {
  require_texts(t, s);
  check_threshold(threshold);
  const auto summary_sentences = wordy(split_sentences(s.text()));
  if (summary_sentences.empty()) throw Error(ErrorCode::kEmptySummary, "summary has no sentences");
  const auto transcript_sentences = wordy(split_sentences(t.text()));
  if (transcript_sentences.empty()) throw Error(ErrorCode::kEmptyTranscript, "transcript has no sentences");

  std::vector<std::optional<AtomicFact>> no_facts(summary_sentences.size());
  auto r = HallucinationReport::from_verdicts(
      id_or(opts, DetectorKind::kSemanticSimilarity),
      embedding_verdicts(summary_sentences, no_facts, transcript_sentences, embedder, threshold));
  r.raw_score = static_cast<double>(summary_sentences.size() - r.count) /
                static_cast<double>(summary_sentences.size());
  r.provenance = {{"embedding_provider", embedder.id()},
                  {"threshold", threshold},
                  {"summary_sentences", summary_sentences.size()},
                  {"transcript_sentences", transcript_sentences.size()}};
  return r;
}

// ---------------------------------------------------------------------------

Detector::Detector(DetectorSpec spec, std::shared_ptr<const CompletionProvider> completion,
                   std::shared_ptr<const EmbeddingProvider> embedding)
    : spec_(std::move(spec)), completion_(std::move(completion)), embedding_(std::move(embedding)) {
  spec_.validate();
  if (uses_completion(spec_.kind) && !completion_) {
    throw Error(ErrorCode::kConfig, "detector " + spec_.id + " has no completion provider bound");
  }
  if (uses_embeddings(spec_.kind) && !embedding_) {
    throw Error(ErrorCode::kConfig, "detector " + spec_.id + " has no embedding provider bound");
  }
}

Detector Detector::with_threshold(double threshold) const {
  DetectorSpec s = spec_;
  s.threshold = threshold;
  return Detector(std::move(s), completion_, embedding_);
}

HallucinationReport Detector::detect(const Transcript& t, const SummaryDoc& s, int trial) const {
  const RunOptions opts{spec_.id, spec_.trial_seed + trial, spec_.prompt};
  switch (spec_.kind) {
    case DetectorKind::kSinglePromptCount:
      return detect_single_prompt_count(t, s, *completion_, opts);
    case DetectorKind::kSinglePromptList:
      return detect_single_prompt_list(t, s, *completion_, opts);
    case DetectorKind::kFactAlignLlm:
      return detect_fact_align_llm(t, s, *completion_, opts);
    case DetectorKind::kFactAlignEmbedding:
      return detect_fact_align_embedding(t, s, *completion_, *embedding_, *spec_.threshold, opts);
    case DetectorKind::kTranscriptLookupLlm:
      return detect_transcript_lookup_llm(t, s, *completion_, opts);
    case DetectorKind::kTranscriptLookupEmbedding:
      return detect_transcript_lookup_embedding(t, s, *completion_, *embedding_, *spec_.threshold, opts);
    case DetectorKind::kSemanticSimilarity:
      return detect_semantic_similarity(t, s, *embedding_, *spec_.threshold, opts);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown detector kind");
}

}  // namespace hallucount::detectors
