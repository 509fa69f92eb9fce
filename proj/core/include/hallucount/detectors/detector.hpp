#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hallucount/core/types.hpp"
#include "hallucount/facts/extract.hpp"
#include "hallucount/facts/fact_set.hpp"
#include "hallucount/providers/provider.hpp"

namespace hallucount::detectors {

inline constexpr double kDefaultThreshold = 0.75;

enum class DetectorKind {
  kSinglePromptCount,
  kSinglePromptList,
  kFactAlignLlm,
  kFactAlignEmbedding,
  kTranscriptLookupLlm,
  kTranscriptLookupEmbedding,
  kSemanticSimilarity,
};

/// Config spelling, e.g. "fact_align_embedding".
std::string_view to_string(DetectorKind kind);
std::optional<DetectorKind> detector_kind_from_string(std::string_view s);

bool uses_embeddings(DetectorKind kind);
bool uses_completion(DetectorKind kind);

struct DetectorSpec {
  std::string id;
  DetectorKind kind = DetectorKind::kFactAlignEmbedding;
  std::optional<double> threshold;  // embedding kinds only, in (0, 1]
  std::string completion_provider;
  std::string embedding_provider;
  std::int64_t trial_seed = 0;
  facts::PromptOptions prompt;

  /// Throws kConfig when the threshold/provider fields do not fit the kind.
  void validate() const;

  bool operator==(const DetectorSpec&) const = default;
};

/// Per-call settings shared by the free detect_* functions.
struct RunOptions {
  std::string detector_id;
  std::int64_t trial_seed = 0;
  facts::PromptOptions prompt;
};

// --- single prompt ---------------------------------------------------------

HallucinationReport detect_single_prompt_count(const Transcript& t, const SummaryDoc& s,
                                               const providers::CompletionProvider& llm,
                                               const RunOptions& opts = {});

HallucinationReport detect_single_prompt_list(const Transcript& t, const SummaryDoc& s,
                                              const providers::CompletionProvider& llm,
                                              const RunOptions& opts = {});

// --- fact extraction + alignment -------------------------------------------

HallucinationReport detect_fact_align_llm(const Transcript& t, const SummaryDoc& s,
                                          const providers::CompletionProvider& llm,
                                          const RunOptions& opts = {});

/// Facts are extracted with `extractor`; each summary fact is supported iff
/// its best cosine against any transcript fact is >= threshold.
HallucinationReport detect_fact_align_embedding(const Transcript& t, const SummaryDoc& s,
                                                const providers::CompletionProvider& extractor,
                                                const providers::EmbeddingProvider& embedder,
                                                double threshold = kDefaultThreshold,
                                                const RunOptions& opts = {});

// --- transcript lookup -----------------------------------------------------

HallucinationReport detect_transcript_lookup_llm(const Transcript& t, const SummaryDoc& s,
                                                 const providers::CompletionProvider& llm,
                                                 const RunOptions& opts = {});

/// Summary facts against transcript sentences.
HallucinationReport detect_transcript_lookup_embedding(
    const Transcript& t, const SummaryDoc& s, const providers::CompletionProvider& extractor,
    const providers::EmbeddingProvider& embedder, double threshold = kDefaultThreshold,
    const RunOptions& opts = {});

// --- sentence similarity ---------------------------------------------------

/// Summary sentences against transcript sentences, no fact extraction.
/// raw_score is the fraction of summary sentences at or above threshold.
HallucinationReport detect_semantic_similarity(const Transcript& t, const SummaryDoc& s,
                                               const providers::EmbeddingProvider& embedder,
                                               double threshold = kDefaultThreshold,
                                               const RunOptions& opts = {});

// --- building blocks -------------------------------------------------------

struct BestMatch {
  std::size_t evidence_index = 0;
  double similarity = -1.0;
};

/// For every unit, the most similar evidence text (cosine). Both lists must
/// be non-empty; each distinct string is embedded once.
std::vector<BestMatch> best_matches(const std::vector<std::string>& units,
                                    const std::vector<std::string>& evidence,
                                    const providers::EmbeddingProvider& embedder);

/// A fact named in an LLM alignment reply.
struct NamedFact {
  std::optional<std::string> id;
  std::string text;
  std::optional<std::string> rationale;
};

/// Maps a named fact back onto the summary fact list: id match, then exact
/// dedup-key match, then the unique minimum edit distance within 30% of the
/// longer key. Returns nothing (and appends a warning) when unresolved.
std::optional<std::size_t> resolve_named_fact(const facts::FactSet& summary_facts,
                                              const NamedFact& named,
                                              std::vector<std::string>& warnings);

/// Parses an unsupported-fact reply (JSON lines with "id" and/or "fact", or
/// NONE). Throws ParseFailure.
std::vector<NamedFact> parse_unsupported_list(std::string_view raw);

/// Detector bound to its providers. Immutable; detect may be called
/// concurrently.
class Detector {
 public:
  Detector(DetectorSpec spec, std::shared_ptr<const providers::CompletionProvider> completion,
           std::shared_ptr<const providers::EmbeddingProvider> embedding);

  /// Runs trial `trial`; the effective seed is spec.trial_seed + trial.
  HallucinationReport detect(const Transcript& t, const SummaryDoc& s, int trial = 0) const;

  /// Same providers, different threshold (embedding kinds only).
  Detector with_threshold(double threshold) const;

  const DetectorSpec& spec() const { return spec_; }

 private:
  DetectorSpec spec_;
  std::shared_ptr<const providers::CompletionProvider> completion_;
  std::shared_ptr<const providers::EmbeddingProvider> embedding_;
};

}  // namespace hallucount::detectors
