#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hallucount/core/types.hpp"
#include "hallucount/datasets/records.hpp"
#include "hallucount/facts/extract.hpp"
#include "hallucount/facts/fact_set.hpp"
#include "hallucount/providers/provider.hpp"
#include "hallucount/providers/replay.hpp"

namespace hallucount::lno {

using datasets::EditLogEntry;
using datasets::LnoRecord;

// ---------------------------------------------------------------------------
// Fact selection
// ---------------------------------------------------------------------------

/// Lowercased word tokens of a fact minus stopwords ("the", "of", "patient", ...).
std::set<std::string> content_tokens(std::string_view fact_text);

/// Two facts are orthogonal when their categories differ or their content
/// token sets are disjoint.
bool orthogonal(const AtomicFact& a, const AtomicFact& b);

/// n pairwise-orthogonal facts. Facts are visited in a seeded shuffle; one
/// fact per category is taken first, the rest are filled from facts
/// orthogonal to everything already chosen, and a backtracking search runs
/// if the greedy pass gets stuck. Returned in fact-set order.
/// Throws kInvalidArgument for n > |fs| and kInsufficientOrthogonalFacts when
/// no orthogonal n-subset exists.
std::vector<AtomicFact> select_orthogonal_facts(const facts::FactSet& fs, std::size_t n,
                                                std::uint64_t seed);

// ---------------------------------------------------------------------------
// Transcript rewriting
// ---------------------------------------------------------------------------

/// Line diff (LCS). Replaced lines are paired in order; unpaired deletions
/// have an empty `rewritten`, unpaired insertions an empty `original`.
std::vector<EditLogEntry> diff_lines(std::string_view original, std::string_view rewritten);

struct RewriteResult {
  Transcript edited;
  std::vector<EditLogEntry> edit_log;
};

/// Asks the provider to remove every occurrence of the facts. The reply is
/// retried once if it equals the input, then kNoChangeProduced is raised.
/// Turns are carried over when the line count is unchanged.
RewriteResult rewrite_transcript(const Transcript& t, std::span<const AtomicFact> facts,
                                 const providers::CompletionProvider& provider,
                                 const facts::PromptOptions& options = {},
                                 std::int64_t trial_seed = 0);

// ---------------------------------------------------------------------------
// Leakage check
// ---------------------------------------------------------------------------

struct LeakFinding {
  AtomicFact fact;
  std::optional<std::string> best_sentence;
  std::optional<double> similarity;
  std::size_t line_no = 0;  // 1-based line of best_sentence in the edited transcript
  bool leaked = false;
};

struct LeakageReport {
  std::vector<LeakFinding> findings;  // one per removed fact, in input order

  std::size_t leaked_count() const;
  /// Distinct edited-transcript lines holding at least one leak.
  std::size_t leaked_lines() const;
};

/// Best cosine of each removed fact against the edited transcript's
/// sentences; a fact leaks when that cosine is >= leak_threshold.
LeakageReport verify_removal(const Transcript& edited, std::span<const AtomicFact> removed,
                             const providers::EmbeddingProvider& embedder,
                             double leak_threshold = 0.75);

/// Leaked lines per record, i.e. expected manual-correction workload.
double correction_workload(std::span<const LeakageReport> reports);

struct ReviewItem {
  std::string record_id;
  std::size_t line_no = 0;
  std::string original;
  std::string rewritten;
  std::optional<std::string> leaked_fact;

  bool operator==(const ReviewItem&) const = default;
};

/// Every edit-log line plus every leak, for the human correction pass.
std::vector<ReviewItem> review_queue(const LnoRecord& record, const LeakageReport& leakage);

nlohmann::json to_json(const ReviewItem& item);

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

struct GeneratedLno {
  LnoRecord record;
  LeakageReport leakage;
};

/// Full pipeline for one source pair: extract summary facts, pick n
/// orthogonal ones, rewrite the transcript and screen for leaks. n = 0 keeps
/// the transcript as is.
GeneratedLno generate_lno_record(const datasets::SourcePair& pair, std::size_t n,
                                 std::uint64_t seed,
                                 const providers::CompletionProvider& completion,
                                 const providers::EmbeddingProvider& embedder,
                                 const facts::PromptOptions& options = {},
                                 double leak_threshold = 0.75);

/// Hermetic records with no provider calls. Each record gets k token-disjoint
/// pseudo-word facts (k in [max_n + 1, max_n + 3]), a transcript with one
/// line per fact and a summary restating every fact verbatim; n facts drawn
/// uniformly from [0, max_n] are then deleted from the transcript. At least
/// two distinct n values occur. The full fact list is kept in
/// extra["synthetic_facts"]. Throws kInvalidArgument for records < 2 or
/// max_n < 1.
std::vector<LnoRecord> generate_synthetic_lno(std::uint64_t seed, std::size_t records,
                                              std::size_t max_n);

/// Replay fixture answering the extraction prompts for every document of
/// synthetic records (summary, original and edited transcript) with their
/// exact fact lists. Seeds only matter for temperature > 0.
providers::FixtureStore synthetic_extraction_fixture(
    std::span<const LnoRecord> records, const facts::PromptOptions& options = {},
    std::span<const std::int64_t> trial_seeds = {});

}  // namespace hallucount::lno
