#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hallucount/core/types.hpp"

namespace hallucount::datasets {

// ---------------------------------------------------------------------------
// Leave-N-Out
// ---------------------------------------------------------------------------

/// One changed transcript line; an empty side means the line was inserted or
/// deleted outright.
struct EditLogEntry {
  std::size_t line_no = 0;  // 1-based, in the original transcript
  std::string original;
  std::string rewritten;

  bool operator==(const EditLogEntry&) const = default;
};

/// Transcript with N summary facts removed; the summary is left untouched so
/// it carries exactly N unsupported facts relative to the edited transcript.
struct LnoRecord {
  std::string id;
  Transcript original_transcript;
  Transcript edited_transcript;
  SummaryDoc summary;
  std::vector<AtomicFact> removed_facts;
  std::vector<EditLogEntry> edit_log;
  nlohmann::json extra = nlohmann::json::object();  // unknown fields, kept verbatim

  std::size_t n() const { return removed_facts.size(); }
  std::size_t n_high_severity() const;

  /// n == 0 requires the edited transcript to equal the original.
  void validate() const;

  bool operator==(const LnoRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Natural hallucinations
// ---------------------------------------------------------------------------

enum class NhLabel { kHallucination, kInference, kMisunderstanding, kNoFactualError };

std::string_view to_string(NhLabel l);
std::optional<NhLabel> nh_label_from_string(std::string_view s);

/// Hallucination, Inference and Misunderstanding all count as errors.
constexpr bool is_error(NhLabel l) { return l != NhLabel::kNoFactualError; }

inline constexpr std::array<NhLabel, 4> kAllNhLabels = {
    NhLabel::kHallucination, NhLabel::kInference, NhLabel::kMisunderstanding, NhLabel::kNoFactualError};

struct NhAnnotation {
  std::string statement;
  NhLabel label = NhLabel::kNoFactualError;
  std::optional<FactCategory> category;  // absent only in malformed source data
  std::optional<std::string> annotator_id;

  bool operator==(const NhAnnotation&) const = default;
};

enum class PromptComplexity { kSimple, kMedium, kComplex };

std::string_view to_string(PromptComplexity c);
std::optional<PromptComplexity> prompt_complexity_from_string(std::string_view s);

struct GeneratorMeta {
  std::string model;
  PromptComplexity prompt_complexity = PromptComplexity::kSimple;

  bool operator==(const GeneratorMeta&) const = default;
};

struct NhRecord {
  std::string id;
  Transcript transcript;
  SummaryDoc summary;
  std::vector<NhAnnotation> annotations;
  std::optional<GeneratorMeta> generator_meta;
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const NhRecord&) const = default;
};

struct NhCounts {
  std::size_t total = 0;
  std::size_t high_severity = 0;

  bool operator==(const NhCounts&) const = default;
};

/// N for a natural-hallucination record: every annotation not labeled
/// NoFactualError, and the subset outside Age & Sex. Throws kMissingCategory
/// if an error annotation has no category.
NhCounts aggregate_nh(const NhRecord& record);

// ---------------------------------------------------------------------------
// XSum hallucination annotations
// ---------------------------------------------------------------------------

/// Span kinds from the XSum annotation release. Both count equally here.
enum class XsumKind { kIntrinsic, kExtrinsic };

std::string_view to_string(XsumKind k);
std::optional<XsumKind> xsum_kind_from_string(std::string_view s);

struct XsumSpan {
  std::string span;
  XsumKind kind = XsumKind::kExtrinsic;

  bool operator==(const XsumSpan&) const = default;
};

inline constexpr std::size_t kXsumJudgementArity = 3;

struct XsumRecord {
  std::string id;
  Transcript document;
  SummaryDoc summary;
  std::vector<std::vector<XsumSpan>> judgements;  // one span list per annotator
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const XsumRecord&) const = default;
};

/// Mean over annotators of the hallucinated-span count. With strict arity a
/// judgement count other than 3 raises kArityMismatch; otherwise any
/// non-zero number of annotators is averaged.
double aggregate_xsum(const XsumRecord& record, bool strict_arity = true);

// ---------------------------------------------------------------------------
// Source pairs (input to LNO generation)
// ---------------------------------------------------------------------------

struct SourcePair {
  std::string id;
  Transcript transcript;
  SummaryDoc summary;
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const SourcePair&) const = default;
};

}  // namespace hallucount::datasets
