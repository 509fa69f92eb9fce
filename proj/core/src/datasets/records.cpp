#include "hallucount/datasets/records.hpp"

#include <algorithm>

#include "hallucount/core/error.hpp"

namespace hallucount::datasets {

std::size_t LnoRecord::n_high_severity() const {
  return static_cast<std::size_t>(std::count_if(removed_facts.begin(), removed_facts.end(),
                                                [](const AtomicFact& f) { return f.high_severity(); }));
}

void LnoRecord::validate() const {
  if (removed_facts.empty() && edited_transcript.text() != original_transcript.text()) {
    throw Error(ErrorCode::kInvalidArgument,
                "LNO record '" + id + "' has n = 0 but its transcript was edited");
  }
}

std::string_view to_string(NhLabel l) {
  switch (l) {
    case NhLabel::kHallucination: return "Hallucination";
    case NhLabel::kInference: return "Inference";
    case NhLabel::kMisunderstanding: return "Misunderstanding";
    case NhLabel::kNoFactualError: return "NoFactualError";
  }
  return "?";
}

std::optional<NhLabel> nh_label_from_string(std::string_view s) {
  for (NhLabel l : kAllNhLabels) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

std::string_view to_string(PromptComplexity c) {
  switch (c) {
    case PromptComplexity::kSimple: return "simple";
    case PromptComplexity::kMedium: return "medium";
    case PromptComplexity::kComplex: return "complex";
  }
  return "?";
}

std::optional<PromptComplexity> prompt_complexity_from_string(std::string_view s) {
  if (s == "simple") return PromptComplexity::kSimple;
  if (s == "medium") return PromptComplexity::kMedium;
  if (s == "complex") return PromptComplexity::kComplex;
  return std::nullopt;
}

NhCounts aggregate_nh(const NhRecord& record) {
  NhCounts out;
  for (const NhAnnotation& a : record.annotations) {
    if (!is_error(a.label)) continue;
    if (!a.category) {
      throw Error(ErrorCode::kMissingCategory,
                  "NH record '" + record.id + "': error annotation without category: " + a.statement);
    }
    ++out.total;
    if (is_high_severity(*a.category)) ++out.high_severity;
  }
  return out;
}

std::string_view to_string(XsumKind k) {
  return k == XsumKind::kIntrinsic ? "Intrinsic" : "Extrinsic";
}

std::optional<XsumKind> xsum_kind_from_string(std::string_view s) {
  if (s == "Intrinsic" || s == "intrinsic") return XsumKind::kIntrinsic;
  if (s == "Extrinsic" || s == "extrinsic") return XsumKind::kExtrinsic;
  return std::nullopt;
}

double aggregate_xsum(const XsumRecord& record, bool strict_arity) {
  const std::size_t k = record.judgements.size();
  if (k == 0 || (strict_arity && k != kXsumJudgementArity)) {
    throw Error(ErrorCode::kArityMismatch, "XSum record '" + record.id + "' has " +
                                               std::to_string(k) + " judgements, expected " +
                                               std::to_string(kXsumJudgementArity));
  }
  std::size_t spans = 0;
  for (const auto& j : record.judgements) spans += j.size();
  return static_cast<double>(spans) / static_cast<double>(k);
}

}  // namespace hallucount::datasets
