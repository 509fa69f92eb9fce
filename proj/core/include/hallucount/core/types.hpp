#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace hallucount {

// ---------------------------------------------------------------------------
// Fact taxonomy
// ---------------------------------------------------------------------------

enum class FactCategory {
  kAgeAndSex,
  kExamFindings,
  kTreatmentPlan,
  kSymptoms,
  kLabsAndImaging,
  kMedicalHistory,
  kDiagnosis,
};

inline constexpr std::array<FactCategory, 7> kAllCategories = {
    FactCategory::kAgeAndSex,      FactCategory::kExamFindings,   FactCategory::kTreatmentPlan,
    FactCategory::kSymptoms,       FactCategory::kLabsAndImaging, FactCategory::kMedicalHistory,
    FactCategory::kDiagnosis,
};

/// Canonical display name, e.g. "Age & Sex", "Labs & Imaging".
std::string_view display_name(FactCategory c);

/// Stable identifier used in files, e.g. "AgeAndSex".
std::string_view to_string(FactCategory c);

/// Parses the stable identifier only. Free-form model output goes through
/// facts::normalize_category instead.
std::optional<FactCategory> category_from_string(std::string_view s);

/// Every category except Age & Sex counts as clinically high severity.
constexpr bool is_high_severity(FactCategory c) { return c != FactCategory::kAgeAndSex; }

enum class FactSource { kFromSummary, kFromTranscript };

std::string_view to_string(FactSource s);
std::optional<FactSource> fact_source_from_string(std::string_view s);

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

struct Turn {
  std::string speaker;
  std::string utterance;

  bool operator==(const Turn&) const = default;
};

/// Source dialogue. When turns are present, the utterances joined with
/// kTurnSeparator reproduce text exactly.
class Transcript {
 public:
  static constexpr std::string_view kTurnSeparator = "\n";

  Transcript(std::string id, std::string text, std::optional<std::vector<Turn>> turns = {});

  static Transcript from_turns(std::string id, std::vector<Turn> turns);

  const std::string& id() const { return id_; }
  const std::string& text() const { return text_; }
  const std::optional<std::vector<Turn>>& turns() const { return turns_; }

  bool operator==(const Transcript&) const = default;

 private:
  std::string id_;
  std::string text_;
  std::optional<std::vector<Turn>> turns_;
};

/// Generated summary; optionally split into SOAP sections.
class SummaryDoc {
 public:
  SummaryDoc(std::string id, std::string text,
             std::optional<std::map<std::string, std::string>> sections = {});

  static bool is_soap_section(std::string_view name);

  const std::string& id() const { return id_; }
  const std::string& text() const { return text_; }
  const std::optional<std::map<std::string, std::string>>& sections() const { return sections_; }

  bool operator==(const SummaryDoc&) const = default;

 private:
  std::string id_;
  std::string text_;
  std::optional<std::map<std::string, std::string>> sections_;
};

// ---------------------------------------------------------------------------
// Facts and verdicts
// ---------------------------------------------------------------------------

struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const CharSpan&) const = default;
};

struct AtomicFact {
  std::string id;
  std::string text;
  FactCategory category = FactCategory::kSymptoms;
  FactSource source = FactSource::kFromSummary;
  std::optional<CharSpan> span;

  bool high_severity() const { return is_high_severity(category); }

  bool operator==(const AtomicFact&) const = default;
};

/// Decision for one evaluated unit of a summary. Fact-level detectors attach
/// the AtomicFact; the sentence-level detector leaves it empty and only fills
/// unit_text.
struct FactVerdict {
  std::string unit_text;
  std::optional<AtomicFact> fact;
  bool supported = false;
  std::optional<double> similarity;
  std::optional<std::string> rationale;
  std::optional<std::string> matched_evidence;

  static FactVerdict for_fact(AtomicFact f, bool supported);
  static FactVerdict for_sentence(std::string sentence, bool supported);

  bool operator==(const FactVerdict&) const = default;
};

struct HallucinationReport {
  std::string detector_id;
  std::size_t count = 0;
  std::vector<FactVerdict> verdicts;
  std::optional<double> raw_score;
  std::vector<std::string> warnings;
  /// Intermediate artifacts (fact lists, matched evidence inputs) for inspection.
  nlohmann::json provenance = nlohmann::json::object();

  /// Builds a report whose count is the number of unsupported verdicts.
  static HallucinationReport from_verdicts(std::string detector_id,
                                           std::vector<FactVerdict> verdicts);

  std::size_t unsupported_verdicts() const;

  /// count == unsupported_verdicts() whenever verdicts are present.
  bool consistent() const;

  /// Unsupported verdicts whose fact is high severity. Empty when any
  /// unsupported verdict lacks a category (e.g. sentence units) or when the
  /// report carries no verdicts at all.
  std::optional<std::size_t> high_severity_count() const;

  bool operator==(const HallucinationReport&) const = default;
};

}  // namespace hallucount
