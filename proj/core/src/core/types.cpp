#include "hallucount/core/types.hpp"

#include <algorithm>

#include "hallucount/core/error.hpp"
#include "hallucount/core/text.hpp"

namespace hallucount {

std::string_view display_name(FactCategory c) {
  switch (c) {
    case FactCategory::kAgeAndSex: return "Age & Sex";
    case FactCategory::kExamFindings: return "Exam Findings";
    case FactCategory::kTreatmentPlan: return "Treatment Plan";
    case FactCategory::kSymptoms: return "Symptoms";
    case FactCategory::kLabsAndImaging: return "Labs & Imaging";
    case FactCategory::kMedicalHistory: return "Medical History";
    case FactCategory::kDiagnosis: return "Diagnosis";
  }
  return "?";
}

std::string_view to_string(FactCategory c) {
  switch (c) {
    case FactCategory::kAgeAndSex: return "AgeAndSex";
    case FactCategory::kExamFindings: return "ExamFindings";
    case FactCategory::kTreatmentPlan: return "TreatmentPlan";
    case FactCategory::kSymptoms: return "Symptoms";
    case FactCategory::kLabsAndImaging: return "LabsAndImaging";
    case FactCategory::kMedicalHistory: return "MedicalHistory";
    case FactCategory::kDiagnosis: return "Diagnosis";
  }
  return "?";
}

std::optional<FactCategory> category_from_string(std::string_view s) {
  for (FactCategory c : kAllCategories) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::string_view to_string(FactSource s) {
  return s == FactSource::kFromSummary ? "FromSummary" : "FromTranscript";
}

std::optional<FactSource> fact_source_from_string(std::string_view s) {
  if (s == "FromSummary") return FactSource::kFromSummary;
  if (s == "FromTranscript") return FactSource::kFromTranscript;
  return std::nullopt;
}

Transcript::Transcript(std::string id, std::string text, std::optional<std::vector<Turn>> turns)
    : id_(std::move(id)), text_(std::move(text)), turns_(std::move(turns)) {
  if (text::is_blank(text_)) {
    throw Error(ErrorCode::kEmptyDocument, "transcript '" + id_ + "' has no text");
  }
  if (turns_) {
    std::string joined;
    for (std::size_t i = 0; i < turns_->size(); ++i) {
      if (i) joined.append(kTurnSeparator);
      joined.append((*turns_)[i].utterance);
    }
    if (joined != text_) {
      throw Error(ErrorCode::kInvalidArgument,
                  "transcript '" + id_ + "': turns do not reproduce text");
    }
  }
}

Transcript Transcript::from_turns(std::string id, std::vector<Turn> turns) {
  std::string joined;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (i) joined.append(kTurnSeparator);
    joined.append(turns[i].utterance);
  }
  return Transcript(std::move(id), std::move(joined), std::move(turns));
}

bool SummaryDoc::is_soap_section(std::string_view name) {
  return name == "Subjective" || name == "Objective" || name == "Assessment" || name == "Plan";
}

SummaryDoc::SummaryDoc(std::string id, std::string text,
                       std::optional<std::map<std::string, std::string>> sections)
    : id_(std::move(id)), text_(std::move(text)), sections_(std::move(sections)) {
  if (text::is_blank(text_)) {
    throw Error(ErrorCode::kEmptyDocument, "summary '" + id_ + "' has no text");
  }
  if (sections_) {
    for (const auto& [name, body] : *sections_) {
      if (!is_soap_section(name)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "summary '" + id_ + "': unknown section '" + name + "'");
      }
    }
  }
}

FactVerdict FactVerdict::for_fact(AtomicFact f, bool supported) {
  FactVerdict v;
  v.unit_text = f.text;
  v.fact = std::move(f);
  v.supported = supported;
  return v;
}

FactVerdict FactVerdict::for_sentence(std::string sentence, bool supported) {
  FactVerdict v;
  v.unit_text = std::move(sentence);
  v.supported = supported;
  return v;
}

HallucinationReport HallucinationReport::from_verdicts(std::string detector_id,
                                                       std::vector<FactVerdict> verdicts) {
  HallucinationReport r;
  r.detector_id = std::move(detector_id);
  r.verdicts = std::move(verdicts);
  r.count = r.unsupported_verdicts();
  return r;
}

std::size_t HallucinationReport::unsupported_verdicts() const {
  return static_cast<std::size_t>(
      std::count_if(verdicts.begin(), verdicts.end(), [](const auto& v) { return !v.supported; }));
}

bool HallucinationReport::consistent() const {
  return verdicts.empty() || count == unsupported_verdicts();
}

std::optional<std::size_t> HallucinationReport::high_severity_count() const {
  if (count == 0) return 0;
  if (verdicts.empty()) return std::nullopt;
  std::size_t n = 0;
  for (const auto& v : verdicts) {
    if (v.supported) continue;
    if (!v.fact) return std::nullopt;
    if (v.fact->high_severity()) ++n;
  }
  return n;
}

}  // namespace hallucount
