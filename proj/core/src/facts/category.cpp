#include "hallucount/facts/category.hpp"

#include <array>
#include <cctype>

namespace hallucount::facts {
namespace {

using C = FactCategory;

constexpr std::array kAliases = {
    CategoryAlias{"ageandsex", C::kAgeAndSex},
    CategoryAlias{"agesex", C::kAgeAndSex},
    CategoryAlias{"sexandage", C::kAgeAndSex},
    CategoryAlias{"ageandgender", C::kAgeAndSex},
    CategoryAlias{"age", C::kAgeAndSex},
    CategoryAlias{"sex", C::kAgeAndSex},
    CategoryAlias{"gender", C::kAgeAndSex},
    CategoryAlias{"demographic", C::kAgeAndSex},
    CategoryAlias{"demographics", C::kAgeAndSex},

    CategoryAlias{"examfindings", C::kExamFindings},
    CategoryAlias{"examfinding", C::kExamFindings},
    CategoryAlias{"exam", C::kExamFindings},
    CategoryAlias{"exams", C::kExamFindings},
    CategoryAlias{"examination", C::kExamFindings},
    CategoryAlias{"examinationfindings", C::kExamFindings},
    CategoryAlias{"physicalexam", C::kExamFindings},
    CategoryAlias{"physicalexamfindings", C::kExamFindings},
    CategoryAlias{"physicalexamination", C::kExamFindings},

    CategoryAlias{"treatmentplan", C::kTreatmentPlan},
    CategoryAlias{"treatmentplans", C::kTreatmentPlan},
    CategoryAlias{"treatment", C::kTreatmentPlan},
    CategoryAlias{"treatments", C::kTreatmentPlan},
    CategoryAlias{"plan", C::kTreatmentPlan},
    CategoryAlias{"plans", C::kTreatmentPlan},
    CategoryAlias{"medication", C::kTreatmentPlan},
    CategoryAlias{"medications", C::kTreatmentPlan},

    CategoryAlias{"symptoms", C::kSymptoms},
    CategoryAlias{"symptom", C::kSymptoms},
    CategoryAlias{"complaint", C::kSymptoms},
    CategoryAlias{"complaints", C::kSymptoms},
    CategoryAlias{"chiefcomplaint", C::kSymptoms},

    CategoryAlias{"labsandimaging", C::kLabsAndImaging},
    CategoryAlias{"labandimaging", C::kLabsAndImaging},
    CategoryAlias{"labsimaging", C::kLabsAndImaging},
    CategoryAlias{"labtestingandimaging", C::kLabsAndImaging},
    CategoryAlias{"labtestsandimaging", C::kLabsAndImaging},
    CategoryAlias{"labs", C::kLabsAndImaging},
    CategoryAlias{"lab", C::kLabsAndImaging},
    CategoryAlias{"labresults", C::kLabsAndImaging},
    CategoryAlias{"labtests", C::kLabsAndImaging},
    CategoryAlias{"imaging", C::kLabsAndImaging},
    CategoryAlias{"laboratory", C::kLabsAndImaging},
    CategoryAlias{"radiology", C::kLabsAndImaging},

    CategoryAlias{"medicalhistory", C::kMedicalHistory},
    CategoryAlias{"medicalhistories", C::kMedicalHistory},
    CategoryAlias{"history", C::kMedicalHistory},
    CategoryAlias{"pastmedicalhistory", C::kMedicalHistory},
    CategoryAlias{"pmh", C::kMedicalHistory},
    CategoryAlias{"surgicalhistory", C::kMedicalHistory},
    CategoryAlias{"familyhistory", C::kMedicalHistory},
    CategoryAlias{"socialhistory", C::kMedicalHistory},

    CategoryAlias{"diagnosis", C::kDiagnosis},
    CategoryAlias{"diagnoses", C::kDiagnosis},
    CategoryAlias{"dx", C::kDiagnosis},
    CategoryAlias{"assessment", C::kDiagnosis},
    CategoryAlias{"condition", C::kDiagnosis},
    CategoryAlias{"conditions", C::kDiagnosis},
};

}  // namespace

std::span<const CategoryAlias> category_aliases() { return kAliases; }

std::string alias_key(std::string_view raw) {
  std::string key;
  key.reserve(raw.size());
  for (unsigned char c : raw) {
    if (c == '&') {
      key += "and";
    } else if (std::isalnum(c)) {
      key.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  return key;
}

std::optional<FactCategory> normalize_category(std::string_view raw) {
  const std::string key = alias_key(raw);
  for (const auto& a : kAliases) {
    if (a.key == key) return a.category;
  }
  return std::nullopt;
}

}  // namespace hallucount::facts
