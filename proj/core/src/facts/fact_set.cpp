#include "hallucount/facts/fact_set.hpp"

#include <unordered_set>

#include "hallucount/core/text.hpp"

namespace hallucount::facts {

std::string FactSet::dedup_key(std::string_view fact_text) {
  std::string key = text::collapse_whitespace(text::fold_case(fact_text));
  while (!key.empty() && (key.back() == '.' || key.back() == ' ')) key.pop_back();
  return key;
}

FactSet::FactSet(std::string source_doc_id, std::vector<AtomicFact> facts, ExtractionMeta meta)
    : source_doc_id_(std::move(source_doc_id)), meta_(std::move(meta)) {
  std::unordered_set<std::string> seen;
  facts_.reserve(facts.size());
  for (auto& f : facts) {
    if (seen.insert(dedup_key(f.text)).second) facts_.push_back(std::move(f));
  }
}

std::vector<std::string> FactSet::texts() const {
  std::vector<std::string> out;
  out.reserve(facts_.size());
  for (const auto& f : facts_) out.push_back(f.text);
  return out;
}

}  // namespace hallucount::facts
