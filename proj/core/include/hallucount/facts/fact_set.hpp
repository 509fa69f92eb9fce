#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hallucount/core/types.hpp"

namespace hallucount::facts {

struct ExtractionMeta {
  std::string template_id;
  std::string provider_id;
  std::int64_t trial_seed = 0;

  bool operator==(const ExtractionMeta&) const = default;
};

/// Facts extracted from one document. Construction drops facts whose
/// dedup_key repeats an earlier one; the first occurrence wins.
class FactSet {
 public:
  FactSet() = default;
  FactSet(std::string source_doc_id, std::vector<AtomicFact> facts, ExtractionMeta meta = {});

  /// Case-folded, whitespace-collapsed, trailing periods stripped.
  static std::string dedup_key(std::string_view fact_text);

  const std::string& source_doc_id() const { return source_doc_id_; }
  const std::vector<AtomicFact>& facts() const { return facts_; }
  const ExtractionMeta& meta() const { return meta_; }

  std::size_t size() const { return facts_.size(); }
  bool empty() const { return facts_.empty(); }

  std::vector<std::string> texts() const;

  bool operator==(const FactSet&) const = default;

 private:
  std::string source_doc_id_;
  std::vector<AtomicFact> facts_;
  ExtractionMeta meta_;
};

}  // namespace hallucount::facts
