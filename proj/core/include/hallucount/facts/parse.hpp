#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hallucount/core/types.hpp"
#include "hallucount/facts/fact_set.hpp"

namespace hallucount::facts {

struct ParsedFact {
  std::string text;
  FactCategory category = FactCategory::kSymptoms;
  std::optional<std::string> rationale;

  bool operator==(const ParsedFact&) const = default;
};

/// True when the model answered with the empty-list marker ("NONE" or "[]").
bool is_none_marker(std::string_view raw);

/// Finds JSON-object lines accepted by `valid`. Prose before the first and
/// after the last accepted line is ignored; any other non-blank line in
/// between means the output is damaged and raises ParseFailure, as does
/// finding no accepted line at all.
std::vector<nlohmann::json> scan_json_lines(
    std::string_view raw, const std::function<bool(const nlohmann::json&)>& valid);

/// Parses the canonical fact list: one {"fact", "category"[, "rationale"]}
/// object per line. A category outside the alias table is a ParseFailure so
/// the caller can run a repair pass.
std::vector<ParsedFact> parse_fact_list(std::string_view raw);

/// Inverse of parse_fact_list.
std::string format_fact_list(std::span<const ParsedFact> facts);
std::string format_fact_list(const FactSet& fs);

}  // namespace hallucount::facts
