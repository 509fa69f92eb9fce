#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>

namespace hallucount::facts {

/// A versioned prompt text with named placeholders written as {name}
/// (lowercase identifier in braces). JSON braces such as {"fact": ...} are
/// left alone because they do not match the placeholder shape.
struct PromptTemplate {
  std::string_view id;
  std::string_view text;

  /// Substitutes every placeholder. Throws kInvalidArgument if the template
  /// references a name missing from vars. Values are inserted verbatim and
  /// never re-scanned.
  std::string render(const std::map<std::string, std::string>& vars) const;
};

namespace templates {
extern const PromptTemplate kExtractFacts;
extern const PromptTemplate kRepairFactList;
extern const PromptTemplate kSinglePromptCount;
extern const PromptTemplate kRepairCount;
extern const PromptTemplate kSinglePromptList;
extern const PromptTemplate kAlignFacts;
extern const PromptTemplate kRepairUnsupportedList;
extern const PromptTemplate kTranscriptLookup;
extern const PromptTemplate kRewriteTranscript;
}  // namespace templates

std::span<const PromptTemplate* const> all_templates();

/// Lookup by id, e.g. "extract-facts/v1". Throws kInvalidArgument if unknown.
const PromptTemplate& template_by_id(std::string_view id);

}  // namespace hallucount::facts
