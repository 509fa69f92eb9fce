#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hallucount/core/error.hpp"
#include "hallucount/core/types.hpp"
#include "hallucount/facts/fact_set.hpp"
#include "hallucount/facts/parse.hpp"
#include "hallucount/facts/prompts.hpp"
#include "hallucount/providers/provider.hpp"

namespace hallucount::facts {

/// Sampling settings shared by every prompt a detector sends.
struct PromptOptions {
  std::size_t max_output_length = 2048;
  double temperature = 0.0;
  int max_repairs = 2;

  bool operator==(const PromptOptions&) const = default;
};

/// Builds a request. The trial seed is only sent when sampling
/// (temperature > 0); greedy decoding is deterministic without it, so
/// temperature-0 trials share one replay fixture.
providers::CompletionRequest make_request(std::string prompt, const PromptOptions& options,
                                          std::int64_t trial_seed);

/// complete() with the provider's prompt-length limit enforced: an oversized
/// prompt raises kPromptOverflow instead of being truncated.
std::string checked_complete(const providers::CompletionProvider& provider,
                             const providers::CompletionRequest& request);

/// Re-prompts with a reformatting template until `parse` succeeds or the
/// repair budget runs out, then throws a terminal ParseFailure carrying raw.
template <typename Parse>
auto repair_with(const PromptTemplate& tmpl, std::string_view raw,
                 const providers::CompletionProvider& provider, const PromptOptions& options,
                 std::int64_t trial_seed, Parse&& parse) -> decltype(parse(std::string_view{})) {
  for (int attempt = 1; attempt <= options.max_repairs; ++attempt) {
    const std::string prompt = tmpl.render({{"raw", std::string(raw)},
                                            {"attempt", std::to_string(attempt)},
                                            {"max_attempts", std::to_string(options.max_repairs)}});
    const std::string reply = checked_complete(provider, make_request(prompt, options, trial_seed));
    try {
      return parse(reply);
    } catch (const ParseFailure&) {
    }
  }
  throw ParseFailure("output still unparseable after " + std::to_string(options.max_repairs) +
                         " repair attempt(s)",
                     std::string(raw));
}

/// One reformatting pass over a damaged fact list. The empty-list marker is
/// accepted as a valid (empty) answer.
std::vector<ParsedFact> repair_parse(std::string_view raw,
                                     const providers::CompletionProvider& provider,
                                     const PromptOptions& options = {},
                                     std::int64_t trial_seed = 0);

/// The request extract_facts sends for a document; exposed so fixtures can
/// be produced offline.
providers::CompletionRequest extraction_request(std::string_view doc_text, FactSource source,
                                                std::int64_t trial_seed,
                                                const PromptOptions& options = {});

/// Prompts for atomic, categorized facts and parses the reply (with repair).
/// Throws kEmptyDocument on blank input; provider errors propagate.
FactSet extract_facts(std::string_view doc_text, const std::string& doc_id, FactSource source,
                      const providers::CompletionProvider& provider, std::int64_t trial_seed,
                      const PromptOptions& options = {});

/// Turns parsed pairs into facts with ids (S1.. / T1..) and, where the text
/// occurs verbatim in the document, a character span. Duplicates are dropped.
FactSet build_fact_set(std::span<const ParsedFact> parsed, std::string_view doc_text,
                       const std::string& doc_id, FactSource source, ExtractionMeta meta);

}  // namespace hallucount::facts
