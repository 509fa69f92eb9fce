#include "hallucount/facts/extract.hpp"

#include "hallucount/core/text.hpp"

namespace hallucount::facts {

providers::CompletionRequest make_request(std::string prompt, const PromptOptions& options,
                                          std::int64_t trial_seed) {
  providers::CompletionRequest req;
  req.prompt = std::move(prompt);
  req.max_output_length = options.max_output_length;
  req.temperature = options.temperature;
  if (options.temperature > 0.0) req.seed = trial_seed;
  return req;
}

std::string checked_complete(const providers::CompletionProvider& provider,
                             const providers::CompletionRequest& request) {
  if (auto limit = provider.max_prompt_length(); limit && request.prompt.size() > *limit) {
    throw Error(ErrorCode::kPromptOverflow, "prompt of " + std::to_string(request.prompt.size()) +
                                                " bytes exceeds the limit of " +
                                                std::to_string(*limit) + " for provider " +
                                                provider.id());
  }
  return provider.complete(request);
}

std::vector<ParsedFact> repair_parse(std::string_view raw,
                                     const providers::CompletionProvider& provider,
                                     const PromptOptions& options, std::int64_t trial_seed) {
  return repair_with(templates::kRepairFactList, raw, provider, options, trial_seed,
                     [](std::string_view reply) {
                       if (is_none_marker(reply)) return std::vector<ParsedFact>{};
                       return parse_fact_list(reply);
                     });
}

providers::CompletionRequest extraction_request(std::string_view doc_text, FactSource source,
                                                std::int64_t trial_seed,
                                                const PromptOptions& options) {
  const std::string kind = source == FactSource::kFromSummary ? "summary" : "transcript";
  return make_request(
      templates::kExtractFacts.render({{"source_kind", kind}, {"document", std::string(doc_text)}}),
      options, trial_seed);
}

FactSet build_fact_set(std::span<const ParsedFact> parsed, std::string_view doc_text,
                       const std::string& doc_id, FactSource source, ExtractionMeta meta) {
  const char prefix = source == FactSource::kFromSummary ? 'S' : 'T';
  std::vector<AtomicFact> facts;
  facts.reserve(parsed.size());
  for (const auto& p : parsed) {
    AtomicFact f;
    f.text = p.text;
    f.category = p.category;
    f.source = source;
    if (auto pos = doc_text.find(p.text); !p.text.empty() && pos != std::string_view::npos) {
      f.span = CharSpan{pos, pos + p.text.size()};
    }
    facts.push_back(std::move(f));
  }
  FactSet deduped(doc_id, std::move(facts), std::move(meta));
  // ids are assigned after dedup so they stay dense
  std::vector<AtomicFact> numbered = deduped.facts();
  for (std::size_t i = 0; i < numbered.size(); ++i) {
    numbered[i].id = std::string(1, prefix) + std::to_string(i + 1);
  }
  return FactSet(doc_id, std::move(numbered), deduped.meta());
}

FactSet extract_facts(std::string_view doc_text, const std::string& doc_id, FactSource source,
                      const providers::CompletionProvider& provider, std::int64_t trial_seed,
                      const PromptOptions& options) {
  if (text::is_blank(doc_text)) {
    throw Error(ErrorCode::kEmptyDocument, "cannot extract facts from empty document '" + doc_id + "'");
  }
  const std::string raw =
      checked_complete(provider, extraction_request(doc_text, source, trial_seed, options));
  std::vector<ParsedFact> parsed;
  if (!is_none_marker(raw)) {
    try {
      parsed = parse_fact_list(raw);
    } catch (const ParseFailure&) {
      parsed = repair_parse(raw, provider, options, trial_seed);
    }
  }
  return build_fact_set(parsed, doc_text, doc_id, source,
                        {std::string(templates::kExtractFacts.id), provider.id(), trial_seed});
}

}  // namespace hallucount::facts
