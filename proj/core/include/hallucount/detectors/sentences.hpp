#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hallucount/core/types.hpp"

namespace hallucount::detectors {

/// Rule-based sentence boundaries. A sentence ends at a line break, or at
/// terminal punctuation (. ! ?) plus optional closing quotes/brackets when
/// followed by whitespace or end of text. A period does not end a sentence
/// after a guarded abbreviation (Dr., mg., b.i.d., ...), after a single-letter
/// initial, or when the next word starts lowercase.
///
/// Spans are trimmed and never empty; everything between consecutive spans
/// is whitespace, so spans plus gaps reproduce the input exactly.
std::vector<CharSpan> sentence_spans(std::string_view text);

std::vector<std::string> split_sentences(std::string_view text);

std::span<const std::string_view> abbreviation_guard();

}  // namespace hallucount::detectors
