#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hallucount::text {

/// Unicode NFC composition. Invalid UTF-8 is rejected with kInvalidArgument.
std::string to_nfc(std::string_view utf8);

/// Collapses every run of whitespace into one ASCII space and trims both ends.
std::string collapse_whitespace(std::string_view s);

/// Canonical document text: NFC, collapsed whitespace, case preserved.
std::string normalize(std::string_view s);

/// Unicode case fold (used for comparison keys, never for stored text).
std::string fold_case(std::string_view utf8);

/// Lowercases ASCII letters and splits on runs of non-alphanumeric ASCII.
/// Bytes >= 0x80 count as word characters so UTF-8 words stay whole.
std::vector<std::string> word_tokens(std::string_view s);

bool is_blank(std::string_view s);

std::string_view trim(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Character-level Levenshtein distance over bytes.
std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace hallucount::text
