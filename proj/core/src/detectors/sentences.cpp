#include "hallucount/detectors/sentences.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace hallucount::detectors {
namespace {

constexpr std::array<std::string_view, 32> kAbbreviations = {
    "dr.",   "mr.",  "mrs.",  "ms.",   "prof.", "st.",  "sr.",    "jr.",
    "vs.",   "e.g.", "i.e.",  "etc.",  "approx.", "no.", "fig.",  "pt.",
    "mg.",   "ml.",  "mcg.",  "kg.",   "cc.",  "hr.",   "hrs.",   "min.",
    "b.i.d.", "t.i.d.", "q.i.d.", "q.d.", "p.r.n.", "p.o.", "q.h.s.", "h.s.",
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

// The whitespace-delimited word ending at `dot` (inclusive), lowercased,
// with leading brackets or quotes dropped.
std::string word_ending_at(std::string_view text, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && !is_space(text[b - 1]) && text[b - 1] != '\n') --b;
  while (b < dot && (text[b] == '(' || text[b] == '"' || text[b] == '\'' || text[b] == '[')) ++b;
  std::string w(text.substr(b, dot - b + 1));
  std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return std::tolower(c); });
  return w;
}

bool guarded_period(std::string_view text, std::size_t dot, std::size_t next_word) {
  const std::string w = word_ending_at(text, dot);
  if (std::find(kAbbreviations.begin(), kAbbreviations.end(), w) != kAbbreviations.end()) return true;
  if (w.size() == 2 && std::isalpha(static_cast<unsigned char>(w[0]))) {
    // single-letter initial such as "J." -- only when written uppercase
    const std::size_t b = dot - 1;
    if (std::isupper(static_cast<unsigned char>(text[b]))) return true;
  }
  if (next_word < text.size() && std::islower(static_cast<unsigned char>(text[next_word]))) return true;
  return false;
}

}  // namespace

std::span<const std::string_view> abbreviation_guard() { return kAbbreviations; }

std::vector<CharSpan> sentence_spans(std::string_view text) {
  std::vector<CharSpan> spans;
  std::size_t start = std::string_view::npos;  // first char of the open sentence
  std::size_t last_content = 0;               // one past the last non-space char

  auto close = [&](std::size_t end) {
    if (start != std::string_view::npos && end > start) spans.push_back({start, end});
    start = std::string_view::npos;
  };

  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      close(last_content);
      ++i;
      continue;
    }
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (start == std::string_view::npos) start = i;

    if (c == '.' || c == '!' || c == '?') {
      std::size_t j = i;
      while (j < text.size() && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
      const bool lone_period = j - i == 1 && c == '.';
      while (j < text.size() && is_closer(text[j])) ++j;
      last_content = j;
      if (j == text.size() || is_space(text[j]) || text[j] == '\n') {
        std::size_t next = j;
        while (next < text.size() && (is_space(text[next]) || text[next] == '\n')) ++next;
        if (!(lone_period && guarded_period(text, i, next))) close(j);
      }
      i = j;
      continue;
    }
    last_content = i + 1;
    ++i;
  }
  close(last_content);
  return spans;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& s : sentence_spans(text)) out.emplace_back(text.substr(s.begin, s.end - s.begin));
  return out;
}

}  // namespace hallucount::detectors
