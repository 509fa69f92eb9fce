#include "hallucount/facts/parse.hpp"

#include "hallucount/core/error.hpp"
#include "hallucount/core/text.hpp"
#include "hallucount/facts/category.hpp"

namespace hallucount::facts {
namespace {

std::vector<std::string_view> split_lines(std::string_view raw) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= raw.size()) {
    std::size_t end = raw.find('\n', start);
    if (end == std::string_view::npos) end = raw.size();
    lines.push_back(raw.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

bool is_nonblank_string(const nlohmann::json& j, const char* key) {
  return j.contains(key) && j[key].is_string() && !text::is_blank(j[key].get_ref<const std::string&>());
}

}  // namespace

bool is_none_marker(std::string_view raw) {
  const std::string key = text::fold_case(text::trim(raw));
  return key == "none" || key == "none." || key == "[]";
}

std::vector<nlohmann::json> scan_json_lines(
    std::string_view raw, const std::function<bool(const nlohmann::json&)>& valid) {
  const auto lines = split_lines(raw);
  std::vector<std::optional<nlohmann::json>> parsed(lines.size());
  std::optional<std::size_t> first, last;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = text::trim(lines[i]);
    if (line.empty() || line.front() != '{') continue;
    auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object() || !valid(j)) continue;
    parsed[i] = std::move(j);
    if (!first) first = i;
    last = i;
  }
  if (!first) throw ParseFailure("no well-formed lines found", std::string(raw));

  std::vector<nlohmann::json> out;
  for (std::size_t i = *first; i <= *last; ++i) {
    if (parsed[i]) {
      out.push_back(std::move(*parsed[i]));
    } else if (!text::is_blank(lines[i])) {
      throw ParseFailure("malformed line " + std::to_string(i + 1) + " inside the list",
                         std::string(raw));
    }
  }
  return out;
}

std::vector<ParsedFact> parse_fact_list(std::string_view raw) {
  const auto objects = scan_json_lines(raw, [](const nlohmann::json& j) {
    return is_nonblank_string(j, "fact") && j.contains("category") && j["category"].is_string();
  });
  std::vector<ParsedFact> out;
  out.reserve(objects.size());
  for (const auto& j : objects) {
    const auto& cat = j["category"].get_ref<const std::string&>();
    auto category = normalize_category(cat);
    if (!category) throw ParseFailure("unknown category '" + cat + "'", std::string(raw));
    ParsedFact f{text::normalize(j["fact"].get<std::string>()), *category, std::nullopt};
    if (is_nonblank_string(j, "rationale")) f.rationale = j["rationale"].get<std::string>();
    out.push_back(std::move(f));
  }
  return out;
}

std::string format_fact_list(std::span<const ParsedFact> facts) {
  std::string out;
  for (const auto& f : facts) {
    nlohmann::ordered_json j = {{"fact", f.text}, {"category", display_name(f.category)}};
    if (f.rationale) j["rationale"] = *f.rationale;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string format_fact_list(const FactSet& fs) {
  std::vector<ParsedFact> parsed;
  parsed.reserve(fs.size());
  for (const auto& f : fs.facts()) parsed.push_back({f.text, f.category, std::nullopt});
  return format_fact_list(parsed);
}

}  // namespace hallucount::facts
