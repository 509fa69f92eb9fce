#include "hallucount/datasets/xsum_csv.hpp"

#include <fstream>
#include <sstream>

#include "hallucount/core/error.hpp"
#include "hallucount/core/text.hpp"

namespace hallucount::datasets {

namespace {
std::string trimmed(std::string_view s) { return std::string(text::trim(s)); }
}  // namespace

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool any = false;  // current row has content
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"': quoted = true; any = true; break;
      case ',': row.push_back(std::move(cell)); cell.clear(); any = true; break;
      case '\r': break;
      case '\n':
        if (any || !cell.empty()) {
          row.push_back(std::move(cell));
          rows.push_back(std::move(row));
        }
        row.clear();
        cell.clear();
        any = false;
        break;
      default: cell.push_back(c); any = true;
    }
  }
  if (quoted) throw ParseFailure("unterminated quoted CSV field", std::string(text.substr(0, 200)));
  if (any || !cell.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

XsumIngest ingest_xsum_csv(std::string_view csv_text,
                           const std::map<std::string, std::string>& documents) {
  const auto rows = parse_csv(csv_text);
  XsumIngest out;
  if (rows.empty()) return out;

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].size(); ++i) col[trimmed(rows[0][i])] = i;
  for (const char* need : {"bbcid", "system", "summary", "hallucination_type", "worker_id"}) {
    if (!col.count(need)) throw SchemaViolation(1, std::string("missing CSV column '") + need + "'");
  }
  const auto span_col = col.find("hallucinated_span");

  struct Group {
    std::string bbcid;
    std::string summary;
    std::map<std::string, std::vector<XsumSpan>> by_worker;
  };
  std::map<std::string, Group> groups;

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto get = [&](const std::string& name) -> std::string {
      const std::size_t i = col.at(name);
      if (i >= row.size()) throw SchemaViolation(r + 1, "row is missing column '" + name + "'");
      return row[i];
    };
    const std::string bbcid = trimmed(get("bbcid"));
    const std::string id = bbcid + ":" + trimmed(get("system"));
    Group& g = groups[id];
    g.bbcid = bbcid;
    if (g.summary.empty()) g.summary = get("summary");
    auto& spans = g.by_worker[trimmed(get("worker_id"))];
    const std::string type = trimmed(get("hallucination_type"));
    if (type.empty() || type == "NULL") continue;
    auto kind = xsum_kind_from_string(type);
    if (!kind) throw SchemaViolation(r + 1, "unknown hallucination_type '" + type + "'");
    std::string span;
    if (span_col != col.end() && span_col->second < row.size()) span = row[span_col->second];
    spans.push_back({std::move(span), *kind});
  }

  for (auto& [id, g] : groups) {
    auto doc = documents.find(g.bbcid);
    if (doc == documents.end() || text::is_blank(doc->second) || text::is_blank(g.summary)) {
      out.missing_documents.push_back(id);
      continue;
    }
    XsumRecord rec{id, Transcript(g.bbcid, doc->second), SummaryDoc(id, g.summary), {}, nlohmann::json::object()};
    for (auto& [worker, spans] : g.by_worker) rec.judgements.push_back(std::move(spans));
    out.records.push_back(std::move(rec));
  }
  return out;
}

XsumIngest ingest_xsum_csv(const std::filesystem::path& csv_path,
                           const std::map<std::string, std::string>& documents) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + csv_path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ingest_xsum_csv(std::string_view(ss.str()), documents);
}

}  // namespace hallucount::datasets
