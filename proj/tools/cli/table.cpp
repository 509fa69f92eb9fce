#include "table.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "hallucount/core/error.hpp"

namespace hallucount::cli {

nlohmann::json to_json(const ReportRow& r) {
  nlohmann::json j = eval::to_json(r.row);
  j["dataset_kind"] = datasets::to_string(r.dataset_kind);
  j["config_hash"] = r.config_hash;
  return j;
}

ReportRow report_row_from_json(const nlohmann::json& j) {
  ReportRow r;
  r.row = eval::eval_row_from_json(j);
  auto kind = datasets::schema_kind_from_string(j.value("dataset_kind", std::string("lno")));
  if (!kind) throw Error(ErrorCode::kSchemaViolation, "unknown dataset_kind in eval row");
  r.dataset_kind = *kind;
  r.config_hash = j.value("config_hash", std::string{});
  return r;
}

std::string column_for(datasets::SchemaKind kind, eval::SeverityFilter filter) {
  const bool high = filter == eval::SeverityFilter::kHighSeverity;
  switch (kind) {
    case datasets::SchemaKind::kLno: return high ? "LNO-high" : "LNO";
    case datasets::SchemaKind::kNh: return high ? "NH-high" : "NH";
    case datasets::SchemaKind::kXsum: return high ? "" : "XSum";
    case datasets::SchemaKind::kPair: return "";
  }
  return "";
}

std::string metric_label(const eval::EvalRow& row) {
  return row.basis == eval::PredictionBasis::kRawScore ? row.detector_id + " (score)" : row.detector_id;
}

std::string format_table(std::span<const ReportRow> rows) {
  // metric -> column -> cell, in first-seen metric order
  std::vector<std::string> order;
  std::map<std::string, std::map<std::string, std::string>> cells;
  std::map<std::string, std::map<std::string, std::string>> cell_dataset;
  bool any_degenerate = false, any_fallback = false;
  std::set<std::string> hashes;

  for (const ReportRow& r : rows) {
    const std::string col = column_for(r.dataset_kind, r.row.severity_filter);
    if (col.empty()) continue;
    std::string metric = metric_label(r.row);
    if (auto it = cell_dataset[metric].find(col); it != cell_dataset[metric].end() && it->second != r.row.dataset_id) {
      metric += " @" + r.row.dataset_id;
    }
    if (std::find(order.begin(), order.end(), metric) == order.end()) order.push_back(metric);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f ± %.2f", r.row.abs_r, r.row.sd);
    std::string cell = buf;
    if (r.row.degenerate) {
      cell += " !";
      any_degenerate = true;
    }
    if (r.row.high_severity_fallback) {
      cell += " *";
      any_fallback = true;
    }
    cells[metric][col] = cell;
    cell_dataset[metric][col] = r.row.dataset_id;
    if (!r.config_hash.empty()) hashes.insert(r.config_hash);
  }

  // width in display columns; the plus-minus sign is two bytes, one column
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s) w += (c & 0xC0) != 0x80;
    return w;
  };
  std::vector<std::size_t> widths;
  for (std::string_view h : kTableColumns) widths.push_back(h.size());
  for (const auto& m : order) {
    widths[0] = std::max(widths[0], width(m));
    for (std::size_t c = 1; c < kTableColumns.size(); ++c) {
      auto it = cells[m].find(std::string(kTableColumns[c]));
      widths[c] = std::max(widths[c], it == cells[m].end() ? std::size_t{1} : width(it->second));
    }
  }

  std::ostringstream out;
  auto emit_row = [&](const std::vector<std::string>& vals) {
    std::string line;
    for (std::size_t c = 0; c < vals.size(); ++c) {
      line += vals[c];
      if (c + 1 < vals.size()) line += std::string(widths[c] - width(vals[c]) + 2, ' ');
    }
    out << line << '\n';
  };
  emit_row({kTableColumns.begin(), kTableColumns.end()});
  for (const auto& m : order) {
    std::vector<std::string> vals = {m};
    for (std::size_t c = 1; c < kTableColumns.size(); ++c) {
      auto it = cells[m].find(std::string(kTableColumns[c]));
      vals.push_back(it == cells[m].end() ? "-" : it->second);
    }
    emit_row(vals);
  }
  if (any_degenerate) out << "! degenerate: predictions had zero variance, |r| reported as 0\n";
  if (any_fallback) {
    out << "* high-severity truth vs total predicted count (verdicts carry no categories)\n";
  }
  for (const auto& h : hashes) out << "config " << h << '\n';
  return out.str();
}

}  // namespace hallucount::cli
