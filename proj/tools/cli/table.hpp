#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hallucount/datasets/jsonl.hpp"
#include "hallucount/eval/eval.hpp"

namespace hallucount::cli {

inline constexpr std::array<std::string_view, 6> kTableColumns = {"metric", "LNO", "LNO-high",
                                                                  "NH",     "NH-high", "XSum"};

/// An eval row plus what the table needs to place it.
struct ReportRow {
  eval::EvalRow row;
  datasets::SchemaKind dataset_kind = datasets::SchemaKind::kLno;
  std::string config_hash;
};

nlohmann::json to_json(const ReportRow& r);
ReportRow report_row_from_json(const nlohmann::json& j);

/// "LNO", "LNO-high", "NH", "NH-high", "XSum"; empty when the combination has
/// no column (e.g. XSum high severity).
std::string column_for(datasets::SchemaKind kind, eval::SeverityFilter filter);

/// "name" for count-based rows, "name (score)" for raw-score rows.
std::string metric_label(const eval::EvalRow& row);

/// Aligned text table, one line per metric, cells "|r| ± sd" to two
/// decimals. Footnote markers: "!" degenerate, "*" high-severity fallback.
std::string format_table(std::span<const ReportRow> rows);

}  // namespace hallucount::cli
