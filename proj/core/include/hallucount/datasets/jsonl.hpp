#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hallucount/datasets/records.hpp"

namespace hallucount::datasets {

inline constexpr int kSchemaVersion = 1;

enum class SchemaKind { kLno, kNh, kXsum, kPair };

std::string_view to_string(SchemaKind k);  // "lno", "nh", "xsum", "pair"
std::optional<SchemaKind> schema_kind_from_string(std::string_view s);

/// Calls fn(line_no, value) for every non-blank line. Malformed JSON raises
/// SchemaViolation; a missing file raises kIo.
void for_each_json_line(const std::filesystem::path& path,
                        const std::function<void(std::size_t, const nlohmann::json&)>& fn);

/// One compact JSON value per line, "\n"-terminated. Parent directories are
/// created. Throws kIo on write failure.
void write_json_lines(const std::filesystem::path& path, std::span<const nlohmann::json> lines);

/// Record files carry schema_version on every line: a missing or mistyped
/// field raises SchemaViolation(line), a different version kVersionMismatch.
template <typename Record>
std::vector<Record> read_records(const std::filesystem::path& path);

template <typename Record>
void write_records(const std::filesystem::path& path, std::span<const Record> records);

template <typename Record>
void write_records(const std::filesystem::path& path, const std::vector<Record>& records) {
  write_records<Record>(path, std::span<const Record>(records));
}

using RecordList = std::variant<std::vector<LnoRecord>, std::vector<NhRecord>,
                                std::vector<XsumRecord>, std::vector<SourcePair>>;

RecordList read_records(const std::filesystem::path& path, SchemaKind kind);

extern template std::vector<LnoRecord> read_records<LnoRecord>(const std::filesystem::path&);
extern template std::vector<NhRecord> read_records<NhRecord>(const std::filesystem::path&);
extern template std::vector<XsumRecord> read_records<XsumRecord>(const std::filesystem::path&);
extern template std::vector<SourcePair> read_records<SourcePair>(const std::filesystem::path&);
extern template void write_records<LnoRecord>(const std::filesystem::path&, std::span<const LnoRecord>);
extern template void write_records<NhRecord>(const std::filesystem::path&, std::span<const NhRecord>);
extern template void write_records<XsumRecord>(const std::filesystem::path&, std::span<const XsumRecord>);
extern template void write_records<SourcePair>(const std::filesystem::path&, std::span<const SourcePair>);

}  // namespace hallucount::datasets
