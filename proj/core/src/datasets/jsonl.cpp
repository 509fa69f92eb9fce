#include "hallucount/datasets/jsonl.hpp"

#include <fstream>
#include <string>

#include "hallucount/core/error.hpp"
#include "hallucount/core/text.hpp"
#include "hallucount/datasets/codec.hpp"

namespace hallucount::datasets {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(SchemaKind k) {
  switch (k) {
    case SchemaKind::kLno: return "lno";
    case SchemaKind::kNh: return "nh";
    case SchemaKind::kXsum: return "xsum";
    case SchemaKind::kPair: return "pair";
  }
  return "?";
}

std::optional<SchemaKind> schema_kind_from_string(std::string_view s) {
  for (SchemaKind k : {SchemaKind::kLno, SchemaKind::kNh, SchemaKind::kXsum, SchemaKind::kPair}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

void for_each_json_line(const fs::path& path,
                        const std::function<void(std::size_t, const json&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::is_blank(line)) continue;
    json value;
    try {
      value = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaViolation(line_no, std::string("invalid JSON: ") + e.what());
    }
    fn(line_no, value);
  }
}

void write_json_lines(const fs::path& path, std::span<const json> lines) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const json& j : lines) out << j.dump() << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

namespace {

template <typename R>
R decode(const json& j);
template <>
LnoRecord decode<LnoRecord>(const json& j) { return lno_from_json(j); }
template <>
NhRecord decode<NhRecord>(const json& j) { return nh_from_json(j); }
template <>
XsumRecord decode<XsumRecord>(const json& j) { return xsum_from_json(j); }
template <>
SourcePair decode<SourcePair>(const json& j) { return pair_from_json(j); }

void check_version(std::size_t line_no, const json& j) {
  if (!j.is_object()) throw SchemaViolation(line_no, "record must be a JSON object");
  auto it = j.find("schema_version");
  if (it == j.end() || !it->is_number_integer()) {
    throw SchemaViolation(line_no, "missing integer \"schema_version\"");
  }
  if (it->get<std::int64_t>() != kSchemaVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "line " + std::to_string(line_no) + ": schema_version " + it->dump() +
                    ", this build reads version " + std::to_string(kSchemaVersion));
  }
}

}  // namespace

template <typename Record>
std::vector<Record> read_records(const fs::path& path) {
  std::vector<Record> out;
  for_each_json_line(path, [&](std::size_t line_no, const json& j) {
    check_version(line_no, j);
    try {
      out.push_back(decode<Record>(j));
    } catch (const json::exception& e) {
      throw SchemaViolation(line_no, e.what());
    } catch (const SchemaViolation&) {
      throw;
    } catch (const Error& e) {
      throw SchemaViolation(line_no, e.what());
    }
  });
  return out;
}

template <typename Record>
void write_records(const fs::path& path, std::span<const Record> records) {
  std::vector<json> lines;
  lines.reserve(records.size());
  for (const Record& r : records) {
    json j = to_json(r);
    j["schema_version"] = kSchemaVersion;
    lines.push_back(std::move(j));
  }
  write_json_lines(path, lines);
}

template std::vector<LnoRecord> read_records<LnoRecord>(const fs::path&);
template std::vector<NhRecord> read_records<NhRecord>(const fs::path&);
template std::vector<XsumRecord> read_records<XsumRecord>(const fs::path&);
template std::vector<SourcePair> read_records<SourcePair>(const fs::path&);
template void write_records<LnoRecord>(const fs::path&, std::span<const LnoRecord>);
template void write_records<NhRecord>(const fs::path&, std::span<const NhRecord>);
template void write_records<XsumRecord>(const fs::path&, std::span<const XsumRecord>);
template void write_records<SourcePair>(const fs::path&, std::span<const SourcePair>);

RecordList read_records(const fs::path& path, SchemaKind kind) {
  switch (kind) {
    case SchemaKind::kLno: return read_records<LnoRecord>(path);
    case SchemaKind::kNh: return read_records<NhRecord>(path);
    case SchemaKind::kXsum: return read_records<XsumRecord>(path);
    case SchemaKind::kPair: return read_records<SourcePair>(path);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown schema kind");
}

}  // namespace hallucount::datasets
