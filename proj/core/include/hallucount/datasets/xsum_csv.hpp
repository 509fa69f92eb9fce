#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hallucount/datasets/records.hpp"

namespace hallucount::datasets {

/// RFC 4180 CSV: quoted fields may hold commas, doubled quotes and newlines.
/// Throws ParseFailure on an unterminated quote.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

struct XsumIngest {
  std::vector<XsumRecord> records;
  std::vector<std::string> missing_documents;  // record ids skipped for lack of an article
};

/// Adapter for the XSum hallucination annotation CSV. Required columns:
/// bbcid, system, summary, hallucination_type, worker_id; hallucinated_span
/// is optional. Rows are grouped per (bbcid, system) into one record with id
/// "<bbcid>:<system>" and one judgement per worker. A hallucination_type of
/// "NULL" or "" marks a worker who found nothing. documents maps bbcid to the
/// article text. Output is sorted by record id.
XsumIngest ingest_xsum_csv(std::string_view csv_text,
                           const std::map<std::string, std::string>& documents);

XsumIngest ingest_xsum_csv(const std::filesystem::path& csv_path,
                           const std::map<std::string, std::string>& documents);

}  // namespace hallucount::datasets
