#pragma once

#include <nlohmann/json.hpp>

#include "hallucount/core/types.hpp"
#include "hallucount/datasets/records.hpp"

// JSON shapes for the domain types. Decoders throw Error(kSchemaViolation)
// on a missing or mistyped field; the JSONL readers attach the line number.
namespace hallucount::datasets {

using nlohmann::json;

json to_json(const Transcript& t);
Transcript transcript_from_json(const json& j);

json to_json(const SummaryDoc& s);
SummaryDoc summary_from_json(const json& j);

json to_json(const AtomicFact& f);
/// Only text and category are required; id defaults to "" and source to
/// FromSummary.
AtomicFact fact_from_json(const json& j);

json to_json(const FactVerdict& v);
FactVerdict verdict_from_json(const json& j);

json to_json(const HallucinationReport& r);
HallucinationReport report_from_json(const json& j);

json to_json(const EditLogEntry& e);
EditLogEntry edit_from_json(const json& j);

json to_json(const NhAnnotation& a);
NhAnnotation annotation_from_json(const json& j);

// Record bodies without schema_version; extra fields are merged back in.
json to_json(const LnoRecord& r);
LnoRecord lno_from_json(const json& j);

json to_json(const NhRecord& r);
NhRecord nh_from_json(const json& j);

json to_json(const XsumRecord& r);
XsumRecord xsum_from_json(const json& j);

json to_json(const SourcePair& r);
SourcePair pair_from_json(const json& j);

}  // namespace hallucount::datasets
