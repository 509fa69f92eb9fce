#include "hallucount/datasets/codec.hpp"

#include <initializer_list>
#include <string_view>

#include "hallucount/core/error.hpp"

namespace hallucount::datasets {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::kSchemaViolation, msg); }

const json& field(const json& j, const char* key) {
  if (!j.is_object()) bad(std::string("expected an object holding \"") + key + "\"");
  auto it = j.find(key);
  if (it == j.end()) bad(std::string("missing field \"") + key + "\"");
  return *it;
}

std::string str(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) bad(std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

std::optional<std::string> opt_str(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) bad(std::string("field \"") + key + "\" must be a string");
  return it->get<std::string>();
}

const json& arr(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_array()) bad(std::string("field \"") + key + "\" must be an array");
  return v;
}

std::size_t count(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    bad(std::string("field \"") + key + "\" must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

FactCategory category(const json& j, const char* key) {
  const std::string s = str(j, key);
  auto c = category_from_string(s);
  if (!c) bad("unknown category '" + s + "'");
  return *c;
}

// Everything outside `known` lands in extra.
json extras(const json& j, std::initializer_list<std::string_view> known) {
  json out = json::object();
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool k = it.key() == "schema_version";
    for (std::string_view name : known) k = k || it.key() == name;
    if (!k) out[it.key()] = it.value();
  }
  return out;
}

json with_extra(const json& extra, json body) {
  json out = extra.is_object() ? extra : json::object();
  for (auto it = body.begin(); it != body.end(); ++it) out[it.key()] = it.value();
  return out;
}

}  // namespace

json to_json(const Transcript& t) {
  json j = {{"id", t.id()}, {"text", t.text()}};
  if (t.turns()) {
    json turns = json::array();
    for (const Turn& turn : *t.turns()) {
      turns.push_back({{"speaker", turn.speaker}, {"utterance", turn.utterance}});
    }
    j["turns"] = std::move(turns);
  }
  return j;
}

Transcript transcript_from_json(const json& j) {
  std::optional<std::vector<Turn>> turns;
  if (auto it = j.find("turns"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) bad("field \"turns\" must be an array");
    turns.emplace();
    for (const json& t : *it) turns->push_back({str(t, "speaker"), str(t, "utterance")});
  }
  return Transcript(str(j, "id"), str(j, "text"), std::move(turns));
}

json to_json(const SummaryDoc& s) {
  json j = {{"id", s.id()}, {"text", s.text()}};
  if (s.sections()) j["sections"] = *s.sections();
  return j;
}

SummaryDoc summary_from_json(const json& j) {
  std::optional<std::map<std::string, std::string>> sections;
  if (auto it = j.find("sections"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) bad("field \"sections\" must be an object");
    sections.emplace();
    for (auto s = it->begin(); s != it->end(); ++s) {
      if (!s.value().is_string()) bad("section \"" + s.key() + "\" must be a string");
      (*sections)[s.key()] = s.value().get<std::string>();
    }
  }
  return SummaryDoc(str(j, "id"), str(j, "text"), std::move(sections));
}

json to_json(const AtomicFact& f) {
  json j = {{"id", f.id},
            {"text", f.text},
            {"category", to_string(f.category)},
            {"source", to_string(f.source)}};
  if (f.span) j["span"] = {f.span->begin, f.span->end};
  return j;
}

AtomicFact fact_from_json(const json& j) {
  AtomicFact f;
  f.id = opt_str(j, "id").value_or("");
  f.text = str(j, "text");
  f.category = category(j, "category");
  if (auto s = opt_str(j, "source")) {
    auto src = fact_source_from_string(*s);
    if (!src) bad("unknown fact source '" + *s + "'");
    f.source = *src;
  }
  if (auto it = j.find("span"); it != j.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != 2) bad("field \"span\" must be [begin, end]");
    f.span = CharSpan{(*it)[0].get<std::size_t>(), (*it)[1].get<std::size_t>()};
  }
  return f;
}

json to_json(const FactVerdict& v) {
  json j = {{"unit", v.unit_text}, {"supported", v.supported}};
  if (v.fact) j["fact"] = to_json(*v.fact);
  if (v.similarity) j["similarity"] = *v.similarity;
  if (v.rationale) j["rationale"] = *v.rationale;
  if (v.matched_evidence) j["matched_evidence"] = *v.matched_evidence;
  return j;
}

FactVerdict verdict_from_json(const json& j) {
  FactVerdict v;
  v.unit_text = str(j, "unit");
  const json& sup = field(j, "supported");
  if (!sup.is_boolean()) bad("field \"supported\" must be a boolean");
  v.supported = sup.get<bool>();
  if (auto it = j.find("fact"); it != j.end() && !it->is_null()) v.fact = fact_from_json(*it);
  if (auto it = j.find("similarity"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) bad("field \"similarity\" must be a number");
    v.similarity = it->get<double>();
  }
  v.rationale = opt_str(j, "rationale");
  v.matched_evidence = opt_str(j, "matched_evidence");
  return v;
}

json to_json(const HallucinationReport& r) {
  json verdicts = json::array();
  for (const FactVerdict& v : r.verdicts) verdicts.push_back(to_json(v));
  json j = {{"detector_id", r.detector_id},
            {"count", r.count},
            {"verdicts", std::move(verdicts)},
            {"warnings", r.warnings},
            {"provenance", r.provenance}};
  if (r.raw_score) j["raw_score"] = *r.raw_score;
  if (auto hs = r.high_severity_count()) j["high_severity_count"] = *hs;
  return j;
}

HallucinationReport report_from_json(const json& j) {
  HallucinationReport r;
  r.detector_id = str(j, "detector_id");
  r.count = count(j, "count");
  for (const json& v : arr(j, "verdicts")) r.verdicts.push_back(verdict_from_json(v));
  if (auto it = j.find("warnings"); it != j.end()) {
    for (const json& w : *it) r.warnings.push_back(w.get<std::string>());
  }
  if (auto it = j.find("provenance"); it != j.end()) r.provenance = *it;
  if (auto it = j.find("raw_score"); it != j.end() && !it->is_null()) r.raw_score = it->get<double>();
  return r;
}

json to_json(const EditLogEntry& e) {
  return {{"line_no", e.line_no}, {"original", e.original}, {"rewritten", e.rewritten}};
}

EditLogEntry edit_from_json(const json& j) {
  return {count(j, "line_no"), str(j, "original"), str(j, "rewritten")};
}

json to_json(const NhAnnotation& a) {
  json j = {{"statement", a.statement}, {"label", to_string(a.label)}};
  if (a.category) j["category"] = to_string(*a.category);
  if (a.annotator_id) j["annotator_id"] = *a.annotator_id;
  return j;
}

NhAnnotation annotation_from_json(const json& j) {
  NhAnnotation a;
  a.statement = str(j, "statement");
  const std::string label = str(j, "label");
  auto l = nh_label_from_string(label);
  if (!l) bad("unknown NH label '" + label + "'");
  a.label = *l;
  if (auto it = j.find("category"); it != j.end() && !it->is_null()) a.category = category(j, "category");
  a.annotator_id = opt_str(j, "annotator_id");
  return a;
}

json to_json(const LnoRecord& r) {
  json facts = json::array();
  for (const AtomicFact& f : r.removed_facts) facts.push_back(to_json(f));
  json edits = json::array();
  for (const EditLogEntry& e : r.edit_log) edits.push_back(to_json(e));
  return with_extra(r.extra, {{"id", r.id},
                              {"original_transcript", to_json(r.original_transcript)},
                              {"edited_transcript", to_json(r.edited_transcript)},
                              {"summary", to_json(r.summary)},
                              {"removed_facts", std::move(facts)},
                              {"n", r.n()},
                              {"n_high_severity", r.n_high_severity()},
                              {"edit_log", std::move(edits)}});
}

LnoRecord lno_from_json(const json& j) {
  std::vector<AtomicFact> facts;
  for (const json& f : arr(j, "removed_facts")) facts.push_back(fact_from_json(f));
  std::vector<EditLogEntry> edits;
  if (auto it = j.find("edit_log"); it != j.end()) {
    for (const json& e : *it) edits.push_back(edit_from_json(e));
  }
  LnoRecord r{str(j, "id"),
              transcript_from_json(field(j, "original_transcript")),
              transcript_from_json(field(j, "edited_transcript")),
              summary_from_json(field(j, "summary")),
              std::move(facts),
              std::move(edits),
              extras(j, {"id", "original_transcript", "edited_transcript", "summary", "removed_facts",
                         "n", "n_high_severity", "edit_log"})};
  // n is derived; a stored value that disagrees means the line was edited by hand.
  if (count(j, "n") != r.n()) bad("\"n\" disagrees with removed_facts");
  if (j.contains("n_high_severity") && count(j, "n_high_severity") != r.n_high_severity()) {
    bad("\"n_high_severity\" disagrees with removed_facts");
  }
  r.validate();
  return r;
}

json to_json(const NhRecord& r) {
  json anns = json::array();
  for (const NhAnnotation& a : r.annotations) anns.push_back(to_json(a));
  json body = {{"id", r.id},
               {"transcript", to_json(r.transcript)},
               {"summary", to_json(r.summary)},
               {"annotations", std::move(anns)}};
  if (r.generator_meta) {
    body["generator_meta"] = {{"model", r.generator_meta->model},
                              {"prompt_complexity", to_string(r.generator_meta->prompt_complexity)}};
  }
  return with_extra(r.extra, std::move(body));
}

NhRecord nh_from_json(const json& j) {
  std::vector<NhAnnotation> anns;
  for (const json& a : arr(j, "annotations")) anns.push_back(annotation_from_json(a));
  std::optional<GeneratorMeta> meta;
  if (auto it = j.find("generator_meta"); it != j.end() && !it->is_null()) {
    const std::string pc = str(*it, "prompt_complexity");
    auto c = prompt_complexity_from_string(pc);
    if (!c) bad("unknown prompt complexity '" + pc + "'");
    meta = GeneratorMeta{str(*it, "model"), *c};
  }
  return NhRecord{str(j, "id"),
                  transcript_from_json(field(j, "transcript")),
                  summary_from_json(field(j, "summary")),
                  std::move(anns),
                  std::move(meta),
                  extras(j, {"id", "transcript", "summary", "annotations", "generator_meta"})};
}

json to_json(const XsumRecord& r) {
  json judgements = json::array();
  for (const auto& spans : r.judgements) {
    json row = json::array();
    for (const XsumSpan& s : spans) row.push_back({{"span", s.span}, {"kind", to_string(s.kind)}});
    judgements.push_back(std::move(row));
  }
  return with_extra(r.extra, {{"id", r.id},
                              {"document", to_json(r.document)},
                              {"summary", to_json(r.summary)},
                              {"judgements", std::move(judgements)}});
}

XsumRecord xsum_from_json(const json& j) {
  std::vector<std::vector<XsumSpan>> judgements;
  for (const json& row : arr(j, "judgements")) {
    if (!row.is_array()) bad("each judgement must be an array of spans");
    auto& spans = judgements.emplace_back();
    for (const json& s : row) {
      const std::string k = str(s, "kind");
      auto kind = xsum_kind_from_string(k);
      if (!kind) bad("unknown span kind '" + k + "'");
      spans.push_back({str(s, "span"), *kind});
    }
  }
  return XsumRecord{str(j, "id"),
                    transcript_from_json(field(j, "document")),
                    summary_from_json(field(j, "summary")),
                    std::move(judgements),
                    extras(j, {"id", "document", "summary", "judgements"})};
}

json to_json(const SourcePair& r) {
  return with_extra(r.extra, {{"id", r.id},
                              {"transcript", to_json(r.transcript)},
                              {"summary", to_json(r.summary)}});
}

SourcePair pair_from_json(const json& j) {
  return SourcePair{str(j, "id"), transcript_from_json(field(j, "transcript")),
                    summary_from_json(field(j, "summary")),
                    extras(j, {"id", "transcript", "summary"})};
}

}  // namespace hallucount::datasets
