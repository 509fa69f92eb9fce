#include "hallucount/lno/lno.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>

#include "hallucount/core/error.hpp"
#include "hallucount/core/random.hpp"
#include "hallucount/core/text.hpp"
#include "hallucount/detectors/detector.hpp"
#include "hallucount/detectors/sentences.hpp"
#include "hallucount/facts/parse.hpp"
#include "hallucount/facts/prompts.hpp"
#include "hallucount/providers/digest.hpp"
#include "hallucount/providers/hash_embedder.hpp"

namespace hallucount::lno {

namespace {

constexpr std::array<std::string_view, 40> kStopwords = {
    "a",    "an",   "the",  "and",  "or",   "of",   "to",      "in",    "on",   "at",
    "for",  "with", "by",   "from", "as",   "is",   "are",     "was",   "were", "be",
    "been", "has",  "have", "had",  "does", "did",  "not",     "no",    "this", "that",
    "it",   "its",  "his",  "her",  "he",   "she",  "patient", "their", "they", "reports",
};

std::vector<std::string> lines_of(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t nl = s.find('\n', start);
    out.emplace_back(s.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

}  // namespace

// ---------------------------------------------------------------------------

std::set<std::string> content_tokens(std::string_view fact_text) {
  std::set<std::string> out;
  for (std::string& tok : text::word_tokens(text::fold_case(fact_text))) {
    if (std::find(kStopwords.begin(), kStopwords.end(), tok) == kStopwords.end()) out.insert(std::move(tok));
  }
  return out;
}

bool orthogonal(const AtomicFact& a, const AtomicFact& b) {
  if (a.category != b.category) return true;
  const auto ta = content_tokens(a.text);
  const auto tb = content_tokens(b.text);
  return std::none_of(ta.begin(), ta.end(), [&](const std::string& t) { return tb.count(t) > 0; });
}

std::vector<AtomicFact> select_orthogonal_facts(const facts::FactSet& fs, std::size_t n,
                                                std::uint64_t seed) {
  const auto& all = fs.facts();
  if (n > all.size()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot select " + std::to_string(n) + " of " +
                                                 std::to_string(all.size()) + " facts");
  }
  if (n == 0) return {};

  const std::size_t m = all.size();
  std::vector<std::vector<bool>> ok(m, std::vector<bool>(m, true));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) ok[i][j] = ok[j][i] = orthogonal(all[i], all[j]);
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  SeededRng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  auto fits = [&](const std::vector<std::size_t>& chosen, std::size_t c) {
    return std::all_of(chosen.begin(), chosen.end(), [&](std::size_t s) { return ok[s][c]; });
  };

  std::vector<std::size_t> chosen;
  std::set<FactCategory> seen;
  for (std::size_t i : order) {
    if (chosen.size() == n) break;
    if (seen.insert(all[i].category).second) chosen.push_back(i);
  }
  for (std::size_t i : order) {
    if (chosen.size() == n) break;
    if (std::find(chosen.begin(), chosen.end(), i) == chosen.end() && fits(chosen, i)) chosen.push_back(i);
  }

  if (chosen.size() < n) {
    // greedy got stuck; exhaustive search in shuffled order
    chosen.clear();
    std::function<bool(std::size_t)> search = [&](std::size_t from) {
      if (chosen.size() == n) return true;
      for (std::size_t k = from; k + (n - chosen.size()) <= m; ++k) {
        if (!fits(chosen, order[k])) continue;
        chosen.push_back(order[k]);
        if (search(k + 1)) return true;
        chosen.pop_back();
      }
      return false;
    };
    if (!search(0)) {
      throw Error(ErrorCode::kInsufficientOrthogonalFacts,
                  "no " + std::to_string(n) + " pairwise orthogonal facts among " +
                      std::to_string(m) + " in '" + fs.source_doc_id() + "'");
    }
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<AtomicFact> out;
  for (std::size_t i : chosen) out.push_back(all[i]);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<EditLogEntry> diff_lines(std::string_view original, std::string_view rewritten) {
  const auto a = lines_of(original);
  const auto b = lines_of(rewritten);
  const std::size_t n = a.size(), m = b.size();
  // lcs[i][j] = LCS length of a[i..] and b[j..]
  std::vector<std::vector<std::uint32_t>> lcs(n + 1, std::vector<std::uint32_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }

  std::vector<EditLogEntry> out;
  std::vector<std::size_t> del;  // indices into a
  std::vector<std::size_t> ins;  // indices into b
  auto flush = [&](std::size_t next_a) {
    const std::size_t pairs = std::min(del.size(), ins.size());
    for (std::size_t k = 0; k < pairs; ++k) out.push_back({del[k] + 1, a[del[k]], b[ins[k]]});
    for (std::size_t k = pairs; k < del.size(); ++k) out.push_back({del[k] + 1, a[del[k]], ""});
    for (std::size_t k = pairs; k < ins.size(); ++k) out.push_back({next_a + 1, "", b[ins[k]]});
    del.clear();
    ins.clear();
  };
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j]) {
      flush(i);
      ++i;
      ++j;
    } else if (j >= m || (i < n && lcs[i + 1][j] >= lcs[i][j + 1])) {
      del.push_back(i++);
    } else {
      ins.push_back(j++);
    }
  }
  flush(n);
  return out;
}

RewriteResult rewrite_transcript(const Transcript& t, std::span<const AtomicFact> facts,
                                 const providers::CompletionProvider& provider,
                                 const facts::PromptOptions& options, std::int64_t trial_seed) {
  if (facts.empty()) throw Error(ErrorCode::kInvalidArgument, "rewrite_transcript needs at least one fact");
  std::string fact_list;
  for (const AtomicFact& f : facts) fact_list += "- " + f.text + "\n";
  const std::string prompt =
      facts::templates::kRewriteTranscript.render({{"facts", fact_list}, {"transcript", t.text()}});
  const auto request = facts::make_request(prompt, options, trial_seed);

  std::string reply;
  bool changed = false;
  for (int attempt = 0; attempt < 2 && !changed; ++attempt) {
    reply = std::string(text::trim(facts::checked_complete(provider, request)));
    changed = reply != text::trim(t.text());
  }
  if (!changed) {
    throw Error(ErrorCode::kNoChangeProduced,
                "provider " + provider.id() + " returned transcript '" + t.id() + "' unchanged");
  }

  std::optional<std::vector<Turn>> turns;
  if (t.turns()) {
    const auto lines = lines_of(reply);
    if (lines.size() == t.turns()->size()) {
      turns.emplace();
      for (std::size_t i = 0; i < lines.size(); ++i) turns->push_back({(*t.turns())[i].speaker, lines[i]});
    }
  }
  RewriteResult out{Transcript(t.id() + ":lno", reply, std::move(turns)), {}};
  out.edit_log = diff_lines(t.text(), reply);
  return out;
}

// ---------------------------------------------------------------------------

std::size_t LeakageReport::leaked_count() const {
  return static_cast<std::size_t>(
      std::count_if(findings.begin(), findings.end(), [](const LeakFinding& f) { return f.leaked; }));
}

std::size_t LeakageReport::leaked_lines() const {
  std::set<std::size_t> lines;
  for (const LeakFinding& f : findings) {
    if (f.leaked) lines.insert(f.line_no);
  }
  return lines.size();
}

LeakageReport verify_removal(const Transcript& edited, std::span<const AtomicFact> removed,
                             const providers::EmbeddingProvider& embedder, double leak_threshold) {
  if (!(leak_threshold > 0.0 && leak_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "leak threshold must be in (0, 1]");
  }
  LeakageReport report;
  if (removed.empty()) return report;

  std::vector<std::string> sentences;
  std::vector<std::size_t> line_nos;
  for (const CharSpan& sp : detectors::sentence_spans(edited.text())) {
    std::string s = edited.text().substr(sp.begin, sp.end - sp.begin);
    if (text::word_tokens(s).empty()) continue;
    sentences.push_back(std::move(s));
    line_nos.push_back(line_of_offset(edited.text(), sp.begin));
  }
  std::vector<std::string> units;
  for (const AtomicFact& f : removed) units.push_back(f.text);

  std::vector<detectors::BestMatch> matches;
  if (!sentences.empty()) matches = detectors::best_matches(units, sentences, embedder);
  for (std::size_t i = 0; i < removed.size(); ++i) {
    LeakFinding f{removed[i], std::nullopt, std::nullopt, 0, false};
    if (!matches.empty()) {
      f.best_sentence = sentences[matches[i].evidence_index];
      f.similarity = matches[i].similarity;
      f.line_no = line_nos[matches[i].evidence_index];
      f.leaked = matches[i].similarity >= leak_threshold;
    }
    report.findings.push_back(std::move(f));
  }
  return report;
}

double correction_workload(std::span<const LeakageReport> reports) {
  if (reports.empty()) return 0.0;
  std::size_t lines = 0;
  for (const LeakageReport& r : reports) lines += r.leaked_lines();
  return static_cast<double>(lines) / static_cast<double>(reports.size());
}

std::vector<ReviewItem> review_queue(const LnoRecord& record, const LeakageReport& leakage) {
  std::vector<ReviewItem> out;
  for (const EditLogEntry& e : record.edit_log) {
    out.push_back({record.id, e.line_no, e.original, e.rewritten, std::nullopt});
  }
  const auto edited_lines = lines_of(record.edited_transcript.text());
  for (const LeakFinding& f : leakage.findings) {
    if (!f.leaked) continue;
    ReviewItem item{record.id, f.line_no, "", "", f.fact.text};
    if (f.line_no >= 1 && f.line_no <= edited_lines.size()) item.rewritten = edited_lines[f.line_no - 1];
    for (const EditLogEntry& e : record.edit_log) {
      if (e.rewritten == item.rewritten && !e.rewritten.empty()) item.original = e.original;
    }
    out.push_back(std::move(item));
  }
  return out;
}

nlohmann::json to_json(const ReviewItem& item) {
  return {{"record_id", item.record_id},
          {"line_no", item.line_no},
          {"original", item.original},
          {"rewritten", item.rewritten},
          {"leaked_fact", item.leaked_fact ? nlohmann::json(*item.leaked_fact) : nlohmann::json()}};
}

// ---------------------------------------------------------------------------

GeneratedLno generate_lno_record(const datasets::SourcePair& pair, std::size_t n,
                                 std::uint64_t seed,
                                 const providers::CompletionProvider& completion,
                                 const providers::EmbeddingProvider& embedder,
                                 const facts::PromptOptions& options, double leak_threshold) {
  const auto trial_seed = static_cast<std::int64_t>(seed & 0x7fffffffffffffffULL);
  const facts::FactSet sfacts = facts::extract_facts(pair.summary.text(), pair.summary.id(),
                                                     FactSource::kFromSummary, completion,
                                                     trial_seed, options);
  auto chosen = select_orthogonal_facts(sfacts, n, seed);
  if (chosen.empty()) {
    LnoRecord rec{pair.id, pair.transcript, pair.transcript, pair.summary, {}, {}, pair.extra};
    return {std::move(rec), {}};
  }
  RewriteResult rw = rewrite_transcript(pair.transcript, chosen, completion, options, trial_seed);
  LeakageReport leakage = verify_removal(rw.edited, chosen, embedder, leak_threshold);
  LnoRecord rec{pair.id,         pair.transcript,         std::move(rw.edited), pair.summary,
                std::move(chosen), std::move(rw.edit_log), pair.extra};
  return {std::move(rec), std::move(leakage)};
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";
constexpr std::size_t kOracleDim = 256;

std::string pseudo_word(SeededRng& rng) {
  std::string w;
  const std::size_t syllables = 2 + rng.below(2);
  for (std::size_t i = 0; i < syllables; ++i) {
    w.push_back(kConsonants[rng.below(kConsonants.size())]);
    w.push_back(kVowels[rng.below(kVowels.size())]);
  }
  if (rng.below(2) == 1) w.push_back(kConsonants[rng.below(kConsonants.size())]);
  return w;
}

struct SyntheticFact {
  std::string text;
  FactCategory category;
};

// Words are unique within the record and, at the oracle dimension, land in
// distinct hash buckets, so two different facts embed to orthogonal vectors.
std::vector<SyntheticFact> synthetic_facts(SeededRng& rng, std::size_t k) {
  std::set<std::string> used_words;
  std::set<std::size_t> used_buckets;
  const auto abbrevs = detectors::abbreviation_guard();
  std::vector<SyntheticFact> out;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t words = 3 + rng.below(3);
    std::vector<std::string> ws;
    while (ws.size() < words) {
      std::string w = pseudo_word(rng);
      const std::size_t bucket = providers::hash_bucket(w, kOracleDim);
      // past half the buckets distinct placement gets slow; fall back to distinct words only
      const bool bucket_taken = used_buckets.size() < kOracleDim / 2 && used_buckets.count(bucket) > 0;
      if (used_words.count(w) || bucket_taken ||
          std::find(kStopwords.begin(), kStopwords.end(), w) != kStopwords.end() ||
          std::find(abbrevs.begin(), abbrevs.end(), w + ".") != abbrevs.end()) {
        continue;
      }
      used_words.insert(w);
      used_buckets.insert(bucket);
      ws.push_back(std::move(w));
    }
    ws.front()[0] = static_cast<char>(ws.front()[0] - 'a' + 'A');
    out.push_back({text::join(ws, " ") + ".", kAllCategories[rng.below(kAllCategories.size())]});
  }
  return out;
}

std::vector<SyntheticFact> facts_of(const LnoRecord& r) {
  auto it = r.extra.find("synthetic_facts");
  if (it == r.extra.end() || !it->is_array()) {
    throw Error(ErrorCode::kInvalidArgument, "record '" + r.id + "' is not a synthetic LNO record");
  }
  std::vector<SyntheticFact> out;
  for (const auto& j : *it) {
    auto c = category_from_string(j.at("category").get<std::string>());
    if (!c) throw Error(ErrorCode::kInvalidArgument, "bad synthetic fact category in '" + r.id + "'");
    out.push_back({j.at("text").get<std::string>(), *c});
  }
  return out;
}

std::string fact_list_reply(const std::vector<SyntheticFact>& fs,
                            const std::function<bool(const SyntheticFact&)>& keep) {
  std::vector<facts::ParsedFact> parsed;
  for (const auto& f : fs) {
    if (keep(f)) parsed.push_back({f.text, f.category, std::nullopt});
  }
  return parsed.empty() ? std::string("NONE") : facts::format_fact_list(parsed);
}

}  // namespace

std::vector<LnoRecord> generate_synthetic_lno(std::uint64_t seed, std::size_t records,
                                              std::size_t max_n) {
  if (records < 2) throw Error(ErrorCode::kInvalidArgument, "synthetic LNO needs at least 2 records");
  if (max_n < 1) throw Error(ErrorCode::kInvalidArgument, "synthetic LNO needs max_n >= 1");

  SeededRng rng(seed);
  std::vector<std::size_t> ns(records);
  for (auto& n : ns) n = rng.below(max_n + 1);
  // constant n would make every correlation undefined
  if (std::all_of(ns.begin(), ns.end(), [&](std::size_t n) { return n == ns[0]; })) {
    ns.back() = (ns[0] + 1) % (max_n + 1);
  }

  std::vector<LnoRecord> out;
  out.reserve(records);
  for (std::size_t r = 0; r < records; ++r) {
    SeededRng rec_rng(derive_seed(seed, r));
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "syn-%04zu", r + 1);
    const std::string id = idbuf;

    const std::size_t k = max_n + 1 + rec_rng.below(3);
    const auto fs = synthetic_facts(rec_rng, k);

    std::vector<Turn> turns;
    std::vector<std::string> summary_parts;
    for (std::size_t i = 0; i < k; ++i) {
      turns.push_back({i % 2 == 0 ? "Clinician" : "Patient", fs[i].text});
      summary_parts.push_back(fs[i].text);
    }
    const std::string summary_text = text::join(summary_parts, " ");

    std::vector<std::size_t> pick(k);
    std::iota(pick.begin(), pick.end(), 0);
    rec_rng.shuffle(std::span<std::size_t>(pick));
    std::vector<std::size_t> removed(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(ns[r]));
    std::sort(removed.begin(), removed.end());

    std::vector<Turn> kept;
    std::vector<EditLogEntry> edits;
    std::vector<AtomicFact> removed_facts;
    for (std::size_t i = 0; i < k; ++i) {
      if (std::binary_search(removed.begin(), removed.end(), i)) {
        edits.push_back({i + 1, fs[i].text, ""});
        const std::size_t pos = summary_text.find(fs[i].text);
        removed_facts.push_back({"S" + std::to_string(i + 1), fs[i].text, fs[i].category,
                                 FactSource::kFromSummary,
                                 CharSpan{pos, pos + fs[i].text.size()}});
      } else {
        kept.push_back(turns[i]);
      }
    }

    nlohmann::json facts_json = nlohmann::json::array();
    for (const auto& f : fs) facts_json.push_back({{"text", f.text}, {"category", to_string(f.category)}});

    Transcript original = Transcript::from_turns(id + ":transcript", turns);
    Transcript edited = removed.empty() ? original : Transcript::from_turns(id + ":transcript:lno", kept);
    out.push_back(LnoRecord{id, std::move(original), std::move(edited),
                            SummaryDoc(id + ":summary", summary_text), std::move(removed_facts),
                            std::move(edits), nlohmann::json{{"synthetic_facts", std::move(facts_json)}}});
  }
  return out;
}

providers::FixtureStore synthetic_extraction_fixture(std::span<const LnoRecord> records,
                                                     const facts::PromptOptions& options,
                                                     std::span<const std::int64_t> trial_seeds) {
  static constexpr std::array<std::int64_t, 1> kDefaultSeeds = {0};
  if (trial_seeds.empty()) trial_seeds = kDefaultSeeds;

  providers::FixtureStore store;
  auto add = [&](std::string_view doc, FactSource source, const std::string& reply) {
    for (std::int64_t s : trial_seeds) {
      const auto req = facts::extraction_request(doc, source, s, options);
      store.insert({providers::request_digest(req), providers::FixtureKind::kCompletion, reply});
    }
  };
  for (const LnoRecord& r : records) {
    const auto fs = facts_of(r);
    std::set<std::string> gone;
    for (const AtomicFact& f : r.removed_facts) gone.insert(f.text);
    const std::string all = fact_list_reply(fs, [](const SyntheticFact&) { return true; });
    add(r.summary.text(), FactSource::kFromSummary, all);
    add(r.original_transcript.text(), FactSource::kFromTranscript, all);
    add(r.edited_transcript.text(), FactSource::kFromTranscript,
        fact_list_reply(fs, [&](const SyntheticFact& f) { return gone.count(f.text) == 0; }));
  }
  return store;
}

}  // namespace hallucount::lno
