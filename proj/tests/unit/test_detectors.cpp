#include <gtest/gtest.h>

#include <cmath>

#include "hallucount/core/error.hpp"
#include "hallucount/core/text.hpp"
#include "hallucount/detectors/detector.hpp"
#include "hallucount/detectors/sentences.hpp"
#include "hallucount/facts/parse.hpp"
#include "hallucount/providers/hash_embedder.hpp"
#include "support.hpp"

namespace hallucount::detectors {
namespace {

using facts::FactSet;
using facts::ParsedFact;
using providers::CompletionRequest;
using providers::HashEmbedder;
using testing::ScriptedCompletion;

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

std::string fact_lines(const std::vector<std::string>& texts, FactCategory c = FactCategory::kSymptoms) {
  std::vector<ParsedFact> parsed;
  for (const auto& t : texts) parsed.push_back({t, c, std::nullopt});
  return texts.empty() ? "NONE" : facts::format_fact_list(parsed);
}

/// Extraction replies keyed by document text; anything else goes to `other`.
ScriptedCompletion::Fn extractor(std::map<std::string, std::vector<std::string>> docs,
                                 ScriptedCompletion::Fn other = nullptr) {
  return [docs = std::move(docs), other](const CompletionRequest& r) -> std::string {
    for (const auto& [doc, facts] : docs) {
      if (r.prompt.find("<document>\n" + doc + "\n</document>") != std::string::npos) return fact_lines(facts);
    }
    if (other) return other(r);
    throw Error(ErrorCode::kFixtureMiss, "unexpected prompt");
  };
}

// ---------------------------------------------------------------------------
// sentences

TEST(Sentences, Examples) {
  EXPECT_EQ(split_sentences("He has pain. It started Monday."),
            (std::vector<std::string>{"He has pain.", "It started Monday."}));
  EXPECT_EQ(split_sentences("Dr. Smith prescribed 5 mg."), (std::vector<std::string>{"Dr. Smith prescribed 5 mg."}));
  EXPECT_TRUE(split_sentences("").empty());
  EXPECT_EQ(split_sentences("Take it b.i.d. with food. Then rest!"),
            (std::vector<std::string>{"Take it b.i.d. with food.", "Then rest!"}));
  EXPECT_EQ(split_sentences("Doctor: hi\nPatient: \"It hurts.\" Okay?"),
            (std::vector<std::string>{"Doctor: hi", "Patient: \"It hurts.\"", "Okay?"}));
  EXPECT_EQ(split_sentences("Seen by J. Smith today."), (std::vector<std::string>{"Seen by J. Smith today."}));
}

TEST(Sentences, SpansReproduceInput) {
  SeededRng rng(21);
  const std::vector<std::string> pieces = {"Dr.", "mg.", "pain.", "ok?", "\n", "  ", "Yes!", "\"Quote.\"",
                                           "e.g.", "x", "Monday.", "(done.)", "the", "A."};
  for (int iter = 0; iter < 300; ++iter) {
    std::string text;
    for (std::size_t i = 0, k = rng.below(15); i < k; ++i) {
      text += pieces[rng.below(pieces.size())];
      text += rng.below(3) ? " " : "";
    }
    const auto spans = sentence_spans(text);
    std::size_t pos = 0;
    for (const auto& s : spans) {
      ASSERT_LT(s.begin, s.end);
      ASSERT_GE(s.begin, pos);
      EXPECT_TRUE(text::is_blank(std::string_view(text).substr(pos, s.begin - pos)));
      EXPECT_EQ(text::trim(std::string_view(text).substr(s.begin, s.end - s.begin)).size(), s.end - s.begin);
      pos = s.end;
    }
    EXPECT_TRUE(text::is_blank(std::string_view(text).substr(pos)));
  }
}

// ---------------------------------------------------------------------------
// specs

TEST(Spec, ThresholdPresenceFollowsKind) {
  DetectorSpec s{"x", DetectorKind::kFactAlignEmbedding, 0.75, "llm", "emb", 0, {}};
  EXPECT_NO_THROW(s.validate());
  s.threshold = 1.2;
  EXPECT_EQ(code_of([&] { s.validate(); }), ErrorCode::kConfig);
  s.threshold = 0.0;
  EXPECT_EQ(code_of([&] { s.validate(); }), ErrorCode::kConfig);
  s.threshold.reset();
  EXPECT_EQ(code_of([&] { s.validate(); }), ErrorCode::kConfig);
  DetectorSpec llm{"y", DetectorKind::kSinglePromptCount, 0.75, "llm", "", 0, {}};
  EXPECT_EQ(code_of([&] { llm.validate(); }), ErrorCode::kConfig);
  llm.threshold.reset();
  EXPECT_NO_THROW(llm.validate());
  for (auto k : {DetectorKind::kSinglePromptCount, DetectorKind::kSinglePromptList, DetectorKind::kFactAlignLlm,
                 DetectorKind::kFactAlignEmbedding, DetectorKind::kTranscriptLookupLlm,
                 DetectorKind::kTranscriptLookupEmbedding, DetectorKind::kSemanticSimilarity}) {
    EXPECT_EQ(detector_kind_from_string(to_string(k)), k);
    EXPECT_TRUE(uses_embeddings(k) || uses_completion(k));
  }
  EXPECT_FALSE(uses_completion(DetectorKind::kSemanticSimilarity));
}

// ---------------------------------------------------------------------------
// single prompt

const Transcript kT("t", "Doctor: what brings you in?\nPatient: my knee hurts.");
const SummaryDoc kS("s", "Patient reports knee pain. Patient has a fever.");

TEST(SinglePrompt, CountReplies) {
  ScriptedCompletion three([](const CompletionRequest&) { return std::string("3"); });
  auto r = detect_single_prompt_count(kT, kS, three);
  EXPECT_EQ(r.count, 3u);
  EXPECT_TRUE(r.verdicts.empty());
  ScriptedCompletion prose([](const CompletionRequest&) { return std::string("There are 2 hallucinations."); });
  EXPECT_EQ(detect_single_prompt_count(kT, kS, prose).count, 2u);
  ScriptedCompletion repaired(testing::reply_by_marker({{"no integer could be read", "0"}}, "none"));
  EXPECT_EQ(detect_single_prompt_count(kT, kS, repaired).count, 0u);
  EXPECT_EQ(repaired.calls(), 2);
  ScriptedCompletion hopeless([](const CompletionRequest&) { return std::string("none"); });
  EXPECT_THROW(detect_single_prompt_count(kT, kS, hopeless), ParseFailure);
}

TEST(SinglePrompt, ListReplies) {
  ScriptedCompletion two([](const CompletionRequest&) {
    return std::string(
        "{\"fact\": \"Patient has a fever\", \"category\": \"Symptoms\", \"rationale\": \"never said\"}\n"
        "{\"fact\": \"Patient is 40\", \"category\": \"Age & Sex\"}");
  });
  auto r = detect_single_prompt_list(kT, kS, two);
  EXPECT_EQ(r.count, 2u);
  ASSERT_EQ(r.verdicts.size(), 2u);
  EXPECT_EQ(r.verdicts[0].rationale, "never said");
  EXPECT_TRUE(r.consistent());
  EXPECT_EQ(r.high_severity_count(), 1u);
  ScriptedCompletion none([](const CompletionRequest&) { return std::string("NONE"); });
  r = detect_single_prompt_list(kT, kS, none);
  EXPECT_EQ(r.count, 0u);
  EXPECT_TRUE(r.verdicts.empty());
}

// ---------------------------------------------------------------------------
// LLM alignment

TEST(FactAlignLlm, NamedFactIsUnsupported) {
  ScriptedCompletion llm(extractor(
      {{kT.text(), {"Patient has knee pain"}}, {kS.text(), {"Patient has knee pain", "Patient has fever", "Patient is 40"}}},
      [](const CompletionRequest&) { return std::string("{\"id\": \"S2\", \"fact\": \"Patient has fever\"}"); }));
  auto r = detect_fact_align_llm(kT, kS, llm);
  EXPECT_EQ(r.count, 1u);
  ASSERT_EQ(r.verdicts.size(), 3u);
  EXPECT_TRUE(r.verdicts[0].supported);
  EXPECT_FALSE(r.verdicts[1].supported);
  EXPECT_TRUE(r.verdicts[2].supported);
  EXPECT_TRUE(r.consistent());
  EXPECT_TRUE(r.provenance.contains("summary_facts"));
}

TEST(FactAlignLlm, EmptySummaryFacts) {
  ScriptedCompletion llm(extractor({{kT.text(), {"Patient has knee pain"}}, {kS.text(), {}}}));
  auto r = detect_fact_align_llm(kT, kS, llm);
  EXPECT_EQ(r.count, 0u);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.warnings[0].rfind("EmptySummaryFacts", 0), 0u);
}

TEST(Alignment, ParaphraseResolvesUniquely) {
  const std::string a = FactSet::dedup_key("patient reports knee pain");
  const std::string b = FactSet::dedup_key("Patient has knee pain");
  EXPECT_NE(a, b);  // not the same key, so edit distance decides
  FactSet fs("s", {{"S1", "Patient has a fever", FactCategory::kSymptoms, FactSource::kFromSummary, std::nullopt},
                   {"S2", "Patient has knee pain", FactCategory::kSymptoms, FactSource::kFromSummary, std::nullopt},
                   {"S3", "Patient takes ibuprofen", FactCategory::kTreatmentPlan, FactSource::kFromSummary,
                    std::nullopt}});
  // Oracle: distances to every key; f2 must be the unique minimum within 30%.
  std::vector<std::size_t> d;
  for (const auto& f : fs.facts()) d.push_back(text::edit_distance(a, FactSet::dedup_key(f.text)));
  EXPECT_LE(static_cast<double>(d[1]), 0.3 * static_cast<double>(std::max(a.size(), b.size())));
  EXPECT_LT(d[1], d[0]);
  EXPECT_LT(d[1], d[2]);

  std::vector<std::string> warnings;
  EXPECT_EQ(resolve_named_fact(fs, {std::nullopt, "patient reports knee pain", std::nullopt}, warnings), 1u);
  EXPECT_TRUE(warnings.empty());
  EXPECT_EQ(resolve_named_fact(fs, {"S3", "", std::nullopt}, warnings), 2u);
  EXPECT_EQ(resolve_named_fact(fs, {std::nullopt, "PATIENT TAKES IBUPROFEN.", std::nullopt}, warnings), 2u);
  EXPECT_FALSE(resolve_named_fact(fs, {std::nullopt, "completely unrelated statement", std::nullopt}, warnings));
  EXPECT_FALSE(resolve_named_fact(fs, {"S9", "", std::nullopt}, warnings));
  EXPECT_EQ(warnings.size(), 2u);
}

TEST(Alignment, TiesAreDropped) {
  FactSet fs("s", {{"S1", "abcd", FactCategory::kSymptoms, FactSource::kFromSummary, std::nullopt},
                   {"S2", "abce", FactCategory::kSymptoms, FactSource::kFromSummary, std::nullopt}});
  std::vector<std::string> warnings;
  // "abcf" is one edit from both: ambiguous, and 1 <= 0.3*4.
  EXPECT_FALSE(resolve_named_fact(fs, {std::nullopt, "abcf", std::nullopt}, warnings));
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("ambiguous"), std::string::npos);
}

TEST(TranscriptLookupLlm, CountsAndOverflow) {
  auto reply = [](const CompletionRequest& r) -> std::string {
    if (r.prompt.find("<transcript>") != std::string::npos) return "{\"id\": \"S4\"}";
    throw Error(ErrorCode::kFixtureMiss, "unexpected");
  };
  ScriptedCompletion llm(extractor({{kS.text(), {"a one", "b two", "c three", "d four"}}}, reply));
  EXPECT_EQ(detect_transcript_lookup_llm(kT, kS, llm).count, 1u);

  ScriptedCompletion all(extractor({{kS.text(), {"a one", "b two"}}}, [](const CompletionRequest&) {
    return std::string("{\"id\": \"S1\"}\n{\"id\": \"S2\"}");
  }));
  EXPECT_EQ(detect_transcript_lookup_llm(kT, kS, all).count, 2u);

  const Transcript big("big", std::string(5000, 'x'));
  ScriptedCompletion small(extractor({{kS.text(), {"a one"}}}, reply), "small", 3000);
  EXPECT_EQ(code_of([&] { detect_transcript_lookup_llm(big, kS, small); }), ErrorCode::kPromptOverflow);
}

// ---------------------------------------------------------------------------
// embedding detectors

TEST(FactAlignEmbedding, IdenticalAndDisjointFacts) {
  HashEmbedder emb(256);
  ScriptedCompletion llm(extractor({{kT.text(), {"Patient has knee pain"}},
                                    {kS.text(), {"Patient has knee pain", "fever chills sweats"}}}));
  auto r = detect_fact_align_embedding(kT, kS, llm, emb, 0.75);
  ASSERT_EQ(r.verdicts.size(), 2u);
  EXPECT_TRUE(r.verdicts[0].supported);
  EXPECT_DOUBLE_EQ(*r.verdicts[0].similarity, 1.0);
  EXPECT_EQ(r.verdicts[0].matched_evidence, "Patient has knee pain");
  EXPECT_FALSE(r.verdicts[1].supported);
  EXPECT_EQ(r.count, 1u);
}

TEST(FactAlignEmbedding, EmptyTranscriptFacts) {
  HashEmbedder emb(256);
  ScriptedCompletion llm(extractor({{kT.text(), {}}, {kS.text(), {"a one", "b two"}}}));
  auto r = detect_fact_align_embedding(kT, kS, llm, emb);
  EXPECT_EQ(r.count, 2u);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.warnings[0].rfind("EmptyTranscriptFacts", 0), 0u);
}

TEST(FactAlignEmbedding, SubsetOfTranscriptFactsGivesZero) {
  HashEmbedder emb(256);
  SeededRng rng(4);
  for (int iter = 0; iter < 30; ++iter) {
    std::vector<std::string> tf;
    for (std::size_t i = 0, k = 1 + rng.below(6); i < k; ++i) {
      tf.push_back("fact " + std::to_string(rng.below(1000)) + " word" + std::to_string(i));
    }
    std::vector<std::string> sf;
    for (const auto& f : tf) {
      if (rng.below(2)) sf.push_back(f);
    }
    if (sf.empty()) sf.push_back(tf[0]);
    ScriptedCompletion llm(extractor({{kT.text(), tf}, {kS.text(), sf}}));
    for (double th : {0.1, 0.75, 1.0}) EXPECT_EQ(detect_fact_align_embedding(kT, kS, llm, emb, th).count, 0u);
  }
}

TEST(TranscriptLookupEmbedding, NearMatchBetweenZeroAndOne) {
  const Transcript t("t", "The knee pain started Monday.");
  const SummaryDoc s("s", "Knee pain since Monday.");
  const std::string fact = "The knee pain started Tuesday.";
  const double c = cosine_similarity(providers::hash_embed(fact, 256), providers::hash_embed(t.text(), 256));
  EXPECT_GT(c, 0.0);
  EXPECT_LT(c, 1.0);
  HashEmbedder emb(256);
  ScriptedCompletion llm(extractor({{s.text(), {fact}}}));
  EXPECT_EQ(detect_transcript_lookup_embedding(t, s, llm, emb, 1.0).count, 1u);
  EXPECT_EQ(detect_transcript_lookup_embedding(t, s, llm, emb, 1e-9).count, 0u);
  EXPECT_EQ(code_of([&] { detect_transcript_lookup_embedding(t, s, llm, emb, 0.0); }), ErrorCode::kInvalidArgument);
}

TEST(TranscriptLookupEmbedding, SentenceEqualityAndDisjoint) {
  const Transcript t("t", "Patient reports knee pain.");
  HashEmbedder emb(256);
  ScriptedCompletion same(extractor({{kS.text(), {"Patient reports knee pain."}}}));
  EXPECT_EQ(detect_transcript_lookup_embedding(t, kS, same, emb, 1.0).count, 0u);
  ScriptedCompletion disjoint(extractor({{kS.text(), {"fever chills"}}}));
  EXPECT_EQ(detect_transcript_lookup_embedding(t, kS, disjoint, emb, 0.75).count, 1u);
  const Transcript punct("p", "... !!! ???");
  EXPECT_EQ(code_of([&] { detect_transcript_lookup_embedding(punct, kS, same, emb); }), ErrorCode::kEmptyTranscript);
}

TEST(SemanticSimilarity, Examples) {
  HashEmbedder emb(256);
  const Transcript t("t", "Knee pain for a week. Took ibuprofen. No fever.");
  auto r = detect_semantic_similarity(t, SummaryDoc("s", t.text()), emb);
  EXPECT_EQ(r.count, 0u);
  EXPECT_DOUBLE_EQ(*r.raw_score, 1.0);
  EXPECT_FALSE(r.verdicts[0].fact);
  EXPECT_EQ(r.high_severity_count(), 0u);  // nothing unsupported

  r = detect_semantic_similarity(t, SummaryDoc("s", t.text() + " Zebra quasar umbrella."), emb);
  EXPECT_EQ(r.count, 1u);
  EXPECT_DOUBLE_EQ(*r.raw_score, 0.75);
  EXPECT_FALSE(r.high_severity_count());  // an unsupported sentence has no category
  EXPECT_EQ(code_of([&] { detect_semantic_similarity(Transcript("p", "?!"), kS, emb); }),
            ErrorCode::kEmptyTranscript);
  EXPECT_EQ(code_of([&] { detect_semantic_similarity(t, SummaryDoc("s", "..."), emb); }), ErrorCode::kEmptySummary);
}

TEST(EmbeddingDetectors, ThresholdMonotoneAndInclusive) {
  // Hand-built vectors: cosine((1,0,0,0,0), (3,2,1,1,1)) = 3/4 exactly.
  testing::TableEmbedder emb({{"Alpha one.", {1, 0, 0, 0, 0}},
                              {"Beta two.", {0.2, 1, 0, 0, 0}},
                              {"Gamma three.", {0.9, 0.1, 0.3, 0, 0}},
                              {"Evidence here.", {3, 2, 1, 1, 1}}});
  const Transcript t("t", "Evidence here.");
  const SummaryDoc s("s", "Alpha one. Beta two. Gamma three.");
  auto at = [&](double th) { return detect_semantic_similarity(t, s, emb, th).count; };
  EXPECT_EQ(at(0.75), 1u);  // alpha sits exactly on the boundary and is supported
  EXPECT_EQ(at(std::nextafter(0.75, 1.0)), 2u);
  std::size_t prev = 0;
  for (int i = 0; i <= 20; ++i) {
    const double th = i == 0 ? 1e-6 : i / 20.0;
    const auto c = at(th);
    EXPECT_GE(c, prev) << th;
    prev = c;
  }
}

TEST(EmbeddingDetectors, ContractUniformityRandom) {
  HashEmbedder emb(64);
  SeededRng rng(8);
  const std::vector<std::string> vocab = {"knee", "pain", "fever", "ibuprofen", "daily", "xray", "normal", "rash"};
  auto sentence = [&] {
    std::string s;
    for (std::size_t i = 0, k = 1 + rng.below(4); i < k; ++i) s += (i ? " " : "") + vocab[rng.below(vocab.size())];
    return s + ".";
  };
  for (int iter = 0; iter < 50; ++iter) {
    std::string tt, ss;
    for (std::size_t i = 0, k = 1 + rng.below(4); i < k; ++i) tt += sentence() + " ";
    std::vector<std::string> sf;
    for (std::size_t i = 0, k = 1 + rng.below(5); i < k; ++i) {
      sf.push_back(sentence());
      ss += sf.back() + " ";
    }
    const Transcript t("t", tt);
    const SummaryDoc s("s", ss);
    ScriptedCompletion llm(extractor({{t.text(), {sentence()}}, {s.text(), sf}}));
    const double th = 0.05 + 0.95 * rng.unit();
    for (const auto& r : {detect_fact_align_embedding(t, s, llm, emb, th),
                          detect_transcript_lookup_embedding(t, s, llm, emb, th),
                          detect_semantic_similarity(t, s, emb, th)}) {
      EXPECT_TRUE(r.consistent());
      EXPECT_LE(r.count, r.verdicts.size());
      if (auto h = r.high_severity_count()) {
        EXPECT_LE(*h, r.count);
      }
    }
    // Determinism.
    EXPECT_EQ(detect_fact_align_embedding(t, s, llm, emb, th), detect_fact_align_embedding(t, s, llm, emb, th));
  }
}

TEST(Detector, BoundDispatchAndTrialSeed) {
  auto emb = std::make_shared<HashEmbedder>(256);
  std::vector<std::optional<std::int64_t>> seeds;
  auto llm = std::make_shared<ScriptedCompletion>(
      [&](const CompletionRequest& r) {
        seeds.push_back(r.seed);
        return std::string("7");
      });
  DetectorSpec spec{"count", DetectorKind::kSinglePromptCount, std::nullopt, "llm", "", 10, {}};
  spec.prompt.temperature = 0.5;
  Detector d(spec, llm, nullptr);
  auto r = d.detect(kT, kS, 2);
  EXPECT_EQ(r.count, 7u);
  EXPECT_EQ(r.detector_id, "count");
  ASSERT_EQ(seeds.size(), 1u);
  EXPECT_EQ(seeds[0], 12);
  EXPECT_THROW(d.with_threshold(0.5), Error);

  DetectorSpec sem{"sem", DetectorKind::kSemanticSimilarity, 0.75, "", "hash", 0, {}};
  Detector ds(sem, nullptr, emb);
  EXPECT_EQ(ds.with_threshold(0.5).spec().threshold, 0.5);
  EXPECT_EQ(ds.detect(kT, SummaryDoc("s", kT.text())).count, 0u);
  EXPECT_THROW(Detector(sem, nullptr, nullptr), Error);
}

}  // namespace
}  // namespace hallucount::detectors
