#include <benchmark/benchmark.h>

#include <memory>
#include <string>
#include <vector>

#include "hallucount/core/embedding.hpp"
#include "hallucount/core/random.hpp"
#include "hallucount/detectors/detector.hpp"
#include "hallucount/detectors/sentences.hpp"
#include "hallucount/eval/eval.hpp"
#include "hallucount/lno/lno.hpp"
#include "hallucount/providers/hash_embedder.hpp"
#include "hallucount/providers/replay.hpp"

using namespace hallucount;

namespace {

const std::string kSentence = "The patient reports intermittent knee pain after running, worse on stairs.";

std::string paragraph(std::size_t sentences) {
  std::string out;
  for (std::size_t i = 0; i < sentences; ++i) out += "Dr. Smith noted the value was 3.5 mg. " + kSentence + ' ';
  return out;
}

std::vector<eval::PairedSample> noisy_pairs(std::size_t n) {
  SeededRng rng(1);
  std::vector<eval::PairedSample> p;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(rng.below(6));
    p.push_back({std::to_string(i), x, x + rng.unit() * 3, 0});
  }
  return p;
}

void BM_HashEmbed(benchmark::State& st) {
  const auto dim = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(providers::hash_embed(kSentence, dim));
}
BENCHMARK(BM_HashEmbed)->Arg(256)->Arg(1024);

void BM_Cosine(benchmark::State& st) {
  const auto a = providers::hash_embed(kSentence, static_cast<std::size_t>(st.range(0)));
  const auto b = providers::hash_embed("Knee pain while running", static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(cosine_similarity(a, b));
}
BENCHMARK(BM_Cosine)->Arg(256)->Arg(1536);

void BM_Pearson(benchmark::State& st) {
  const auto p = noisy_pairs(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(eval::pearson_abs(p));
}
BENCHMARK(BM_Pearson)->Arg(100)->Arg(10000);

void BM_BootstrapSd(benchmark::State& st) {
  const auto p = noisy_pairs(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(eval::bootstrap_sd(p, 1000, 7));
}
BENCHMARK(BM_BootstrapSd)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_SplitSentences(benchmark::State& st) {
  const std::string text = paragraph(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(detectors::split_sentences(text));
  st.SetBytesProcessed(static_cast<std::int64_t>(st.iterations() * text.size()));
}
BENCHMARK(BM_SplitSentences)->Arg(10)->Arg(200);

void BM_SyntheticDetect(benchmark::State& st) {
  const auto records = lno::generate_synthetic_lno(7, 50, 4);
  auto replay = std::make_shared<providers::ReplayCompletionProvider>(
      "replay", std::make_shared<const providers::FixtureStore>(lno::synthetic_extraction_fixture(records)));
  auto hash = std::make_shared<providers::HashEmbedder>(256);
  const detectors::Detector det({"fae", detectors::DetectorKind::kFactAlignEmbedding, 0.75, "replay", "hash", 0, {}},
                                replay, hash);
  for (auto _ : st) {
    for (const auto& r : records) benchmark::DoNotOptimize(det.detect(r.edited_transcript, r.summary));
  }
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * records.size()));
}
BENCHMARK(BM_SyntheticDetect)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
