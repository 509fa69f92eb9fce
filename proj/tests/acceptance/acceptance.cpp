// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "hallucount/core/error.hpp"
#include "hallucount/core/random.hpp"
#include "hallucount/datasets/codec.hpp"
#include "hallucount/datasets/jsonl.hpp"
#include "hallucount/detectors/detector.hpp"
#include "hallucount/eval/eval.hpp"
#include "hallucount/lno/lno.hpp"
#include "hallucount/providers/hash_embedder.hpp"
#include "hallucount/providers/replay.hpp"
#include "support.hpp"

using namespace hallucount;
using detectors::Detector;
using detectors::DetectorKind;
using eval::PairedSample;
using eval::SeverityFilter;

namespace {

struct Failure {
  std::string what;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<PairedSample> pairs_of(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<PairedSample> p;
  for (std::size_t i = 0; i < x.size(); ++i) p.push_back({"r" + std::to_string(i), x[i], y[i], 0});
  return p;
}

long double direct_abs_r(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return std::fabs(sxy / std::sqrt(sxx * syy));
}

struct Synthetic {
  std::vector<datasets::LnoRecord> lno;
  std::vector<eval::EvalRecord> records;
  std::shared_ptr<const providers::CompletionProvider> replay;
  std::shared_ptr<const providers::EmbeddingProvider> hash = std::make_shared<providers::HashEmbedder>(256);

  Synthetic(std::uint64_t seed, std::size_t n, std::size_t max_n) : lno(lno::generate_synthetic_lno(seed, n, max_n)) {
    for (const auto& r : lno) records.push_back(eval::to_eval_record(r));
    replay = std::make_shared<providers::ReplayCompletionProvider>(
        "replay", std::make_shared<const providers::FixtureStore>(lno::synthetic_extraction_fixture(lno)));
  }
  Detector fact_align(double threshold) const {
    return Detector({"fae", DetectorKind::kFactAlignEmbedding, threshold, "replay", "hash", 0, {}}, replay, hash);
  }
};

// --- criteria ---------------------------------------------------------------

void synthetic_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  Synthetic fx(7, 50, 4);
  for (auto filter : {SeverityFilter::kAll, SeverityFilter::kHighSeverity}) {
    const auto row = eval::run_benchmark(fx.fact_align(0.75), fx.records, 1, filter, {}, 1, "lno");
    require(std::fabs(row.abs_r - 1.0) < 1e-9, "|r| = " + std::to_string(row.abs_r));
    require(!row.degenerate && !row.high_severity_fallback, "unexpected flags");
  }
  for (std::size_t i = 0; i < fx.lno.size(); ++i) {
    const auto rep = fx.fact_align(0.75).detect(fx.lno[i].edited_transcript, fx.lno[i].summary);
    require(rep.count == fx.lno[i].n(), "count mismatch on " + fx.lno[i].id);
    require(rep.high_severity_count() == fx.lno[i].n_high_severity(), "high-severity mismatch on " + fx.lno[i].id);
  }
  require(seconds_since(t0) < 5.0, "took " + std::to_string(seconds_since(t0)) + " s");
}

void pearson_oracle() {
  SeededRng rng(101);
  std::vector<double> x(1000), y(1000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(rng.below(9));
    y[i] = 0.3 * x[i] + rng.unit() * 5.0 - 2.0;
  }
  const double r = eval::pearson_abs(x, y).value;
  require(std::fabs(static_cast<long double>(r) - direct_abs_r(x, y)) <= 1e-12L, "oracle mismatch");
  for (int k = 0; k < 100; ++k) {
    const double a = (rng.unit() + 0.1) * (rng.below(2) ? 1 : -1) * 10, b = rng.unit() * 100 - 50;
    std::vector<double> ax(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) ax[i] = a * x[i] + b;
    require(std::fabs(eval::pearson_abs(ax, y).value - r) <= 1e-12, "affine invariance");
    require(std::fabs(eval::pearson_abs(y, x).value - r) <= 1e-15, "symmetry");
  }
  require(eval::pearson_abs(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}).degenerate,
          "constant side must be degenerate");
}

void bootstrap_contract() {
  SeededRng rng(5);
  std::vector<double> x(40), y(40);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(rng.below(5));
    y[i] = x[i] + rng.unit() * 2;
  }
  const auto p = pairs_of(x, y);
  const double a = eval::bootstrap_sd(p, 1000, 9), b = eval::bootstrap_sd(p, 1000, 9);
  require(std::memcmp(&a, &b, sizeof a) == 0, "not bit-identical across runs");
  for (std::size_t n : {10, 12, 20}) {
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
      lx[i] = static_cast<double>(i);
      ly[i] = 3.0 * static_cast<double>(i) - 1.0;
    }
    const double q = std::pow(static_cast<double>(n), 1.0 - static_cast<double>(n));
    require(eval::bootstrap_sd(pairs_of(lx, ly), 1000, 1) <= std::sqrt(q * (1 - q)) + 1e-9, "linear bound");
  }
  // Constant truth is refused before any detector work.
  std::vector<eval::EvalRecord> flat;
  for (int i = 0; i < 3; ++i) flat.push_back({"f" + std::to_string(i), Transcript("t", "x"), SummaryDoc("s", "y"), 2.0, 1.0});
  bool degenerate = false;
  try {
    eval::check_truth(flat, SeverityFilter::kAll);
  } catch (const Error& e) {
    degenerate = e.code() == ErrorCode::kDegenerateDataset;
  }
  require(degenerate, "constant truth not rejected");
}

void threshold_monotonicity() {
  Synthetic fx(3, 12, 4);
  std::vector<std::size_t> prev(fx.lno.size(), 0);
  for (int g = 0; g <= 20; ++g) {
    const double th = g == 0 ? 0.01 : g / 20.0;
    for (std::size_t i = 0; i < fx.lno.size(); ++i) {
      const auto c = fx.fact_align(th).detect(fx.lno[i].edited_transcript, fx.lno[i].summary).count;
      require(c >= prev[i], "count fell as threshold rose");
      prev[i] = c;
    }
  }
  auto table = std::make_shared<testing::TableEmbedder>(
      std::map<std::string, std::vector<double>>{{"Alpha one.", {1, 0, 0, 0, 0}}, {"Beta two.", {3, 2, 1, 1, 1}}});
  const Detector at({"sim", DetectorKind::kSemanticSimilarity, 0.75, "", "table", 0, {}}, nullptr, table);
  const auto rep = at.detect(Transcript("t", "Alpha one."), SummaryDoc("s", "Beta two."));
  require(rep.count == 0, "cosine exactly at the threshold must be supported");
  require(at.with_threshold(0.7500001).detect(Transcript("t", "Alpha one."), SummaryDoc("s", "Beta two.")).count == 1,
          "cosine just below the threshold must be unsupported");
}

void severity_partition() {
  int cases = 0;
  for (auto label : datasets::kAllNhLabels) {
    for (auto cat : kAllCategories) {
      datasets::NhRecord r{"r", Transcript("t", "x"), SummaryDoc("s", "y"), {{"st", label, cat, std::nullopt}},
                           std::nullopt, nlohmann::json::object()};
      const auto c = datasets::aggregate_nh(r);
      const bool counted = label != datasets::NhLabel::kNoFactualError;
      const std::size_t high = counted && cat != FactCategory::kAgeAndSex ? 1 : 0;
      require(c.total == (counted ? 1u : 0u), "total for a single annotation");
      require(c.high_severity == high, "aggregate_nh high severity");
      require(eval::high_severity_truth(r) == high, "high_severity_truth on NH");
      ++cases;
    }
  }
  require(cases == 28, "expected 28 cases");
  for (auto cat : kAllCategories) {
    datasets::LnoRecord r{"r", Transcript("t", "a"), Transcript("t", "b"), SummaryDoc("s", "c"),
                          {{"S1", "f", cat, FactSource::kFromSummary, std::nullopt}}, {}, nlohmann::json::object()};
    require(eval::high_severity_truth(r) == (cat != FactCategory::kAgeAndSex ? 1u : 0u), "high_severity_truth on LNO");
  }
}

void nh_random_sets() {
  SeededRng rng(77);
  for (int it = 0; it < 200; ++it) {
    datasets::NhRecord r{"r", Transcript("t", "x"), SummaryDoc("s", "y"), {}, std::nullopt, nlohmann::json::object()};
    std::size_t errors = 0, high = 0;
    for (std::size_t k = 0, m = rng.below(15); k < m; ++k) {
      const auto label = datasets::kAllNhLabels[rng.below(4)];
      const auto cat = kAllCategories[rng.below(7)];
      r.annotations.push_back({"st", label, cat, std::nullopt});
      if (datasets::is_error(label)) {
        ++errors;
        high += cat != FactCategory::kAgeAndSex;
      }
    }
    const auto c = datasets::aggregate_nh(r);
    require(c.total == errors && c.high_severity == high, "aggregate mismatch at iteration " + std::to_string(it));
    require(c.high_severity <= c.total, "high exceeds total");
  }
}

void replay_hermeticity() {
  Synthetic fx(11, 5, 3);
  auto inner = std::make_shared<testing::ScriptedCompletion>([&](const providers::CompletionRequest& r) {
    try {
      return fx.replay->complete(r);
    } catch (const Error&) {
      return std::string("{\"id\": \"S1\", \"fact\": \"first\"}");
    }
  });
  auto store = std::make_shared<providers::FixtureStore>();
  auto recorder = std::make_shared<providers::RecordingCompletionProvider>(inner, store);
  const detectors::DetectorSpec spec{"fal", DetectorKind::kFactAlignLlm, std::nullopt, "llm", "", 0, {}};
  std::vector<HallucinationReport> live;
  for (const auto& r : fx.lno) live.push_back(Detector(spec, recorder, nullptr).detect(r.edited_transcript, r.summary));

  testing::TempDir dir;
  store->save(dir / "fixture.jsonl");
  auto replay = std::make_shared<providers::ReplayCompletionProvider>(
      "scripted", std::make_shared<const providers::FixtureStore>(providers::FixtureStore::load(dir / "fixture.jsonl")));
  for (std::size_t i = 0; i < fx.lno.size(); ++i) {
    const auto rep = Detector(spec, replay, nullptr).detect(fx.lno[i].edited_transcript, fx.lno[i].summary);
    require(rep == live[i] && datasets::to_json(rep).dump() == datasets::to_json(live[i]).dump(),
            "replayed report differs on " + fx.lno[i].id);
    require(rep.count == rep.unsupported_verdicts(), "count is not the number of unsupported verdicts");
  }
  const int calls = inner->calls();
  for (const auto& r : fx.lno) Detector(spec, replay, nullptr).detect(r.edited_transcript, r.summary);
  require(inner->calls() == calls, "replay reached the live provider");
}

template <typename R, typename Gen>
void round_trip_one(Gen gen, std::uint64_t seed, const testing::TempDir& dir, const std::string& name) {
  SeededRng rng(seed);
  std::vector<R> recs;
  for (std::size_t i = 0; i < 100; ++i) recs.push_back(gen(rng, i));
  datasets::write_records<R>(dir / name, recs);
  require(datasets::read_records<R>(dir / name) == recs, name + " did not round-trip");
}

void serialization_round_trip() {
  testing::TempDir dir;
  round_trip_one<datasets::LnoRecord>(testing::random_lno, 1, dir, "lno.jsonl");
  round_trip_one<datasets::NhRecord>(testing::random_nh, 2, dir, "nh.jsonl");
  round_trip_one<datasets::XsumRecord>(testing::random_xsum, 3, dir, "xsum.jsonl");
}

void cli_end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  testing::TempDir dir;
  const nlohmann::json cfg = {
      {"providers",
       {{"llm", {{"kind", "replay"}, {"fixture", "lno.fixture.jsonl"}}},
        {"emb", {{"kind", "hash-embedding"}, {"dim", 256}}}}},
      {"detectors", nlohmann::json::array({{{"id", "fae"},
                                            {"kind", "fact_align_embedding"},
                                            {"completion_provider", "llm"},
                                            {"embedding_provider", "emb"},
                                            {"threshold", 0.75}}})},
      {"datasets", {{"lno", {{"path", "lno.jsonl"}, {"schema", "lno"}}}}},
      {"eval", {{"seed", 7}, {"trials", 1}}},
      {"output_dir", "."}};
  std::ofstream(dir / "config.json") << cfg.dump(2);
  const std::string cli = HALLUCOUNT_CLI_PATH;
  const std::string d = "'" + dir.path().string() + "'";
  const std::string log = " >>" + d + "/log.txt 2>&1";
  auto sh = [&](const std::string& args) { return std::system((cli + " " + args + log).c_str()); };
  require(sh("generate-lno --synthetic --records 30 --seed 7 --output-dir " + d) == 0, "generate-lno failed");
  require(sh("detect --config " + d + "/config.json --detector fae --dataset lno") == 0, "detect failed");
  require(sh("evaluate --config " + d + "/config.json --detections " + d +
             "/detections/fae__lno.jsonl --dataset lno") == 0,
          "evaluate failed");
  const std::string table = testing::read_file(dir / "eval_rows.txt");
  for (const char* col : {"metric", "LNO", "LNO-high", "NH", "NH-high", "XSum"}) {
    require(table.find(col) != std::string::npos, std::string("table lacks column ") + col + ":\n" + table);
  }
  require(table.find("1.00 ± 0.00") != std::string::npos, "unexpected cells:\n" + table);
  require(seconds_since(t0) < 30.0, "took " + std::to_string(seconds_since(t0)) + " s");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void()>>> criteria = {
      {"synthetic LNO counts recovered exactly (|r| = 1, < 5 s)", synthetic_exactness},
      {"Pearson |r| matches a direct oracle; affine and symmetry invariant", pearson_oracle},
      {"bootstrap SD deterministic and bounded; constant truth rejected", bootstrap_contract},
      {"count monotone in threshold; cosine at threshold is supported", threshold_monotonicity},
      {"severity partition over 28 label x category cases", severity_partition},
      {"natural-hallucination counts on 200 random annotation sets", nh_random_sets},
      {"replayed detections identical and hermetic", replay_hermeticity},
      {"JSONL round trip for every record schema", serialization_round_trip},
      {"CLI generate, detect, evaluate end to end (< 30 s)", cli_end_to_end},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    std::string detail;
    bool ok = true;
    try {
      fn();
    } catch (const Failure& f) {
      ok = false;
      detail = f.what;
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    std::cout << (ok ? "PASS" : "FAIL") << " [" << index << "] " << name;
    if (!ok) std::cout << ": " << detail;
    std::cout << '\n';
    failed += !ok;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
