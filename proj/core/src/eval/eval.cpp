#include "hallucount/eval/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <thread>
#include <unordered_map>

#include "hallucount/core/random.hpp"

namespace hallucount::eval {

std::string_view to_string(SeverityFilter f) { return f == SeverityFilter::kAll ? "all" : "high"; }

std::optional<SeverityFilter> severity_filter_from_string(std::string_view s) {
  if (s == "all") return SeverityFilter::kAll;
  if (s == "high") return SeverityFilter::kHighSeverity;
  return std::nullopt;
}

std::string_view to_string(PredictionBasis b) { return b == PredictionBasis::kCount ? "count" : "raw_score"; }

std::optional<PredictionBasis> prediction_basis_from_string(std::string_view s) {
  if (s == "count") return PredictionBasis::kCount;
  if (s == "raw_score") return PredictionBasis::kRawScore;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

PearsonResult pearson_abs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kInvalidArgument, "pearson_abs: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw Error(ErrorCode::kTooFewSamples, "pearson_abs needs at least 2 pairs");

  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v[0]; });
  };
  if (constant(x) || constant(y)) return {0.0, true};

  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return {0.0, true};
  return {std::min(1.0, std::abs(sxy) / std::sqrt(sxx * syy)), false};
}

PearsonResult pearson_abs(std::span<const PairedSample> pairs) {
  std::vector<double> x, y;
  x.reserve(pairs.size());
  y.reserve(pairs.size());
  for (const auto& p : pairs) {
    x.push_back(p.predicted);
    y.push_back(p.truth);
  }
  return pearson_abs(x, y);
}

double bootstrap_sd(std::span<const PairedSample> pairs, std::size_t resamples, std::uint64_t seed) {
  const std::size_t n = pairs.size();
  if (n < 2) throw Error(ErrorCode::kTooFewSamples, "bootstrap_sd needs at least 2 pairs");
  if (resamples < kMinResamples) {
    throw Error(ErrorCode::kInvalidArgument,
                "bootstrap_sd needs at least " + std::to_string(kMinResamples) + " resamples");
  }
  SeededRng rng(seed);
  std::vector<double> x(n), y(n), stats;
  stats.reserve(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = pairs[rng.below(n)];
      x[i] = p.predicted;
      y[i] = p.truth;
    }
    stats.push_back(pearson_abs(x, y).value);
  }
  double mean = 0;
  for (double s : stats) mean += s;
  mean /= static_cast<double>(resamples);
  double ss = 0;
  for (double s : stats) ss += (s - mean) * (s - mean);
  return std::sqrt(ss / static_cast<double>(resamples - 1));
}

// ---------------------------------------------------------------------------

std::size_t high_severity_truth(const datasets::LnoRecord& record) { return record.n_high_severity(); }

std::size_t high_severity_truth(const datasets::NhRecord& record) {
  return datasets::aggregate_nh(record).high_severity;
}

EvalRecord to_eval_record(const datasets::LnoRecord& r) {
  return {r.id, r.edited_transcript, r.summary, static_cast<double>(r.n()),
          static_cast<double>(r.n_high_severity())};
}

EvalRecord to_eval_record(const datasets::NhRecord& r) {
  EvalRecord out{r.id, r.transcript, r.summary, 0.0, std::nullopt};
  out.truth = static_cast<double>(std::count_if(r.annotations.begin(), r.annotations.end(),
                                                [](const auto& a) { return datasets::is_error(a.label); }));
  try {
    out.truth_high = static_cast<double>(high_severity_truth(r));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kMissingCategory) throw;
  }
  return out;
}

EvalRecord to_eval_record(const datasets::XsumRecord& r, bool strict_arity) {
  return {r.id, r.document, r.summary, datasets::aggregate_xsum(r, strict_arity), std::nullopt};
}

// ---------------------------------------------------------------------------

DetectionRun run_detections(const detectors::Detector& detector, std::span<const EvalRecord> records,
                            int trials, std::size_t parallel) {
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
  const std::size_t jobs = records.size() * static_cast<std::size_t>(trials);
  std::vector<std::optional<HallucinationReport>> reports(jobs);
  std::vector<std::optional<RecordFailure>> failures(jobs);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const int trial = static_cast<int>(job / records.size());
      const EvalRecord& rec = records[job % records.size()];
      try {
        reports[job] = detector.detect(rec.transcript, rec.summary, trial);
      } catch (const Error& e) {
        failures[job] = RecordFailure{rec.id, trial, e.code(), e.what()};
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(parallel, 1, std::max<std::size_t>(jobs, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  DetectionRun run;
  for (std::size_t job = 0; job < jobs; ++job) {
    const int trial = static_cast<int>(job / records.size());
    if (reports[job]) run.detections.push_back({records[job % records.size()].id, trial, std::move(*reports[job])});
    if (failures[job]) run.failures.push_back(std::move(*failures[job]));
  }
  return run;
}

// ---------------------------------------------------------------------------

namespace {

std::optional<double> truth_of(const EvalRecord& r, SeverityFilter filter) {
  return filter == SeverityFilter::kAll ? std::optional<double>(r.truth) : r.truth_high;
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

void check_truth(std::span<const EvalRecord> records, SeverityFilter filter) {
  if (records.size() < 2) throw Error(ErrorCode::kTooFewSamples, "evaluation needs at least 2 records");
  std::optional<double> first;
  bool varies = false;
  for (const EvalRecord& r : records) {
    auto t = truth_of(r, filter);
    if (!t) {
      throw Error(ErrorCode::kMissingCategory, "record '" + r.id + "' has no high-severity truth");
    }
    if (!first) first = t;
    else if (*t != *first) varies = true;
  }
  if (!varies) {
    throw Error(ErrorCode::kDegenerateDataset,
                "ground truth is constant (" + std::to_string(*first) + ") across " +
                    std::to_string(records.size()) + " records; correlation is undefined");
  }
}

EvalRow evaluate(std::span<const Detection> detections, std::span<const EvalRecord> records,
                 SeverityFilter filter, const EvalOptions& options,
                 std::span<const std::string> failed_records, std::string dataset_id) {
  const std::set<std::string> failed(failed_records.begin(), failed_records.end());
  std::unordered_map<std::string, const EvalRecord*> by_id;
  for (const EvalRecord& r : records) by_id[r.id] = &r;

  EvalRow row;
  row.dataset_id = std::move(dataset_id);
  row.severity_filter = filter;
  row.basis = options.basis;
  row.failed_records.assign(failed.begin(), failed.end());

  std::map<int, std::vector<PairedSample>> by_trial;
  std::set<std::string> used;
  for (const Detection& d : detections) {
    if (failed.count(d.record_id)) continue;
    auto it = by_id.find(d.record_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kInvalidArgument, "detection for unknown record '" + d.record_id + "'");
    }
    if (row.detector_id.empty()) row.detector_id = d.report.detector_id;
    const auto truth = truth_of(*it->second, filter);
    if (!truth) throw Error(ErrorCode::kMissingCategory, "record '" + d.record_id + "' has no high-severity truth");

    double predicted = 0;
    if (options.basis == PredictionBasis::kRawScore) {
      if (!d.report.raw_score) {
        throw Error(ErrorCode::kInvalidArgument, "detector '" + d.report.detector_id + "' reports no raw score");
      }
      predicted = *d.report.raw_score;
      if (filter == SeverityFilter::kHighSeverity) row.high_severity_fallback = true;
    } else if (filter == SeverityFilter::kHighSeverity) {
      if (auto hs = d.report.high_severity_count()) {
        predicted = static_cast<double>(*hs);
      } else {
        predicted = static_cast<double>(d.report.count);
        row.high_severity_fallback = true;
      }
    } else {
      predicted = static_cast<double>(d.report.count);
    }
    by_trial[d.trial].push_back({d.record_id, predicted, *truth, d.trial});
    used.insert(d.record_id);
  }

  std::vector<EvalRecord> used_records;
  for (const EvalRecord& r : records) {
    if (used.count(r.id)) used_records.push_back(r);
  }
  check_truth(used_records, filter);

  std::vector<PairedSample> pooled;
  bool all_degenerate = true;
  for (auto& [trial, pairs] : by_trial) {
    const PearsonResult r = pearson_abs(pairs);
    row.per_trial_r.push_back(r.value);
    all_degenerate = all_degenerate && r.degenerate;
    pooled.insert(pooled.end(), pairs.begin(), pairs.end());
  }
  row.trials = static_cast<int>(by_trial.size());
  row.n_records = used.size();
  row.degenerate = all_degenerate;
  double sum = 0;
  for (double r : row.per_trial_r) sum += r;
  row.abs_r = all_degenerate ? 0.0 : sum / static_cast<double>(row.per_trial_r.size());
  row.across_trial_sd = sample_sd(row.per_trial_r);
  row.sd = bootstrap_sd(pooled, options.resamples, options.seed);
  return row;
}

EvalRow run_benchmark(const detectors::Detector& detector, std::span<const EvalRecord> records,
                      int trials, SeverityFilter filter, const EvalOptions& options,
                      std::size_t parallel, std::string dataset_id) {
  check_truth(records, filter);
  DetectionRun run = run_detections(detector, records, trials, parallel);
  std::vector<std::string> failed;
  for (const auto& f : run.failures) failed.push_back(f.record_id);
  EvalRow row = evaluate(run.detections, records, filter, options, failed, std::move(dataset_id));
  row.detector_id = detector.spec().id;
  return row;
}

Calibration calibrate_threshold(const detectors::Detector& detector,
                                std::span<const EvalRecord> heldout, std::span<const double> grid,
                                std::size_t parallel) {
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "calibration grid is empty");
  for (double t : grid) {
    if (!(t > 0.0 && t <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "grid threshold " + std::to_string(t) + " is outside (0, 1]");
    }
  }
  check_truth(heldout, SeverityFilter::kAll);

  Calibration out;
  std::optional<GridPoint> best;
  for (double t : grid) {
    const detectors::Detector d = detector.with_threshold(t);
    DetectionRun run = run_detections(d, heldout, 1, parallel);
    if (!run.failures.empty()) {
      const auto& f = run.failures.front();
      throw Error(f.code, "calibration run failed on '" + f.record_id + "': " + f.message);
    }
    std::vector<PairedSample> pairs;
    for (std::size_t i = 0; i < heldout.size(); ++i) {
      pairs.push_back({heldout[i].id, static_cast<double>(run.detections[i].report.count), heldout[i].truth, 0});
    }
    const PearsonResult r = pearson_abs(pairs);
    GridPoint p{t, r.value, r.degenerate};
    out.grid.push_back(p);
    if (!best || p.abs_r > best->abs_r + 1e-12 ||
        (std::abs(p.abs_r - best->abs_r) <= 1e-12 && p.threshold > best->threshold)) {
      best = p;
    }
  }
  out.threshold = best->threshold;
  return out;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const EvalRow& row) {
  return {{"detector_id", row.detector_id},
          {"dataset_id", row.dataset_id},
          {"severity_filter", to_string(row.severity_filter)},
          {"basis", to_string(row.basis)},
          {"abs_r", row.abs_r},
          {"sd", row.sd},
          {"trials", row.trials},
          {"n_records", row.n_records},
          {"degenerate", row.degenerate},
          {"per_trial_r", row.per_trial_r},
          {"across_trial_sd", row.across_trial_sd},
          {"failed_records", row.failed_records},
          {"high_severity_fallback", row.high_severity_fallback}};
}

EvalRow eval_row_from_json(const nlohmann::json& j) {
  EvalRow row;
  try {
    row.detector_id = j.at("detector_id").get<std::string>();
    row.dataset_id = j.at("dataset_id").get<std::string>();
    auto f = severity_filter_from_string(j.at("severity_filter").get<std::string>());
    auto b = prediction_basis_from_string(j.value("basis", std::string("count")));
    if (!f || !b) throw Error(ErrorCode::kSchemaViolation, "bad severity_filter or basis in eval row");
    row.severity_filter = *f;
    row.basis = *b;
    row.abs_r = j.at("abs_r").get<double>();
    row.sd = j.at("sd").get<double>();
    row.trials = j.at("trials").get<int>();
    row.n_records = j.at("n_records").get<std::size_t>();
    row.degenerate = j.at("degenerate").get<bool>();
    row.per_trial_r = j.value("per_trial_r", std::vector<double>{});
    row.across_trial_sd = j.value("across_trial_sd", 0.0);
    row.failed_records = j.value("failed_records", std::vector<std::string>{});
    row.high_severity_fallback = j.value("high_severity_fallback", false);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("eval row: ") + e.what());
  }
  return row;
}

}  // namespace hallucount::eval
