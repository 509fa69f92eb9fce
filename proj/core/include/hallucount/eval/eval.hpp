#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hallucount/core/error.hpp"
#include "hallucount/core/types.hpp"
#include "hallucount/datasets/records.hpp"
#include "hallucount/detectors/detector.hpp"

namespace hallucount::eval {

enum class SeverityFilter { kAll, kHighSeverity };

std::string_view to_string(SeverityFilter f);  // "all", "high"
std::optional<SeverityFilter> severity_filter_from_string(std::string_view s);

/// Which detector output is correlated with truth.
enum class PredictionBasis { kCount, kRawScore };

std::string_view to_string(PredictionBasis b);  // "count", "raw_score"
std::optional<PredictionBasis> prediction_basis_from_string(std::string_view s);

/// truth is fractional only for XSum-style mean annotator counts.
struct PairedSample {
  std::string record_id;
  double predicted = 0.0;
  double truth = 0.0;
  int trial = 0;

  bool operator==(const PairedSample&) const = default;
};

struct PearsonResult {
  double value = 0.0;  // |r| in [0, 1]; 0 when degenerate
  bool degenerate = false;

  bool operator==(const PearsonResult&) const = default;
};

/// |r| over the pairs. Either side having zero variance gives {0, true}.
/// Throws kTooFewSamples for fewer than 2 pairs.
PearsonResult pearson_abs(std::span<const PairedSample> pairs);
PearsonResult pearson_abs(std::span<const double> x, std::span<const double> y);

inline constexpr std::size_t kDefaultResamples = 1000;
inline constexpr std::size_t kMinResamples = 100;

/// Sample SD of |r| over bootstrap resamples (with replacement) of the pairs;
/// degenerate resamples count as 0. Deterministic for a given seed.
double bootstrap_sd(std::span<const PairedSample> pairs, std::size_t resamples = kDefaultResamples,
                    std::uint64_t seed = 0);

// ---------------------------------------------------------------------------

/// A record as the evaluator sees it: the documents a detector runs on plus
/// ground truth. truth_high is absent when the source has no categories.
struct EvalRecord {
  std::string id;
  Transcript transcript;
  SummaryDoc summary;
  double truth = 0.0;
  std::optional<double> truth_high;

  bool operator==(const EvalRecord&) const = default;
};

/// LNO: removed facts outside Age & Sex. NH: error annotations outside
/// Age & Sex (kMissingCategory if one lacks a category).
std::size_t high_severity_truth(const datasets::LnoRecord& record);
std::size_t high_severity_truth(const datasets::NhRecord& record);

/// LNO records are evaluated on the edited transcript.
EvalRecord to_eval_record(const datasets::LnoRecord& r);
EvalRecord to_eval_record(const datasets::NhRecord& r);
EvalRecord to_eval_record(const datasets::XsumRecord& r, bool strict_arity = true);

struct Detection {
  std::string record_id;
  int trial = 0;
  HallucinationReport report;

  bool operator==(const Detection&) const = default;
};

struct RecordFailure {
  std::string record_id;
  int trial = 0;
  ErrorCode code = ErrorCode::kProviderFailure;
  std::string message;

  bool operator==(const RecordFailure&) const = default;
};

struct DetectionRun {
  std::vector<Detection> detections;  // ordered by (trial, record)
  std::vector<RecordFailure> failures;
};

/// Runs detector.detect for every (trial, record), at most `parallel`
/// records at a time. Library errors on a record are collected as failures
/// rather than thrown; output order does not depend on scheduling.
DetectionRun run_detections(const detectors::Detector& detector, std::span<const EvalRecord> records,
                            int trials, std::size_t parallel = 1);

struct EvalOptions {
  std::size_t resamples = kDefaultResamples;
  std::uint64_t seed = 0;
  PredictionBasis basis = PredictionBasis::kCount;
};

struct EvalRow {
  std::string detector_id;
  std::string dataset_id;
  SeverityFilter severity_filter = SeverityFilter::kAll;
  PredictionBasis basis = PredictionBasis::kCount;
  double abs_r = 0.0;  // mean over trials
  double sd = 0.0;     // bootstrap SD over the pooled pairs
  int trials = 0;
  std::size_t n_records = 0;
  bool degenerate = false;  // every trial had zero-variance predictions
  std::vector<double> per_trial_r;
  double across_trial_sd = 0.0;
  std::vector<std::string> failed_records;
  /// High-severity row correlated total predictions against high-severity
  /// truth because the detector's verdicts carry no categories.
  bool high_severity_fallback = false;

  bool operator==(const EvalRow&) const = default;
};

nlohmann::json to_json(const EvalRow& row);
EvalRow eval_row_from_json(const nlohmann::json& j);

/// Throws kDegenerateDataset when truth is constant, kTooFewSamples under
/// two records.
void check_truth(std::span<const EvalRecord> records, SeverityFilter filter);

/// Correlates existing detections with truth. Records that failed in any
/// trial are dropped from every trial.
EvalRow evaluate(std::span<const Detection> detections, std::span<const EvalRecord> records,
                 SeverityFilter filter, const EvalOptions& options = {},
                 std::span<const std::string> failed_records = {},
                 std::string dataset_id = "");

EvalRow run_benchmark(const detectors::Detector& detector, std::span<const EvalRecord> records,
                      int trials, SeverityFilter filter, const EvalOptions& options = {},
                      std::size_t parallel = 1, std::string dataset_id = "");

struct GridPoint {
  double threshold = 0.0;
  double abs_r = 0.0;
  bool degenerate = false;
};

struct Calibration {
  double threshold = 0.0;
  std::vector<GridPoint> grid;
};

/// Picks the grid threshold with the highest |r| on held-out records
/// (trial 0, total counts); near-ties (1e-12) go to the larger threshold.
/// Throws kInvalidArgument for an empty grid or values outside (0, 1].
Calibration calibrate_threshold(const detectors::Detector& detector,
                                std::span<const EvalRecord> heldout, std::span<const double> grid,
                                std::size_t parallel = 1);

}  // namespace hallucount::eval
