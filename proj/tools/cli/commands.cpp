#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "config.hpp"
#include "table.hpp"

#include "hallucount/core/random.hpp"
#include "hallucount/datasets/codec.hpp"
#include "hallucount/datasets/jsonl.hpp"
#include "hallucount/eval/eval.hpp"
#include "hallucount/lno/lno.hpp"
#include "hallucount/providers/hash_embedder.hpp"

namespace hallucount::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorCode code) {
  if (is_provider_error(code)) return kExitProvider;
  switch (code) {
    case ErrorCode::kParseFailure:
    case ErrorCode::kNoChangeProduced:
      return kExitProvider;
    case ErrorCode::kDegenerateDataset:
    case ErrorCode::kTooFewSamples:
    case ErrorCode::kInsufficientOrthogonalFacts:
      return kExitDegenerate;
    default:
      return kExitUsage;
  }
}

namespace {

[[noreturn]] void usage(const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); }

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// lno.jsonl -> lno<suffix>, next to it
fs::path sibling(const fs::path& p, const std::string& suffix) {
  return p.parent_path() / (p.stem().string() + suffix);
}

RunConfig load_config(const CommonOptions& c, bool required) {
  RunConfig cfg;
  if (c.config) cfg = RunConfig::load(*c.config);
  else if (required) usage("--config is required for this command");
  if (c.output_dir) cfg.output_dir = fs::absolute(*c.output_dir);
  if (c.seed) cfg.eval.seed = *c.seed;
  return cfg;
}

std::vector<eval::EvalRecord> load_eval_records(const fs::path& path, datasets::SchemaKind kind) {
  std::vector<eval::EvalRecord> out;
  std::visit(
      [&](const auto& records) {
        using R = typename std::decay_t<decltype(records)>::value_type;
        if constexpr (std::is_same_v<R, datasets::SourcePair>) {
          throw Error(ErrorCode::kConfig, path.string() + ": source pairs carry no ground truth");
        } else {
          for (const auto& r : records) out.push_back(eval::to_eval_record(r));
        }
      },
      datasets::read_records(path, kind));
  return out;
}

void write_failures(const fs::path& path, const std::vector<eval::RecordFailure>& failures) {
  std::vector<json> lines;
  for (const auto& f : failures) {
    lines.push_back({{"record_id", f.record_id},
                     {"trial", f.trial},
                     {"error", to_string(f.code)},
                     {"message", f.message}});
  }
  datasets::write_json_lines(path, lines);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  f << text;
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_generate_lno(const GenerateOptions& o, std::ostream& out, std::ostream& err) {
  if (o.records == 0) usage("--records must be positive");
  if (o.synthetic == o.from.has_value()) usage("pass exactly one of --synthetic or --from");
  RunConfig cfg = load_config(o.common, !o.synthetic);
  if (!cfg.eval.seed) usage("--seed is required (or set eval.seed in the config)");
  const std::uint64_t seed = *cfg.eval.seed;
  const fs::path out_path = o.out ? *o.out : cfg.output_path("lno.jsonl");

  std::vector<datasets::LnoRecord> records;
  std::vector<lno::LeakageReport> leakage;
  std::vector<eval::RecordFailure> failures;

  if (o.synthetic) {
    records = lno::generate_synthetic_lno(seed, o.records, o.max_n);
    const providers::HashEmbedder embedder(256);
    for (const auto& r : records) leakage.push_back(lno::verify_removal(r.edited_transcript, r.removed_facts, embedder, o.leak_threshold));
    const fs::path fixture_path = sibling(out_path, ".fixture.jsonl");
    lno::synthetic_extraction_fixture(records).save(fixture_path);
    out << "extraction fixture: " << fixture_path.string() << '\n';
  } else {
    if (o.completion.empty() || o.embedding.empty()) usage("--from needs --completion and --embedding provider ids");
    cfg.validate();
    ProviderRegistry registry(cfg);
    const auto llm = registry.completion(o.completion);
    const auto embedder = registry.embedding(o.embedding);
    const auto pairs = datasets::read_records<datasets::SourcePair>(*o.from);
    if (o.records < pairs.size()) err << "using the first " << o.records << " of " << pairs.size() << " source pairs\n";
    SeededRng rng(seed);
    for (std::size_t i = 0; i < std::min(o.records, pairs.size()); ++i) {
      std::size_t n = rng.below(o.max_n + 1);
      while (true) {
        try {
          auto g = lno::generate_lno_record(pairs[i], n, derive_seed(seed, i), *llm, *embedder, {}, o.leak_threshold);
          records.push_back(std::move(g.record));
          leakage.push_back(std::move(g.leakage));
          break;
        } catch (const Error& e) {
          if (e.code() == ErrorCode::kInsufficientOrthogonalFacts && n > 0) {
            --n;  // fewer facts still yields a usable record
            continue;
          }
          if (exit_code_for(e.code()) != kExitProvider) throw;
          failures.push_back({pairs[i].id, 0, e.code(), e.what()});
          break;
        }
      }
    }
    registry.flush();
    write_failures(sibling(out_path, ".failures.jsonl"), failures);
  }

  datasets::write_records(out_path, records);
  std::vector<json> queue;
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const auto& item : lno::review_queue(records[i], leakage[i])) queue.push_back(lno::to_json(item));
  }
  datasets::write_json_lines(sibling(out_path, ".review.jsonl"), queue);

  double mean_n = 0;
  for (const auto& r : records) mean_n += static_cast<double>(r.n());
  if (!records.empty()) mean_n /= static_cast<double>(records.size());
  out << "records: " << records.size() << '\n'
      << "mean n: " << fixed2(mean_n) << '\n'
      << "leaked lines per transcript: " << fixed2(lno::correction_workload(leakage)) << '\n'
      << "wrote " << out_path.string() << '\n';
  if (!failures.empty()) {
    err << failures.size() << " source record(s) failed; see " << sibling(out_path, ".failures.jsonl").string() << '\n';
    return kExitProvider;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_detect(const DetectOptions& o, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_config(o.common, true);
  cfg.validate();
  if (o.parallel < 1) usage("--parallel must be >= 1");
  const detectors::DetectorSpec& spec = cfg.detector(o.detector);
  const DatasetEntry& ds = cfg.dataset(o.dataset);
  const auto records = load_eval_records(cfg.resolve(ds.path), ds.schema);
  const int trials = o.trials.value_or(cfg.eval.trials);

  ProviderRegistry registry(cfg);
  const detectors::Detector detector(
      spec, detectors::uses_completion(spec.kind) ? registry.completion(spec.completion_provider) : nullptr,
      detectors::uses_embeddings(spec.kind) ? registry.embedding(spec.embedding_provider) : nullptr);

  const eval::DetectionRun run = eval::run_detections(detector, records, trials, o.parallel);
  registry.flush();

  const fs::path out_path = o.out ? *o.out : cfg.output_path("detections/" + o.detector + "__" + o.dataset + ".jsonl");
  const fs::path failure_path = sibling(out_path, ".failures.jsonl");
  write_failures(failure_path, run.failures);
  if (run.failures.empty() || o.lenient) {
    const std::string hash = cfg.hash();
    std::vector<json> lines;
    for (const auto& d : run.detections) {
      lines.push_back({{"schema_version", datasets::kSchemaVersion},
                       {"record_id", d.record_id},
                       {"trial", d.trial},
                       {"detector_id", d.report.detector_id},
                       {"config_hash", hash},
                       {"report", datasets::to_json(d.report)}});
    }
    datasets::write_json_lines(out_path, lines);
    out << "detections: " << run.detections.size() << " (" << records.size() << " records x " << trials
        << " trials) -> " << out_path.string() << '\n';
  }
  if (!run.failures.empty()) {
    err << run.failures.size() << " detection(s) failed, first: " << run.failures.front().record_id << ": "
        << run.failures.front().message << '\n'
        << "failure manifest: " << failure_path.string() << '\n';
    if (!o.lenient) err << "strict mode: no detections written (use --lenient for partial results)\n";
    return kExitProvider;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_config(o.common, true);
  cfg.validate();
  if (o.detections.empty()) usage("--detections is required");
  const DatasetEntry& ds = cfg.dataset(o.dataset);
  const auto records = load_eval_records(cfg.resolve(ds.path), ds.schema);

  std::vector<eval::SeverityFilter> filters = cfg.eval.severity_filters;
  if (o.severity) {
    if (*o.severity == "both") filters = {eval::SeverityFilter::kAll, eval::SeverityFilter::kHighSeverity};
    else if (auto f = eval::severity_filter_from_string(*o.severity)) filters = {*f};
    else usage("--severity must be all, high or both");
  }

  // detector id -> detections, in first-seen order
  std::vector<std::string> detector_order;
  std::map<std::string, std::vector<eval::Detection>> by_detector;
  std::set<std::string> failed;
  for (const fs::path& p : o.detections) {
    datasets::for_each_json_line(p, [&](std::size_t line, const json& j) {
      try {
        eval::Detection d{j.at("record_id").get<std::string>(), j.at("trial").get<int>(),
                          datasets::report_from_json(j.at("report"))};
        if (!by_detector.count(d.report.detector_id)) detector_order.push_back(d.report.detector_id);
        by_detector[d.report.detector_id].push_back(std::move(d));
      } catch (const json::exception& e) {
        throw SchemaViolation(line, e.what());
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kSchemaViolation) throw;
        throw SchemaViolation(line, e.what());
      }
    });
    const fs::path manifest = sibling(p, ".failures.jsonl");
    if (fs::exists(manifest)) {
      datasets::for_each_json_line(manifest, [&](std::size_t, const json& j) {
        failed.insert(j.value("record_id", std::string{}));
      });
    }
  }
  const std::vector<std::string> failed_ids(failed.begin(), failed.end());

  const std::string hash = cfg.hash();
  std::vector<ReportRow> rows;
  try {
    for (const auto& det : detector_order) {
      const auto& dets = by_detector[det];
      std::vector<eval::PredictionBasis> bases = {eval::PredictionBasis::kCount};
      if (std::all_of(dets.begin(), dets.end(), [](const auto& d) { return d.report.raw_score.has_value(); })) {
        bases.push_back(eval::PredictionBasis::kRawScore);
      }
      for (auto filter : filters) {
        if (column_for(ds.schema, filter).empty()) {
          err << "skipping " << eval::to_string(filter) << " severity for " << datasets::to_string(ds.schema)
              << " data (no categories)\n";
          continue;
        }
        for (auto basis : bases) {
          eval::EvalOptions eo{cfg.eval.bootstrap_resamples, *cfg.eval.seed, basis};
          eval::EvalRow row = eval::evaluate(dets, records, filter, eo, failed_ids, o.dataset);
          rows.push_back({std::move(row), ds.schema, hash});
        }
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDegenerateDataset) {
      err << "cannot evaluate dataset '" << o.dataset << "': " << e.what() << '\n'
          << "Pearson correlation needs at least two distinct ground-truth values.\n";
      return kExitDegenerate;
    }
    throw;
  }

  const fs::path rows_path = o.out ? *o.out : cfg.output_path("eval_rows.jsonl");
  std::vector<json> lines;
  for (const auto& r : rows) lines.push_back(to_json(r));
  datasets::write_json_lines(rows_path, lines);
  const std::string table = format_table(rows);
  write_text(sibling(rows_path, ".txt"), table);
  out << table;
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_calibrate(const CalibrateOptions& o, std::ostream& out, std::ostream&) {
  std::vector<double> grid;
  {
    std::stringstream ss(o.grid);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(item, &used);
      } catch (const std::exception&) {
        usage("grid value '" + item + "' is not a number");
      }
      if (used != item.size()) usage("grid value '" + item + "' is not a number");
      if (!(v > 0.0 && v <= 1.0)) usage("grid value " + item + " is outside (0, 1]");
      grid.push_back(v);
    }
  }
  if (grid.empty()) usage("--grid needs at least one threshold");

  RunConfig cfg = load_config(o.common, true);
  cfg.validate();
  const detectors::DetectorSpec& spec = cfg.detector(o.detector);
  if (!detectors::uses_embeddings(spec.kind)) usage("detector '" + spec.id + "' has no threshold to calibrate");
  auto schema = datasets::schema_kind_from_string(o.schema);
  if (!schema) usage("unknown schema '" + o.schema + "'");
  const auto heldout = load_eval_records(o.heldout, *schema);

  ProviderRegistry registry(cfg);
  const detectors::Detector detector(
      spec, detectors::uses_completion(spec.kind) ? registry.completion(spec.completion_provider) : nullptr,
      registry.embedding(spec.embedding_provider));
  const eval::Calibration cal = eval::calibrate_threshold(detector, heldout, grid, o.parallel);
  registry.flush();

  out << "threshold  |r|\n";
  for (const auto& p : cal.grid) {
    out << fixed2(p.threshold) << "       " << fixed2(p.abs_r) << (p.degenerate ? " (degenerate)" : "") << '\n';
  }
  out << "selected threshold: " << cal.threshold << '\n';
  return kExitOk;
}

int cmd_report(const ReportOptions& o, std::ostream& out, std::ostream&) {
  std::vector<fs::path> inputs = o.rows;
  if (inputs.empty()) {
    RunConfig cfg = load_config(o.common, true);
    inputs.push_back(cfg.output_path("eval_rows.jsonl"));
  }
  std::vector<ReportRow> rows;
  for (const fs::path& p : inputs) {
    datasets::for_each_json_line(p, [&](std::size_t line, const json& j) {
      try {
        rows.push_back(report_row_from_json(j));
      } catch (const Error& e) {
        throw SchemaViolation(line, e.what());
      }
    });
  }
  const std::string table = format_table(rows);
  if (o.out) write_text(*o.out, table);
  out << table;
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Count hallucinated facts in clinical summaries and benchmark the detectors."};
  app.name("hallucount");
  app.require_subcommand(1);

  auto common = [](CLI::App* sub, CommonOptions& c) {
    sub->add_option("--config", c.config, "Run config (JSON)");
    sub->add_option("--output-dir", c.output_dir, "Override output_dir");
    sub->add_option("--seed", c.seed, "Override eval.seed");
  };

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate-lno", "Build a Leave-N-Out benchmark");
  common(g, gen.common);
  g->add_option("--records", gen.records, "Number of records")->required();
  g->add_option("--max-n", gen.max_n, "Largest number of removed facts per record");
  g->add_flag("--synthetic", gen.synthetic, "Fabricate records offline");
  g->add_option("--from", gen.from, "Source pairs JSONL {id, transcript, summary}");
  g->add_option("--out", gen.out, "Output JSONL");
  g->add_option("--completion", gen.completion, "Completion provider id (--from)");
  g->add_option("--embedding", gen.embedding, "Embedding provider id (--from)");
  g->add_option("--leak-threshold", gen.leak_threshold, "Cosine at which a removed fact counts as leaked");

  DetectOptions det;
  auto* d = app.add_subcommand("detect", "Run a detector over a dataset");
  common(d, det.common);
  d->add_option("--detector", det.detector, "Detector id")->required();
  d->add_option("--dataset", det.dataset, "Dataset id")->required();
  d->add_option("--out", det.out, "Output JSONL");
  d->add_option("--trials", det.trials, "Trials (default eval.trials)");
  d->add_option("--parallel", det.parallel, "Records processed concurrently");
  d->add_flag("--lenient", det.lenient, "Write partial results when records fail");

  EvaluateOptions ev;
  auto* e = app.add_subcommand("evaluate", "Correlate detections with ground truth");
  common(e, ev.common);
  e->add_option("--detections", ev.detections, "Detection JSONL file(s)")->required();
  e->add_option("--dataset", ev.dataset, "Dataset id")->required();
  e->add_option("--severity", ev.severity, "all, high or both");
  e->add_option("--out", ev.out, "Eval rows JSONL");

  CalibrateOptions cal;
  auto* c = app.add_subcommand("calibrate", "Pick a similarity threshold on held-out data");
  common(c, cal.common);
  c->add_option("--detector", cal.detector, "Detector id")->required();
  c->add_option("--heldout", cal.heldout, "Held-out records JSONL")->required();
  c->add_option("--schema", cal.schema, "Schema of the held-out file (lno, nh, xsum)");
  c->add_option("--grid", cal.grid, "Comma-separated thresholds in (0, 1]")->required();
  c->add_option("--parallel", cal.parallel, "Records processed concurrently");

  ReportOptions rep;
  auto* r = app.add_subcommand("report", "Print the benchmark table from eval rows");
  common(r, rep.common);
  r->add_option("--rows", rep.rows, "Eval rows JSONL file(s)");
  r->add_option("--out", rep.out, "Write the table here too");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_generate_lno(gen, out, err);
    if (d->parsed()) return cmd_detect(det, out, err);
    if (e->parsed()) return cmd_evaluate(ev, out, err);
    if (c->parsed()) return cmd_calibrate(cal, out, err);
    if (r->parsed()) return cmd_report(rep, out, err);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return exit_code_for(ex.code());
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace hallucount::cli
