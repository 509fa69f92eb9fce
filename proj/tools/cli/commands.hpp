#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hallucount/core/error.hpp"

namespace hallucount::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitProvider = 3,
  kExitDegenerate = 4,
};

/// Config, schema and argument problems map to 2, provider and model-output
/// failures to 3, unusable data (constant truth, too few records) to 4.
int exit_code_for(ErrorCode code);

// Flags shared by every command that reads a run config.
struct CommonOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
};

struct GenerateOptions {
  CommonOptions common;
  std::size_t records = 0;
  std::size_t max_n = 4;
  bool synthetic = false;
  std::optional<std::filesystem::path> from;
  std::optional<std::filesystem::path> out;
  std::string completion;  // provider ids for --from
  std::string embedding;
  double leak_threshold = 0.75;
};

struct DetectOptions {
  CommonOptions common;
  std::string detector;
  std::string dataset;
  std::optional<std::filesystem::path> out;
  std::optional<int> trials;
  std::size_t parallel = 1;
  bool lenient = false;
};

struct EvaluateOptions {
  CommonOptions common;
  std::vector<std::filesystem::path> detections;
  std::string dataset;
  std::optional<std::string> severity;  // all | high | both; default from config
  std::optional<std::filesystem::path> out;
};

struct CalibrateOptions {
  CommonOptions common;
  std::string detector;
  std::filesystem::path heldout;
  std::string schema = "lno";
  std::string grid;  // comma-separated thresholds
  std::size_t parallel = 1;
};

struct ReportOptions {
  CommonOptions common;
  std::vector<std::filesystem::path> rows;
  std::optional<std::filesystem::path> out;
};

// Each command returns an exit code and throws hallucount::Error for
// anything that aborts it; run_cli turns those into exit codes.
int cmd_generate_lno(const GenerateOptions& o, std::ostream& out, std::ostream& err);
int cmd_detect(const DetectOptions& o, std::ostream& out, std::ostream& err);
int cmd_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream& err);
int cmd_calibrate(const CalibrateOptions& o, std::ostream& out, std::ostream& err);
int cmd_report(const ReportOptions& o, std::ostream& out, std::ostream& err);

/// Full command line: parses argv, dispatches, maps errors to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hallucount::cli
