#pragma once

// Subcommands behind the `bwbary` executable. Each returns a process exit
// code: 0 success, 1 tolerance failure, 2 invalid input, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bwbary/linalg.hpp"

namespace bwbary::cli {

enum ExitCode : int {
  kOk = 0,
  kToleranceFailure = 1,
  kInvalidInput = 2,
  kNumericalFailure = 3,
};

enum class ReportFormat { Text, Json };

struct CommonOptions {
  ReportFormat report = ReportFormat::Text;
  std::optional<double> rank_tol;  // falls back to BW_RANK_TOL, then kRankTol
};

/// Explicit value, else BW_RANK_TOL, else the default. Dimensions above 64
/// need one of the first two.
double resolve_rank_tol(const std::optional<double>& explicit_tol, Index max_dim);

struct ConstructOptions {
  Index dim = 64;
  std::string decay = "geometric:0.5";
  std::optional<double> c;
  bool pair = false;
  std::optional<std::string> law;
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
};

struct VerifyOptions {
  std::filesystem::path candidate;
  std::vector<std::filesystem::path> inputs;
  std::vector<double> weights;
  double tol = 1e-9;
};

struct BarycentreOptions {
  std::vector<std::filesystem::path> inputs;
  std::vector<double> weights;
  double tol = 1e-10;
  int max_iter = 500;
  double ridge = 0.0;
  double ridge_decay = 0.5;
  std::optional<std::filesystem::path> init;
  std::filesystem::path out = "barycentre.json";
  std::optional<std::filesystem::path> history;  // default: <out>.history.csv
};

struct RecurrenceOptions {
  double y0 = 1.0;
  double y1 = 0.0;
  std::string sign = "plus";
  int steps = 30;
  std::filesystem::path out = "recurrence.csv";  // "-" writes to the report stream
};

struct McOptions {
  Index dim = 32;
  std::string decay = "geometric:0.5";
  std::string law = "uniform";
  std::int64_t n = 1000;
  std::uint64_t seed = 42;
  double tol = 1e-10;
  int max_iter = 500;
  double ridge = 1e-6;
  double ridge_decay = 0.5;
};

struct SweepOptions {
  std::vector<Index> dims = {8, 16, 32, 64};
  std::string decay = "geometric:0.5";
  std::filesystem::path out = "sweep.csv";
};

int cmd_construct(const ConstructOptions& opt, const CommonOptions& common, std::ostream& out);
int cmd_verify(const VerifyOptions& opt, const CommonOptions& common, std::ostream& out);
int cmd_barycentre(const BarycentreOptions& opt, const CommonOptions& common, std::ostream& out);
int cmd_recurrence(const RecurrenceOptions& opt, const CommonOptions& common, std::ostream& out);
int cmd_mc(const McOptions& opt, const CommonOptions& common, std::ostream& out);
int cmd_sweep(const SweepOptions& opt, const CommonOptions& common, std::ostream& out);

/// Runs body, mapping library errors to exit codes and printing a one-line
/// diagnostic to err.
int run_guarded(const std::function<int()>& body, std::ostream& err);

/// Exit code for an error kind.
int exit_code_for(ErrorKind kind);

/// Report without the "timing" member; the rest is reproducible.
nlohmann::json strip_timing(nlohmann::json report);

}  // namespace bwbary::cli
