#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "titlmars/bb_solver.hpp"
#include "titlmars/mars_fitter.hpp"
#include "titlmars/model.hpp"
#include "titlmars/windfarm.hpp"

namespace titlmars {

enum class SourceKind { kAnalytic, kScenario, kDataset, kModel };

struct BenchSource {
  std::string name;           // label used in the report
  SourceKind kind = SourceKind::kAnalytic;
  std::filesystem::path path;  // dataset csv or model file
  // Analytic sampling: grid points per axis when > 0, otherwise `random`
  // uniform points drawn with `sample_seed`. Zero means the default plan.
  int grid = 0;
  int random = 0;
  std::uint64_t sample_seed = 7;
};

struct BenchSpec {
  std::vector<BenchSource> sources;
  FitConfig fit;
  SolverConfig solver;
  std::vector<std::string> ga_presets = {"grefenstette", "michalewicz"};
  int repetitions = 30;
  FarmConfig farm;
  int layouts = 1000;
  std::uint64_t farm_seed = 0;
  std::uint64_t oracle_vertex_cap = 2'000'000;
  // When false every timing field is written as NA so reports are
  // byte-identical across runs.
  bool record_timing = true;
};

// JSON document; see README for the schema. Relative paths resolve against
// `base_dir`. Throws ParseError / InputError.
BenchSpec parse_bench_spec(std::string_view json_text, const std::filesystem::path& base_dir = {});
BenchSpec load_bench_spec(const std::filesystem::path& path);

struct ReportRow {
  std::string function;
  std::string method;  // "OPT" or "GA-<preset>"
  Sense sense = Sense::kMax;
  double value_mean = 0.0;
  double value_best = 0.0;
  double time_mean_s = 0.0;  // NaN when not recorded
  double gap = 0.0;          // NaN for GA
  double value_min = 0.0;
  double value_max = 0.0;
  std::string status;        // optimal, incomplete, heuristic, or an error tag
  double oracle = 0.0;       // NaN when the oracle was not run
  int runs = 0;
  std::vector<double> x_best;

  friend bool operator==(const ReportRow& a, const ReportRow& b);
};

struct ModelSummary {
  std::string function;
  std::string source;
  std::int64_t samples = 0;
  std::size_t dimension = 0;
  std::size_t bases = 0;
  std::size_t terms = 0;
  double r_squared = 0.0;     // NaN for loaded models
  double fit_seconds = 0.0;   // NaN when not recorded
};

struct Report {
  std::vector<ReportRow> rows;
  std::vector<ModelSummary> models;
  std::vector<std::string> notes;       // flagged failures, run continues
  std::vector<std::string> violations;  // dominance breaches
};

struct BenchHooks {
  std::function<void(std::string_view)> progress;
  // Called with each fitted or loaded model.
  std::function<void(std::string_view, const TitlMarsModel&)> model_ready;
};

// Dataset for one analytic source under its sampling plan.
Dataset sample_analytic(const BenchSource& source);

Report run_benchmark(const BenchSpec& spec, const BenchHooks& hooks = {});

// Each OPT max must be >= every GA value of the same function and each OPT
// min <= every GA value, up to 1e-9 * max(1, |OPT|).
std::vector<std::string> dominance_violations(const std::vector<ReportRow>& rows);

// Columns: function, method, sense, value_mean, value_best, time_mean_s,
// gap, value_min, value_max, status, oracle, runs, x_best (';'-separated).
std::string report_csv(const Report& report);
std::vector<ReportRow> parse_report_csv(std::string_view text);
std::string report_json(const Report& report);
// One table per function: Maximum / Time / Minimum / Time by method.
std::string report_markdown(const Report& report);

enum class ReportFormat { kCsv, kJson, kMarkdown };
ReportFormat parse_report_format(std::string_view text);
// Writes report.<ext> into dir (created if missing) and returns the path.
std::filesystem::path write_report(const Report& report, const std::filesystem::path& dir,
                                   ReportFormat format);

}  // namespace titlmars
