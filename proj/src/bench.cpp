#include "titlmars/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include <fmt/format.h>

#include "json.hpp"
#include "text_util.hpp"
#include "titlmars/analytic.hpp"
#include "titlmars/errors.hpp"
#include "titlmars/ga.hpp"
#include "titlmars/oracle.hpp"

namespace titlmars {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kDominanceTolerance = 1e-9;

const char* const kCsvHeader =
    "function,method,sense,value_mean,value_best,time_mean_s,gap,value_min,value_max,status,"
    "oracle,runs,x_best";

bool same_number(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

std::string num(double v) {
  if (std::isnan(v)) return "NA";
  return fmt::format("{:.17g}", v);
}

double parse_num(std::string_view text, std::size_t line, std::string_view column) {
  const auto t = detail::trim(text);
  if (t == "NA") return kNaN;
  auto v = detail::parse_double(t);
  if (!v) throw ParseError(fmt::format("report line {}, column {}: not a number: '{}'", line,
                                       column, t));
  return *v;
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("bench spec: field '{}': {}", key, e.what()));
  }
}

BenchSource parse_source(const json& item, const std::filesystem::path& base_dir) {
  BenchSource src;
  if (item.is_string()) {
    src.name = item.get<std::string>();
  } else if (item.is_object()) {
    src.name = get_or<std::string>(item, "name", "");
    const std::string kind = get_or<std::string>(item, "source", "");
    const std::string path = get_or<std::string>(item, "path", "");
    if (!path.empty()) {
      src.path = std::filesystem::path(path);
      if (src.path.is_relative() && !base_dir.empty()) src.path = base_dir / src.path;
    }
    if (kind == "dataset") {
      src.kind = SourceKind::kDataset;
    } else if (kind == "model") {
      src.kind = SourceKind::kModel;
    } else if (kind == "scenario") {
      src.kind = SourceKind::kScenario;
    } else if (!kind.empty() && kind != "analytic") {
      throw ParseError(fmt::format("bench spec: unknown source kind '{}'", kind));
    }
    src.grid = get_or<int>(item, "grid", 0);
    src.random = get_or<int>(item, "random", 0);
    src.sample_seed = get_or<std::uint64_t>(item, "seed", src.sample_seed);
    if (src.name.empty()) src.name = src.path.stem().string();
  } else {
    throw ParseError("bench spec: each source must be a name or an object");
  }
  if (src.name.empty()) throw ParseError("bench spec: source without a name");
  if (item.is_string() || (item.is_object() && !item.contains("source"))) {
    if (is_analytic_function(src.name)) {
      src.kind = SourceKind::kAnalytic;
    } else if (find_builtin_scenario(src.name)) {
      src.kind = SourceKind::kScenario;
    } else if (src.path.empty()) {
      throw InputError(fmt::format("bench spec: unknown source '{}'", src.name));
    }
  }
  if ((src.kind == SourceKind::kDataset || src.kind == SourceKind::kModel) && src.path.empty()) {
    throw InputError(fmt::format("bench spec: source '{}' needs a path", src.name));
  }
  if (src.grid < 0 || src.random < 0) {
    throw InputError(fmt::format("bench spec: source '{}' has a negative sample size", src.name));
  }
  return src;
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Oracle vertex count, saturating at cap + 1.
std::uint64_t oracle_size(const TitlMarsModel& model, std::uint64_t cap) {
  std::uint64_t total = 1;
  for (const auto& c : oracle_candidates(model)) {
    total *= c.size();
    if (total > cap) return cap + 1;
  }
  return total;
}

std::string join_x(const std::vector<double>& x) {
  std::string out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) out += ';';
    out += num(x[i]);
  }
  return out;
}

json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

}  // namespace

bool operator==(const ReportRow& a, const ReportRow& b) {
  if (a.function != b.function || a.method != b.method || a.sense != b.sense ||
      a.status != b.status || a.runs != b.runs || a.x_best.size() != b.x_best.size()) {
    return false;
  }
  const double lhs[] = {a.value_mean, a.value_best, a.time_mean_s, a.gap,
                        a.value_min,  a.value_max,  a.oracle};
  const double rhs[] = {b.value_mean, b.value_best, b.time_mean_s, b.gap,
                        b.value_min,  b.value_max,  b.oracle};
  for (std::size_t i = 0; i < std::size(lhs); ++i) {
    if (!same_number(lhs[i], rhs[i])) return false;
  }
  for (std::size_t i = 0; i < a.x_best.size(); ++i) {
    if (!same_number(a.x_best[i], b.x_best[i])) return false;
  }
  return true;
}

BenchSpec parse_bench_spec(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("bench spec: {}", e.what()));
  }
  if (!doc.is_object()) throw ParseError("bench spec: top level must be an object");
  BenchSpec spec;
  if (!doc.contains("sources") || !doc["sources"].is_array() || doc["sources"].empty()) {
    throw ParseError("bench spec: 'sources' must be a non-empty array");
  }
  for (const auto& item : doc["sources"]) spec.sources.push_back(parse_source(item, base_dir));

  if (doc.contains("fit")) {
    const auto& f = doc["fit"];
    spec.fit.max_basis = get_or<int>(f, "max_basis", spec.fit.max_basis);
    spec.fit.max_knots_per_variable =
        get_or<int>(f, "max_knots_per_variable", spec.fit.max_knots_per_variable);
    spec.fit.gcv_penalty = get_or<double>(f, "gcv_penalty", spec.fit.gcv_penalty);
    spec.fit.forward_threshold = get_or<double>(f, "forward_threshold", spec.fit.forward_threshold);
  }
  if (doc.contains("solver")) {
    const auto& s = doc["solver"];
    spec.solver.gap_tolerance = get_or<double>(s, "gap", spec.solver.gap_tolerance);
    spec.solver.time_limit_seconds = get_or<double>(s, "time_limit", spec.solver.time_limit_seconds);
    spec.solver.node_limit = get_or<std::int64_t>(s, "node_limit", spec.solver.node_limit);
  }
  if (doc.contains("ga_presets")) {
    spec.ga_presets = get_or<std::vector<std::string>>(doc, "ga_presets", {});
    for (const auto& p : spec.ga_presets) ga_preset(p);
  }
  spec.repetitions = get_or<int>(doc, "repetitions", spec.repetitions);
  if (spec.repetitions < 1) throw InputError("bench spec: repetitions must be >= 1");
  if (doc.contains("windfarm")) {
    const auto& w = doc["windfarm"];
    spec.layouts = get_or<int>(w, "layouts", spec.layouts);
    spec.farm.turbines = get_or<int>(w, "turbines", spec.farm.turbines);
    spec.farm_seed = get_or<std::uint64_t>(w, "seed", spec.farm_seed);
    spec.farm.rotor_radius = get_or<double>(w, "rotor_radius", spec.farm.rotor_radius);
    spec.farm.wake_decay = get_or<double>(w, "wake_decay", spec.farm.wake_decay);
    validate(spec.farm);
  }
  spec.oracle_vertex_cap = get_or<std::uint64_t>(doc, "oracle_vertex_cap", spec.oracle_vertex_cap);
  spec.record_timing = get_or<bool>(doc, "record_timing", spec.record_timing);
  return spec;
}

BenchSpec load_bench_spec(const std::filesystem::path& path) {
  return parse_bench_spec(detail::read_file(path), path.parent_path());
}

Dataset sample_analytic(const BenchSource& source) {
  const auto& fn = analytic_function(source.name);
  int grid = source.grid;
  int random = source.random;
  if (grid == 0 && random == 0) {
    if (fn.dimension <= 2) {
      grid = 41;
    } else {
      random = 2000;
    }
  }
  const Eigen::Index dim = static_cast<Eigen::Index>(fn.dimension);
  Eigen::MatrixXd x;
  if (grid > 0) {
    if (grid < 2) throw InputError("grid sampling needs at least 2 points per axis");
    double count = std::pow(static_cast<double>(grid), static_cast<double>(dim));
    if (count > 1e7) throw CapacityError(fmt::format("grid of {} points is too large", count));
    x.resize(static_cast<Eigen::Index>(count), dim);
    std::vector<int> idx(fn.dimension, 0);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index v = 0; v < dim; ++v) {
        x(r, v) = fn.lower + (fn.upper - fn.lower) * idx[static_cast<std::size_t>(v)] / (grid - 1);
      }
      for (std::size_t v = fn.dimension; v-- > 0;) {
        if (++idx[v] < grid) break;
        idx[v] = 0;
      }
    }
  } else {
    std::mt19937_64 rng(source.sample_seed);
    std::uniform_real_distribution<double> unit(fn.lower, fn.upper);
    x.resize(random, dim);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index v = 0; v < dim; ++v) x(r, v) = unit(rng);
    }
  }
  Eigen::VectorXd y(x.rows());
  std::vector<double> point(fn.dimension);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index v = 0; v < dim; ++v) point[static_cast<std::size_t>(v)] = x(r, v);
    y(r) = fn.eval(point);
  }
  Dataset d = make_dataset(std::move(x), std::move(y));
  d.lower.assign(fn.dimension, fn.lower);
  d.upper.assign(fn.dimension, fn.upper);
  return d;
}

Report run_benchmark(const BenchSpec& spec, const BenchHooks& hooks) {
  Report report;
  auto progress = [&](const std::string& msg) {
    if (hooks.progress) hooks.progress(msg);
  };
  auto timing = [&](double seconds) { return spec.record_timing ? seconds : kNaN; };

  for (const auto& src : spec.sources) {
    progress(fmt::format("{}: preparing model", src.name));
    std::optional<TitlMarsModel> model;
    ModelSummary summary;
    summary.function = src.name;
    try {
      if (src.kind == SourceKind::kModel) {
        summary.source = "model";
        model = load_model(src.path);
        summary.r_squared = kNaN;
        summary.fit_seconds = kNaN;
      } else {
        Dataset data;
        if (src.kind == SourceKind::kAnalytic) {
          summary.source = "analytic";
          data = sample_analytic(src);
        } else if (src.kind == SourceKind::kScenario) {
          summary.source = "scenario";
          const auto scenario = find_builtin_scenario(src.name) ? builtin_scenario(src.name)
                                                                : load_scenario(src.path);
          data = power_grid_dataset(
              spec.farm, monte_carlo_power_grid(spec.farm, scenario, spec.layouts, spec.farm_seed));
        } else {
          summary.source = "dataset";
          data = read_csv(src.path);
        }
        summary.samples = data.rows();
        const auto start = std::chrono::steady_clock::now();
        model = fit(data, spec.fit);
        summary.fit_seconds = timing(elapsed(start));
        summary.r_squared = r_squared(*model, data);
      }
    } catch (const Error& e) {
      report.notes.push_back(fmt::format("{}: model preparation failed: {}", src.name, e.what()));
      for (Sense sense : {Sense::kMax, Sense::kMin}) {
        ReportRow row;
        row.function = src.name;
        row.method = "OPT";
        row.sense = sense;
        row.value_mean = row.value_best = row.value_min = row.value_max = kNaN;
        row.time_mean_s = row.gap = row.oracle = kNaN;
        row.status = "fit-error";
        report.rows.push_back(row);
      }
      continue;
    }
    summary.dimension = model->dimension();
    summary.bases = model->num_bases();
    summary.terms = model->num_terms();
    report.models.push_back(summary);
    if (hooks.model_ready) hooks.model_ready(src.name, *model);

    const bool oracle_ok = oracle_size(*model, spec.oracle_vertex_cap) <= spec.oracle_vertex_cap;
    for (Sense sense : {Sense::kMax, Sense::kMin}) {
      progress(fmt::format("{}: OPT {}", src.name, to_string(sense)));
      ReportRow opt;
      opt.function = src.name;
      opt.method = "OPT";
      opt.sense = sense;
      const auto start = std::chrono::steady_clock::now();
      const Solution sol = solve(*model, sense, spec.solver);
      opt.time_mean_s = timing(elapsed(start));
      opt.value_mean = opt.value_best = opt.value_min = opt.value_max = sol.value;
      opt.gap = sol.gap;
      opt.status = std::string(to_string(sol.status));
      opt.runs = 1;
      opt.x_best = sol.x;
      opt.oracle = kNaN;
      if (sol.status != SolveStatus::kOptimal) {
        report.notes.push_back(fmt::format("{}: OPT {} is incomplete (gap {:.3g})", src.name,
                                           to_string(sense), sol.gap));
      }
      if (oracle_ok) {
        OracleConfig oc;
        oc.vertex_cap = spec.oracle_vertex_cap;
        opt.oracle = oracle_optimum(*model, sense, oc).value;
      }
      report.rows.push_back(opt);

      for (const auto& preset : spec.ga_presets) {
        progress(fmt::format("{}: GA-{} {} x{}", src.name, preset, to_string(sense),
                             spec.repetitions));
        ReportRow row;
        row.function = src.name;
        row.method = "GA-" + preset;
        row.sense = sense;
        row.status = "heuristic";
        row.gap = kNaN;
        row.oracle = opt.oracle;
        row.runs = spec.repetitions;
        row.value_min = std::numeric_limits<double>::infinity();
        row.value_max = -std::numeric_limits<double>::infinity();
        double sum = 0.0;
        double seconds = 0.0;
        for (int rep = 1; rep <= spec.repetitions; ++rep) {
          const GaParams params = ga_preset(preset, static_cast<std::uint64_t>(rep));
          const auto t0 = std::chrono::steady_clock::now();
          const Solution ga = ga_optimize(*model, sense, params);
          seconds += elapsed(t0);
          sum += ga.value;
          const bool best = row.x_best.empty() ||
                            (sense == Sense::kMax ? ga.value > row.value_best
                                                  : ga.value < row.value_best);
          if (best) {
            row.value_best = ga.value;
            row.x_best = ga.x;
          }
          row.value_min = std::min(row.value_min, ga.value);
          row.value_max = std::max(row.value_max, ga.value);
        }
        row.value_mean = sum / spec.repetitions;
        row.time_mean_s = timing(seconds / spec.repetitions);
        report.rows.push_back(row);
      }
    }
  }
  report.violations = dominance_violations(report.rows);
  return report;
}

std::vector<std::string> dominance_violations(const std::vector<ReportRow>& rows) {
  std::vector<std::string> out;
  for (const auto& opt : rows) {
    if (opt.method != "OPT" || std::isnan(opt.value_best)) continue;
    const double tol = kDominanceTolerance * std::max(1.0, std::abs(opt.value_best));
    for (const auto& ga : rows) {
      if (ga.method == "OPT" || ga.function != opt.function || ga.sense != opt.sense) continue;
      if (opt.sense == Sense::kMax && ga.value_max > opt.value_best + tol) {
        out.push_back(fmt::format("{}: {} max {:.17g} exceeds OPT {:.17g}", opt.function,
                                  ga.method, ga.value_max, opt.value_best));
      }
      if (opt.sense == Sense::kMin && ga.value_min < opt.value_best - tol) {
        out.push_back(fmt::format("{}: {} min {:.17g} is below OPT {:.17g}", opt.function,
                                  ga.method, ga.value_min, opt.value_best));
      }
    }
  }
  return out;
}

std::string report_csv(const Report& report) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : report.rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.function, r.method,
                       to_string(r.sense), num(r.value_mean), num(r.value_best),
                       num(r.time_mean_s), num(r.gap), num(r.value_min), num(r.value_max),
                       r.status, num(r.oracle), r.runs, join_x(r.x_best));
  }
  return out;
}

std::vector<ReportRow> parse_report_csv(std::string_view text) {
  const auto lines = detail::split_char(text, '\n');
  std::vector<ReportRow> rows;
  bool header = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = detail::trim(lines[i]);
    if (line.empty()) continue;
    if (!header) {
      if (line != kCsvHeader) throw ParseError(fmt::format("report line {}: bad header", i + 1));
      header = true;
      continue;
    }
    const auto f = detail::split_char(line, ',');
    if (f.size() != 13) {
      throw ParseError(fmt::format("report line {}: expected 13 fields, got {}", i + 1, f.size()));
    }
    ReportRow r;
    r.function = std::string(detail::trim(f[0]));
    r.method = std::string(detail::trim(f[1]));
    r.sense = parse_sense(detail::trim(f[2]));
    r.value_mean = parse_num(f[3], i + 1, "value_mean");
    r.value_best = parse_num(f[4], i + 1, "value_best");
    r.time_mean_s = parse_num(f[5], i + 1, "time_mean_s");
    r.gap = parse_num(f[6], i + 1, "gap");
    r.value_min = parse_num(f[7], i + 1, "value_min");
    r.value_max = parse_num(f[8], i + 1, "value_max");
    r.status = std::string(detail::trim(f[9]));
    r.oracle = parse_num(f[10], i + 1, "oracle");
    const auto runs = detail::parse_int(f[11]);
    if (!runs) throw ParseError(fmt::format("report line {}, column runs: not an integer", i + 1));
    r.runs = static_cast<int>(*runs);
    const auto xb = detail::trim(f[12]);
    if (!xb.empty()) {
      for (auto part : detail::split_char(xb, ';')) r.x_best.push_back(parse_num(part, i + 1, "x_best"));
    }
    rows.push_back(std::move(r));
  }
  if (!header) throw ParseError("report: missing header");
  return rows;
}

std::string report_json(const Report& report) {
  json doc;
  doc["rows"] = json::array();
  for (const auto& r : report.rows) {
    json x = json::array();
    for (double v : r.x_best) x.push_back(number_or_null(v));
    doc["rows"].push_back({{"function", r.function},
                           {"method", r.method},
                           {"sense", std::string(to_string(r.sense))},
                           {"value_mean", number_or_null(r.value_mean)},
                           {"value_best", number_or_null(r.value_best)},
                           {"time_mean_s", number_or_null(r.time_mean_s)},
                           {"gap", number_or_null(r.gap)},
                           {"value_min", number_or_null(r.value_min)},
                           {"value_max", number_or_null(r.value_max)},
                           {"status", r.status},
                           {"oracle", number_or_null(r.oracle)},
                           {"runs", r.runs},
                           {"x_best", x}});
  }
  doc["models"] = json::array();
  for (const auto& m : report.models) {
    doc["models"].push_back({{"function", m.function},
                             {"source", m.source},
                             {"samples", m.samples},
                             {"dimension", m.dimension},
                             {"bases", m.bases},
                             {"terms", m.terms},
                             {"r_squared", number_or_null(m.r_squared)},
                             {"fit_seconds", number_or_null(m.fit_seconds)}});
  }
  doc["notes"] = report.notes;
  doc["violations"] = report.violations;
  return doc.dump(2) + "\n";
}

std::string report_markdown(const Report& report) {
  auto cell = [](double v) { return std::isnan(v) ? std::string("NA") : fmt::format("{:.6g}", v); };
  std::vector<std::string> functions;
  std::vector<std::string> methods;
  for (const auto& r : report.rows) {
    if (std::find(functions.begin(), functions.end(), r.function) == functions.end()) {
      functions.push_back(r.function);
    }
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
  }
  std::string out;
  for (const auto& fn : functions) {
    out += fmt::format("### {}\n\n|  |", fn);
    for (const auto& m : methods) out += fmt::format(" {} |", m);
    out += "\n|---|";
    for (std::size_t i = 0; i < methods.size(); ++i) out += "---|";
    out += '\n';
    for (Sense sense : {Sense::kMax, Sense::kMin}) {
      std::string values = sense == Sense::kMax ? "| Maximum |" : "| Minimum |";
      std::string times = "| Time(seconds) |";
      for (const auto& m : methods) {
        const ReportRow* hit = nullptr;
        for (const auto& r : report.rows) {
          if (r.function == fn && r.method == m && r.sense == sense) hit = &r;
        }
        values += hit ? fmt::format(" {} |", cell(hit->value_mean)) : " |";
        times += hit ? fmt::format(" {} |", cell(hit->time_mean_s)) : " |";
      }
      out += values + '\n' + times + '\n';
    }
    out += '\n';
  }
  if (!report.notes.empty()) {
    out += "Notes:\n\n";
    for (const auto& n : report.notes) out += fmt::format("- {}\n", n);
    out += '\n';
  }
  if (!report.violations.empty()) {
    out += "Dominance violations:\n\n";
    for (const auto& v : report.violations) out += fmt::format("- {}\n", v);
  }
  return out;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "json") return ReportFormat::kJson;
  if (text == "md" || text == "markdown") return ReportFormat::kMarkdown;
  throw InputError(fmt::format("unknown report format '{}' (expected csv, json or md)", text));
}

std::filesystem::path write_report(const Report& report, const std::filesystem::path& dir,
                                   ReportFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  switch (format) {
    case ReportFormat::kCsv:
      detail::write_file(dir / "report.csv", report_csv(report));
      return dir / "report.csv";
    case ReportFormat::kJson:
      detail::write_file(dir / "report.json", report_json(report));
      return dir / "report.json";
    case ReportFormat::kMarkdown:
      detail::write_file(dir / "report.md", report_markdown(report));
      return dir / "report.md";
  }
  throw InternalError("unhandled report format");
}

}  // namespace titlmars
