#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "titlmars/analytic.hpp"
#include "titlmars/bb_solver.hpp"
#include "titlmars/bench.hpp"
#include "titlmars/dataset.hpp"
#include "titlmars/errors.hpp"
#include "titlmars/ga.hpp"
#include "titlmars/mars_fitter.hpp"
#include "titlmars/miqp.hpp"
#include "titlmars/model.hpp"
#include "titlmars/oracle.hpp"
#include "titlmars/windfarm.hpp"

namespace tmars = titlmars;

namespace {

struct Options {
  std::string data, model, out, sense = "max", preset = "michalewicz", scenario = "fw1";
  std::string spec, out_dir = "bench-out", format = "csv", branching = "priority", function;
  int max_basis = 40, max_knots = 100, layouts = 1000, turbines = 40, grid = 0, random = 0;
  int population = 0, generations = 0;
  double penalty = 3.0, gap = 1e-6, time_limit = 600.0, crossover = -1.0, mutation = -1.0;
  long long node_limit = 10'000'000;
  std::uint64_t seed = 1, solver_seed = 0, farm_seed = 0, sample_seed = 7, vertex_cap = 2'000'000;
  bool no_timing = false, quiet = false;
};

int run_fit(const Options& o) {
  const auto data = tmars::read_csv(o.data);
  tmars::FitConfig cfg;
  cfg.max_basis = o.max_basis;
  cfg.max_knots_per_variable = o.max_knots;
  cfg.gcv_penalty = o.penalty;
  const auto model = tmars::fit(data, cfg);
  tmars::save_model(model, o.out);
  fmt::print("bases {}\nterms {}\nr_squared {:.10g}\n", model.num_bases(), model.num_terms(),
             tmars::r_squared(model, data));
  return 0;
}

int run_solve(const Options& o) {
  const auto model = tmars::load_model(o.model);
  tmars::SolverConfig cfg;
  cfg.gap_tolerance = o.gap;
  cfg.time_limit_seconds = o.time_limit;
  cfg.node_limit = o.node_limit;
  cfg.seed = o.solver_seed;
  if (o.branching == "balanced") {
    cfg.branching = tmars::BranchingRule::kBalancedKnot;
  } else if (o.branching != "priority") {
    throw tmars::InputError(fmt::format("unknown branching rule '{}'", o.branching));
  }
  const auto sol = tmars::solve(model, tmars::parse_sense(o.sense), cfg);
  fmt::print("{}", tmars::format_solution(sol));
  return sol.status == tmars::SolveStatus::kOptimal ? 0 : static_cast<int>(tmars::ExitCode::kCapacity);
}

int run_ga(const Options& o) {
  const auto model = tmars::load_model(o.model);
  auto params = tmars::ga_preset(o.preset, o.seed);
  if (o.population > 0) params.population = o.population;
  if (o.generations > 0) params.max_generations = o.generations;
  if (o.crossover >= 0.0) params.crossover_rate = o.crossover;
  if (o.mutation >= 0.0) params.mutation_rate = o.mutation;
  fmt::print("{}", tmars::format_solution(tmars::ga_optimize(model, tmars::parse_sense(o.sense), params)));
  return 0;
}

int run_oracle(const Options& o) {
  const auto model = tmars::load_model(o.model);
  tmars::OracleConfig cfg;
  cfg.vertex_cap = o.vertex_cap;
  fmt::print("{}", tmars::format_solution(tmars::oracle_optimum(model, tmars::parse_sense(o.sense), cfg)));
  return 0;
}

int run_miqp(const Options& o) {
  const auto model = tmars::load_model(o.model);
  fmt::print("{}", tmars::dump_miqp(tmars::build_miqp(model, tmars::parse_sense(o.sense))));
  return 0;
}

int run_windfarm(const Options& o) {
  tmars::FarmConfig farm;
  farm.turbines = o.turbines;
  const auto scenario = tmars::resolve_scenario(o.scenario);
  const auto grid = tmars::monte_carlo_power_grid(farm, scenario, o.layouts, o.farm_seed);
  const auto data = tmars::power_grid_dataset(farm, grid);
  tmars::write_csv(data, o.out);
  fmt::print("cells {}\n", data.rows());
  return 0;
}

int run_sample(const Options& o) {
  tmars::BenchSource src;
  src.name = o.function;
  src.grid = o.grid;
  src.random = o.random;
  src.sample_seed = o.sample_seed;
  const auto data = tmars::sample_analytic(src);
  tmars::write_csv(data, o.out);
  fmt::print("rows {}\n", data.rows());
  return 0;
}

int run_bench(const Options& o) {
  auto spec = tmars::load_bench_spec(o.spec);
  if (o.no_timing) spec.record_timing = false;
  tmars::BenchHooks hooks;
  if (!o.quiet) hooks.progress = [](std::string_view msg) { fmt::print(stderr, "{}\n", msg); };
  const std::filesystem::path dir(o.out_dir);
  hooks.model_ready = [&](std::string_view name, const tmars::TitlMarsModel& model) {
    std::filesystem::create_directories(dir / "models");
    tmars::save_model(model, dir / "models" / (std::string(name) + ".model"));
  };
  const auto report = tmars::run_benchmark(spec, hooks);
  const auto path = tmars::write_report(report, dir, tmars::parse_report_format(o.format));
  fmt::print("{}\n", path.string());
  for (const auto& note : report.notes) fmt::print(stderr, "note: {}\n", note);
  if (!report.violations.empty()) {
    for (const auto& v : report.violations) fmt::print(stderr, "violation: {}\n", v);
    return static_cast<int>(tmars::ExitCode::kInternal);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TITL-MARS fitting, global optimization and benchmarking"};
  app.require_subcommand(1);
  Options o;

  auto* fit = app.add_subcommand("fit", "fit a model to a CSV dataset");
  fit->add_option("--data", o.data, "input CSV (x1..xV,y)")->required();
  fit->add_option("--out", o.out, "output model file")->required();
  fit->add_option("--max-basis", o.max_basis, "forward-pass basis limit");
  fit->add_option("--max-knots", o.max_knots, "knot candidates per variable");
  fit->add_option("--penalty", o.penalty, "GCV cost per knot");

  auto* solve = app.add_subcommand("solve", "certified global optimum by branch-and-bound");
  solve->add_option("--model", o.model)->required();
  solve->add_option("--sense", o.sense)->check(CLI::IsMember({"max", "min"}));
  solve->add_option("--gap", o.gap, "relative gap tolerance");
  solve->add_option("--time-limit", o.time_limit, "seconds");
  solve->add_option("--node-limit", o.node_limit);
  solve->add_option("--branching", o.branching)->check(CLI::IsMember({"priority", "balanced"}));
  solve->add_option("--seed", o.solver_seed, "tie-break perturbation seed (0 keeps index order)");

  auto* ga = app.add_subcommand("ga", "genetic algorithm baseline");
  ga->add_option("--model", o.model)->required();
  ga->add_option("--sense", o.sense)->check(CLI::IsMember({"max", "min"}));
  ga->add_option("--preset", o.preset)->check(CLI::IsMember({"grefenstette", "michalewicz"}));
  ga->add_option("--seed", o.seed);
  ga->add_option("--population", o.population);
  ga->add_option("--generations", o.generations);
  ga->add_option("--crossover", o.crossover);
  ga->add_option("--mutation", o.mutation);

  auto* oracle = app.add_subcommand("oracle", "brute-force optimum over knot-cell vertices");
  oracle->add_option("--model", o.model)->required();
  oracle->add_option("--sense", o.sense)->check(CLI::IsMember({"max", "min"}));
  oracle->add_option("--vertex-cap", o.vertex_cap);

  auto* miqp = app.add_subcommand("miqp", "print the big-M MIQP of a model");
  miqp->add_option("--model", o.model)->required();
  miqp->add_option("--sense", o.sense)->check(CLI::IsMember({"max", "min"}));

  auto* wind = app.add_subcommand("windfarm", "Monte Carlo wind-farm power grid dataset");
  wind->add_option("--scenario", o.scenario, "fw1..fw4 or a scenario file");
  wind->add_option("--layouts", o.layouts);
  wind->add_option("--turbines", o.turbines);
  wind->add_option("--seed", o.farm_seed);
  wind->add_option("--out", o.out)->required();

  auto* sample = app.add_subcommand("sample", "sample an analytic test function to CSV");
  sample->add_option("--function", o.function)->required()->check(
      CLI::IsMember({"f1", "f2", "f3", "f4"}));
  sample->add_option("--grid", o.grid, "points per axis");
  sample->add_option("--random", o.random, "uniform random points");
  sample->add_option("--seed", o.sample_seed);
  sample->add_option("--out", o.out)->required();

  auto* bench = app.add_subcommand("bench", "OPT vs GA benchmark");
  bench->add_option("--spec", o.spec, "JSON bench spec")->required();
  bench->add_option("--out-dir", o.out_dir);
  bench->add_option("--format", o.format)->check(CLI::IsMember({"csv", "json", "md"}));
  bench->add_flag("--no-timing", o.no_timing, "write NA for timing fields");
  bench->add_flag("--quiet", o.quiet);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(tmars::ExitCode::kInput);
  }

  try {
    if (*fit) return run_fit(o);
    if (*solve) return run_solve(o);
    if (*ga) return run_ga(o);
    if (*oracle) return run_oracle(o);
    if (*miqp) return run_miqp(o);
    if (*wind) return run_windfarm(o);
    if (*sample) return run_sample(o);
    if (*bench) return run_bench(o);
  } catch (const tmars::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return static_cast<int>(tmars::ExitCode::kInternal);
  }
  return static_cast<int>(tmars::ExitCode::kInternal);
}
