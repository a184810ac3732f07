#include "titlmars/ga.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "titlmars/errors.hpp"

namespace titlmars {

GaParams ga_preset(std::string_view name, std::uint64_t seed) {
  GaParams p;
  if (name == "grefenstette") {
    p.population = 30;
    p.max_generations = 300;
    p.crossover_rate = 0.9;
    p.mutation_rate = 0.01;
  } else if (name == "michalewicz") {
    p.population = 50;
    p.max_generations = 1000;
    p.crossover_rate = 0.8;
    p.mutation_rate = 0.15;
  } else {
    throw InputError(fmt::format("unknown GA preset '{}' (expected grefenstette or michalewicz)",
                                 name));
  }
  p.seed = seed;
  return p;
}

void validate(const GaParams& params) {
  if (params.population < 2 || params.population % 2 != 0) {
    throw InputError(fmt::format("GA population must be even and >= 2, got {}", params.population));
  }
  if (params.max_generations < 1) throw InputError("GA needs at least one generation");
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate_ok(params.crossover_rate) || !rate_ok(params.mutation_rate)) {
    throw InputError("GA rates must lie in [0, 1]");
  }
  if (params.bits_per_variable < 1 || params.bits_per_variable > 52) {
    throw InputError("GA bits per variable must be in 1..52");
  }
}

std::vector<double> decode(const Chromosome& chromosome, std::span<const VariableBound> bounds,
                           int bits) {
  const double levels = std::ldexp(1.0, bits) - 1.0;
  std::vector<double> x(bounds.size());
  for (std::size_t v = 0; v < bounds.size(); ++v) {
    std::uint64_t k = 0;
    for (int b = 0; b < bits; ++b) {
      k = (k << 1) | chromosome[v * static_cast<std::size_t>(bits) + static_cast<std::size_t>(b)];
    }
    const auto& bd = bounds[v];
    double value = bd.lower + static_cast<double>(k) * (bd.upper - bd.lower) / levels;
    if (k == 0) value = bd.lower;
    if (static_cast<double>(k) == levels) value = bd.upper;
    if (bd.kind == VarKind::kInteger) {
      value = std::clamp(std::round(value), bd.lower, bd.upper);
    }
    x[v] = value;
  }
  return x;
}

std::vector<double> shifted_fitness(std::span<const double> raw, Sense sense) {
  constexpr double kShift = 1e-12;
  std::vector<double> w(raw.size());
  if (raw.empty()) return w;
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    w[i] = sense == Sense::kMax ? raw[i] - *lo + kShift : *hi - raw[i] + kShift;
  }
  return w;
}

std::size_t roulette_select(std::span<const double> weights, std::mt19937_64& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  std::uniform_real_distribution<double> unit(0.0, total);
  const double r = unit(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (r < acc) return i;
  }
  return weights.size() - 1;
}

void crossover(Chromosome& a, Chromosome& b, double rate, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) >= rate || a.size() < 2) return;
  std::uniform_int_distribution<std::size_t> cut(1, a.size() - 1);
  const std::size_t c = cut(rng);
  std::swap_ranges(a.begin() + static_cast<std::ptrdiff_t>(c), a.end(),
                   b.begin() + static_cast<std::ptrdiff_t>(c));
}

void mutate(Chromosome& c, double rate, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& bit : c) {
    if (unit(rng) < rate) bit ^= 1;
  }
}

Solution ga_optimize(const TitlMarsModel& model, Sense sense, const GaParams& params,
                     const std::function<void(const GaGeneration&)>& observer) {
  validate(params);
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(params.seed);
  const std::size_t pop = static_cast<std::size_t>(params.population);
  const std::size_t length = model.dimension() * static_cast<std::size_t>(params.bits_per_variable);
  const auto better = [sense](double a, double b) { return sense == Sense::kMax ? a > b : a < b; };

  std::vector<Chromosome> population(pop, Chromosome(length));
  std::bernoulli_distribution coin(0.5);
  for (auto& c : population) {
    for (auto& bit : c) bit = coin(rng) ? 1 : 0;
  }

  Chromosome elite;
  Solution best;
  best.sense = sense;
  best.value = sense == Sense::kMax ? -std::numeric_limits<double>::infinity()
                                    : std::numeric_limits<double>::infinity();
  std::vector<double> fitness(pop);
  std::vector<std::vector<double>> points(pop);

  for (int gen = 1; gen <= params.max_generations; ++gen) {
    if (gen > 1) {
      const auto weights = shifted_fitness(fitness, sense);
      std::vector<Chromosome> next(pop);
      for (auto& child : next) child = population[roulette_select(weights, rng)];
      for (std::size_t i = 0; i + 1 < pop; i += 2) {
        crossover(next[i], next[i + 1], params.crossover_rate, rng);
      }
      for (auto& child : next) mutate(child, params.mutation_rate, rng);
      next[0] = elite;
      population = std::move(next);
    }
    for (std::size_t i = 0; i < pop; ++i) {
      points[i] = decode(population[i], model.bounds(), params.bits_per_variable);
      fitness[i] = eval_model(model, points[i]);
      ++best.stats.evaluations;
      if (better(fitness[i], best.value)) {
        best.value = fitness[i];
        best.x = points[i];
        elite = population[i];
      }
    }
    if (observer) observer({gen, best.value, points});
  }

  best.bound = std::numeric_limits<double>::quiet_NaN();
  best.gap = std::numeric_limits<double>::quiet_NaN();
  best.status = SolveStatus::kHeuristic;
  best.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return best;
}

}  // namespace titlmars
