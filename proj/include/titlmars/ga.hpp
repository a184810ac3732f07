#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "titlmars/model.hpp"
#include "titlmars/solution.hpp"

namespace titlmars {

struct GaParams {
  int population = 50;
  int max_generations = 1000;
  double crossover_rate = 0.8;
  double mutation_rate = 0.15;
  int bits_per_variable = 16;
  std::uint64_t seed = 1;
};

// "grefenstette": 30 / 300 / 0.9 / 0.01, "michalewicz": 50 / 1000 / 0.8 / 0.15.
// Throws InputError for any other name.
GaParams ga_preset(std::string_view name, std::uint64_t seed = 1);

// Throws InputError when the invariants (even population >= 2, rates in
// [0, 1], 1..52 bits) do not hold.
void validate(const GaParams& params);

using Chromosome = std::vector<std::uint8_t>;  // one 0/1 entry per bit

// MSB-first slice per variable: l + k (u - l) / (2^bits - 1); integer
// variables are rounded and clamped.
std::vector<double> decode(const Chromosome& chromosome, std::span<const VariableBound> bounds,
                           int bits);

// Roulette weights: fitness shifted so the worst individual sits 1e-12
// above zero. Under minimization lower raw values get larger weights.
std::vector<double> shifted_fitness(std::span<const double> raw, Sense sense);

// Index drawn proportionally to the weights.
std::size_t roulette_select(std::span<const double> weights, std::mt19937_64& rng);

// With probability `rate`, swaps the tails after a uniform cut point in
// [1, length - 1]; otherwise leaves both parents untouched.
void crossover(Chromosome& a, Chromosome& b, double rate, std::mt19937_64& rng);

// Flips each bit independently with probability `rate`.
void mutate(Chromosome& c, double rate, std::mt19937_64& rng);

struct GaGeneration {
  int generation = 0;
  double best_so_far = 0.0;
  std::vector<std::vector<double>> points;  // decoded population
};

// Runs exactly max_generations generations (the initial population is the
// first) and returns the best point ever evaluated. Status is kHeuristic and
// bound is NaN. `observer`, when set, sees every generation.
Solution ga_optimize(const TitlMarsModel& model, Sense sense, const GaParams& params,
                     const std::function<void(const GaGeneration&)>& observer = {});

}  // namespace titlmars
