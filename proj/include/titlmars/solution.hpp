#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "titlmars/model.hpp"

namespace titlmars {

enum class SolveStatus {
  kOptimal,     // gap within tolerance
  kIncomplete,  // node or time limit reached; best incumbent returned
  kHeuristic,   // no optimality certificate (genetic algorithm)
};

std::string_view to_string(SolveStatus status);

struct SolveStats {
  std::int64_t nodes = 0;
  std::int64_t lp_iterations = 0;
  std::int64_t evaluations = 0;
  double wall_seconds = 0.0;
};

// Result of any optimizer over a model box. `bound` is a certified bound on
// the optimum in the optimizing sense (>= value for max, <= value for min);
// heuristics that certify nothing report NaN.
struct Solution {
  Sense sense = Sense::kMin;
  std::vector<double> x;
  double value = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  SolveStatus status = SolveStatus::kOptimal;
  SolveStats stats;
};

// |value - bound| / max(1, |value|).
double relative_gap(double value, double bound);

// Key/value text: sense, status, value, bound, gap, x, nodes, lp_iterations,
// evaluations, millis.
std::string format_solution(const Solution& solution);

}  // namespace titlmars
