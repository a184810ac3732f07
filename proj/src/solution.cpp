#include "titlmars/solution.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace titlmars {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kIncomplete: return "incomplete";
    case SolveStatus::kHeuristic: return "heuristic";
  }
  return "unknown";
}

double relative_gap(double value, double bound) {
  return std::abs(value - bound) / std::max(1.0, std::abs(value));
}

std::string format_solution(const Solution& s) {
  std::string out;
  out += fmt::format("sense {}\n", to_string(s.sense));
  out += fmt::format("status {}\n", to_string(s.status));
  out += fmt::format("value {:.17g}\n", s.value);
  out += fmt::format("bound {:.17g}\n", s.bound);
  out += fmt::format("gap {:.6g}\n", s.gap);
  out += "x";
  for (double xi : s.x) out += fmt::format(" {:.17g}", xi);
  out += '\n';
  out += fmt::format("nodes {}\n", s.stats.nodes);
  out += fmt::format("lp_iterations {}\n", s.stats.lp_iterations);
  out += fmt::format("evaluations {}\n", s.stats.evaluations);
  out += fmt::format("millis {:.3f}\n", s.stats.wall_seconds * 1e3);
  return out;
}

}  // namespace titlmars
