#include "titlmars/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "titlmars/errors.hpp"

namespace titlmars {

std::vector<std::vector<double>> oracle_candidates(const TitlMarsModel& model) {
  auto grid = make_knot_grid(model);
  for (std::size_t v = 0; v < model.dimension(); ++v) {
    const auto& b = model.bound(v);
    if (b.kind != VarKind::kInteger) continue;
    std::vector<double> points = {b.lower, b.upper};
    for (double t : grid.breakpoints[v]) {
      points.push_back(std::clamp(std::floor(t), b.lower, b.upper));
      points.push_back(std::clamp(std::ceil(t), b.lower, b.upper));
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    grid.breakpoints[v] = std::move(points);
  }
  return std::move(grid.breakpoints);
}

Solution oracle_optimum(const TitlMarsModel& model, Sense sense,
                        const OracleConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const auto candidates = oracle_candidates(model);

  std::uint64_t total = 1;
  for (const auto& c : candidates) {
    if (total > config.vertex_cap / c.size() + 1) {
      total = config.vertex_cap + 1;
      break;
    }
    total *= c.size();
  }
  if (total > config.vertex_cap) {
    throw CapacityError(fmt::format(
        "oracle vertex count exceeds cap of {}; use the branch-and-bound solver",
        config.vertex_cap));
  }

  const std::size_t dim = model.dimension();
  std::vector<std::size_t> index(dim, 0);
  std::vector<double> x(dim);
  for (std::size_t v = 0; v < dim; ++v) x[v] = candidates[v][0];

  const double sign = sense == Sense::kMax ? -1.0 : 1.0;
  double best = 0.0;
  std::vector<double> best_x;
  std::uint64_t evaluations = 0;
  while (true) {
    const double value = eval_model(model, x);
    ++evaluations;
    if (best_x.empty() || sign * value < sign * best) {
      best = value;
      best_x = x;
    }
    // Odometer increment, last coordinate fastest.
    bool wrapped = true;
    for (std::size_t v = dim; v-- > 0;) {
      if (++index[v] < candidates[v].size()) {
        x[v] = candidates[v][index[v]];
        wrapped = false;
        break;
      }
      index[v] = 0;
      x[v] = candidates[v][0];
    }
    if (wrapped) break;
  }

  Solution solution;
  solution.sense = sense;
  solution.x = std::move(best_x);
  solution.value = best;
  solution.bound = best;
  solution.gap = 0.0;
  solution.status = SolveStatus::kOptimal;
  solution.stats.evaluations = static_cast<std::int64_t>(evaluations);
  solution.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return solution;
}

}  // namespace titlmars
