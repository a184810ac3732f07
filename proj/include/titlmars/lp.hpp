#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "titlmars/miqp.hpp"

namespace titlmars::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

// min cost'x subject to rows and lower <= x <= upper. Bounds may be infinite.
struct Problem {
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<LinearRow> rows;

  std::size_t num_cols() const { return cost.size(); }

  std::size_t add_column(double c, double lo, double hi) {
    cost.push_back(c);
    lower.push_back(lo);
    upper.push_back(hi);
    return cost.size() - 1;
  }
};

struct Options {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  // 0 selects 100 * (rows + cols) + 1000.
  std::int64_t max_iterations = 0;
};

struct Result {
  Status status = Status::kIterationLimit;
  double objective = 0.0;
  std::vector<double> x;
  std::int64_t iterations = 0;
  bool used_bland = false;
};

// Two-phase bounded-variable primal simplex on a dense tableau. Pricing is
// Dantzig's rule; after 10 * (rows + cols) consecutive degenerate pivots it
// switches to Bland's rule for the rest of the solve.
Result solve(const Problem& problem, const Options& options = {});

}  // namespace titlmars::lp
