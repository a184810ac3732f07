#pragma once

#include <cstdint>
#include <vector>

#include "titlmars/model.hpp"
#include "titlmars/solution.hpp"

namespace titlmars {

struct OracleConfig {
  std::uint64_t vertex_cap = 2'000'000;
};

// Per-variable candidate coordinates the oracle enumerates. Real variables
// use the knot grid; integer variables use {l, u} and floor/ceil of every
// knot, all inside the bounds.
std::vector<std::vector<double>> oracle_candidates(const TitlMarsModel& model);

// Exact global optimum by enumerating every knot-cell vertex. On each cell
// the model is affine in each coordinate separately, so box extrema sit on
// cell vertices. Throws CapacityError when the vertex count exceeds the cap.
Solution oracle_optimum(const TitlMarsModel& model, Sense sense,
                        const OracleConfig& config = {});

}  // namespace titlmars
