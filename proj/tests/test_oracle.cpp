#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "support/random_model.hpp"
#include "titlmars/errors.hpp"
#include "titlmars/oracle.hpp"

namespace titlmars {
namespace {

// Rebuilds `m` with every knot moved onto the nearest of `g` evenly spaced
// points of its variable's range.
TitlMarsModel snap_knots(const TitlMarsModel& m, int g) {
  std::vector<BasisFunction> bases(m.bases().begin(), m.bases().end());
  for (auto& b : bases) {
    for (auto& t : b.terms) {
      const auto& bd = m.bound(t.var);
      const double step = (bd.upper - bd.lower) / (g - 1);
      t.knot = bd.lower + step * std::round((t.knot - bd.lower) / step);
      t.knot = std::min(t.knot, bd.upper);
    }
  }
  return TitlMarsModel(m.intercept(), {m.coeffs().begin(), m.coeffs().end()}, std::move(bases),
                       {m.bounds().begin(), m.bounds().end()});
}

// Exhaustive search over the g^V grid of the box.
double grid_search(const TitlMarsModel& m, Sense sense, int g) {
  const std::size_t dim = m.dimension();
  std::vector<int> idx(dim, 0);
  std::vector<double> x(dim);
  double best = sense == Sense::kMax ? -std::numeric_limits<double>::infinity()
                                     : std::numeric_limits<double>::infinity();
  while (true) {
    for (std::size_t v = 0; v < dim; ++v) {
      const auto& bd = m.bound(v);
      x[v] = bd.lower + (bd.upper - bd.lower) * idx[v] / (g - 1);
    }
    const double f = eval_model(m, x);
    best = sense == Sense::kMax ? std::max(best, f) : std::min(best, f);
    std::size_t v = 0;
    for (; v < dim; ++v) {
      if (++idx[v] < g) break;
      idx[v] = 0;
    }
    if (v == dim) break;
  }
  return best;
}

TEST(Oracle, ConstantModel) {
  const TitlMarsModel m(7.0, {}, {}, {{0.0, 1.0, VarKind::kReal}});
  const auto s = oracle_optimum(m, Sense::kMax);
  EXPECT_DOUBLE_EQ(s.value, 7.0);
  EXPECT_EQ(s.status, SolveStatus::kOptimal);
  EXPECT_DOUBLE_EQ(s.gap, 0.0);
}

TEST(Oracle, SingleHinge) {
  // 2 max(x - 1, 0) - 1 on [0, 3]: max 3 at x = 3, min -1 on [0, 1].
  const TitlMarsModel m(-1.0, {2.0}, {BasisFunction{{{1, 0, 1.0}}}}, {{0.0, 3.0, VarKind::kReal}});
  const auto hi = oracle_optimum(m, Sense::kMax);
  EXPECT_DOUBLE_EQ(hi.value, 3.0);
  EXPECT_EQ(hi.x, std::vector<double>{3.0});
  EXPECT_DOUBLE_EQ(oracle_optimum(m, Sense::kMin).value, -1.0);
}

TEST(Oracle, SaddleInteraction) {
  // -max(x0 - 0.5, 0) max(x1 - 0.5, 0) on [0,1]^2 has its minimum at (1, 1).
  const TitlMarsModel m(0.0, {-1.0}, {BasisFunction{{{1, 0, 0.5}, {1, 1, 0.5}}}},
                        {{0.0, 1.0, VarKind::kReal}, {0.0, 1.0, VarKind::kReal}});
  const auto s = oracle_optimum(m, Sense::kMin);
  EXPECT_DOUBLE_EQ(s.value, -0.25);
  EXPECT_EQ(s.x, (std::vector<double>{1.0, 1.0}));
}

TEST(Oracle, IntegerCandidatesAreIntegral) {
  const TitlMarsModel m(0.0, {1.0}, {BasisFunction{{{-1, 0, 2.5}}}},
                        {{0.0, 5.0, VarKind::kInteger}});
  const auto cands = oracle_candidates(m);
  ASSERT_EQ(cands.size(), 1u);
  EXPECT_EQ(cands[0], (std::vector<double>{0.0, 2.0, 3.0, 5.0}));
  // max(2.5 - x, 0) over integers in [0, 5] peaks at x = 0.
  EXPECT_DOUBLE_EQ(oracle_optimum(m, Sense::kMax).value, 2.5);
}

TEST(Oracle, CapacityLimit) {
  std::mt19937_64 rng(3);
  testing::RandomModelOptions opt;
  opt.dimension = 4;
  opt.bases = 20;
  const auto m = testing::random_model(rng, opt);
  OracleConfig tiny;
  tiny.vertex_cap = 10;
  EXPECT_THROW(oracle_optimum(m, Sense::kMax, tiny), CapacityError);
}

struct GridCase {
  std::size_t dimension;
  int grid;
  int models;
};

class OracleVsGrid : public ::testing::TestWithParam<GridCase> {};

TEST_P(OracleVsGrid, MatchesExhaustiveGrid) {
  const auto param = GetParam();
  std::mt19937_64 rng(100 + param.dimension);
  for (int i = 0; i < param.models; ++i) {
    testing::RandomModelOptions opt;
    opt.dimension = param.dimension;
    opt.bases = 1 + static_cast<std::size_t>(i % 12);
    const auto m = snap_knots(testing::random_model(rng, opt), param.grid);
    for (Sense sense : {Sense::kMax, Sense::kMin}) {
      const double expected = grid_search(m, sense, param.grid);
      const auto s = oracle_optimum(m, sense);
      EXPECT_NEAR(s.value, expected, 1e-9 * std::max(1.0, std::abs(expected)))
          << "model " << i << " sense " << to_string(sense);
      EXPECT_DOUBLE_EQ(eval_model(m, s.x), s.value);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Dimensions, OracleVsGrid,
                         ::testing::Values(GridCase{1, 401, 20}, GridCase{2, 401, 20},
                                           GridCase{3, 41, 15}, GridCase{4, 21, 10}));

}  // namespace
}  // namespace titlmars
