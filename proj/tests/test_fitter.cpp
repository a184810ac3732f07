#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "titlmars/analytic.hpp"
#include "titlmars/dataset.hpp"
#include "titlmars/errors.hpp"
#include "titlmars/mars_fitter.hpp"

namespace titlmars {
namespace {

Dataset grid_dataset(int per_axis, double lo, double hi,
                     const std::function<double(double, double)>& f) {
  Eigen::MatrixXd x(per_axis * per_axis, 2);
  Eigen::VectorXd y(per_axis * per_axis);
  int r = 0;
  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < per_axis; ++j) {
      x(r, 0) = lo + (hi - lo) * i / (per_axis - 1);
      x(r, 1) = lo + (hi - lo) * j / (per_axis - 1);
      y(r) = f(x(r, 0), x(r, 1));
      ++r;
    }
  }
  return make_dataset(std::move(x), std::move(y));
}

double hinge(double v) { return v > 0.0 ? v : 0.0; }

TEST(Criterion, GcvByHand) {
  // ssr 12 over n 10 with C = 4: 1.2 / 0.36
  EXPECT_DOUBLE_EQ(gcv(12.0, 10, 4.0), 1.2 / (0.6 * 0.6));
  EXPECT_DOUBLE_EQ(gcv(5.0, 10, 0.0), 0.5);
  EXPECT_TRUE(std::isinf(gcv(1.0, 10, 10.0)));
  EXPECT_TRUE(std::isinf(gcv(1.0, 10, 12.5)));
}

TEST(Criterion, EffectiveParameters) {
  EXPECT_DOUBLE_EQ(effective_parameters(0, 0, 3.0), 1.0);
  EXPECT_DOUBLE_EQ(effective_parameters(4, 3, 3.0), 14.0);
  EXPECT_DOUBLE_EQ(effective_parameters(4, 3, 2.0), 11.0);
}

TEST(Criterion, KnotCountIsDistinctPairs) {
  const TitlMarsModel m(0.0, {1.0, 1.0, 1.0},
                        {BasisFunction{{{1, 0, 0.5}}}, BasisFunction{{{-1, 0, 0.5}}},
                         BasisFunction{{{1, 0, 0.5}, {1, 1, 0.5}}}},
                        {{0.0, 1.0, VarKind::kReal}, {0.0, 1.0, VarKind::kReal}});
  // (0, 0.5) and (1, 0.5)
  EXPECT_EQ(count_knots(m), 2u);
}

TEST(Knots, DistinctSortedWhenFew) {
  Eigen::VectorXd c(6);
  c << 3.0, 1.0, 2.0, 3.0, 1.0, 5.0;
  EXPECT_EQ(knot_candidates(c, 10), (std::vector<double>{1.0, 2.0, 3.0, 5.0}));
}

TEST(Knots, ThinnedToQuantilesKeepingExtremes) {
  Eigen::VectorXd c(1001);
  for (int i = 0; i <= 1000; ++i) c(i) = i * 0.01;
  const auto k = knot_candidates(c, 11);
  ASSERT_EQ(k.size(), 11u);
  for (int i = 0; i <= 10; ++i) EXPECT_DOUBLE_EQ(k[static_cast<std::size_t>(i)], c(i * 100));
}

TEST(Design, ColumnsAreBasisValues) {
  Eigen::MatrixXd x(2, 2);
  x << 0.0, 1.0, 3.0, 0.5;
  const std::vector<BasisFunction> bases = {BasisFunction{{{1, 0, 1.0}}},
                                            BasisFunction{{{1, 0, 1.0}, {-1, 1, 0.75}}}};
  const auto d = design_matrix(bases, x);
  ASSERT_EQ(d.cols(), 3);
  EXPECT_DOUBLE_EQ(d(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(d(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(d(1, 1), 2.0);
  EXPECT_DOUBLE_EQ(d(1, 2), 0.5);
}

TEST(Dataset, CsvRoundTripAndErrors) {
  Eigen::MatrixXd x(3, 2);
  x << 0.1, 0.2, 1.0 / 3.0, -4.0, 5e-17, 6.0;
  Eigen::VectorXd y(3);
  y << 1.0, 2.0, 3.0;
  const auto d = make_dataset(x, y);
  EXPECT_DOUBLE_EQ(d.lower[0], 5e-17);
  EXPECT_DOUBLE_EQ(d.upper[1], 6.0);
  const auto back = parse_csv(to_csv(d));
  EXPECT_EQ(back.x, d.x);
  EXPECT_EQ(back.y, d.y);
  EXPECT_THROW(parse_csv(""), ParseError);
  EXPECT_THROW(parse_csv("a,y\n1,2\n"), ParseError);
  EXPECT_THROW(parse_csv("x1,y\n1,2\n3\n"), ParseError);
  EXPECT_THROW(parse_csv("x1,y\n1,nan\n2,3\n"), ParseError);
  EXPECT_THROW(make_dataset(Eigen::MatrixXd(3, 1), Eigen::VectorXd(2)), InputError);
}

TEST(Fit, TooFewRows) {
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 1.0;
  Eigen::VectorXd y(2);
  y << 0.0, 1.0;
  EXPECT_THROW(fit(make_dataset(x, y)), InputError);
}

TEST(Fit, ConstantResponseGivesInterceptOnly) {
  const auto d = grid_dataset(7, 0.0, 1.0, [](double, double) { return 4.25; });
  const auto m = fit(d);
  EXPECT_EQ(m.num_bases(), 0u);
  EXPECT_DOUBLE_EQ(m.intercept(), 4.25);
}

TEST(Fit, RecoversAKnownModelExactly) {
  const auto truth = [](double a, double b) {
    return 1.0 + 2.0 * hinge(a - 0.3) - 3.0 * hinge(a - 0.3) * hinge(0.4 - b);
  };
  const auto d = grid_dataset(21, 0.0, 1.0, truth);
  const auto m = fit(d);
  EXPECT_LT(std::sqrt(sum_squared_residuals(m, d) / static_cast<double>(d.rows())), 1e-9);
  EXPECT_NEAR(r_squared(m, d), 1.0, 1e-12);
  // Exact on unseen points of the box too.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double a = u(rng), b = u(rng);
    EXPECT_NEAR(eval_model(m, std::vector<double>{a, b}), truth(a, b), 1e-8);
  }
}

TEST(Fit, ModelCarriesDataBoundsAndRespectsLimits) {
  const auto d = grid_dataset(15, -2.0, 2.0, [](double a, double b) { return a * b + std::sin(a); });
  FitConfig cfg;
  cfg.max_basis = 9;
  const auto m = fit(d, cfg);
  EXPECT_LE(m.num_bases(), 9u);
  EXPECT_DOUBLE_EQ(m.bound(0).lower, -2.0);
  EXPECT_DOUBLE_EQ(m.bound(1).upper, 2.0);
  for (const auto& b : m.bases()) EXPECT_LE(b.terms.size(), 2u);
}

TEST(Forward, SsrNeverIncreases) {
  const auto d = grid_dataset(15, -2.0, 2.0, [](double a, double b) { return std::exp(-a * a - b * b); });
  const auto fr = forward_pass(d, FitConfig{});
  ASSERT_FALSE(fr.ssr_history.empty());
  for (std::size_t i = 1; i < fr.ssr_history.size(); ++i) {
    EXPECT_LE(fr.ssr_history[i], fr.ssr_history[i - 1] * (1.0 + 1e-12) + 1e-12);
  }
  EXPECT_NEAR(fr.ssr_history.back(), sum_squared_residuals(fr.model, d),
              1e-8 * (1.0 + fr.ssr_history.back()));
}

TEST(Backward, NeverWorseGcvThanForwardModel) {
  const auto d = grid_dataset(15, -2.0, 2.0,
                              [](double a, double b) { return std::cos(a) * b + 0.1 * a * a; });
  FitConfig cfg;
  const auto fr = forward_pass(d, cfg);
  const auto pruned = backward_pass(fr.model, d, cfg);
  const auto n = static_cast<std::size_t>(d.rows());
  const double full = gcv(sum_squared_residuals(fr.model, d), n,
                          effective_parameters(fr.model.num_bases(), count_knots(fr.model),
                                               cfg.gcv_penalty));
  const double kept = gcv(sum_squared_residuals(pruned, d), n,
                          effective_parameters(pruned.num_bases(), count_knots(pruned),
                                               cfg.gcv_penalty));
  EXPECT_LE(kept, full * (1.0 + 1e-9));
  EXPECT_LE(pruned.num_bases(), fr.model.num_bases());
  // Every kept basis comes from the forward model.
  for (const auto& b : pruned.bases()) {
    EXPECT_NE(std::find(fr.model.bases().begin(), fr.model.bases().end(), b),
              fr.model.bases().end());
  }
}

TEST(Fit, AnalyticSurfaceQuality) {
  const auto& f2 = analytic_function("f2");
  const auto d = grid_dataset(41, f2.lower, f2.upper, [&](double a, double b) {
    const std::vector<double> p = {a, b};
    return f2.eval(p);
  });
  EXPECT_GE(r_squared(fit(d), d), 0.95);
}

TEST(Fit, Deterministic) {
  const auto d = grid_dataset(11, 0.0, 1.0, [](double a, double b) { return a * a - b; });
  EXPECT_EQ(fit(d), fit(d));
}

}  // namespace
}  // namespace titlmars
