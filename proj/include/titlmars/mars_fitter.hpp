#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "titlmars/dataset.hpp"
#include "titlmars/model.hpp"

namespace titlmars {

struct FitConfig {
  int max_basis = 40;
  // Knot candidates per variable: all distinct sample values, or this many
  // quantiles of them when there are more.
  int max_knots_per_variable = 100;
  double gcv_penalty = 3.0;
  // Forward pass stops once the best pair lowers SSR by less than this
  // fraction of the total sum of squares.
  double forward_threshold = 1e-6;
};

// (ssr / n) / (1 - effective_params / n)^2; +infinity once effective_params >= n.
double gcv(double ssr, std::size_t n, double effective_params);

// 1 + num_bases + penalty * num_knots.
double effective_parameters(std::size_t num_bases, std::size_t num_knots, double penalty);

// Distinct (variable, knot) pairs across all terms of the model.
std::size_t count_knots(const TitlMarsModel& model);

// Sorted distinct sample values of a column, thinned to evenly spaced
// quantiles when there are more than max_knots.
std::vector<double> knot_candidates(const Eigen::VectorXd& column, int max_knots);

// n x (1 + M) design matrix: intercept column then one column per basis.
Eigen::MatrixXd design_matrix(const std::vector<BasisFunction>& bases, const Eigen::MatrixXd& x);

double sum_squared_residuals(const TitlMarsModel& model, const Dataset& data);
double r_squared(const TitlMarsModel& model, const Dataset& data);

struct ForwardResult {
  TitlMarsModel model;               // least-squares coefficients on all bases
  std::vector<double> ssr_history;   // training SSR after each accepted step
};

// Greedy addition of reflected hinge pairs parent * max(+-(x_v - t), 0),
// where the parent is the intercept or an existing one-term basis.
ForwardResult forward_pass(const Dataset& data, const FitConfig& config);

// Removes bases one at a time (least SSR increase first) and keeps the
// subset with minimum GCV. The candidate's coefficients are ignored.
TitlMarsModel backward_pass(const TitlMarsModel& candidate, const Dataset& data,
                            const FitConfig& config);

// forward_pass followed by backward_pass. Throws InputError for n < 3.
TitlMarsModel fit(const Dataset& data, const FitConfig& config = {});

}  // namespace titlmars
