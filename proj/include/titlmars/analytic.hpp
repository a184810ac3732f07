#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "titlmars/model.hpp"

namespace titlmars {

// Closed-form test surfaces. Each throws InputError on a wrong dimension.
double eval_f1(std::span<const double> x);  // 2-D, [-2, 2]^2
double eval_f2(std::span<const double> x);  // 2-D, [-20, 20]^2
double eval_f3(std::span<const double> x);  // 10-D, [-10, 10]^10
double eval_f4(std::span<const double> x);  // 10-D, [-10, 10]^10

struct AnalyticFunction {
  std::string name;
  std::size_t dimension = 0;
  double lower = 0.0;
  double upper = 0.0;
  double (*eval)(std::span<const double>) = nullptr;
};

// "f1" .. "f4"; throws InputError otherwise.
const AnalyticFunction& analytic_function(std::string_view name);
bool is_analytic_function(std::string_view name);
const std::vector<AnalyticFunction>& analytic_functions();

}  // namespace titlmars
