#include "titlmars/analytic.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "titlmars/errors.hpp"

namespace titlmars {
namespace {

void check_dimension(std::string_view name, std::span<const double> x, std::size_t expected) {
  if (x.size() != expected) {
    throw InputError(fmt::format("{} takes {} variables, got {}", name, expected, x.size()));
  }
}

constexpr std::array<double, 10> kF4Constants = {-0.6089, -17.164, -34.054, -5.914, -24.721,
                                                 -14.986, -24.100, -10.708, -26.662, -22.179};

}  // namespace

double eval_f1(std::span<const double> x) {
  check_dimension("f1", x, 2);
  const double a = x[0], b = x[1];
  return 3.0 * (1.0 - a) * (1.0 - a) * std::exp(-a * a - (b + 1.0) * (b + 1.0)) -
         10.0 * (a / 5.0 - a * a * a - std::pow(b, 5)) * std::exp(-a * a - b * b) -
         std::exp(-(a + 1.0) * (a + 1.0) - b * b) / 3.0 + 2.0 * a;
}

double eval_f2(std::span<const double> x) {
  check_dimension("f2", x, 2);
  return std::sin(std::numbers::pi * x[0] / 12.0) * std::cos(std::numbers::pi * x[1] / 16.0);
}

double eval_f3(std::span<const double> x) {
  check_dimension("f3", x, 10);
  auto sq = [](double v) { return v * v; };
  return sq(x[0]) + sq(x[1]) + x[0] * x[1] - 14.0 * x[0] - 16.0 * x[1] + sq(x[2] - 10.0) -
         4.0 * sq(x[3] - 5.0) + sq(x[4] - 3.0) + 2.0 * sq(x[5] - 1.0) + 5.0 * sq(x[6]) +
         7.0 * sq(x[7] - 11.0) + 2.0 * sq(x[8] - 10.0) + 2.0 * sq(x[9] - 7.0) + 45.0;
}

double eval_f4(std::span<const double> x) {
  check_dimension("f4", x, 10);
  double total = 0.0;
  for (double v : x) total += std::exp(v);
  const double log_total = std::log(total);
  double sum = 0.0;
  for (std::size_t j = 0; j < 10; ++j) {
    sum += std::exp(x[j]) * (kF4Constants[j] + x[j] - log_total);
  }
  return sum;
}

const std::vector<AnalyticFunction>& analytic_functions() {
  static const std::vector<AnalyticFunction> functions = {
      {"f1", 2, -2.0, 2.0, &eval_f1},
      {"f2", 2, -20.0, 20.0, &eval_f2},
      {"f3", 10, -10.0, 10.0, &eval_f3},
      {"f4", 10, -10.0, 10.0, &eval_f4},
  };
  return functions;
}

bool is_analytic_function(std::string_view name) {
  for (const auto& f : analytic_functions()) {
    if (f.name == name) return true;
  }
  return false;
}

const AnalyticFunction& analytic_function(std::string_view name) {
  for (const auto& f : analytic_functions()) {
    if (f.name == name) return f;
  }
  throw InputError(fmt::format("unknown analytic function '{}' (expected f1..f4)", name));
}

}  // namespace titlmars
