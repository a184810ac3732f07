#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace titlmars {

enum class VarKind { kReal, kInteger };

enum class Sense { kMin, kMax };

std::string_view to_string(Sense sense);
std::string_view to_string(VarKind kind);
// Accepts "min"/"max"; throws InputError otherwise.
Sense parse_sense(std::string_view text);

// One hinge factor max(sign * (x[var] - knot), 0).
struct TruncatedTerm {
  int sign = 1;
  std::size_t var = 0;
  double knot = 0.0;

  friend bool operator==(const TruncatedTerm&, const TruncatedTerm&) = default;
};

// Product of one or two truncated terms on distinct variables.
struct BasisFunction {
  std::vector<TruncatedTerm> terms;

  std::size_t order() const { return terms.size(); }
  friend bool operator==(const BasisFunction&, const BasisFunction&) = default;
};

struct VariableBound {
  double lower = 0.0;
  double upper = 1.0;
  VarKind kind = VarKind::kReal;

  friend bool operator==(const VariableBound&, const VariableBound&) = default;
};

// a0 + sum_m a_m * B_m(x) over a box, with at most two-way interactions.
//
// The constructor enforces every structural invariant and throws
// ValidationError naming the violated one. Instances are immutable.
class TitlMarsModel {
 public:
  TitlMarsModel(double intercept, std::vector<double> coeffs,
                std::vector<BasisFunction> bases,
                std::vector<VariableBound> bounds);

  std::size_t dimension() const { return bounds_.size(); }
  std::size_t num_bases() const { return bases_.size(); }
  std::size_t num_terms() const;

  double intercept() const { return intercept_; }
  std::span<const double> coeffs() const { return coeffs_; }
  std::span<const BasisFunction> bases() const { return bases_; }
  std::span<const VariableBound> bounds() const { return bounds_; }
  const VariableBound& bound(std::size_t v) const { return bounds_[v]; }

  friend bool operator==(const TitlMarsModel&, const TitlMarsModel&) = default;

 private:
  double intercept_;
  std::vector<double> coeffs_;
  std::vector<BasisFunction> bases_;
  std::vector<VariableBound> bounds_;
};

double eval_term(const TruncatedTerm& term, std::span<const double> x);
double eval_basis(const BasisFunction& basis, std::span<const double> x);
// Defined for any x of the right length, inside the box or not.
double eval_model(const TitlMarsModel& model, std::span<const double> x);

// Per-variable sorted breakpoints {l_v} U {knots on v} U {u_v}.
struct KnotGrid {
  std::vector<std::vector<double>> breakpoints;
};

KnotGrid make_knot_grid(const TitlMarsModel& model);

// Text document "titl-mars v1"; reals written with 17 significant digits.
std::string serialize_model(const TitlMarsModel& model);
TitlMarsModel parse_model(std::string_view text);

TitlMarsModel load_model(const std::filesystem::path& path);
void save_model(const TitlMarsModel& model, const std::filesystem::path& path);

}  // namespace titlmars
