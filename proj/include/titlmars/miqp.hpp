#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "titlmars/model.hpp"

namespace titlmars {

enum class Relation { kGreaterEqual, kLessEqual, kEqual };

enum class SlotKind { kContinuous, kInteger, kBinary };

struct LinearRow {
  std::vector<std::pair<std::size_t, double>> coeffs;
  Relation relation = Relation::kGreaterEqual;
  double rhs = 0.0;
};

struct QuadEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

// Slots of one truncated term: its hinge value eta and its on/off indicator y.
struct TermSlots {
  std::size_t eta = 0;
  std::size_t indicator = 0;
};

struct SlotMap {
  std::size_t one = 0;
  std::vector<std::size_t> x;
  std::vector<std::vector<TermSlots>> terms;  // [basis][term]
};

// min (1/2) z'Qz + c'z subject to linear rows, bounds and kinds.
//
// Layout: z = (1, x_0..x_{V-1}, eta_{1,1}, y_{1,1}, [eta_{2,1}, y_{2,1}], ...),
// so dim = 1 + V + 2 * (total number of terms). Q is stored as explicit
// symmetric entries: both (i,j) and (j,i) are present.
struct MiqpProblem {
  std::size_t dim = 0;
  std::vector<QuadEntry> q;
  std::vector<double> c;
  std::vector<LinearRow> rows;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<SlotKind> kinds;
  SlotMap slots;
  Sense sense = Sense::kMin;  // of the source model; the problem always minimizes
};

inline constexpr double kBigMFloor = 1e-9;

// max(u_v - t, t - l_v), floored at kBigMFloor: bounds |x_v - t| on the box.
double big_m(const TruncatedTerm& term, const VariableBound& bound);

// Per basis, per term.
std::vector<std::vector<double>> compute_big_m(const TitlMarsModel& model);

// The three indicator rows of one term, all as ">=":
//   s*x - eta - m_off*y >= s*t - m_off   (eta <= s(x-t) + m_off(1-y))
//   -s*x + eta >= -s*t                   (eta >= s(x-t))
//   -eta + m_on*y >= 0                   (eta <= m_on*y)
// m_off bounds -s(x-t) and m_on bounds s(x-t) over the region of interest;
// the builder passes the same big-M for both.
std::vector<LinearRow> indicator_rows(const TruncatedTerm& term, std::size_t x_slot,
                                      TermSlots slots, double m_off, double m_on);

// Big-M reformulation. Maximization is encoded by negating Q and c.
MiqpProblem build_miqp(const TitlMarsModel& model, Sense sense);

// Exact value of (1/2) z'Qz + c'z.
double objective_at(const MiqpProblem& problem, std::span<const double> z);

// Canonical lift of a model point: eta = max(s(x-t), 0), y = [s(x-t) >= 0].
std::vector<double> embed(const MiqpProblem& problem, const TitlMarsModel& model,
                          std::span<const double> x);

// Largest violation of any row or bound at z (0 when feasible).
double max_violation(const MiqpProblem& problem, std::span<const double> z);

// Human-readable listing of slots, bounds, objective and rows.
std::string dump_miqp(const MiqpProblem& problem);

}  // namespace titlmars
