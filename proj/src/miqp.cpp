#include "titlmars/miqp.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "titlmars/errors.hpp"

namespace titlmars {

double big_m(const TruncatedTerm& term, const VariableBound& bound) {
  return std::max({bound.upper - term.knot, term.knot - bound.lower, kBigMFloor});
}

std::vector<std::vector<double>> compute_big_m(const TitlMarsModel& model) {
  std::vector<std::vector<double>> out;
  out.reserve(model.num_bases());
  for (const auto& basis : model.bases()) {
    std::vector<double> per_term;
    for (const auto& term : basis.terms) {
      per_term.push_back(big_m(term, model.bound(term.var)));
    }
    out.push_back(std::move(per_term));
  }
  return out;
}

std::vector<LinearRow> indicator_rows(const TruncatedTerm& term, std::size_t x_slot,
                                      TermSlots slots, double m_off, double m_on) {
  const double s = term.sign;
  std::vector<LinearRow> rows(3);
  rows[0].coeffs = {{x_slot, s}, {slots.eta, -1.0}, {slots.indicator, -m_off}};
  rows[0].rhs = s * term.knot - m_off;
  rows[1].coeffs = {{x_slot, -s}, {slots.eta, 1.0}};
  rows[1].rhs = -s * term.knot;
  rows[2].coeffs = {{slots.eta, -1.0}, {slots.indicator, m_on}};
  rows[2].rhs = 0.0;
  return rows;
}

MiqpProblem build_miqp(const TitlMarsModel& model, Sense sense) {
  MiqpProblem p;
  p.sense = sense;
  const std::size_t dim_x = model.dimension();
  p.dim = 1 + dim_x + 2 * model.num_terms();
  p.c.assign(p.dim, 0.0);
  p.lower.assign(p.dim, 0.0);
  p.upper.assign(p.dim, 0.0);
  p.kinds.assign(p.dim, SlotKind::kContinuous);

  p.slots.one = 0;
  p.lower[0] = p.upper[0] = 1.0;
  for (std::size_t v = 0; v < dim_x; ++v) {
    const std::size_t slot = 1 + v;
    p.slots.x.push_back(slot);
    p.lower[slot] = model.bound(v).lower;
    p.upper[slot] = model.bound(v).upper;
    p.kinds[slot] = model.bound(v).kind == VarKind::kInteger ? SlotKind::kInteger
                                                             : SlotKind::kContinuous;
  }

  const auto big = compute_big_m(model);
  std::size_t next = 1 + dim_x;
  for (std::size_t m = 0; m < model.num_bases(); ++m) {
    const auto& basis = model.bases()[m];
    std::vector<TermSlots> term_slots;
    for (std::size_t k = 0; k < basis.order(); ++k) {
      TermSlots ts{next, next + 1};
      next += 2;
      p.lower[ts.eta] = 0.0;
      p.upper[ts.eta] = big[m][k];
      p.lower[ts.indicator] = 0.0;
      p.upper[ts.indicator] = 1.0;
      p.kinds[ts.indicator] = SlotKind::kBinary;
      const auto& term = basis.terms[k];
      for (auto& row : indicator_rows(term, p.slots.x[term.var], ts, big[m][k], big[m][k])) {
        p.rows.push_back(std::move(row));
      }
      term_slots.push_back(ts);
    }
    p.slots.terms.push_back(std::move(term_slots));
  }

  const double sign = sense == Sense::kMax ? -1.0 : 1.0;
  p.c[p.slots.one] = sign * model.intercept();
  for (std::size_t m = 0; m < model.num_bases(); ++m) {
    const double a = sign * model.coeffs()[m];
    const auto& ts = p.slots.terms[m];
    if (ts.size() == 1) {
      p.c[ts[0].eta] = a;
    } else {
      p.q.push_back({ts[0].eta, ts[1].eta, a});
      p.q.push_back({ts[1].eta, ts[0].eta, a});
    }
  }
  return p;
}

double objective_at(const MiqpProblem& problem, std::span<const double> z) {
  if (z.size() != problem.dim) {
    throw StructuralError(
        fmt::format("z has length {}, problem dimension is {}", z.size(), problem.dim));
  }
  double quad = 0.0;
  for (const auto& e : problem.q) quad += e.value * z[e.row] * z[e.col];
  double lin = 0.0;
  for (std::size_t i = 0; i < problem.dim; ++i) lin += problem.c[i] * z[i];
  return 0.5 * quad + lin;
}

std::vector<double> embed(const MiqpProblem& problem, const TitlMarsModel& model,
                          std::span<const double> x) {
  if (x.size() != model.dimension()) {
    throw StructuralError(fmt::format("point has length {}, model dimension is {}",
                                      x.size(), model.dimension()));
  }
  std::vector<double> z(problem.dim, 0.0);
  z[problem.slots.one] = 1.0;
  for (std::size_t v = 0; v < x.size(); ++v) z[problem.slots.x[v]] = x[v];
  for (std::size_t m = 0; m < model.num_bases(); ++m) {
    const auto& basis = model.bases()[m];
    for (std::size_t k = 0; k < basis.order(); ++k) {
      const auto& term = basis.terms[k];
      const double arg = term.sign * (x[term.var] - term.knot);
      z[problem.slots.terms[m][k].eta] = std::max(arg, 0.0);
      z[problem.slots.terms[m][k].indicator] = arg >= 0.0 ? 1.0 : 0.0;
    }
  }
  return z;
}

double max_violation(const MiqpProblem& problem, std::span<const double> z) {
  double worst = 0.0;
  for (std::size_t i = 0; i < problem.dim; ++i) {
    worst = std::max({worst, problem.lower[i] - z[i], z[i] - problem.upper[i]});
  }
  for (const auto& row : problem.rows) {
    double lhs = 0.0;
    for (const auto& [slot, coef] : row.coeffs) lhs += coef * z[slot];
    switch (row.relation) {
      case Relation::kGreaterEqual: worst = std::max(worst, row.rhs - lhs); break;
      case Relation::kLessEqual: worst = std::max(worst, lhs - row.rhs); break;
      case Relation::kEqual: worst = std::max(worst, std::abs(lhs - row.rhs)); break;
    }
  }
  return worst;
}

namespace {

std::string slot_name(const MiqpProblem& p, std::size_t slot) {
  if (slot == p.slots.one) return "one";
  for (std::size_t v = 0; v < p.slots.x.size(); ++v) {
    if (p.slots.x[v] == slot) return fmt::format("x{}", v);
  }
  for (std::size_t m = 0; m < p.slots.terms.size(); ++m) {
    for (std::size_t k = 0; k < p.slots.terms[m].size(); ++k) {
      if (p.slots.terms[m][k].eta == slot) return fmt::format("eta{}_{}", k + 1, m + 1);
      if (p.slots.terms[m][k].indicator == slot) return fmt::format("y{}_{}", k + 1, m + 1);
    }
  }
  return fmt::format("z{}", slot);
}

std::string_view kind_name(SlotKind kind) {
  switch (kind) {
    case SlotKind::kContinuous: return "continuous";
    case SlotKind::kInteger: return "integer";
    case SlotKind::kBinary: return "binary";
  }
  return "?";
}

}  // namespace

std::string dump_miqp(const MiqpProblem& p) {
  std::string out = fmt::format("miqp dim {} rows {} source-sense {}\n", p.dim,
                                p.rows.size(), to_string(p.sense));
  out += "slots\n";
  for (std::size_t i = 0; i < p.dim; ++i) {
    out += fmt::format("  {:>4} {:<10} [{:.17g}, {:.17g}] {}\n", i, slot_name(p, i),
                       p.lower[i], p.upper[i], kind_name(p.kinds[i]));
  }
  out += "linear\n";
  for (std::size_t i = 0; i < p.dim; ++i) {
    if (p.c[i] != 0.0) out += fmt::format("  {} {:.17g}\n", slot_name(p, i), p.c[i]);
  }
  out += "quadratic\n";
  for (const auto& e : p.q) {
    out += fmt::format("  {} {} {:.17g}\n", slot_name(p, e.row), slot_name(p, e.col), e.value);
  }
  out += "rows\n";
  for (const auto& row : p.rows) {
    out += " ";
    for (const auto& [slot, coef] : row.coeffs) {
      out += fmt::format(" {:+.17g}*{}", coef, slot_name(p, slot));
    }
    const char* rel = row.relation == Relation::kGreaterEqual ? ">="
                      : row.relation == Relation::kLessEqual  ? "<="
                                                              : "=";
    out += fmt::format(" {} {:.17g}\n", rel, row.rhs);
  }
  return out;
}

}  // namespace titlmars
