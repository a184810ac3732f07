#include "titlmars/bb_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "titlmars/errors.hpp"
#include "titlmars/lp.hpp"

namespace titlmars {
namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr double kIntegralityTol = 1e-6;
constexpr double kFeasibilityTol = 1e-7;
constexpr std::size_t kNoColumn = static_cast<std::size_t>(-1);

// eta of one term at a node, as an affine function of one LP column.
struct EtaExpr {
  double constant = 0.0;
  std::size_t col = kNoColumn;
  double coef = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  double at(const std::vector<double>& x) const {
    return col == kNoColumn ? constant : constant + coef * x[col];
  }
};

// Adds factor * expr to a row's left-hand side.
void add_expr(LinearRow& row, double factor, const EtaExpr& e) {
  if (e.col != kNoColumn && e.coef != 0.0) row.coeffs.emplace_back(e.col, factor * e.coef);
  row.rhs -= factor * e.constant;
}

IndicatorState indicator_for(const TruncatedTerm& term, double lo, double hi) {
  if (term.sign > 0) {
    if (hi <= term.knot) return IndicatorState::kOff;
    if (lo >= term.knot) return IndicatorState::kOn;
  } else {
    if (lo >= term.knot) return IndicatorState::kOff;
    if (hi <= term.knot) return IndicatorState::kOn;
  }
  return IndicatorState::kFree;
}

// Ordering for the open-node heap: smallest minimization key first, deeper
// nodes first on ties, then creation order.
struct OpenNode {
  Node node;
  double key;
  std::uint64_t id;
};

bool heap_after(const OpenNode& a, const OpenNode& b) {
  if (a.key != b.key) return a.key > b.key;
  if (a.node.depth != b.node.depth) return a.node.depth < b.node.depth;
  return a.id > b.id;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

BranchAndBound::BranchAndBound(const TitlMarsModel& model, Sense sense, SolverConfig config)
    : model_(model), sense_(sense), config_(config), problem_(build_miqp(model, sense)) {
  if (!(config_.gap_tolerance > 0.0)) throw InputError("gap tolerance must be positive");
  basis_terms_.resize(model_.num_bases());
  for (std::size_t m = 0; m < model_.num_bases(); ++m) {
    const auto& basis = model_.bases()[m];
    for (std::size_t k = 0; k < basis.order(); ++k) {
      basis_terms_[m].push_back(terms_.size());
      terms_.push_back({m, k, basis.terms[k]});
    }
  }
}

std::optional<Node> BranchAndBound::make_node(std::vector<double> lower,
                                              std::vector<double> upper, double bound,
                                              int depth) const {
  const std::size_t dim = model_.dimension();
  if (lower.size() != dim || upper.size() != dim) {
    throw StructuralError("node box does not match the model dimension");
  }
  for (std::size_t v = 0; v < dim; ++v) {
    if (model_.bound(v).kind == VarKind::kInteger) {
      lower[v] = std::ceil(lower[v] - 1e-9);
      upper[v] = std::floor(upper[v] + 1e-9);
    }
    if (lower[v] > upper[v]) return std::nullopt;
  }
  Node node;
  node.indicators.reserve(terms_.size());
  node.eta_lower.reserve(terms_.size());
  node.eta_upper.reserve(terms_.size());
  for (const auto& ref : terms_) {
    const auto& t = ref.term;
    const double lo = lower[t.var];
    const double hi = upper[t.var];
    node.indicators.push_back(indicator_for(t, lo, hi));
    const double a = t.sign * (lo - t.knot);
    const double b = t.sign * (hi - t.knot);
    node.eta_lower.push_back(std::max(std::min(a, b), 0.0));
    node.eta_upper.push_back(std::max(std::max(a, b), 0.0));
  }
  node.lower = std::move(lower);
  node.upper = std::move(upper);
  node.bound = bound;
  node.depth = depth;
  return node;
}

Node BranchAndBound::root() const {
  std::vector<double> lo, hi;
  for (const auto& b : model_.bounds()) {
    lo.push_back(b.lower);
    hi.push_back(b.upper);
  }
  const double unbounded = sense_ == Sense::kMax ? kInfinity : -kInfinity;
  auto node = make_node(std::move(lo), std::move(hi), unbounded, 0);
  if (!node) throw InputError("model box is empty");
  return *std::move(node);
}

Relaxation BranchAndBound::relax(const Node& node) const {
  const std::size_t dim = model_.dimension();
  const double sign = sense_ == Sense::kMax ? -1.0 : 1.0;
  lp::Problem lp;
  for (std::size_t v = 0; v < dim; ++v) lp.add_column(0.0, node.lower[v], node.upper[v]);

  std::vector<EtaExpr> eta(terms_.size());
  std::vector<std::size_t> indicator_col(terms_.size(), kNoColumn);
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const auto& t = terms_[k].term;
    EtaExpr& e = eta[k];
    e.lo = node.eta_lower[k];
    e.hi = node.eta_upper[k];
    switch (node.indicators[k]) {
      case IndicatorState::kOff:
        break;
      case IndicatorState::kOn:
        e.col = t.var;
        e.coef = t.sign;
        e.constant = -t.sign * t.knot;
        break;
      case IndicatorState::kFree: {
        e.col = lp.add_column(0.0, 0.0, e.hi);
        e.coef = 1.0;
        indicator_col[k] = lp.add_column(0.0, 0.0, 1.0);
        // Node-tight big-M: m_off bounds -s(x-t), m_on bounds s(x-t) on the box.
        const double m_off =
            std::max(t.sign > 0 ? t.knot - node.lower[t.var] : node.upper[t.var] - t.knot,
                     kBigMFloor);
        const double m_on = std::max(e.hi, kBigMFloor);
        for (auto& row : indicator_rows(t, t.var, {e.col, indicator_col[k]}, m_off, m_on)) {
          lp.rows.push_back(std::move(row));
        }
        break;
      }
    }
  }

  double constant = sign * model_.intercept();
  std::vector<std::size_t> product_col(model_.num_bases(), kNoColumn);
  for (std::size_t m = 0; m < model_.num_bases(); ++m) {
    const double a = sign * model_.coeffs()[m];
    const auto& ids = basis_terms_[m];
    if (ids.size() == 1) {
      const EtaExpr& e = eta[ids[0]];
      if (e.col != kNoColumn) lp.cost[e.col] += a * e.coef;
      constant += a * e.constant;
      continue;
    }
    const EtaExpr& e1 = eta[ids[0]];
    const EtaExpr& e2 = eta[ids[1]];
    if (node.indicators[ids[0]] == IndicatorState::kOff ||
        node.indicators[ids[1]] == IndicatorState::kOff) {
      continue;
    }
    const std::size_t w = lp.add_column(a, e1.lo * e2.lo, e1.hi * e2.hi);
    product_col[m] = w;
    const double l1 = e1.lo, u1 = e1.hi, l2 = e2.lo, u2 = e2.hi;
    auto mccormick = [&](Relation rel, double c1, double c2, double rhs) {
      LinearRow row;
      row.relation = rel;
      row.rhs = rhs;
      row.coeffs.emplace_back(w, 1.0);
      add_expr(row, -c1, e1);
      add_expr(row, -c2, e2);
      lp.rows.push_back(std::move(row));
    };
    mccormick(Relation::kGreaterEqual, l2, l1, -l1 * l2);
    mccormick(Relation::kGreaterEqual, u2, u1, -u1 * u2);
    mccormick(Relation::kLessEqual, l2, u1, -u1 * l2);
    mccormick(Relation::kLessEqual, u2, l1, -l1 * u2);
  }

  Relaxation rel;
  const lp::Result result = lp::solve(lp);
  rel.iterations = result.iterations;
  if (result.status != lp::Status::kOptimal) return rel;
  rel.solved = true;
  const double min_bound = result.objective + constant;
  rel.bound = sign * min_bound;

  const auto& x = result.x;
  rel.z.assign(problem_.dim, 0.0);
  rel.z[problem_.slots.one] = 1.0;
  for (std::size_t v = 0; v < dim; ++v) rel.z[problem_.slots.x[v]] = x[v];
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const auto& slots = problem_.slots.terms[terms_[k].basis][terms_[k].pos];
    rel.z[slots.eta] = eta[k].at(x);
    double y = 0.0;
    if (node.indicators[k] == IndicatorState::kOn) y = 1.0;
    if (node.indicators[k] == IndicatorState::kFree) y = x[indicator_col[k]];
    rel.z[slots.indicator] = y;
  }
  rel.products.assign(model_.num_bases(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t m = 0; m < model_.num_bases(); ++m) {
    if (basis_terms_[m].size() == 2) {
      rel.products[m] = product_col[m] == kNoColumn ? 0.0 : x[product_col[m]];
    }
  }
  return rel;
}

std::pair<Node, Node> BranchAndBound::split(const Node& node, std::size_t var,
                                            double lo_child_upper, double hi_child_lower,
                                            double bound) const {
  auto upper_a = node.upper;
  upper_a[var] = lo_child_upper;
  auto lower_b = node.lower;
  lower_b[var] = hi_child_lower;
  auto a = make_node(node.lower, std::move(upper_a), bound, node.depth + 1);
  auto b = make_node(std::move(lower_b), node.upper, bound, node.depth + 1);
  if (!a || !b) throw InternalError("branching produced an empty child");
  return {*std::move(a), *std::move(b)};
}

std::pair<Node, Node> BranchAndBound::split_at_knot(const Node& node, std::size_t term_index,
                                                    double bound) const {
  const auto& t = terms_[term_index].term;
  return split(node, t.var, t.knot, t.knot, bound);
}

std::vector<std::size_t> BranchAndBound::active_variables(const Node& node) const {
  std::vector<bool> active(model_.dimension(), false);
  for (std::size_t m = 0; m < model_.num_bases(); ++m) {
    if (model_.coeffs()[m] == 0.0) continue;
    bool off = false;
    for (std::size_t k : basis_terms_[m]) off = off || node.indicators[k] == IndicatorState::kOff;
    if (off) continue;
    for (std::size_t k : basis_terms_[m]) active[terms_[k].term.var] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < active.size(); ++v) {
    if (active[v] && node.lower[v] < node.upper[v]) out.push_back(v);
  }
  return out;
}

std::pair<Node, Node> BranchAndBound::bisect(const Node& node, double bound) const {
  const auto active = active_variables(node);
  std::size_t var = active.front();
  for (std::size_t v : active) {
    if (node.upper[v] - node.lower[v] > node.upper[var] - node.lower[var]) var = v;
  }
  const double mid = 0.5 * (node.lower[var] + node.upper[var]);
  if (model_.bound(var).kind == VarKind::kInteger) {
    return split(node, var, std::floor(mid), std::floor(mid) + 1.0, bound);
  }
  return split(node, var, mid, mid, bound);
}

double BranchAndBound::tie_noise(std::size_t index) const {
  if (config_.seed == 0) return 0.0;
  return static_cast<double>(mix(config_.seed ^ mix(index)) >> 11) * 0x1.0p-53;
}

bool BranchAndBound::is_cell_pure(const Node& node) const {
  return std::none_of(node.indicators.begin(), node.indicators.end(),
                      [](IndicatorState s) { return s == IndicatorState::kFree; });
}

std::uint64_t BranchAndBound::leaf_vertex_count(const Node& node) const {
  const auto n = active_variables(node).size();
  if (n >= 63) return std::numeric_limits<std::uint64_t>::max();
  return std::uint64_t{1} << n;
}

LeafResult BranchAndBound::finalize_leaf(const Node& node) const {
  if (!is_cell_pure(node)) throw InternalError("finalize_leaf called on a node with interior knots");
  const auto active = active_variables(node);
  if (active.size() > static_cast<std::size_t>(kMaxLeafVariables)) {
    throw CapacityError(fmt::format("leaf has {} active variables, limit is {}", active.size(),
                                    kMaxLeafVariables));
  }
  LeafResult leaf;
  std::vector<double> x = node.lower;
  const std::uint64_t count = std::uint64_t{1} << active.size();
  double best = kInfinity;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    for (std::size_t i = 0; i < active.size(); ++i) {
      const std::size_t v = active[i];
      x[v] = (mask >> i) & 1U ? node.upper[v] : node.lower[v];
    }
    const double value = eval_model(model_, x);
    ++leaf.evaluations;
    if (to_min(value) < best) {
      best = to_min(value);
      leaf.value = value;
      leaf.x = x;
    }
  }
  return leaf;
}

std::optional<std::pair<Node, Node>> BranchAndBound::branch(const Node& node,
                                                            const Relaxation& relaxation) const {
  const double bound = relaxation.solved ? relaxation.bound : node.bound;

  // (1) Most fractional free indicator.
  if (relaxation.solved && config_.branching == BranchingRule::kPriority) {
    std::size_t pick = terms_.size();
    double best = kIntegralityTol;
    double best_noise = 0.0;
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      if (node.indicators[k] != IndicatorState::kFree) continue;
      const auto& slots = problem_.slots.terms[terms_[k].basis][terms_[k].pos];
      const double y = relaxation.z[slots.indicator];
      const double frac = std::min(y, 1.0 - y);
      const double noise = tie_noise(k);
      if (frac > best || (pick < terms_.size() && frac == best && noise > best_noise)) {
        best = frac;
        best_noise = noise;
        pick = k;
      }
    }
    if (pick < terms_.size()) return split_at_knot(node, pick, bound);
  }

  // (2) Integer variable with a fractional relaxed value.
  if (relaxation.solved) {
    std::size_t pick = model_.dimension();
    double best = kIntegralityTol;
    for (std::size_t v = 0; v < model_.dimension(); ++v) {
      if (model_.bound(v).kind != VarKind::kInteger) continue;
      const double xv = relaxation.z[problem_.slots.x[v]];
      const double frac = std::abs(xv - std::round(xv));
      if (frac > best) {
        best = frac;
        pick = v;
      }
    }
    if (pick < model_.dimension()) {
      const double xv = relaxation.z[problem_.slots.x[pick]];
      return split(node, pick, std::floor(xv), std::ceil(xv), bound);
    }
  }

  // (3) Spatial split at an interior knot.
  std::vector<double> score(terms_.size(), 0.0);
  if (relaxation.solved) {
    for (std::size_t m = 0; m < model_.num_bases(); ++m) {
      const auto& ids = basis_terms_[m];
      if (ids.size() != 2 || std::isnan(relaxation.products[m])) continue;
      const auto& s0 = problem_.slots.terms[m][0];
      const auto& s1 = problem_.slots.terms[m][1];
      const double exact = relaxation.z[s0.eta] * relaxation.z[s1.eta];
      const double violation =
          std::abs(model_.coeffs()[m]) * std::abs(relaxation.products[m] - exact);
      for (std::size_t k : ids) score[k] += violation;
    }
  }
  std::size_t pick = terms_.size();
  double best_score = -kInfinity;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    if (node.indicators[k] != IndicatorState::kFree) continue;
    const auto& t = terms_[k].term;
    double s = score[k];
    if (config_.branching == BranchingRule::kBalancedKnot) {
      const double width = node.upper[t.var] - node.lower[t.var];
      const double mid = 0.5 * (node.lower[t.var] + node.upper[t.var]);
      s = -std::abs(t.knot - mid) / width + 1e-12 * s;
    }
    s += 1e-15 * tie_noise(k);
    bool take = false;
    if (pick == terms_.size() || s > best_score) {
      take = true;
    } else if (s == best_score) {
      const auto& p = terms_[pick].term;
      take = t.var < p.var || (t.var == p.var && t.knot < p.knot);
    }
    if (take) {
      pick = k;
      best_score = s;
    }
  }
  if (pick < terms_.size()) return split_at_knot(node, pick, bound);
  return std::nullopt;
}

Solution BranchAndBound::solve() {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  Solution sol;
  sol.sense = sense_;
  double incumbent = kInfinity;  // minimization form
  std::vector<double> incumbent_x;
  double closed_floor = kInfinity;

  auto offer = [&](std::vector<double> x) {
    for (std::size_t v = 0; v < x.size(); ++v) {
      const auto& b = model_.bound(v);
      x[v] = std::clamp(x[v], b.lower, b.upper);
      if (b.kind == VarKind::kInteger) x[v] = std::round(x[v]);
    }
    const double value = to_min(eval_model(model_, x));
    ++sol.stats.evaluations;
    if (value < incumbent) {
      incumbent = value;
      incumbent_x = std::move(x);
    }
  };
  auto prune_tol = [&] {
    return std::isfinite(incumbent) ? config_.gap_tolerance * std::max(1.0, std::abs(incumbent))
                                    : 0.0;
  };

  std::vector<OpenNode> open;
  std::uint64_t next_id = 0;
  auto push = [&](Node node, double key) {
    node.bound = sense_ == Sense::kMax ? -key : key;
    open.push_back({std::move(node), key, next_id++});
    std::push_heap(open.begin(), open.end(), heap_after);
  };

  Node root_node = root();
  {
    std::vector<double> center(model_.dimension());
    for (std::size_t v = 0; v < center.size(); ++v) {
      center[v] = 0.5 * (root_node.lower[v] + root_node.upper[v]);
    }
    offer(center);
  }
  push(std::move(root_node), -kInfinity);

  bool limit_hit = false;
  while (!open.empty()) {
    if (sol.stats.nodes >= config_.node_limit || elapsed() > config_.time_limit_seconds) {
      limit_hit = true;
      break;
    }
    std::pop_heap(open.begin(), open.end(), heap_after);
    OpenNode current = std::move(open.back());
    open.pop_back();
    Node& node = current.node;
    double key = current.key;

    if (key >= incumbent - prune_tol()) {
      closed_floor = std::min(closed_floor, key);
      continue;
    }
    ++sol.stats.nodes;

    if (is_cell_pure(node)) {
      if (active_variables(node).size() <= static_cast<std::size_t>(kMaxLeafVariables)) {
        LeafResult leaf = finalize_leaf(node);
        sol.stats.evaluations += leaf.evaluations;
        offer(std::move(leaf.x));
        closed_floor = std::min(closed_floor, to_min(leaf.value));
        continue;
      }
      auto [a, b] = bisect(node, node.bound);
      push(std::move(a), key);
      push(std::move(b), key);
      continue;
    }

    const Relaxation rel = relax(node);
    sol.stats.lp_iterations += rel.iterations;
    if (rel.solved) {
      key = std::max(key, to_min(rel.bound));
      std::vector<double> x(model_.dimension());
      for (std::size_t v = 0; v < x.size(); ++v) x[v] = rel.z[problem_.slots.x[v]];
      offer(std::move(x));
      if (key >= incumbent - prune_tol()) {
        closed_floor = std::min(closed_floor, key);
        continue;
      }
    }
    auto children = branch(node, rel);
    if (!children) throw InternalError("non-leaf node offered no branching candidate");
    push(std::move(children->first), key);
    push(std::move(children->second), key);
  }

  double bound = std::min(closed_floor, incumbent);
  for (const auto& o : open) bound = std::min(bound, o.key);
  sol.x = incumbent_x;
  sol.value = sense_ == Sense::kMax ? -incumbent : incumbent;
  sol.bound = sense_ == Sense::kMax ? -bound : bound;
  sol.gap = relative_gap(sol.value, sol.bound);
  sol.status = (!limit_hit && sol.gap <= config_.gap_tolerance) ? SolveStatus::kOptimal
                                                                : SolveStatus::kIncomplete;
  sol.stats.wall_seconds = elapsed();
  return sol;
}

Solution solve(const TitlMarsModel& model, Sense sense, const SolverConfig& config) {
  BranchAndBound bb(model, sense, config);
  return bb.solve();
}

}  // namespace titlmars
