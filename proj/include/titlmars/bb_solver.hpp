#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "titlmars/miqp.hpp"
#include "titlmars/model.hpp"
#include "titlmars/solution.hpp"

namespace titlmars {

enum class BranchingRule {
  // Most fractional indicator, then fractional integer x, then the interior
  // knot with the largest McCormick violation.
  kPriority,
  // Skip indicator fractionality; split at the interior knot closest to the
  // middle of its interval (violation breaks ties).
  kBalancedKnot,
};

struct SolverConfig {
  double gap_tolerance = 1e-6;
  std::int64_t node_limit = 10'000'000;
  double time_limit_seconds = 600.0;
  BranchingRule branching = BranchingRule::kPriority;
  // 0 keeps every tie-break deterministic by index; other values perturb
  // equal-score branching candidates.
  std::uint64_t seed = 0;
};

enum class IndicatorState { kFree, kOff, kOn };

// A box of the search tree. Indicator states and eta bounds are derived from
// the box: a term is fixed once its knot is not strictly inside the interval.
struct Node {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<IndicatorState> indicators;  // flattened over (basis, term)
  std::vector<double> eta_lower;
  std::vector<double> eta_upper;
  double bound = 0.0;  // best known relaxation bound, in the model's sense
  int depth = 0;
};

struct Relaxation {
  bool solved = false;  // false when the LP failed; bound is then meaningless
  double bound = 0.0;   // in the model's sense
  std::vector<double> z;         // MIQP layout: (1, x, eta/y pairs)
  std::vector<double> products;  // per basis: relaxed eta1*eta2, NaN if unused
  std::int64_t iterations = 0;
};

struct LeafResult {
  std::vector<double> x;
  double value = 0.0;
  std::int64_t evaluations = 0;
};

// Global optimizer for a model over its box.
//
// Each node LP relaxes the big-M MIQP with indicators in [0, 1] and big-M
// constants recomputed from the node box, and replaces every two-way product
// by a variable bounded with the four McCormick inequalities. Nodes whose box
// holds no interior knot are solved exactly by vertex enumeration.
class BranchAndBound {
 public:
  BranchAndBound(const TitlMarsModel& model, Sense sense, SolverConfig config = {});

  const MiqpProblem& problem() const { return problem_; }
  const TitlMarsModel& model() const { return model_; }

  Node root() const;
  // Node over the given box; integer coordinates are rounded inward.
  // Returns nullopt if the box is empty.
  std::optional<Node> make_node(std::vector<double> lower, std::vector<double> upper,
                                double bound, int depth) const;

  Relaxation relax(const Node& node) const;

  // nullopt when nothing is left to branch on (the node is a leaf).
  std::optional<std::pair<Node, Node>> branch(const Node& node,
                                              const Relaxation& relaxation) const;

  // True when no knot lies strictly inside any interval of the node.
  bool is_cell_pure(const Node& node) const;
  // Number of vertices finalize_leaf would enumerate (2^active), saturating.
  std::uint64_t leaf_vertex_count(const Node& node) const;
  // Exact optimum over a cell-pure node by enumerating box vertices.
  LeafResult finalize_leaf(const Node& node) const;

  Solution solve();

  static constexpr int kMaxLeafVariables = 25;

 private:
  struct TermRef {
    std::size_t basis;
    std::size_t pos;
    TruncatedTerm term;
  };

  double to_min(double v) const { return sense_ == Sense::kMax ? -v : v; }
  std::pair<Node, Node> split(const Node& node, std::size_t var, double lo_child_upper,
                              double hi_child_lower, double bound) const;
  std::pair<Node, Node> split_at_knot(const Node& node, std::size_t term_index,
                                      double bound) const;
  std::pair<Node, Node> bisect(const Node& node, double bound) const;
  std::vector<std::size_t> active_variables(const Node& node) const;
  double tie_noise(std::size_t index) const;

  TitlMarsModel model_;
  Sense sense_;
  SolverConfig config_;
  MiqpProblem problem_;
  std::vector<TermRef> terms_;
  std::vector<std::vector<std::size_t>> basis_terms_;  // basis -> flattened term ids
};

Solution solve(const TitlMarsModel& model, Sense sense, const SolverConfig& config = {});

}  // namespace titlmars
