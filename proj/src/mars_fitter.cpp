#include "titlmars/mars_fitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "titlmars/errors.hpp"

namespace titlmars {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kRidge = 1e-8;

std::vector<VariableBound> model_bounds(const Dataset& data) {
  std::vector<VariableBound> bounds;
  for (std::size_t v = 0; v < data.lower.size(); ++v) {
    double lo = data.lower[v];
    double hi = data.upper[v];
    // A constant column still needs a non-degenerate box.
    if (!(lo < hi)) {
      const double pad = std::max(0.5, 1e-9 * std::abs(lo));
      lo -= pad;
      hi += pad;
    }
    bounds.push_back({lo, hi, VarKind::kReal});
  }
  return bounds;
}

VectorXd basis_column(const BasisFunction& basis, const MatrixXd& x) {
  VectorXd col = VectorXd::Ones(x.rows());
  for (const auto& t : basis.terms) {
    col.array() *= (t.sign * (x.col(static_cast<Index>(t.var)).array() - t.knot)).max(0.0);
  }
  return col;
}

// Least squares with column-pivoting QR; returns (intercept, coefficients).
std::pair<double, std::vector<double>> least_squares(const std::vector<BasisFunction>& bases,
                                                     const Dataset& data) {
  const MatrixXd design = design_matrix(bases, data.x);
  Eigen::ColPivHouseholderQR<MatrixXd> qr(design);
  VectorXd beta = qr.solve(data.y);
  if (!beta.allFinite()) beta = VectorXd::Zero(design.cols());
  std::vector<double> coeffs(bases.size());
  for (std::size_t m = 0; m < bases.size(); ++m) coeffs[m] = beta(static_cast<Index>(m + 1));
  return {beta(0), std::move(coeffs)};
}

// Adds column b to the orthonormal set q (two Gram-Schmidt sweeps).
// Returns false if b is numerically inside span(q).
bool orthonormal_append(MatrixXd& q, Index& used, VectorXd b) {
  const double norm0 = b.norm();
  if (norm0 == 0.0) return false;
  for (int sweep = 0; sweep < 2; ++sweep) {
    if (used > 0) {
      const VectorXd proj = q.leftCols(used).transpose() * b;
      b -= q.leftCols(used) * proj;
    }
  }
  const double norm = b.norm();
  if (norm <= 1e-10 * norm0) return false;
  if (used == q.cols()) q.conservativeResize(Eigen::NoChange, q.cols() + 8);
  q.col(used++) = b / norm;
  return true;
}

struct Candidate {
  double gain = 0.0;
  int parent = -1;  // -1 is the intercept, otherwise an index into bases
  std::size_t var = 0;
  double knot = 0.0;
  bool use_plus = false;
  bool use_minus = false;
};

// Subset least squares on centred Gram data, used by the backward pass.
class GramSolver {
 public:
  GramSolver(const std::vector<BasisFunction>& bases, const Dataset& data) {
    const Index n = data.rows();
    const Index p = static_cast<Index>(bases.size());
    MatrixXd cols(n, p);
    for (Index j = 0; j < p; ++j) cols.col(j) = basis_column(bases[static_cast<std::size_t>(j)], data.x);
    const VectorXd means = cols.colwise().mean();
    cols.rowwise() -= means.transpose();
    const VectorXd yc = data.y.array() - data.y.mean();
    gram_ = cols.transpose() * cols;
    cross_ = cols.transpose() * yc;
    sst_ = yc.squaredNorm();
  }

  double sst() const { return sst_; }

  double ssr(const std::vector<std::size_t>& subset) const {
    if (subset.empty()) return sst_;
    const Index k = static_cast<Index>(subset.size());
    MatrixXd g(k, k);
    VectorXd c(k);
    for (Index a = 0; a < k; ++a) {
      c(a) = cross_(static_cast<Index>(subset[static_cast<std::size_t>(a)]));
      for (Index b = 0; b < k; ++b) {
        g(a, b) = gram_(static_cast<Index>(subset[static_cast<std::size_t>(a)]),
                        static_cast<Index>(subset[static_cast<std::size_t>(b)]));
      }
    }
    // Unit-diagonal scaling, then Cholesky with a ridge fallback.
    VectorXd scale(k);
    for (Index a = 0; a < k; ++a) scale(a) = g(a, a) > 0.0 ? 1.0 / std::sqrt(g(a, a)) : 0.0;
    const MatrixXd gs = scale.asDiagonal() * g * scale.asDiagonal();
    const VectorXd cs = scale.asDiagonal() * c;
    Eigen::LLT<MatrixXd> llt(gs);
    VectorXd sol;
    if (llt.info() == Eigen::Success) {
      sol = llt.solve(cs);
    }
    if (llt.info() != Eigen::Success || !sol.allFinite()) {
      Eigen::LLT<MatrixXd> ridge(gs + kRidge * MatrixXd::Identity(k, k));
      sol = ridge.solve(cs);
    }
    const double explained = 2.0 * sol.dot(cs) - sol.dot(gs * sol);
    return std::max(sst_ - explained, 0.0);
  }

 private:
  MatrixXd gram_;
  VectorXd cross_;
  double sst_ = 0.0;
};

std::size_t count_knots(const std::vector<BasisFunction>& bases,
                        const std::vector<std::size_t>& subset) {
  std::set<std::pair<std::size_t, double>> knots;
  for (std::size_t m : subset) {
    for (const auto& t : bases[m].terms) knots.emplace(t.var, t.knot);
  }
  return knots.size();
}

}  // namespace

double gcv(double ssr, std::size_t n, double effective_params) {
  const double nn = static_cast<double>(n);
  if (effective_params >= nn) return std::numeric_limits<double>::infinity();
  const double denom = 1.0 - effective_params / nn;
  return (ssr / nn) / (denom * denom);
}

double effective_parameters(std::size_t num_bases, std::size_t num_knots, double penalty) {
  return 1.0 + static_cast<double>(num_bases) + penalty * static_cast<double>(num_knots);
}

std::size_t count_knots(const TitlMarsModel& model) {
  const std::vector<BasisFunction> bases(model.bases().begin(), model.bases().end());
  std::vector<std::size_t> all(bases.size());
  std::iota(all.begin(), all.end(), 0);
  return count_knots(bases, all);
}

std::vector<double> knot_candidates(const Eigen::VectorXd& column, int max_knots) {
  std::vector<double> values(column.data(), column.data() + column.size());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (max_knots <= 0 || values.size() <= static_cast<std::size_t>(max_knots)) return values;
  std::vector<double> out;
  const double step = static_cast<double>(values.size() - 1) / static_cast<double>(max_knots - 1);
  for (int k = 0; k < max_knots; ++k) {
    out.push_back(values[static_cast<std::size_t>(std::lround(k * step))]);
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Eigen::MatrixXd design_matrix(const std::vector<BasisFunction>& bases, const Eigen::MatrixXd& x) {
  MatrixXd design(x.rows(), static_cast<Index>(bases.size()) + 1);
  design.col(0).setOnes();
  for (std::size_t m = 0; m < bases.size(); ++m) {
    design.col(static_cast<Index>(m) + 1) = basis_column(bases[m], x);
  }
  return design;
}

double sum_squared_residuals(const TitlMarsModel& model, const Dataset& data) {
  double ssr = 0.0;
  std::vector<double> point(static_cast<std::size_t>(data.dimension()));
  for (Index i = 0; i < data.rows(); ++i) {
    for (Index v = 0; v < data.dimension(); ++v) point[static_cast<std::size_t>(v)] = data.x(i, v);
    const double r = data.y(i) - eval_model(model, point);
    ssr += r * r;
  }
  return ssr;
}

double r_squared(const TitlMarsModel& model, const Dataset& data) {
  const double sst = (data.y.array() - data.y.mean()).square().sum();
  if (sst == 0.0) return 1.0;
  return 1.0 - sum_squared_residuals(model, data) / sst;
}

ForwardResult forward_pass(const Dataset& data, const FitConfig& config) {
  const Index n = data.rows();
  const std::size_t dim = static_cast<std::size_t>(data.dimension());
  if (n < 3) throw InputError(fmt::format("fit needs at least 3 rows, got {}", n));
  if (config.max_basis < 1) throw InputError("max_basis must be at least 1");

  const auto bounds = model_bounds(data);
  const double ymean = data.y.mean();
  const double sst = (data.y.array() - ymean).square().sum();

  std::vector<BasisFunction> bases;
  ForwardResult result{TitlMarsModel(ymean, {}, {}, bounds), {sst}};
  if (sst == 0.0) return result;

  // Per variable: centred values (hinges are shift invariant), sort order, knots.
  std::vector<VectorXd> xc(dim);
  std::vector<double> centre(dim);
  std::vector<std::vector<Index>> order(dim);
  std::vector<std::vector<double>> knots(dim);
  for (std::size_t v = 0; v < dim; ++v) {
    const VectorXd col = data.x.col(static_cast<Index>(v));
    centre[v] = 0.5 * (data.lower[v] + data.upper[v]);
    xc[v] = col.array() - centre[v];
    order[v].resize(static_cast<std::size_t>(n));
    std::iota(order[v].begin(), order[v].end(), Index{0});
    std::stable_sort(order[v].begin(), order[v].end(),
                     [&](Index a, Index b) { return col(a) < col(b); });
    if (data.lower[v] < data.upper[v]) knots[v] = knot_candidates(col, config.max_knots_per_variable);
  }

  MatrixXd q(n, 8);
  Index used = 0;
  orthonormal_append(q, used, VectorXd::Ones(n));
  VectorXd resid = data.y - q.leftCols(used) * (q.leftCols(used).transpose() * data.y);
  std::vector<VectorXd> columns;  // basis columns, aligned with bases

  while (static_cast<int>(bases.size()) < config.max_basis && used < n - 1) {
    const bool single_slot = static_cast<int>(bases.size()) + 1 == config.max_basis;
    Candidate best;
    const auto qk = q.leftCols(used);

    for (int parent = -1; parent < static_cast<int>(bases.size()); ++parent) {
      if (parent >= 0 && bases[static_cast<std::size_t>(parent)].order() != 1) continue;
      const VectorXd pc = parent < 0 ? VectorXd::Ones(n) : columns[static_cast<std::size_t>(parent)];
      if (pc.squaredNorm() == 0.0) continue;
      for (std::size_t v = 0; v < dim; ++v) {
        if (knots[v].empty()) continue;
        if (parent >= 0 && bases[static_cast<std::size_t>(parent)].terms[0].var == v) continue;
        const VectorXd& x = xc[v];
        const VectorXd w0 = pc;
        const VectorXd w1 = pc.cwiseProduct(x);
        const VectorXd tq0 = qk.transpose() * w0;
        const VectorXd tq1 = qk.transpose() * w1;
        const double tr0 = resid.dot(w0), tr1 = resid.dot(w1);
        const double tp0 = pc.squaredNorm();
        const double tp1 = pc.cwiseProduct(w1).sum();
        const double tp2 = w1.squaredNorm();

        VectorXd pq0 = VectorXd::Zero(used), pq1 = VectorXd::Zero(used);
        double pr0 = 0, pr1 = 0, pp0 = 0, pp1 = 0, pp2 = 0;
        std::size_t next = 0;
        const auto& ord = order[v];
        for (double knot_raw : knots[v]) {
          const double t = knot_raw - centre[v];
          while (next < ord.size() && x(ord[next]) < t) {
            const Index i = ord[next++];
            const double a0 = pc(i), a1 = pc(i) * x(i);
            if (a0 != 0.0) {
              pq0 += a0 * qk.row(i).transpose();
              pq1 += a1 * qk.row(i).transpose();
              pr0 += resid(i) * a0;
              pr1 += resid(i) * a1;
              pp0 += a0 * a0;
              pp1 += a0 * a1;
              pp2 += a1 * a1;
            }
          }
          const VectorXd qb1 = (tq1 - pq1) - t * (tq0 - pq0);
          const VectorXd qb2 = t * pq0 - pq1;
          const double nb1 = std::max((tp2 - pp2) - 2 * t * (tp1 - pp1) + t * t * (tp0 - pp0), 0.0);
          const double nb2 = std::max(t * t * pp0 - 2 * t * pp1 + pp2, 0.0);
          const double g1 = (tr1 - pr1) - t * (tr0 - pr0);
          const double g2 = t * pr0 - pr1;
          const double h11 = nb1 - qb1.squaredNorm();
          const double h22 = nb2 - qb2.squaredNorm();
          const double h12 = -qb1.dot(qb2);
          const bool ok1 = nb1 > 0.0 && h11 > 1e-9 * nb1;
          const bool ok2 = nb2 > 0.0 && h22 > 1e-9 * nb2;

          double gain = 0.0;
          bool use1 = false, use2 = false;
          const double gain1 = ok1 ? g1 * g1 / h11 : 0.0;
          const double gain2 = ok2 ? g2 * g2 / h22 : 0.0;
          const double det = h11 * h22 - h12 * h12;
          if (ok1 && ok2 && !single_slot && det > 1e-9 * h11 * h22) {
            gain = (h22 * g1 * g1 - 2 * h12 * g1 * g2 + h11 * g2 * g2) / det;
            use1 = use2 = true;
          } else if (gain1 >= gain2 && ok1) {
            gain = gain1;
            use1 = true;
          } else if (ok2) {
            gain = gain2;
            use2 = true;
          }
          if (gain > best.gain) {
            best = {gain, parent, v, knot_raw, use1, use2};
          }
        }
      }
    }

    if (best.gain <= config.forward_threshold * sst) break;

    const BasisFunction parent_basis =
        best.parent < 0 ? BasisFunction{} : bases[static_cast<std::size_t>(best.parent)];
    bool added = false;
    for (int sign : {1, -1}) {
      if ((sign > 0 && !best.use_plus) || (sign < 0 && !best.use_minus)) continue;
      BasisFunction basis = parent_basis;
      basis.terms.push_back({sign, best.var, best.knot});
      VectorXd col = basis_column(basis, data.x);
      if (!orthonormal_append(q, used, col)) continue;
      resid -= q.col(used - 1) * q.col(used - 1).dot(resid);
      bases.push_back(std::move(basis));
      columns.push_back(std::move(col));
      added = true;
    }
    if (!added) break;
    result.ssr_history.push_back(resid.squaredNorm());
  }

  auto [intercept, coeffs] = least_squares(bases, data);
  result.model = TitlMarsModel(intercept, std::move(coeffs), std::move(bases), bounds);
  return result;
}

TitlMarsModel backward_pass(const TitlMarsModel& candidate, const Dataset& data,
                            const FitConfig& config) {
  const std::size_t n = static_cast<std::size_t>(data.rows());
  if (n < 3) throw InputError(fmt::format("fit needs at least 3 rows, got {}", n));
  if (candidate.dimension() != static_cast<std::size_t>(data.dimension())) {
    throw StructuralError("candidate model dimension does not match the dataset");
  }
  const std::vector<BasisFunction> bases(candidate.bases().begin(), candidate.bases().end());
  const std::vector<VariableBound> bounds(candidate.bounds().begin(), candidate.bounds().end());
  if (bases.empty()) {
    return TitlMarsModel(data.y.mean(), {}, {}, bounds);
  }

  const GramSolver solver(bases, data);
  auto score = [&](const std::vector<std::size_t>& subset, double ssr) {
    return gcv(ssr, n,
               effective_parameters(subset.size(), count_knots(bases, subset), config.gcv_penalty));
  };

  std::vector<std::size_t> current(bases.size());
  std::iota(current.begin(), current.end(), 0);
  std::vector<std::size_t> best_subset = current;
  double best_gcv = score(current, solver.ssr(current));

  while (!current.empty()) {
    std::size_t drop = 0;
    double drop_ssr = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < current.size(); ++j) {
      std::vector<std::size_t> trial = current;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(j));
      const double s = solver.ssr(trial);
      if (s < drop_ssr) {
        drop_ssr = s;
        drop = j;
      }
    }
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(drop));
    const double g = score(current, drop_ssr);
    if (g <= best_gcv) {
      best_gcv = g;
      best_subset = current;
    }
  }

  std::vector<BasisFunction> kept;
  for (std::size_t m : best_subset) kept.push_back(bases[m]);
  auto [intercept, coeffs] = least_squares(kept, data);
  return TitlMarsModel(intercept, std::move(coeffs), std::move(kept), bounds);
}

TitlMarsModel fit(const Dataset& data, const FitConfig& config) {
  ForwardResult forward = forward_pass(data, config);
  return backward_pass(forward.model, data, config);
}

}  // namespace titlmars
