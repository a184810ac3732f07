#include "titlmars/lp.hpp"

#include <algorithm>
#include <cmath>

#include "titlmars/errors.hpp"

namespace titlmars::lp {
namespace {

enum class ColState { kBasic, kAtLower, kAtUpper, kFree };

class Tableau {
 public:
  Tableau(const Problem& problem, const Options& options)
      : opt_(options), n_(problem.num_cols()), m_(problem.rows.size()) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (problem.lower[j] > problem.upper[j]) {
        throw InputError("lp column has lower bound above upper bound");
      }
    }
    lower_ = problem.lower;
    upper_ = problem.upper;
    lower_.resize(n_ + m_);
    upper_.resize(n_ + m_);
    for (std::size_t i = 0; i < m_; ++i) {
      switch (problem.rows[i].relation) {
        case Relation::kGreaterEqual:
          lower_[n_ + i] = -kInf;
          upper_[n_ + i] = 0.0;
          break;
        case Relation::kLessEqual:
          lower_[n_ + i] = 0.0;
          upper_[n_ + i] = kInf;
          break;
        case Relation::kEqual:
          lower_[n_ + i] = 0.0;
          upper_[n_ + i] = 0.0;
          break;
      }
    }

    value_.assign(n_ + m_, 0.0);
    state_.assign(n_ + m_, ColState::kAtLower);
    for (std::size_t j = 0; j < n_; ++j) {
      if (std::isfinite(lower_[j])) {
        value_[j] = lower_[j];
        state_[j] = ColState::kAtLower;
      } else if (std::isfinite(upper_[j])) {
        value_[j] = upper_[j];
        state_[j] = ColState::kAtUpper;
      } else {
        value_[j] = 0.0;
        state_[j] = ColState::kFree;
      }
    }

    // Decide per row whether its slack can start basic or needs an artificial.
    std::vector<double> residual(m_, 0.0);
    std::vector<double> art_sign(m_, 0.0);
    std::size_t num_art = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& row = problem.rows[i];
      double activity = 0.0;
      for (const auto& [j, a] : row.coeffs) activity += a * value_[j];
      const double slack = row.rhs - activity;
      const std::size_t s = n_ + i;
      if (slack >= lower_[s] - opt_.feasibility_tol && slack <= upper_[s] + opt_.feasibility_tol) {
        residual[i] = slack;
      } else {
        const double at = slack < lower_[s] ? lower_[s] : upper_[s];
        value_[s] = at;
        state_[s] = at == lower_[s] ? ColState::kAtLower : ColState::kAtUpper;
        residual[i] = slack - at;
        art_sign[i] = residual[i] > 0.0 ? 1.0 : -1.0;
        ++num_art;
      }
    }

    cols_ = n_ + m_ + num_art;
    lower_.resize(cols_, 0.0);
    upper_.resize(cols_, kInf);
    value_.resize(cols_, 0.0);
    state_.resize(cols_, ColState::kAtLower);
    is_artificial_.assign(cols_, false);
    tab_.assign(m_ * cols_, 0.0);
    beta_.assign(m_, 0.0);
    basis_.assign(m_, 0);

    std::size_t next_art = n_ + m_;
    for (std::size_t i = 0; i < m_; ++i) {
      double* row = &tab_[i * cols_];
      for (const auto& [j, a] : problem.rows[i].coeffs) row[j] += a;
      row[n_ + i] = 1.0;
      if (art_sign[i] == 0.0) {
        basis_[i] = n_ + i;
        state_[n_ + i] = ColState::kBasic;
        beta_[i] = residual[i];
      } else {
        const std::size_t a = next_art++;
        is_artificial_[a] = true;
        row[a] = art_sign[i];
        // Basic column has coefficient art_sign; normalize the row to make it 1.
        if (art_sign[i] < 0.0) {
          for (std::size_t j = 0; j < cols_; ++j) row[j] = -row[j];
        }
        basis_[i] = a;
        state_[a] = ColState::kBasic;
        beta_[i] = std::abs(residual[i]);
      }
    }
    num_art_ = num_art;
    max_iter_ = opt_.max_iterations > 0
                    ? opt_.max_iterations
                    : static_cast<std::int64_t>(100 * (m_ + n_) + 1000);
    bland_threshold_ = static_cast<std::int64_t>(10 * (m_ + n_)) + 10;
  }

  Result run(const Problem& problem) {
    Result result;
    if (num_art_ > 0) {
      std::vector<double> phase1(cols_, 0.0);
      for (std::size_t j = 0; j < cols_; ++j) {
        if (is_artificial_[j]) phase1[j] = 1.0;
      }
      const Status s = iterate(phase1);
      if (s == Status::kIterationLimit) return finish(problem, s);
      double infeasibility = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        if (is_artificial_[basis_[i]]) infeasibility += std::max(beta_[i], 0.0);
      }
      if (infeasibility > opt_.feasibility_tol * std::max<std::size_t>(1, num_art_)) {
        return finish(problem, Status::kInfeasible);
      }
      for (std::size_t j = 0; j < cols_; ++j) {
        if (!is_artificial_[j]) continue;
        upper_[j] = 0.0;
        if (state_[j] != ColState::kBasic) {
          value_[j] = 0.0;
          state_[j] = ColState::kAtLower;
        }
      }
      for (std::size_t i = 0; i < m_; ++i) {
        if (is_artificial_[basis_[i]]) beta_[i] = 0.0;
      }
      drive_out_artificials();
    }
    std::vector<double> phase2(cols_, 0.0);
    std::copy(problem.cost.begin(), problem.cost.end(), phase2.begin());
    const Status s = iterate(phase2);
    return finish(problem, s);
  }

 private:
  double& at(std::size_t i, std::size_t j) { return tab_[i * cols_ + j]; }

  void compute_reduced_costs(const std::vector<double>& cost) {
    reduced_ = cost;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &tab_[i * cols_];
      for (std::size_t j = 0; j < cols_; ++j) reduced_[j] -= cb * row[j];
    }
    for (std::size_t i = 0; i < m_; ++i) reduced_[basis_[i]] = 0.0;
  }

  bool eligible(std::size_t j, double d) const {
    switch (state_[j]) {
      case ColState::kBasic: return false;
      case ColState::kAtLower: return d < -opt_.optimality_tol && upper_[j] > lower_[j];
      case ColState::kAtUpper: return d > opt_.optimality_tol && upper_[j] > lower_[j];
      case ColState::kFree: return std::abs(d) > opt_.optimality_tol;
    }
    return false;
  }

  void pivot(std::size_t r, std::size_t q) {
    double* prow = &tab_[r * cols_];
    const double inv = 1.0 / prow[q];
    for (std::size_t j = 0; j < cols_; ++j) prow[j] *= inv;
    prow[q] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &tab_[i * cols_];
      const double f = row[q];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) row[j] -= f * prow[j];
      row[q] = 0.0;
    }
    const double dq = reduced_[q];
    if (dq != 0.0) {
      for (std::size_t j = 0; j < cols_; ++j) reduced_[j] -= dq * prow[j];
      reduced_[q] = 0.0;
    }
  }

  Status iterate(const std::vector<double>& cost) {
    compute_reduced_costs(cost);
    std::int64_t degenerate_run = 0;
    while (true) {
      if (iterations_ >= max_iter_) return Status::kIterationLimit;

      // Pricing.
      std::size_t q = cols_;
      double best = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) {
        const double d = reduced_[j];
        if (!eligible(j, d)) continue;
        if (bland_) {
          q = j;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          q = j;
        }
      }
      if (q == cols_) return Status::kOptimal;
      ++iterations_;

      const double dir = reduced_[q] < 0.0 ? 1.0 : -1.0;

      // Ratio test.
      double theta = kInf;
      std::size_t leave = m_;
      double leave_alpha = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double alpha = at(i, q);
        if (std::abs(alpha) <= opt_.pivot_tol) continue;
        const double rate = -dir * alpha;  // d beta_i / d theta
        const std::size_t b = basis_[i];
        double limit = kInf;
        if (rate < 0.0 && std::isfinite(lower_[b])) {
          limit = (beta_[i] - lower_[b]) / -rate;
        } else if (rate > 0.0 && std::isfinite(upper_[b])) {
          limit = (upper_[b] - beta_[i]) / rate;
        }
        if (!std::isfinite(limit)) continue;
        limit = std::max(limit, 0.0);
        bool take = false;
        if (limit < theta - 1e-12) {
          take = true;
        } else if (limit <= theta + 1e-12 && leave < m_) {
          take = bland_ ? basis_[i] < basis_[leave] : std::abs(alpha) > std::abs(leave_alpha);
        }
        if (take) {
          theta = limit;
          leave = i;
          leave_alpha = alpha;
        }
      }

      const double span = upper_[q] - lower_[q];
      const bool flip = std::isfinite(span) && span <= theta;
      if (flip) theta = span;
      if (!std::isfinite(theta)) return Status::kUnbounded;

      if (theta <= 1e-12) {
        if (++degenerate_run > bland_threshold_) bland_ = true;
      } else {
        degenerate_run = 0;
      }

      for (std::size_t i = 0; i < m_; ++i) {
        const double alpha = at(i, q);
        if (alpha != 0.0) beta_[i] -= dir * alpha * theta;
      }
      const double entering_value = value_[q] + dir * theta;

      if (flip) {
        if (dir > 0.0) {
          value_[q] = upper_[q];
          state_[q] = ColState::kAtUpper;
        } else {
          value_[q] = lower_[q];
          state_[q] = ColState::kAtLower;
        }
        continue;
      }

      const std::size_t out = basis_[leave];
      const double rate = -dir * leave_alpha;
      if (rate < 0.0) {
        value_[out] = lower_[out];
        state_[out] = ColState::kAtLower;
      } else {
        value_[out] = upper_[out];
        state_[out] = ColState::kAtUpper;
      }
      basis_[leave] = q;
      state_[q] = ColState::kBasic;
      beta_[leave] = entering_value;
      pivot(leave, q);
    }
  }

  // Basic artificials sitting at zero are swapped for any usable column so
  // phase 2 cannot move them.
  void drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (!is_artificial_[basis_[r]]) continue;
      std::size_t best = cols_;
      double best_abs = 1e-7;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (state_[j] == ColState::kBasic) continue;
        const double a = std::abs(at(r, j));
        if (a > best_abs) {
          best_abs = a;
          best = j;
        }
      }
      if (best == cols_) continue;
      const std::size_t out = basis_[r];
      value_[out] = 0.0;
      state_[out] = ColState::kAtLower;
      basis_[r] = best;
      beta_[r] = value_[best];
      state_[best] = ColState::kBasic;
      reduced_.assign(cols_, 0.0);
      pivot(r, best);
    }
  }

  Result finish(const Problem& problem, Status status) {
    Result result;
    result.status = status;
    result.iterations = iterations_;
    result.used_bland = bland_;
    std::vector<double> full = value_;
    for (std::size_t i = 0; i < m_; ++i) full[basis_[i]] = beta_[i];
    result.x.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(n_));
    for (std::size_t j = 0; j < n_; ++j) {
      result.x[j] = std::clamp(result.x[j], lower_[j], upper_[j]);
    }
    result.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) result.objective += problem.cost[j] * result.x[j];
    return result;
  }

  Options opt_;
  std::size_t n_;
  std::size_t m_;
  std::size_t cols_ = 0;
  std::size_t num_art_ = 0;
  std::vector<double> lower_, upper_, value_;
  std::vector<ColState> state_;
  std::vector<bool> is_artificial_;
  std::vector<double> tab_;
  std::vector<double> beta_;
  std::vector<std::size_t> basis_;
  std::vector<double> reduced_;
  std::int64_t iterations_ = 0;
  std::int64_t max_iter_ = 0;
  std::int64_t bland_threshold_ = 0;
  bool bland_ = false;
};

}  // namespace

Result solve(const Problem& problem, const Options& options) {
  if (problem.lower.size() != problem.num_cols() || problem.upper.size() != problem.num_cols()) {
    throw StructuralError("lp bound vectors do not match the column count");
  }
  for (const auto& row : problem.rows) {
    for (const auto& [j, a] : row.coeffs) {
      if (j >= problem.num_cols()) throw StructuralError("lp row references a missing column");
    }
  }
  Tableau tableau(problem, options);
  return tableau.run(problem);
}

}  // namespace titlmars::lp
