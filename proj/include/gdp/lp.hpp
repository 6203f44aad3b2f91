#pragma once

// Dense bounded-variable simplex.
//
// Every row i of a LinearProgram is turned into  a_i x + s_i = b_i  with a
// slack whose bounds encode the relation ([0,inf) for <=, (-inf,0] for >=,
// [0,0] for =). The initial basis is all slacks. Phase 1 runs the dual
// simplex with zero costs (every basis is dual feasible then), phase 2 runs
// the primal simplex on the real costs. The tableau stays alive so branch
// and bound can change bounds and re-optimize with the dual simplex.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gdp::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { minimize, maximize };
enum class Relation { less_equal, equal, greater_equal };
enum class Status { optimal, infeasible, unbounded, iteration_limit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

struct Term {
  std::size_t var;
  double coef;
};

struct Constraint {
  std::vector<Term> terms;
  Relation relation = Relation::less_equal;
  double rhs = 0.0;
  std::string name;
};

struct LinearProgram {
  Sense sense = Sense::minimize;
  std::vector<double> objective;
  double objective_offset = 0.0;
  std::vector<Constraint> constraints;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::string> names;

  std::size_t num_variables() const { return objective.size(); }
  std::size_t num_constraints() const { return constraints.size(); }

  std::size_t add_variable(double cost, double lo = 0.0, double hi = kInf, std::string name = {}) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(hi);
    names.push_back(std::move(name));
    return objective.size() - 1;
  }

  std::size_t add_constraint(std::vector<Term> terms, Relation rel, double rhs, std::string name = {}) {
    constraints.push_back(Constraint{std::move(terms), rel, rhs, std::move(name)});
    return constraints.size() - 1;
  }

  std::string variable_name(std::size_t j) const {
    if (j < names.size() && !names[j].empty()) return names[j];
    return "x" + std::to_string(j);
  }

  void validate() const {
    const std::size_t n = objective.size();
    if (lower.size() != n || upper.size() != n)
      throw std::invalid_argument("LinearProgram: bound vectors do not match objective length");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(objective[j])) throw std::invalid_argument("LinearProgram: non-finite objective coefficient");
      if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] == kInf || upper[j] == -kInf)
        throw std::invalid_argument("LinearProgram: invalid bound on " + variable_name(j));
    }
    for (const auto& c : constraints) {
      if (!std::isfinite(c.rhs)) throw std::invalid_argument("LinearProgram: non-finite rhs");
      for (const auto& t : c.terms) {
        if (t.var >= n) throw std::invalid_argument("LinearProgram: constraint references unknown variable");
        if (!std::isfinite(t.coef)) throw std::invalid_argument("LinearProgram: non-finite coefficient");
      }
    }
  }

  double evaluate(const std::vector<double>& x) const {
    double v = objective_offset;
    for (std::size_t j = 0; j < objective.size(); ++j) v += objective[j] * x[j];
    return v;
  }

  /// Largest violation of any row or bound at x.
  double max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < objective.size(); ++j) {
      worst = std::max(worst, lower[j] - x[j]);
      worst = std::max(worst, x[j] - upper[j]);
    }
    for (const auto& c : constraints) {
      double lhs = 0.0;
      for (const auto& t : c.terms) lhs += t.coef * x[t.var];
      switch (c.relation) {
        case Relation::less_equal: worst = std::max(worst, lhs - c.rhs); break;
        case Relation::greater_equal: worst = std::max(worst, c.rhs - lhs); break;
        case Relation::equal: worst = std::max(worst, std::abs(lhs - c.rhs)); break;
      }
    }
    return worst;
  }
};

struct Solution {
  Status status = Status::infeasible;
  std::vector<double> values;
  double objective = 0.0;
  std::vector<double> duals;          // LP only; d objective / d rhs in the caller's sense
  std::vector<double> reduced_costs;  // LP only; caller's sense
  std::size_t iterations = 0;
  std::size_t nodes = 0;              // MIP only
  double best_bound = 0.0;            // MIP only
  double gap = 0.0;                   // MIP only, relative

  bool optimal() const { return status == Status::optimal; }
};

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::size_t iteration_limit = 100000;
  std::size_t stall_limit = 50;
};

namespace detail {

enum class VarState : unsigned char { basic, at_lower, at_upper, free_zero };

class Tableau {
 public:
  Tableau(const LinearProgram& lp, const SimplexOptions& opt) : opt_(opt) {
    lp.validate();
    n_ = lp.num_variables();
    // empty rows are checked once and dropped
    for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
      const auto& c = lp.constraints[i];
      bool empty = std::none_of(c.terms.begin(), c.terms.end(), [](const Term& t) { return t.coef != 0.0; });
      if (empty) {
        bool ok = (c.relation == Relation::less_equal && c.rhs >= -opt_.feasibility_tol) ||
                  (c.relation == Relation::greater_equal && c.rhs <= opt_.feasibility_tol) ||
                  (c.relation == Relation::equal && std::abs(c.rhs) <= opt_.feasibility_tol);
        if (!ok) trivially_infeasible_ = true;
        continue;
      }
      kept_rows_.push_back(i);
    }
    m_ = kept_rows_.size();
    cols_ = n_ + m_;
    tab_.assign(m_ * cols_, 0.0);
    rhs_.assign(m_, 0.0);
    lo_.assign(cols_, 0.0);
    up_.assign(cols_, 0.0);
    x_.assign(cols_, 0.0);
    cost_.assign(cols_, 0.0);
    d_.assign(cols_, 0.0);
    state_.assign(cols_, VarState::at_lower);
    head_.assign(m_, 0);
    row_of_.assign(cols_, npos);

    const double sign = lp.sense == Sense::maximize ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n_; ++j) {
      cost_[j] = sign * lp.objective[j];
      lo_[j] = lp.lower[j];
      up_[j] = lp.upper[j];
      if (lo_[j] > up_[j]) trivially_infeasible_ = true;
    }
    for (std::size_t r = 0; r < m_; ++r) {
      const auto& c = lp.constraints[kept_rows_[r]];
      double* row = row_ptr(r);
      for (const auto& t : c.terms) row[t.var] += t.coef;
      const std::size_t s = n_ + r;
      row[s] = 1.0;
      rhs_[r] = c.rhs;
      switch (c.relation) {
        case Relation::less_equal: lo_[s] = 0.0; up_[s] = kInf; break;
        case Relation::greater_equal: lo_[s] = -kInf; up_[s] = 0.0; break;
        case Relation::equal: lo_[s] = 0.0; up_[s] = 0.0; break;
      }
      head_[r] = s;
      row_of_[s] = r;
      state_[s] = VarState::basic;
    }
    for (std::size_t j = 0; j < n_; ++j) place_nonbasic(j);
    recompute_basics();
  }

  bool trivially_infeasible() const { return trivially_infeasible_; }
  std::size_t rows() const { return m_; }
  std::size_t structurals() const { return n_; }
  std::size_t iterations() const { return iterations_; }
  std::size_t pivots_since_build() const { return pivots_; }

  double lower(std::size_t j) const { return lo_[j]; }
  double upper(std::size_t j) const { return up_[j]; }

  /// Changes bounds of a structural variable; call recompute_basics() after a batch.
  void set_bounds(std::size_t j, double lo, double hi) {
    lo_[j] = lo;
    up_[j] = hi;
    if (state_[j] != VarState::basic) place_nonbasic(j);
  }

  void recompute_basics() {
    std::vector<double> xb(rhs_);
    for (std::size_t j = 0; j < cols_; ++j) {
      if (state_[j] == VarState::basic || x_[j] == 0.0) continue;
      const double xj = x_[j];
      for (std::size_t r = 0; r < m_; ++r) xb[r] -= tab_[r * cols_ + j] * xj;
    }
    for (std::size_t r = 0; r < m_; ++r) x_[head_[r]] = xb[r];
  }

  void zero_costs() { std::fill(d_.begin(), d_.end(), 0.0); }

  void price_real_costs() {
    for (std::size_t j = 0; j < cols_; ++j) d_[j] = cost_[j];
    for (std::size_t r = 0; r < m_; ++r) {
      const double cb = cost_[head_[r]];
      if (cb == 0.0) continue;
      const double* row = row_ptr(r);
      for (std::size_t j = 0; j < cols_; ++j) d_[j] -= cb * row[j];
    }
    for (std::size_t r = 0; r < m_; ++r) d_[head_[r]] = 0.0;
  }

  /// Dual simplex until primal feasible. Requires a dual feasible basis.
  Status dual() {
    bool bland = false;
    std::size_t stall = 0;
    double best_infeas = kInf;
    std::vector<double> alpha_col(m_);
    while (true) {
      // leaving row
      std::size_t r = npos;
      double worst = 0.0, total = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const std::size_t b = head_[i];
        const double v = infeasibility(b);
        if (v <= tol_feas(b)) continue;
        total += v;
        if (bland) {
          if (r == npos || head_[i] < head_[r]) r = i;
        } else if (v > worst) {
          worst = v;
          r = i;
        }
      }
      if (r == npos) return Status::optimal;
      if (iterations_ - budget_start_ >= opt_.iteration_limit) return Status::iteration_limit;
      if (total < best_infeas - 1e-12) {
        best_infeas = total;
        stall = 0;
      } else if (++stall > opt_.stall_limit + m_) {
        bland = true;
      }

      const std::size_t leaving = head_[r];
      const bool below = x_[leaving] < lo_[leaving];
      const double target = below ? lo_[leaving] : up_[leaving];
      const double s = below ? 1.0 : -1.0;
      const double* row = row_ptr(r);

      // entering column: Harris two-pass on |d_j| / |alpha_j|
      double bound = kInf;
      for (std::size_t j = 0; j < cols_; ++j) {
        const double a = dual_eligible(j, row[j], s);
        if (a == 0.0) continue;
        bound = std::min(bound, (std::abs(d_[j]) + opt_.optimality_tol) / std::abs(a));
      }
      if (bound == kInf) return Status::infeasible;
      std::size_t q = npos;
      double best_a = 0.0, best_ratio = kInf;
      for (std::size_t j = 0; j < cols_; ++j) {
        const double a = dual_eligible(j, row[j], s);
        if (a == 0.0) continue;
        const double ratio = std::abs(d_[j]) / std::abs(a);
        if (bland) {
          if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && q == npos)) {
            best_ratio = ratio;
            q = j;
          }
        } else if (ratio <= bound && std::abs(a) > best_a) {
          best_a = std::abs(a);
          q = j;
        }
      }
      if (q == npos) return Status::infeasible;

      const double arq = row[q];
      const double delta = (x_[leaving] - target) / arq;
      for (std::size_t i = 0; i < m_; ++i) alpha_col[i] = tab_[i * cols_ + q];
      for (std::size_t i = 0; i < m_; ++i)
        if (alpha_col[i] != 0.0) x_[head_[i]] -= alpha_col[i] * delta;
      x_[q] += delta;
      pivot(r, q);
      x_[leaving] = target;
      state_[leaving] = below ? VarState::at_lower : VarState::at_upper;
      ++iterations_;
    }
  }

  /// Primal simplex from a primal feasible basis.
  Status primal() {
    bool bland = false;
    std::size_t degenerate = 0;
    std::vector<double> alpha(m_);
    while (true) {
      std::size_t q = npos;
      double dir = 0.0, best = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) {
        const double dj_dir = primal_direction(j);
        if (dj_dir == 0.0) continue;
        const double score = std::abs(d_[j]);
        if (bland) {
          q = j;
          dir = dj_dir;
          break;
        }
        if (score > best) {
          best = score;
          q = j;
          dir = dj_dir;
        }
      }
      if (q == npos) return Status::optimal;
      if (iterations_ - budget_start_ >= opt_.iteration_limit) return Status::iteration_limit;

      for (std::size_t i = 0; i < m_; ++i) alpha[i] = tab_[i * cols_ + q];
      const double flip = up_[q] - lo_[q];  // inf when either side is open

      std::size_t r = npos;
      double step = kInf;
      bool to_lower = false;
      if (!bland) {
        // Harris pass 1: relaxed step limit
        double bound = kInf;
        for (std::size_t i = 0; i < m_; ++i) {
          const double a = dir * alpha[i];
          const std::size_t b = head_[i];
          if (a > opt_.pivot_tol && lo_[b] > -kInf)
            bound = std::min(bound, (x_[b] - lo_[b] + tol_feas(b)) / a);
          else if (a < -opt_.pivot_tol && up_[b] < kInf)
            bound = std::min(bound, (up_[b] - x_[b] + tol_feas(b)) / -a);
        }
        if (bound == kInf && flip == kInf) return Status::unbounded;
        if (flip > bound) {
          // pass 2: largest pivot among rows within the relaxed limit
          double best_a = 0.0;
          for (std::size_t i = 0; i < m_; ++i) {
            double ratio;
            const double a = dir * alpha[i];
            if (!ratio_of(i, a, ratio) || ratio > bound || std::abs(a) <= best_a) continue;
            best_a = std::abs(a);
            r = i;
            step = ratio;
            to_lower = a > 0;
          }
        }
      } else {
        for (std::size_t i = 0; i < m_; ++i) {
          double ratio;
          const double a = dir * alpha[i];
          if (!ratio_of(i, a, ratio)) continue;
          if (r == npos || ratio < step - 1e-12 || (ratio <= step + 1e-12 && head_[i] < head_[r])) {
            r = i;
            step = ratio;
            to_lower = a > 0;
          }
        }
        if (r == npos && flip == kInf) return Status::unbounded;
      }

      if (r == npos || flip <= step) {
        if (flip == kInf) return Status::unbounded;
        // bound flip of the entering variable
        step = flip;
        for (std::size_t i = 0; i < m_; ++i)
          if (alpha[i] != 0.0) x_[head_[i]] -= dir * step * alpha[i];
        if (dir > 0) {
          x_[q] = up_[q];
          state_[q] = VarState::at_upper;
        } else {
          x_[q] = lo_[q];
          state_[q] = VarState::at_lower;
        }
        ++iterations_;
        degenerate = 0;
        continue;
      }

      step = std::max(0.0, step);
      for (std::size_t i = 0; i < m_; ++i)
        if (alpha[i] != 0.0) x_[head_[i]] -= dir * step * alpha[i];
      x_[q] += dir * step;
      const std::size_t leaving = head_[r];
      pivot(r, q);
      x_[leaving] = to_lower ? lo_[leaving] : up_[leaving];
      state_[leaving] = to_lower ? VarState::at_lower : VarState::at_upper;
      ++iterations_;
      if (step < 1e-12) {
        if (++degenerate > opt_.stall_limit) bland = true;
      } else {
        degenerate = 0;
      }
    }
  }

  /// Full solve from the current basis: phase 1 (dual, zero costs) then phase 2.
  Status solve_from_scratch() {
    if (trivially_infeasible_) return Status::infeasible;
    budget_start_ = iterations_;
    zero_costs();
    Status s = dual();
    if (s != Status::optimal) return s;
    price_real_costs();
    return primal();
  }

  /// Re-optimize after bound changes on a basis that was optimal before.
  Status reoptimize() {
    for (std::size_t j = 0; j < n_; ++j)
      if (lo_[j] > up_[j]) return Status::infeasible;
    budget_start_ = iterations_;
    Status s = dual();
    if (s != Status::optimal) return s;
    return primal();
  }

  std::vector<double> values() const { return {x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_)}; }

  double internal_objective() const {
    double v = 0.0;
    for (std::size_t j = 0; j < n_; ++j) v += cost_[j] * x_[j];
    return v;
  }

  /// Row duals of the internal minimization, indexed by original row.
  std::vector<double> row_duals(std::size_t original_rows) const {
    std::vector<double> y(original_rows, 0.0);
    for (std::size_t r = 0; r < m_; ++r) y[kept_rows_[r]] = -d_[n_ + r];
    return y;
  }

  std::vector<double> structural_reduced_costs() const { return {d_.begin(), d_.begin() + static_cast<std::ptrdiff_t>(n_)}; }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  double* row_ptr(std::size_t r) { return tab_.data() + r * cols_; }
  const double* row_ptr(std::size_t r) const { return tab_.data() + r * cols_; }

  double tol_feas(std::size_t j) const {
    (void)j;
    return opt_.feasibility_tol;
  }

  double infeasibility(std::size_t j) const {
    if (x_[j] < lo_[j]) return lo_[j] - x_[j];
    if (x_[j] > up_[j]) return x_[j] - up_[j];
    return 0.0;
  }

  void place_nonbasic(std::size_t j) {
    if (state_[j] == VarState::at_upper && up_[j] < kInf) {
      x_[j] = up_[j];
    } else if (lo_[j] > -kInf) {
      state_[j] = VarState::at_lower;
      x_[j] = lo_[j];
    } else if (up_[j] < kInf) {
      state_[j] = VarState::at_upper;
      x_[j] = up_[j];
    } else {
      state_[j] = VarState::free_zero;
      x_[j] = 0.0;
    }
  }

  bool fixed(std::size_t j) const { return lo_[j] == up_[j]; }

  // Direction the entering variable may move to decrease cost, or 0.
  double primal_direction(std::size_t j) const {
    if (state_[j] == VarState::basic || fixed(j)) return 0.0;
    const double dj = d_[j];
    switch (state_[j]) {
      case VarState::at_lower: return dj < -opt_.optimality_tol ? 1.0 : 0.0;
      case VarState::at_upper: return dj > opt_.optimality_tol ? -1.0 : 0.0;
      case VarState::free_zero:
        if (dj < -opt_.optimality_tol) return 1.0;
        if (dj > opt_.optimality_tol) return -1.0;
        return 0.0;
      default: return 0.0;
    }
  }

  // Row entry usable as dual-simplex pivot when the leaving value must move by sign s.
  double dual_eligible(std::size_t j, double a, double s) const {
    if (state_[j] == VarState::basic || fixed(j) || std::abs(a) <= opt_.pivot_tol) return 0.0;
    const double as = a * s;
    switch (state_[j]) {
      case VarState::at_lower: return as < 0.0 ? a : 0.0;
      case VarState::at_upper: return as > 0.0 ? a : 0.0;
      case VarState::free_zero: return a;
      default: return 0.0;
    }
  }

  bool ratio_of(std::size_t i, double a, double& ratio) const {
    const std::size_t b = head_[i];
    if (a > opt_.pivot_tol && lo_[b] > -kInf) {
      ratio = std::max(0.0, (x_[b] - lo_[b]) / a);
      return true;
    }
    if (a < -opt_.pivot_tol && up_[b] < kInf) {
      ratio = std::max(0.0, (up_[b] - x_[b]) / -a);
      return true;
    }
    return false;
  }

  void pivot(std::size_t r, std::size_t q) {
    double* prow = row_ptr(r);
    const double inv = 1.0 / prow[q];
    nz_.clear();
    for (std::size_t j = 0; j < cols_; ++j) {
      if (prow[j] == 0.0) continue;
      prow[j] *= inv;
      if (std::abs(prow[j]) < 1e-14) {
        prow[j] = 0.0;
        continue;
      }
      nz_.push_back(j);
    }
    prow[q] = 1.0;
    rhs_[r] *= inv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = row_ptr(i);
      const double f = row[q];
      if (f == 0.0) continue;
      for (std::size_t j : nz_) {
        double v = row[j] - f * prow[j];
        row[j] = std::abs(v) < 1e-14 ? 0.0 : v;
      }
      row[q] = 0.0;
      rhs_[i] -= f * rhs_[r];
    }
    const double fd = d_[q];
    if (fd != 0.0) {
      for (std::size_t j : nz_) d_[j] -= fd * prow[j];
      d_[q] = 0.0;
    }
    const std::size_t leaving = head_[r];
    row_of_[leaving] = npos;
    head_[r] = q;
    row_of_[q] = r;
    state_[q] = VarState::basic;
    ++pivots_;
  }

  SimplexOptions opt_;
  std::size_t n_ = 0, m_ = 0, cols_ = 0;
  std::vector<std::size_t> kept_rows_;
  std::vector<double> tab_, rhs_, lo_, up_, x_, cost_, d_;
  std::vector<VarState> state_;
  std::vector<std::size_t> head_, row_of_;
  std::vector<std::size_t> nz_;
  std::size_t iterations_ = 0;
  std::size_t budget_start_ = 0;
  std::size_t pivots_ = 0;
  bool trivially_infeasible_ = false;
};

}  // namespace detail

/// Solves an LP to optimality. Infeasible and unbounded problems are statuses, not errors.
inline Solution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {}) {
  detail::Tableau tab(lp, options);
  Solution sol;
  sol.status = tab.solve_from_scratch();
  sol.iterations = tab.iterations();
  if (sol.status != Status::optimal) return sol;
  sol.values = tab.values();
  // snap tiny bound violations
  for (std::size_t j = 0; j < sol.values.size(); ++j)
    sol.values[j] = std::clamp(sol.values[j], lp.lower[j], lp.upper[j]);
  sol.objective = lp.evaluate(sol.values);
  const double sign = lp.sense == Sense::maximize ? -1.0 : 1.0;
  sol.duals = tab.row_duals(lp.num_constraints());
  for (auto& y : sol.duals) y *= sign;
  sol.reduced_costs = tab.structural_reduced_costs();
  for (auto& d : sol.reduced_costs) d *= sign;
  sol.best_bound = sol.objective;
  return sol;
}

/// b'y plus the bound contributions of the reduced costs; equals the primal
/// objective at an optimal basis.
inline double dual_objective(const LinearProgram& lp, const Solution& sol) {
  double v = lp.objective_offset;
  for (std::size_t i = 0; i < lp.num_constraints(); ++i) v += lp.constraints[i].rhs * sol.duals[i];
  for (std::size_t j = 0; j < lp.num_variables(); ++j) {
    const double d = sol.reduced_costs[j];
    if (d == 0.0) continue;
    const double x = sol.values[j];
    // nonbasic at a bound carries d*bound; a basic variable has d == 0
    v += d * x;
  }
  return v;
}

}  // namespace gdp::lp
