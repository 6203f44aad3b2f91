#pragma once

// Branch and bound over the dense simplex in lp.hpp.
//
// Nodes carry only their bound changes relative to the root. One tableau is
// reused for every node: bound changes leave the last optimal basis dual
// feasible, so each node is re-optimized with the dual simplex. The tableau
// is rebuilt from scratch when a node solution drifts off the original rows.

#include <cmath>
#include <cstddef>
#include <memory>
#include <queue>
#include <set>
#include <stdexcept>
#include <vector>

#include "gdp/lp.hpp"

namespace gdp::lp {

struct MipProblem {
  LinearProgram base;
  std::vector<std::size_t> integer_vars;
  std::vector<std::size_t> binary_vars;

  std::size_t add_binary(double cost, std::string name = {}) {
    const std::size_t j = base.add_variable(cost, 0.0, 1.0, std::move(name));
    binary_vars.push_back(j);
    return j;
  }

  std::size_t add_integer(double cost, double lo, double hi, std::string name = {}) {
    const std::size_t j = base.add_variable(cost, lo, hi, std::move(name));
    integer_vars.push_back(j);
    return j;
  }

  /// Union of integer and binary indices, sorted.
  std::vector<std::size_t> discrete_vars() const {
    std::set<std::size_t> all(integer_vars.begin(), integer_vars.end());
    all.insert(binary_vars.begin(), binary_vars.end());
    return {all.begin(), all.end()};
  }

  void validate() const {
    base.validate();
    for (std::size_t j : binary_vars) {
      if (j >= base.num_variables()) throw std::invalid_argument("MipProblem: binary index out of range");
      // Fixing a binary to 0 or 1 through its bounds is allowed.
      if (base.lower[j] < 0.0 || base.upper[j] > 1.0 || base.lower[j] > base.upper[j])
        throw std::invalid_argument("MipProblem: binary variable " + base.variable_name(j) + " must have bounds within [0,1]");
    }
    for (std::size_t j : integer_vars) {
      if (j >= base.num_variables()) throw std::invalid_argument("MipProblem: integer index out of range");
      if (!std::isfinite(base.lower[j]) || !std::isfinite(base.upper[j]))
        throw std::invalid_argument("MipProblem: integer variable " + base.variable_name(j) + " must be bounded");
    }
  }
};

struct MipOptions {
  double gap_tol = 1e-6;
  double integrality_tol = 1e-6;
  std::size_t node_limit = 1000000;
  SimplexOptions simplex;
};

namespace detail {

struct BoundChange {
  std::size_t var;
  double lo;
  double hi;
};

struct Node {
  double bound;
  std::size_t depth;
  std::size_t id;
  std::vector<BoundChange> changes;
};

struct NodeOrder {
  // best bound first; deeper first on ties; newest first after that
  bool operator()(const std::shared_ptr<Node>& a, const std::shared_ptr<Node>& b) const {
    if (a->bound != b->bound) return a->bound > b->bound;
    if (a->depth != b->depth) return a->depth < b->depth;
    return a->id < b->id;
  }
};

}  // namespace detail

inline Solution solve_mip(const MipProblem& mip, const MipOptions& options = {}) {
  mip.validate();
  const LinearProgram& lp = mip.base;
  const std::vector<std::size_t> ints = mip.discrete_vars();
  const double sign = lp.sense == Sense::maximize ? -1.0 : 1.0;  // internal objective is sign * objective

  Solution result;
  std::vector<double> root_lo(lp.lower), root_hi(lp.upper);
  for (std::size_t j : ints) {
    root_lo[j] = std::ceil(root_lo[j] - options.integrality_tol);
    root_hi[j] = std::floor(root_hi[j] + options.integrality_tol);
  }

  auto tableau = std::make_unique<detail::Tableau>(lp, options.simplex);
  std::vector<double> cur_lo(root_lo), cur_hi(root_hi);
  for (std::size_t j : ints) tableau->set_bounds(j, cur_lo[j], cur_hi[j]);
  tableau->recompute_basics();
  std::size_t lp_iterations = 0;

  Status root_status = tableau->solve_from_scratch();
  lp_iterations += tableau->iterations();
  if (root_status != Status::optimal) {
    result.status = root_status;
    result.iterations = lp_iterations;
    result.nodes = 1;
    return result;
  }

  bool have_incumbent = false;
  double incumbent = kInf;  // internal (minimization) scale
  std::vector<double> best_x;

  auto internal_value = [&](const std::vector<double>& x) { return sign * lp.evaluate(x); };
  auto abs_gap = [&](double inc) { return options.gap_tol * std::max(1.0, std::abs(inc)); };

  std::priority_queue<std::shared_ptr<detail::Node>, std::vector<std::shared_ptr<detail::Node>>, detail::NodeOrder> open;
  std::size_t next_id = 0;
  open.push(std::make_shared<detail::Node>(detail::Node{-kInf, 0, next_id++, {}}));
  std::size_t nodes = 0;
  bool first = true;
  bool hit_limit = false;
  double best_open_bound = -kInf;
  double pruned_bound = kInf;  // smallest bound discarded by the gap test

  while (!open.empty()) {
    auto node = open.top();
    open.pop();
    if (have_incumbent && node->bound >= incumbent - abs_gap(incumbent)) {
      pruned_bound = std::min(pruned_bound, node->bound);
      continue;
    }
    if (nodes >= options.node_limit) {
      hit_limit = true;
      best_open_bound = node->bound;
      break;
    }
    ++nodes;

    // node bounds
    std::vector<double> lo(root_lo), hi(root_hi);
    for (const auto& c : node->changes) {
      lo[c.var] = c.lo;
      hi[c.var] = c.hi;
    }

    Status st;
    std::vector<double> x;
    if (first) {
      st = Status::optimal;
      first = false;
    } else {
      bool infeasible_bounds = false;
      for (std::size_t j : ints) {
        if (lo[j] > hi[j]) infeasible_bounds = true;
        if (lo[j] != cur_lo[j] || hi[j] != cur_hi[j]) {
          tableau->set_bounds(j, lo[j], hi[j]);
          cur_lo[j] = lo[j];
          cur_hi[j] = hi[j];
        }
      }
      if (infeasible_bounds) continue;
      const std::size_t before = tableau->iterations();
      tableau->recompute_basics();
      st = tableau->reoptimize();
      lp_iterations += tableau->iterations() - before;
    }

    if (st == Status::optimal) {
      x = tableau->values();
      if (lp.max_violation(x) > 1e-7) {
        // numerical drift: rebuild the tableau at this node's bounds
        LinearProgram fresh = lp;
        fresh.lower = lo;
        fresh.upper = hi;
        tableau = std::make_unique<detail::Tableau>(fresh, options.simplex);
        st = tableau->solve_from_scratch();
        lp_iterations += tableau->iterations();
        cur_lo = lo;
        cur_hi = hi;
        if (st == Status::optimal) x = tableau->values();
      }
    }
    if (st == Status::infeasible) continue;
    if (st == Status::unbounded) {
      result.status = Status::unbounded;
      result.nodes = nodes;
      result.iterations = lp_iterations;
      return result;
    }
    if (st != Status::optimal) {
      hit_limit = true;
      break;
    }

    const double node_obj = internal_value(x);
    if (have_incumbent && node_obj >= incumbent - abs_gap(incumbent)) {
      pruned_bound = std::min(pruned_bound, node_obj);
      continue;
    }

    // most fractional variable, smallest index on ties
    std::size_t branch_var = static_cast<std::size_t>(-1);
    double best_frac = options.integrality_tol;
    for (std::size_t j : ints) {
      const double f = x[j] - std::floor(x[j]);
      const double dist = std::min(f, 1.0 - f);
      if (dist > best_frac + 1e-12) {
        best_frac = dist;
        branch_var = j;
      }
    }

    if (branch_var == static_cast<std::size_t>(-1)) {
      std::vector<double> rounded(x);
      for (std::size_t j : ints) rounded[j] = std::round(x[j]);
      if (lp.max_violation(rounded) > 1e-6) continue;
      const double val = internal_value(rounded);
      if (!have_incumbent || val < incumbent) {
        have_incumbent = true;
        incumbent = val;
        best_x = std::move(rounded);
      }
      continue;
    }

    const double v = x[branch_var];
    auto down = std::make_shared<detail::Node>(detail::Node{node_obj, node->depth + 1, next_id++, node->changes});
    down->changes.push_back({branch_var, lo[branch_var], std::floor(v)});
    auto up = std::make_shared<detail::Node>(detail::Node{node_obj, node->depth + 1, next_id++, node->changes});
    up->changes.push_back({branch_var, std::ceil(v), hi[branch_var]});
    open.push(std::move(down));
    open.push(std::move(up));
  }

  result.nodes = nodes;
  result.iterations = lp_iterations;
  if (!have_incumbent) {
    result.status = hit_limit ? Status::iteration_limit : Status::infeasible;
    return result;
  }
  result.values = best_x;
  result.objective = lp.evaluate(best_x);
  double bound_internal = std::min(incumbent, pruned_bound);
  if (hit_limit) bound_internal = std::min(bound_internal, best_open_bound);
  result.best_bound = sign * bound_internal;
  result.gap = (incumbent - bound_internal) / std::max(1.0, std::abs(incumbent));
  result.status = hit_limit ? Status::iteration_limit : Status::optimal;
  return result;
}

}  // namespace gdp::lp
