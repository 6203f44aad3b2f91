#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gdp/csv.hpp"
#include "gdp/distributions.hpp"
#include "gdp/lp.hpp"
#include "gdp/maghp.hpp"

namespace gdp {

/// The target mean lies below what the probability box allows.
class ReductionInfeasible : public std::runtime_error {
 public:
  ReductionInfeasible(double target, double min_mean, std::size_t slot = 0)
      : std::runtime_error("capacity reduction infeasible: target mean " + csv::format_double(target) +
                           " is below the minimal attainable mean " + csv::format_double(min_mean)),
        target_(target), min_mean_(min_mean), slot_(slot) {}

  double target() const { return target_; }
  double min_mean() const { return min_mean_; }
  std::size_t slot() const { return slot_; }

 private:
  double target_;
  double min_mean_;
  std::size_t slot_;
};

/// A policy solve that ended without a proven optimum.
class SolverFailure : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ReductionConfig {
  double reduction_level = 0.0;  // r
  double max_variability = 1.0;  // delta
  std::size_t sample_count = 100;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(reduction_level >= 0.0 && reduction_level <= 1.0)) throw std::invalid_argument("reduction level must lie in [0,1]");
    if (!(max_variability > 0.0)) throw std::invalid_argument("max variability must be positive");
    if (sample_count < 1) throw std::invalid_argument("sample count must be at least 1");
  }
};

namespace detail {

/// Box around p_hat intersected with the simplex; optionally with mean >= target.
inline lp::LinearProgram reduction_lp(const DiscretePmf& pmf, double delta, std::optional<double> target) {
  lp::LinearProgram lp;
  std::vector<lp::Term> mass, mean;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    const double p = pmf.probs[i];
    const std::size_t j = lp.add_variable(pmf.supports[i], std::max(0.0, p - delta * p), p + delta * p);
    mass.push_back({j, 1.0});
    mean.push_back({j, pmf.supports[i]});
  }
  lp.add_constraint(std::move(mass), lp::Relation::equal, 1.0, "mass");
  if (target) lp.add_constraint(std::move(mean), lp::Relation::greater_equal, *target, "mean");
  return lp;
}

}  // namespace detail

/// Shifts probability toward low capacities until the mean is mu_hat (1 - r),
/// moving each atom by at most delta times its original mass.
///
/// The LP's optimal face is every box-feasible PMF with mean mu*. We return
/// p_hat itself when it is optimal, otherwise the point on the segment from
/// p_hat to the box's minimum-mean PMF that has mean mu*. That point is
/// optimal and moves monotonically toward lower capacities as r grows.
inline DiscretePmf reduce_pmf(const DiscretePmf& pmf, double r, double delta) {
  pmf.validate();
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("reduce_pmf: r must lie in [0,1]");
  if (!(delta > 0.0)) throw std::invalid_argument("reduce_pmf: delta must be positive");
  const double mu = pmf.mean();
  if (!(mu > 0.0)) throw std::invalid_argument("reduce_pmf: mean must be positive");
  const double target = mu * (1.0 - r);

  const auto floor_sol = lp::solve_lp(detail::reduction_lp(pmf, delta, std::nullopt));
  if (!floor_sol.optimal()) throw std::runtime_error("reduce_pmf: box LP failed");
  const double min_mean = floor_sol.objective;

  const double tol = 1e-9 * std::max(1.0, mu);
  if (min_mean > target + tol) throw ReductionInfeasible(target, min_mean);
  // The resampling LP proper; its optimum must sit at the target.
  const auto sol = lp::solve_lp(detail::reduction_lp(pmf, delta, std::max(target, min_mean)));
  if (!sol.optimal()) throw std::runtime_error(std::string("reduce_pmf: LP ended with status ") + lp::to_string(sol.status));
  if (std::abs(sol.objective - std::max(target, min_mean)) > tol) throw std::runtime_error("reduce_pmf: LP optimum off target");

  if (mu <= target) return pmf;
  const double theta = mu > min_mean ? std::min(1.0, (mu - target) / (mu - min_mean)) : 0.0;
  DiscretePmf out = pmf;
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double p = pmf.probs[i];
    const double v = p + theta * (floor_sol.values[i] - p);
    out.probs[i] = std::clamp(v, std::max(0.0, p - delta * p), p + delta * p);
    total += out.probs[i];
  }
  for (auto& p : out.probs) p /= total;
  return out;
}

/// sample_count joint draws; draw k consumes one uniform per slot in slot
/// order, so the same seed couples samples across reduction levels.
inline std::vector<std::vector<int>> resample_capacities(const ReductionConfig& cfg,
                                                         const std::vector<DiscretePmf>& marginals) {
  cfg.validate();
  std::vector<DiscretePmf> reduced;
  for (std::size_t s = 0; s < marginals.size(); ++s) {
    try {
      reduced.push_back(reduce_pmf(marginals[s], cfg.reduction_level, cfg.max_variability));
    } catch (const ReductionInfeasible& e) {
      throw ReductionInfeasible(e.target(), e.min_mean(), s);
    }
  }
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::vector<int>> out(cfg.sample_count, std::vector<int>(marginals.size()));
  for (auto& draw : out)
    for (std::size_t s = 0; s < reduced.size(); ++s)
      draw[s] = static_cast<int>(std::lround(reduced[s].supports[reduced[s].quantile_index(uniform01(rng))]));
  return out;
}

/// Mean realized cost of a fixed policy over capacity samples (slot vectors).
inline double out_of_sample(const GroundHoldingPolicy& policy, const Schedule& s, const CapacityLayout& layout,
                            const std::vector<std::vector<int>>& samples, const CostConfig& costs) {
  if (samples.empty()) throw std::invalid_argument("out_of_sample: no samples");
  double total = 0.0;
  for (const auto& smp : samples)
    total += evaluate_policy(policy, s, PeriodCapacities::from_slots(layout, smp, s.grid.num_periods), costs).total();
  return total / static_cast<double>(samples.size());
}

struct SweepResult {
  std::vector<double> r_grid;
  std::vector<double> eps_grid;
  double in_sample_sp = 0.0;
  std::vector<double> in_sample_dr;     // per eps
  std::vector<double> phi_sp;           // per r
  std::vector<std::vector<double>> phi_dr;  // [r][eps]
  std::vector<std::size_t> best;        // per r: index into eps_grid
  std::vector<double> pct_decrease;     // per r

  double best_eps(std::size_t k) const { return eps_grid[best[k]]; }
  double best_phi_dr(std::size_t k) const { return phi_dr[k][best[k]]; }
};

struct SweepPolicies {
  GroundHoldingPolicy sp;
  std::vector<GroundHoldingPolicy> dr;  // per eps
  double in_sample_sp = 0.0;
  std::vector<double> in_sample_dr;
};

/// Solves the sp model once and the dr model once per radius (both sides share it).
inline SweepPolicies solve_sweep_policies(MaghpInstance inst, const std::vector<double>& eps_grid,
                                          const lp::MipOptions& opt = {}) {
  SweepPolicies out;
  auto sp = solve(inst, Mode::sp, opt);
  if (!sp.optimal()) throw SolverFailure(std::string("sp model ended with status ") + lp::to_string(sp.solution.status));
  out.sp = sp.policy;
  out.in_sample_sp = sp.report.objective;
  for (double e : eps_grid) {
    inst.eps_arrival = inst.eps_departure = e;
    auto dr = solve(inst, Mode::dr, opt);
    if (!dr.optimal())
      throw SolverFailure("dr model at eps " + csv::format_double(e) + " ended with status " +
                               lp::to_string(dr.solution.status));
    out.dr.push_back(dr.policy);
    out.in_sample_dr.push_back(dr.report.objective);
  }
  return out;
}

/// Out-of-sample comparison over reduction levels. Each level reuses
/// cfg.seed, so every policy and level sees the same uniforms.
inline SweepResult sensitivity_sweep(const MaghpInstance& inst, const std::vector<DiscretePmf>& marginals,
                                     const std::vector<double>& r_grid, const std::vector<double>& eps_grid,
                                     const ReductionConfig& cfg, const SweepPolicies& pol) {
  if (r_grid.empty() || eps_grid.empty()) throw std::invalid_argument("sensitivity_sweep: empty grid");
  if (pol.dr.size() != eps_grid.size()) throw std::invalid_argument("sensitivity_sweep: one dr policy per radius");
  SweepResult res;
  res.r_grid = r_grid;
  res.eps_grid = eps_grid;
  res.in_sample_sp = pol.in_sample_sp;
  res.in_sample_dr = pol.in_sample_dr;
  for (double r : r_grid) {
    ReductionConfig c = cfg;
    c.reduction_level = r;
    const auto samples = resample_capacities(c, marginals);
    const double sp = out_of_sample(pol.sp, inst.schedule, inst.layout, samples, inst.costs);
    std::vector<double> dr;
    std::size_t best = 0;
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
      dr.push_back(out_of_sample(pol.dr[k], inst.schedule, inst.layout, samples, inst.costs));
      if (dr[k] < dr[best]) best = k;  // strict: the smallest radius wins ties
    }
    res.phi_sp.push_back(sp);
    res.pct_decrease.push_back(sp != 0.0 ? 100.0 * (sp - dr[best]) / sp : 0.0);
    res.phi_dr.push_back(std::move(dr));
    res.best.push_back(best);
  }
  return res;
}

inline SweepResult sensitivity_sweep(const MaghpInstance& inst, const std::vector<DiscretePmf>& marginals,
                                     const std::vector<double>& r_grid, const std::vector<double>& eps_grid,
                                     const ReductionConfig& cfg, const lp::MipOptions& opt = {}) {
  return sensitivity_sweep(inst, marginals, r_grid, eps_grid, cfg, solve_sweep_policies(inst, eps_grid, opt));
}

/// One row per reduction level; eps is the best radius for that level.
inline void write_sweep_table(std::ostream& os, const SweepResult& r) {
  os << "r,eps,phi_sp,phi_dr,best_eps,pct_decrease\n";
  for (std::size_t k = 0; k < r.r_grid.size(); ++k)
    os << csv::format_double(r.r_grid[k]) << ',' << csv::format_double(r.best_eps(k)) << ','
       << csv::format_double(r.phi_sp[k]) << ',' << csv::format_double(r.best_phi_dr(k)) << ','
       << csv::format_double(r.best_eps(k)) << ',' << csv::format_double(r.pct_decrease[k]) << '\n';
}

/// Out-of-sample dr cost against radius at reduction level index k.
inline void write_radius_series(std::ostream& os, const SweepResult& r, std::size_t k) {
  os << "eps,phi_os_dr\n";
  for (std::size_t e = 0; e < r.eps_grid.size(); ++e)
    os << csv::format_double(r.eps_grid[e]) << ',' << csv::format_double(r.phi_dr[k][e]) << '\n';
}

}  // namespace gdp
