#pragma once

// Discrete capacity distributions: 1-Wasserstein distance (closed form and a
// transportation-LP cross-check), worst-case expectations over Wasserstein
// balls with finite support, scenario reduction over time, and joint
// scenario sampling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gdp/common.hpp"
#include "gdp/lp.hpp"

namespace gdp {

/// Finite-support PMF. Supports strictly increasing, probabilities sum to one.
struct DiscretePmf {
  std::vector<double> supports;
  std::vector<double> probs;

  static DiscretePmf point_mass(double at) { return DiscretePmf{{at}, {1.0}}; }

  /// Builds and validates.
  static DiscretePmf make(std::vector<double> supports, std::vector<double> probs) {
    DiscretePmf p{std::move(supports), std::move(probs)};
    p.validate();
    return p;
  }

  /// PMF over the integers 0..probs.size()-1.
  static DiscretePmf over_range(std::vector<double> probs) {
    std::vector<double> s(probs.size());
    std::iota(s.begin(), s.end(), 0.0);
    return make(std::move(s), std::move(probs));
  }

  std::size_t size() const { return supports.size(); }

  void validate(double tol = 1e-9) const {
    if (supports.empty()) throw ValidationError("DiscretePmf: empty support");
    if (supports.size() != probs.size()) throw ValidationError("DiscretePmf: supports and probs differ in length");
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (!std::isfinite(supports[i]) || !std::isfinite(probs[i])) throw ValidationError("DiscretePmf: non-finite entry");
      if (probs[i] < 0.0) throw ValidationError("DiscretePmf: negative probability");
      if (i > 0 && !(supports[i] > supports[i - 1])) throw ValidationError("DiscretePmf: supports not strictly increasing");
      total += probs[i];
    }
    if (std::abs(total - 1.0) > tol) throw ValidationError("DiscretePmf: probabilities sum to " + std::to_string(total));
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m += supports[i] * probs[i];
    return m;
  }

  std::size_t argmax() const {
    return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  }

  /// Index drawn by inverse CDF for u in [0,1).
  std::size_t quantile_index(double u) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    // u beyond the accumulated mass (rounding): last atom with positive mass
    for (std::size_t i = size(); i-- > 0;)
      if (probs[i] > 0.0) return i;
    return size() - 1;
  }

  bool operator==(const DiscretePmf&) const = default;
};

inline void to_json(nlohmann::json& j, const DiscretePmf& p) { j = {{"supports", p.supports}, {"probs", p.probs}}; }

inline void from_json(const nlohmann::json& j, DiscretePmf& p) {
  p.supports = j.at("supports").get<std::vector<double>>();
  p.probs = j.at("probs").get<std::vector<double>>();
  p.validate();
}

/// Arithmetic mean of PMFs on the union of their supports.
inline DiscretePmf average(std::span<const DiscretePmf> pmfs) {
  if (pmfs.empty()) throw std::invalid_argument("average: no distributions");
  std::map<double, double> acc;
  const double w = 1.0 / static_cast<double>(pmfs.size());
  for (const auto& p : pmfs)
    for (std::size_t i = 0; i < p.size(); ++i) acc[p.supports[i]] += w * p.probs[i];
  DiscretePmf out;
  for (const auto& [x, pr] : acc) {
    out.supports.push_back(x);
    out.probs.push_back(pr);
  }
  return out;
}

/// 1-Wasserstein distance with ground metric |x - y|: the integral of |F_p - F_q|.
inline double wasserstein_1d(const DiscretePmf& p, const DiscretePmf& q) {
  std::vector<double> grid;
  grid.reserve(p.size() + q.size());
  grid.insert(grid.end(), p.supports.begin(), p.supports.end());
  grid.insert(grid.end(), q.supports.begin(), q.supports.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  double fp = 0.0, fq = 0.0, dist = 0.0;
  std::size_t ip = 0, iq = 0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    while (ip < p.size() && p.supports[ip] <= grid[k]) fp += p.probs[ip++];
    while (iq < q.size() && q.supports[iq] <= grid[k]) fq += q.probs[iq++];
    dist += std::abs(fp - fq) * (grid[k + 1] - grid[k]);
  }
  return dist;
}

/// Transportation LP  min sum pi_ij |x_i - y_j|  with marginals p and q.
inline double wasserstein_lp(const DiscretePmf& p, const DiscretePmf& q) {
  lp::LinearProgram prog;
  const std::size_t n = p.size(), m = q.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) prog.add_variable(std::abs(p.supports[i] - q.supports[j]));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<lp::Term> row;
    for (std::size_t j = 0; j < m; ++j) row.push_back({i * m + j, 1.0});
    prog.add_constraint(std::move(row), lp::Relation::equal, p.probs[i]);
  }
  // one column constraint is implied by the others; keeping all m is harmless
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<lp::Term> col;
    for (std::size_t i = 0; i < n; ++i) col.push_back({i * m + j, 1.0});
    prog.add_constraint(std::move(col), lp::Relation::equal, q.probs[j]);
  }
  auto sol = lp::solve_lp(prog);
  if (!sol.optimal()) throw std::runtime_error(std::string("wasserstein_lp: solver returned ") + lp::to_string(sol.status));
  return sol.objective;
}

/// Wasserstein ball around a center distribution.
struct AmbiguitySet {
  DiscretePmf center;
  double radius = 0.0;
};

/// Symmetric matrix of ground distances between support points, row-major.
struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<double> d;

  double operator()(std::size_t i, std::size_t j) const { return d[i * n + j]; }

  static DistanceMatrix absolute(std::span<const double> points) {
    DistanceMatrix m{points.size(), std::vector<double>(points.size() * points.size())};
    for (std::size_t i = 0; i < m.n; ++i)
      for (std::size_t j = 0; j < m.n; ++j) m.d[i * m.n + j] = std::abs(points[i] - points[j]);
    return m;
  }

  /// Euclidean distances between equal-length points.
  static DistanceMatrix euclidean(const std::vector<std::vector<double>>& points) {
    DistanceMatrix m{points.size(), std::vector<double>(points.size() * points.size())};
    for (std::size_t i = 0; i < m.n; ++i)
      for (std::size_t j = 0; j < m.n; ++j) {
        if (points[i].size() != points[j].size()) throw std::invalid_argument("DistanceMatrix: ragged points");
        double s = 0.0;
        for (std::size_t k = 0; k < points[i].size(); ++k) s += (points[i][k] - points[j][k]) * (points[i][k] - points[j][k]);
        m.d[i * m.n + j] = std::sqrt(s);
      }
    return m;
  }

  double diameter() const { return d.empty() ? 0.0 : *std::max_element(d.begin(), d.end()); }
};

struct WorstCase {
  double value = 0.0;
  std::vector<double> shifted;  // worst-case marginal over the support
};

/// max over q in the ball of E_q[Q]: the transport LP
///   max sum_ij pi_ij Q_j  s.t.  sum_j pi_ij = p_i,  sum_ij pi_ij d_ij <= eps,  pi >= 0.
inline WorstCase worst_case_expectation(std::span<const double> center_probs, std::span<const double> costs,
                                        const DistanceMatrix& dist, double eps) {
  const std::size_t n = center_probs.size();
  if (costs.size() != n || dist.n != n) throw std::invalid_argument("worst_case_expectation: dimension mismatch");
  if (eps < 0.0) throw std::invalid_argument("worst_case_expectation: negative radius");
  for (double c : costs)
    if (!std::isfinite(c)) throw std::invalid_argument("worst_case_expectation: non-finite cost");

  lp::LinearProgram prog;
  prog.sense = lp::Sense::maximize;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) prog.add_variable(costs[j]);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<lp::Term> row;
    for (std::size_t j = 0; j < n; ++j) row.push_back({i * n + j, 1.0});
    prog.add_constraint(std::move(row), lp::Relation::equal, center_probs[i]);
  }
  std::vector<lp::Term> budget;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (dist(i, j) != 0.0) budget.push_back({i * n + j, dist(i, j)});
  prog.add_constraint(std::move(budget), lp::Relation::less_equal, eps);

  auto sol = lp::solve_lp(prog);
  if (!sol.optimal())
    throw std::runtime_error(std::string("worst_case_expectation: solver returned ") + lp::to_string(sol.status));
  WorstCase out;
  out.value = sol.objective;
  out.shifted.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.shifted[j] += sol.values[i * n + j];
  return out;
}

/// Dual of the worst-case LP:  min sum_i p_i a_i + eps*lambda  s.t.  a_i + lambda d_ij >= Q_j, lambda >= 0.
inline double worst_case_dual_value(std::span<const double> center_probs, std::span<const double> costs,
                                    const DistanceMatrix& dist, double eps) {
  const std::size_t n = center_probs.size();
  if (costs.size() != n || dist.n != n) throw std::invalid_argument("worst_case_dual_value: dimension mismatch");
  lp::LinearProgram prog;
  for (std::size_t i = 0; i < n; ++i) prog.add_variable(center_probs[i], -lp::kInf, lp::kInf);
  const std::size_t lambda = prog.add_variable(eps, 0.0, lp::kInf);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<lp::Term> row{{i, 1.0}};
      if (dist(i, j) != 0.0) row.push_back({lambda, dist(i, j)});
      prog.add_constraint(std::move(row), lp::Relation::greater_equal, costs[j]);
    }
  auto sol = lp::solve_lp(prog);
  if (!sol.optimal())
    throw std::runtime_error(std::string("worst_case_dual_value: solver returned ") + lp::to_string(sol.status));
  return sol.objective;
}

/// One-dimensional form: the ball around set.center restricted to the given
/// support points (which must contain the center's atoms), ground metric |x - y|.
inline WorstCase worst_case_expectation(const AmbiguitySet& set, std::span<const double> support,
                                        std::span<const double> costs) {
  std::vector<double> p(support.size(), 0.0);
  for (std::size_t k = 0; k < set.center.size(); ++k) {
    auto it = std::find(support.begin(), support.end(), set.center.supports[k]);
    if (it == support.end()) throw std::invalid_argument("worst_case_expectation: center atom outside the support");
    p[static_cast<std::size_t>(it - support.begin())] += set.center.probs[k];
  }
  return worst_case_expectation(p, costs, DistanceMatrix::absolute(support), set.radius);
}

/// Contiguous block of periods [begin, end) with one centroid per series.
struct TimeGroup {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<DiscretePmf> centroids;

  std::size_t length() const { return end - begin; }
  bool contains(std::size_t t) const { return t >= begin && t < end; }
};

/// Left-to-right sweep over periods; a new group starts whenever any series'
/// distance between consecutive periods exceeds the threshold.
/// per_period[t][s] is the PMF of series s (an airport/direction pair) at period t.
inline std::vector<TimeGroup> reduce_scenarios(const std::vector<std::vector<DiscretePmf>>& per_period, double threshold) {
  if (per_period.empty()) throw std::invalid_argument("reduce_scenarios: no periods");
  if (!(threshold > 0.0)) throw std::invalid_argument("reduce_scenarios: threshold must be positive");
  const std::size_t series = per_period.front().size();
  for (const auto& row : per_period)
    if (row.size() != series) throw std::invalid_argument("reduce_scenarios: ragged series");

  std::vector<std::size_t> starts{0};
  for (std::size_t t = 0; t + 1 < per_period.size(); ++t) {
    double stat = 0.0;
    for (std::size_t s = 0; s < series; ++s) stat = std::max(stat, wasserstein_1d(per_period[t][s], per_period[t + 1][s]));
    if (stat > threshold) starts.push_back(t + 1);
  }

  std::vector<TimeGroup> groups;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    TimeGroup g;
    g.begin = starts[k];
    g.end = k + 1 < starts.size() ? starts[k + 1] : per_period.size();
    for (std::size_t s = 0; s < series; ++s) {
      std::vector<DiscretePmf> members;
      for (std::size_t t = g.begin; t < g.end; ++t) members.push_back(per_period[t][s]);
      g.centroids.push_back(average(members));
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

enum class Provenance { sampled, enumerated };

struct Scenario {
  std::vector<int> capacities;  // one entry per marginal slot
  double prob = 0.0;
};

struct ScenarioSet {
  std::vector<Scenario> scenarios;
  Provenance provenance = Provenance::sampled;

  std::size_t size() const { return scenarios.size(); }

  void validate(double tol = 1e-9) const {
    if (scenarios.empty()) throw ValidationError("ScenarioSet: empty");
    double total = 0.0;
    const std::size_t width = scenarios.front().capacities.size();
    for (const auto& s : scenarios) {
      if (s.capacities.size() != width) throw ValidationError("ScenarioSet: ragged capacity vectors");
      if (s.prob < 0.0) throw ValidationError("ScenarioSet: negative probability");
      total += s.prob;
    }
    if (std::abs(total - 1.0) > tol) throw ValidationError("ScenarioSet: probabilities sum to " + std::to_string(total));
  }
};

inline void to_json(nlohmann::json& j, const ScenarioSet& s) {
  j = nlohmann::json::object();
  j["provenance"] = s.provenance == Provenance::sampled ? "sampled" : "enumerated";
  auto arr = nlohmann::json::array();
  for (const auto& sc : s.scenarios) arr.push_back({{"capacities", sc.capacities}, {"prob", sc.prob}});
  j["scenarios"] = std::move(arr);
}

inline void from_json(const nlohmann::json& j, ScenarioSet& s) {
  const auto prov = j.at("provenance").get<std::string>();
  if (prov == "sampled") s.provenance = Provenance::sampled;
  else if (prov == "enumerated") s.provenance = Provenance::enumerated;
  else throw ParseError("ScenarioSet: unknown provenance '" + prov + "'");
  s.scenarios.clear();
  for (const auto& e : j.at("scenarios"))
    s.scenarios.push_back(Scenario{e.at("capacities").get<std::vector<int>>(), e.at("prob").get<double>()});
  s.validate();
}

/// n independent joint draws from independent marginals; identical draws are
/// merged, each contributing 1/n. Order is first appearance.
inline ScenarioSet sample_scenarios(std::span<const DiscretePmf> marginals, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_scenarios: n must be at least 1");
  std::mt19937_64 rng(seed);
  std::map<std::vector<int>, std::size_t> index;
  ScenarioSet out;
  out.provenance = Provenance::sampled;
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<int> draw(marginals.size());
    for (std::size_t s = 0; s < marginals.size(); ++s) {
      const auto& pmf = marginals[s];
      draw[s] = static_cast<int>(std::lround(pmf.supports[pmf.quantile_index(uniform01(rng))]));
    }
    auto [it, inserted] = index.try_emplace(draw, out.scenarios.size());
    if (inserted) out.scenarios.push_back(Scenario{std::move(draw), 0.0});
    out.scenarios[it->second].prob += w;
  }
  return out;
}

/// All joint combinations of the marginals' atoms (independence), for small cases.
inline ScenarioSet enumerate_scenarios(std::span<const DiscretePmf> marginals) {
  ScenarioSet out;
  out.provenance = Provenance::enumerated;
  out.scenarios.push_back(Scenario{{}, 1.0});
  for (const auto& pmf : marginals) {
    std::vector<Scenario> next;
    for (const auto& s : out.scenarios)
      for (std::size_t i = 0; i < pmf.size(); ++i) {
        if (pmf.probs[i] == 0.0) continue;
        Scenario e = s;
        e.capacities.push_back(static_cast<int>(std::lround(pmf.supports[i])));
        e.prob *= pmf.probs[i];
        next.push_back(std::move(e));
      }
    out.scenarios = std::move(next);
  }
  return out;
}

}  // namespace gdp
