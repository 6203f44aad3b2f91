#pragma once

// Multi-airport ground holding: deterministic, expected-cost (sp) and
// Wasserstein-robust (dr) models over binary departure/arrival assignments.
//
// Time index O = grid.num_periods is the overflow period. It has no capacity
// and each arrival placed there pays costs.overflow_cost() on top of its delay.

#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gdp/distributions.hpp"
#include "gdp/lp.hpp"
#include "gdp/mip.hpp"
#include "gdp/schedule.hpp"

namespace gdp {

inline std::size_t dir_index(Direction d) { return static_cast<std::size_t>(d); }

/// Slot order used by scenario capacity vectors: airport-major, then time
/// group, then direction (arrival, departure).
struct CapacityLayout {
  std::vector<std::string> airports;
  std::vector<std::pair<int, int>> groups;  // half-open period ranges

  std::size_t num_slots() const { return airports.size() * groups.size() * 2; }

  std::size_t slot(std::size_t airport, std::size_t group, Direction d) const {
    return (airport * groups.size() + group) * 2 + dir_index(d);
  }

  std::size_t group_of(int period) const {
    for (std::size_t g = 0; g < groups.size(); ++g)
      if (period >= groups[g].first && period < groups[g].second) return g;
    throw std::out_of_range("CapacityLayout: period " + std::to_string(period) + " outside every group");
  }

  void validate(int num_periods) const {
    if (groups.empty()) throw ValidationError("CapacityLayout: no time groups");
    int next = 0;
    for (const auto& [b, e] : groups) {
      if (b != next || e <= b) throw ValidationError("CapacityLayout: groups must partition the horizon in order");
      next = e;
    }
    if (next != num_periods) throw ValidationError("CapacityLayout: groups do not cover the horizon");
  }

  static CapacityLayout single_group(const Schedule& s) {
    CapacityLayout l;
    for (const auto& a : s.airports) l.airports.push_back(a.code);
    l.groups = {{0, s.grid.num_periods}};
    return l;
  }
};

/// Capacity per (direction, airport, real period).
struct PeriodCapacities {
  std::size_t num_airports = 0;
  int num_periods = 0;
  std::vector<int> caps;

  PeriodCapacities() = default;
  PeriodCapacities(std::size_t airports, int periods, int value)
      : num_airports(airports), num_periods(periods), caps(2 * airports * static_cast<std::size_t>(periods), value) {}

  int& at(Direction d, std::size_t airport, int t) { return caps[index(d, airport, t)]; }
  int at(Direction d, std::size_t airport, int t) const { return caps[index(d, airport, t)]; }

  static PeriodCapacities from_slots(const CapacityLayout& l, std::span<const int> slots, int periods) {
    if (slots.size() != l.num_slots()) throw std::invalid_argument("PeriodCapacities: slot vector has wrong length");
    PeriodCapacities c(l.airports.size(), periods, 0);
    for (std::size_t a = 0; a < l.airports.size(); ++a)
      for (int t = 0; t < periods; ++t)
        for (Direction d : kDirections) c.at(d, a, t) = slots[l.slot(a, l.group_of(t), d)];
    return c;
  }

 private:
  std::size_t index(Direction d, std::size_t airport, int t) const {
    return (dir_index(d) * num_airports + airport) * static_cast<std::size_t>(num_periods) + static_cast<std::size_t>(t);
  }
};

struct MaghpInstance {
  Schedule schedule;  // windows and connections filled in
  CostConfig costs;
  CapacityLayout layout;
  ScenarioSet scenarios;
  double eps_arrival = 0.0;
  double eps_departure = 0.0;

  double eps(Direction d) const { return d == Direction::arrival ? eps_arrival : eps_departure; }

  void validate() const {
    gdp::validate(schedule);
    costs.validate();
    layout.validate(schedule.grid.num_periods);
    if (layout.airports.size() != schedule.airports.size())
      throw ValidationError("MaghpInstance: layout airports differ from the schedule");
    for (std::size_t a = 0; a < layout.airports.size(); ++a)
      if (layout.airports[a] != schedule.airports[a].code)
        throw ValidationError("MaghpInstance: layout airport order differs from the schedule");
    scenarios.validate();
    for (const auto& s : scenarios.scenarios)
      if (s.capacities.size() != layout.num_slots()) throw ValidationError("MaghpInstance: scenario width mismatch");
    if (!(eps_arrival >= 0.0) || !(eps_departure >= 0.0)) throw ValidationError("MaghpInstance: negative radius");
    for (const auto& f : schedule.flights)
      if (f.dep_window.empty() || f.arr_window.empty())
        throw ValidationError("MaghpInstance: flight " + f.id + " has no time windows");
  }

  /// Scenario capacities of one direction, as points for the ground metric.
  std::vector<std::vector<double>> side_points(Direction d) const {
    std::vector<std::vector<double>> pts;
    for (const auto& s : scenarios.scenarios) {
      std::vector<double> p;
      for (std::size_t a = 0; a < layout.airports.size(); ++a)
        for (std::size_t g = 0; g < layout.groups.size(); ++g) p.push_back(s.capacities[layout.slot(a, g, d)]);
      pts.push_back(std::move(p));
    }
    return pts;
  }

  PeriodCapacities scenario_capacities(std::size_t j) const {
    return PeriodCapacities::from_slots(layout, scenarios.scenarios[j].capacities, schedule.grid.num_periods);
  }
};

// ---------------------------------------------------------------------------
// Policies.

struct FlightAssignment {
  std::string id;
  int dep = 0;
  int arr = 0;
  int ground_delay = 0;
  int airborne_delay = 0;
  bool overflow = false;  // arrival placed in the overflow period

  bool delayed() const { return ground_delay + airborne_delay > 0; }
  bool operator==(const FlightAssignment&) const = default;
};

struct GroundHoldingPolicy {
  std::vector<FlightAssignment> flights;  // schedule order

  bool operator==(const GroundHoldingPolicy&) const = default;
};

inline FlightAssignment assign(const Flight& f, int dep, int arr, const TimeGrid& grid) {
  FlightAssignment a;
  a.id = f.id;
  a.dep = dep;
  a.arr = arr;
  a.ground_delay = dep - f.sched_dep;
  a.airborne_delay = arr - f.sched_arr - a.ground_delay;
  a.overflow = arr == grid.overflow();
  return a;
}

inline GroundHoldingPolicy zero_delay_policy(const Schedule& s) {
  GroundHoldingPolicy p;
  for (const auto& f : s.flights) p.flights.push_back(assign(f, f.sched_dep, f.sched_arr, s.grid));
  return p;
}

inline bool in_window(const std::vector<int>& w, int t) { return std::find(w.begin(), w.end(), t) != w.end(); }

/// Throws ValidationError naming the first violated condition.
inline void validate_policy(const GroundHoldingPolicy& p, const Schedule& s) {
  if (p.flights.size() != s.flights.size()) throw ValidationError("policy covers a different number of flights");
  std::map<std::string, const FlightAssignment*> by_id;
  for (std::size_t i = 0; i < p.flights.size(); ++i) {
    const auto& a = p.flights[i];
    const auto& f = s.flights[i];
    if (a.id != f.id) throw ValidationError("policy order differs from the schedule at " + f.id);
    if (!in_window(f.dep_window, a.dep)) throw ValidationError(f.id + ": departure outside its window");
    if (!in_window(f.arr_window, a.arr)) throw ValidationError(f.id + ": arrival outside its window");
    if (a != assign(f, a.dep, a.arr, s.grid)) throw ValidationError(f.id + ": delays inconsistent with assignment");
    if (a.ground_delay < 0) throw ValidationError(f.id + ": negative ground delay");
    if (!a.overflow && a.airborne_delay < 0) throw ValidationError(f.id + ": negative airborne delay");
    by_id[a.id] = &a;
  }
  for (const auto& c : s.connections) {
    const auto& pred = *by_id.at(c.pred);
    const auto& succ = *by_id.at(c.succ);
    if (succ.ground_delay + succ.airborne_delay - c.slack > pred.airborne_delay)
      throw ValidationError("connection " + c.pred + "->" + c.succ + " violated");
  }
}

/// Flights per (direction, airport, real period) under a policy.
inline PeriodCapacities policy_loads(const GroundHoldingPolicy& p, const Schedule& s) {
  PeriodCapacities load(s.airports.size(), s.grid.num_periods, 0);
  for (std::size_t i = 0; i < p.flights.size(); ++i) {
    const auto& f = s.flights[i];
    const auto& a = p.flights[i];
    if (a.dep < s.grid.num_periods) ++load.at(Direction::departure, *s.airport_index(f.origin), a.dep);
    if (a.arr < s.grid.num_periods) ++load.at(Direction::arrival, *s.airport_index(f.destination), a.arr);
  }
  return load;
}

inline double unit_queue_cost(const CostConfig& c, Direction d) {
  return d == Direction::departure ? c.ground_cost : c.airborne_cost;
}

inline double first_stage_cost(const GroundHoldingPolicy& p, const CostConfig& c) {
  double total = 0.0;
  for (const auto& a : p.flights)
    total += c.ground_cost * a.ground_delay + c.airborne_cost * a.airborne_delay + (a.overflow ? c.overflow_cost() : 0.0);
  return total;
}

/// Recourse cost of one side: each flight above capacity joins the queue.
inline double queue_cost(const PeriodCapacities& load, const PeriodCapacities& cap, const CostConfig& c, Direction d) {
  double total = 0.0;
  for (std::size_t a = 0; a < load.num_airports; ++a)
    for (int t = 0; t < load.num_periods; ++t)
      total += unit_queue_cost(c, d) * std::max(0, load.at(d, a, t) - cap.at(d, a, t));
  return total;
}

struct PolicyCost {
  double first_stage = 0.0;
  double departure_queue = 0.0;
  double arrival_queue = 0.0;

  double total() const { return first_stage + departure_queue + arrival_queue; }
};

/// With u, v fixed the second stage separates per (airport, period), and its
/// optimum is y = max(0, load - capacity).
inline PolicyCost evaluate_policy(const GroundHoldingPolicy& p, const Schedule& s, const PeriodCapacities& realized,
                                  const CostConfig& c) {
  const auto load = policy_loads(p, s);
  return {first_stage_cost(p, c), queue_cost(load, realized, c, Direction::departure),
          queue_cost(load, realized, c, Direction::arrival)};
}

/// Per-scenario recourse cost of each side for a fixed policy.
inline std::array<std::vector<double>, 2> scenario_queue_costs(const GroundHoldingPolicy& p, const MaghpInstance& inst) {
  const auto load = policy_loads(p, inst.schedule);
  std::array<std::vector<double>, 2> q;
  for (std::size_t j = 0; j < inst.scenarios.size(); ++j) {
    const auto cap = inst.scenario_capacities(j);
    for (Direction d : kDirections) q[dir_index(d)].push_back(queue_cost(load, cap, inst.costs, d));
  }
  return q;
}

enum class Mode { det, sp, dr };

inline const char* to_string(Mode m) { return m == Mode::det ? "det" : m == Mode::sp ? "sp" : "dr"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "det") return Mode::det;
  if (s == "sp") return Mode::sp;
  if (s == "dr") return Mode::dr;
  throw std::invalid_argument("unknown mode '" + s + "' (expected det, sp or dr)");
}

/// Objective of a fixed policy under the instance's sp or dr criterion,
/// computed from the primal transport form of the inner maximization.
inline double in_sample_value(const GroundHoldingPolicy& p, const MaghpInstance& inst, Mode mode) {
  const auto q = scenario_queue_costs(p, inst);
  std::vector<double> probs;
  for (const auto& s : inst.scenarios.scenarios) probs.push_back(s.prob);
  double total = first_stage_cost(p, inst.costs);
  for (Direction d : kDirections) {
    const auto& qd = q[dir_index(d)];
    if (mode == Mode::dr) {
      total += worst_case_expectation(probs, qd, DistanceMatrix::euclidean(inst.side_points(d)), inst.eps(d)).value;
    } else {
      for (std::size_t j = 0; j < qd.size(); ++j) total += probs[j] * qd[j];
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Model construction.

struct MaghpModel {
  Mode mode = Mode::det;
  lp::MipProblem mip;
  std::vector<std::vector<std::pair<int, std::size_t>>> u;  // per flight: (period, column)
  std::vector<std::vector<std::pair<int, std::size_t>>> v;

  struct QueueVar {
    std::size_t scenario;
    Direction dir;
    std::size_t airport;
    int period;
    std::size_t var;
  };
  std::vector<QueueVar> y;
  std::array<std::vector<std::size_t>, 2> alpha;
  std::array<std::optional<std::size_t>, 2> lambda;
};

namespace detail {

/// Assignment, timing and connection structure shared by every mode.
inline MaghpModel first_stage(const Schedule& s, const CostConfig& c) {
  MaghpModel m;
  auto& lp = m.mip.base;
  const int O = s.grid.overflow();
  for (const auto& f : s.flights) {
    std::vector<std::pair<int, std::size_t>> us, vs;
    for (int t : f.dep_window)
      us.emplace_back(t, m.mip.add_binary((c.ground_cost - c.airborne_cost) * t, "u_" + f.id + "_" + std::to_string(t)));
    for (int t : f.arr_window)
      vs.emplace_back(t, m.mip.add_binary(c.airborne_cost * t + (t == O ? c.overflow_cost() : 0.0),
                                          "v_" + f.id + "_" + std::to_string(t)));
    lp.objective_offset += (c.airborne_cost - c.ground_cost) * f.sched_dep - c.airborne_cost * f.sched_arr;

    std::vector<lp::Term> one_u, one_v, timing;
    for (auto [t, j] : us) {
      one_u.push_back({j, 1.0});
      timing.push_back({j, -static_cast<double>(t)});
    }
    for (auto [t, j] : vs) {
      one_v.push_back({j, 1.0});
      // An overflow arrival is exempt from the flight-time requirement.
      timing.push_back({j, static_cast<double>(t) + (t == O ? f.duration() : 0)});
    }
    lp.add_constraint(std::move(one_u), lp::Relation::equal, 1.0, "dep_" + f.id);
    lp.add_constraint(std::move(one_v), lp::Relation::equal, 1.0, "arr_" + f.id);
    lp.add_constraint(std::move(timing), lp::Relation::greater_equal, f.duration(), "time_" + f.id);
    m.u.push_back(std::move(us));
    m.v.push_back(std::move(vs));
  }

  // g' + a' - s <= a  with  g' + a' = arr' - r'  and  a = arr - dep - (r - d).
  for (const auto& conn : s.connections) {
    const std::size_t p = *s.flight_index(conn.pred), q = *s.flight_index(conn.succ);
    std::map<std::size_t, double> coef;
    for (auto [t, j] : m.v[q]) coef[j] += t;
    for (auto [t, j] : m.v[p]) coef[j] -= t;
    for (auto [t, j] : m.u[p]) coef[j] += t;
    std::vector<lp::Term> terms;
    for (auto [j, a] : coef)
      if (a != 0.0) terms.push_back({j, a});
    lp.add_constraint(std::move(terms), lp::Relation::less_equal,
                      s.flights[q].sched_arr + conn.slack - s.flights[p].duration(), "conn_" + conn.pred + "_" + conn.succ);
  }
  return m;
}

/// Columns that may occupy each (direction, airport, real period).
inline std::vector<std::vector<std::vector<std::size_t>>> occupancy(const MaghpModel& m, const Schedule& s,
                                                                    Direction d) {
  std::vector<std::vector<std::vector<std::size_t>>> occ(
      s.airports.size(), std::vector<std::vector<std::size_t>>(static_cast<std::size_t>(s.grid.num_periods)));
  for (std::size_t i = 0; i < s.flights.size(); ++i) {
    const auto& f = s.flights[i];
    const std::size_t a = *s.airport_index(d == Direction::departure ? f.origin : f.destination);
    for (auto [t, j] : d == Direction::departure ? m.u[i] : m.v[i])
      if (t < s.grid.num_periods) occ[a][static_cast<std::size_t>(t)].push_back(j);
  }
  return occ;
}

/// Adds y columns and soft capacity rows for scenario j; rows that can never
/// bind are skipped. y costs are left at zero for the caller to set.
inline void add_queue_rows(MaghpModel& m, const MaghpInstance& inst, std::size_t j,
                           const std::array<std::vector<std::vector<std::vector<std::size_t>>>, 2>& occ) {
  const auto cap = inst.scenario_capacities(j);
  const auto& s = inst.schedule;
  for (Direction d : kDirections)
    for (std::size_t a = 0; a < s.airports.size(); ++a)
      for (int t = 0; t < s.grid.num_periods; ++t) {
        const auto& cols = occ[dir_index(d)][a][static_cast<std::size_t>(t)];
        const int c = cap.at(d, a, t);
        if (static_cast<int>(cols.size()) <= c) continue;
        const std::string tag = std::string(d == Direction::departure ? "g" : "a") + "_" + std::to_string(j) + "_" +
                                s.airports[a].code + "_" + std::to_string(t);
        const std::size_t y = m.mip.base.add_variable(0.0, 0.0, lp::kInf, "y" + tag);
        std::vector<lp::Term> terms;
        for (auto col : cols) terms.push_back({col, 1.0});
        terms.push_back({y, -1.0});
        m.mip.base.add_constraint(std::move(terms), lp::Relation::less_equal, c, "cap" + tag);
        m.y.push_back({j, d, a, t, y});
      }
}

}  // namespace detail

/// Hard capacities on every real period.
inline MaghpModel build_deterministic(const Schedule& s, const CostConfig& costs, const PeriodCapacities& cap) {
  validate(s);
  costs.validate();
  MaghpModel m = detail::first_stage(s, costs);
  m.mode = Mode::det;
  for (Direction d : kDirections) {
    const auto occ = detail::occupancy(m, s, d);
    for (std::size_t a = 0; a < s.airports.size(); ++a)
      for (int t = 0; t < s.grid.num_periods; ++t) {
        const auto& cols = occ[a][static_cast<std::size_t>(t)];
        const int c = cap.at(d, a, t);
        if (static_cast<int>(cols.size()) <= c) continue;
        std::vector<lp::Term> terms;
        for (auto col : cols) terms.push_back({col, 1.0});
        m.mip.base.add_constraint(std::move(terms), lp::Relation::less_equal, c,
                                  std::string("cap_") + (d == Direction::departure ? "g_" : "a_") + s.airports[a].code +
                                      "_" + std::to_string(t));
      }
  }
  return m;
}

/// Extensive form of the expected-cost two-stage model.
inline MaghpModel build_sp(const MaghpInstance& inst) {
  inst.validate();
  MaghpModel m = detail::first_stage(inst.schedule, inst.costs);
  m.mode = Mode::sp;
  const std::array occ{detail::occupancy(m, inst.schedule, Direction::arrival),
                       detail::occupancy(m, inst.schedule, Direction::departure)};
  for (std::size_t j = 0; j < inst.scenarios.size(); ++j) detail::add_queue_rows(m, inst, j, occ);
  for (const auto& q : m.y)
    m.mip.base.objective[q.var] = inst.scenarios.scenarios[q.scenario].prob * unit_queue_cost(inst.costs, q.dir);
  return m;
}

/// Robust model. Each side's inner maximization over the Wasserstein ball is
/// replaced by its dual: min sum_i p_i alpha_i + eps lambda subject to
/// alpha_i + lambda d_ij >= Q_j, with Q_j the scenario's queue cost.
inline MaghpModel build_dr(const MaghpInstance& inst) {
  inst.validate();
  MaghpModel m = detail::first_stage(inst.schedule, inst.costs);
  m.mode = Mode::dr;
  const std::array occ{detail::occupancy(m, inst.schedule, Direction::arrival),
                       detail::occupancy(m, inst.schedule, Direction::departure)};
  const std::size_t n = inst.scenarios.size();
  for (std::size_t j = 0; j < n; ++j) detail::add_queue_rows(m, inst, j, occ);

  auto& lp = m.mip.base;
  for (Direction d : kDirections) {
    const std::size_t k = dir_index(d);
    const std::string side = d == Direction::departure ? "g" : "a";
    std::vector<std::vector<lp::Term>> q(n);  // Q_j as terms
    for (const auto& y : m.y)
      if (y.dir == d) q[y.scenario].push_back({y.var, -unit_queue_cost(inst.costs, d)});
    bool any = false;
    for (const auto& terms : q) any = any || !terms.empty();
    if (!any) continue;  // recourse cost is identically zero on this side

    const auto dist = DistanceMatrix::euclidean(inst.side_points(d));
    for (std::size_t i = 0; i < n; ++i)
      m.alpha[k].push_back(lp.add_variable(inst.scenarios.scenarios[i].prob, 0.0, lp::kInf,
                                           "alpha_" + side + "_" + std::to_string(i)));
    m.lambda[k] = lp.add_variable(inst.eps(d), 0.0, lp::kInf, "lambda_" + side);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (q[j].empty()) continue;  // alpha_i >= 0 already covers Q_j = 0
        std::vector<lp::Term> terms{{m.alpha[k][i], 1.0}};
        if (dist(i, j) > 0.0) terms.push_back({*m.lambda[k], dist(i, j)});
        terms.insert(terms.end(), q[j].begin(), q[j].end());
        lp.add_constraint(std::move(terms), lp::Relation::greater_equal, 0.0,
                          "dual_" + side + "_" + std::to_string(i) + "_" + std::to_string(j));
      }
  }
  return m;
}

inline MaghpModel build(const MaghpInstance& inst, Mode mode, const PeriodCapacities* fixed = nullptr) {
  switch (mode) {
    case Mode::det:
      if (!fixed) throw std::invalid_argument("build: deterministic mode needs fixed capacities");
      return build_deterministic(inst.schedule, inst.costs, *fixed);
    case Mode::sp:
      return build_sp(inst);
    case Mode::dr:
      return build_dr(inst);
  }
  throw std::logic_error("build: bad mode");
}

inline GroundHoldingPolicy extract_policy(const MaghpModel& m, const Schedule& s, const std::vector<double>& x) {
  GroundHoldingPolicy p;
  for (std::size_t i = 0; i < s.flights.size(); ++i) {
    auto pick = [&](const std::vector<std::pair<int, std::size_t>>& cols) {
      for (auto [t, j] : cols)
        if (x[j] > 0.5) return t;
      throw std::runtime_error("extract_policy: flight " + s.flights[i].id + " has no assigned period");
    };
    p.flights.push_back(assign(s.flights[i], pick(m.u[i]), pick(m.v[i]), s.grid));
  }
  return p;
}

/// Fixes the first-stage columns of `m` to the given policy.
inline void fix_policy(MaghpModel& m, const GroundHoldingPolicy& p) {
  auto& lp = m.mip.base;
  for (std::size_t i = 0; i < p.flights.size(); ++i) {
    for (auto [t, j] : m.u[i]) lp.lower[j] = lp.upper[j] = t == p.flights[i].dep ? 1.0 : 0.0;
    for (auto [t, j] : m.v[i]) lp.lower[j] = lp.upper[j] = t == p.flights[i].arr ? 1.0 : 0.0;
  }
}

// ---------------------------------------------------------------------------
// Solving and reporting.

struct AirportDelayStats {
  std::string airport;
  int departures = 0;
  int delayed_departures = 0;
  int arrivals = 0;
  int delayed_arrivals = 0;

  double delayed_departure_pct() const { return departures ? 100.0 * delayed_departures / departures : 0.0; }
  double delayed_arrival_pct() const { return arrivals ? 100.0 * delayed_arrivals / arrivals : 0.0; }
};

struct SolveReport {
  Mode mode = Mode::det;
  lp::Status status = lp::Status::infeasible;
  double objective = 0.0;
  double first_stage_cost = 0.0;
  double second_stage_cost = 0.0;
  std::array<double, 2> second_stage_by_side{};  // indexed by direction
  double eps_arrival = 0.0;
  double eps_departure = 0.0;
  int ground_delay_periods = 0;
  int airborne_delay_periods = 0;
  int delayed_flights = 0;
  int overflow_flights = 0;
  std::size_t nodes = 0;
  std::size_t iterations = 0;
  double gap = 0.0;
  double best_bound = 0.0;
  std::size_t num_variables = 0;
  std::size_t num_constraints = 0;
  std::vector<AirportDelayStats> airports;
};

struct SolveResult {
  lp::Solution solution;
  GroundHoldingPolicy policy;
  SolveReport report;

  bool optimal() const { return solution.status == lp::Status::optimal; }
};

inline std::vector<AirportDelayStats> airport_delay_stats(const GroundHoldingPolicy& p, const Schedule& s) {
  std::vector<AirportDelayStats> out;
  for (const auto& a : s.airports) out.push_back({a.code});
  for (std::size_t i = 0; i < p.flights.size(); ++i) {
    const auto& f = s.flights[i];
    auto& o = out[*s.airport_index(f.origin)];
    auto& d = out[*s.airport_index(f.destination)];
    ++o.departures;
    o.delayed_departures += p.flights[i].ground_delay > 0;
    ++d.arrivals;
    d.delayed_arrivals += p.flights[i].delayed();
  }
  return out;
}

inline SolveResult solve(const MaghpModel& m, const MaghpInstance& inst, const lp::MipOptions& opt = {}) {
  SolveResult r;
  r.solution = lp::solve_mip(m.mip, opt);
  auto& rep = r.report;
  rep.mode = m.mode;
  rep.status = r.solution.status;
  rep.eps_arrival = inst.eps_arrival;
  rep.eps_departure = inst.eps_departure;
  rep.nodes = r.solution.nodes;
  rep.iterations = r.solution.iterations;
  rep.num_variables = m.mip.base.num_variables();
  rep.num_constraints = m.mip.base.constraints.size();
  if (r.solution.values.empty()) return r;

  const auto& x = r.solution.values;
  r.policy = extract_policy(m, inst.schedule, x);
  rep.objective = r.solution.objective;
  rep.gap = r.solution.gap;
  rep.best_bound = r.solution.best_bound;
  rep.first_stage_cost = first_stage_cost(r.policy, inst.costs);
  for (Direction d : kDirections) {
    const std::size_t k = dir_index(d);
    double side = 0.0;
    if (m.mode == Mode::dr) {
      for (auto j : m.alpha[k]) side += m.mip.base.objective[j] * x[j];
      if (m.lambda[k]) side += m.mip.base.objective[*m.lambda[k]] * x[*m.lambda[k]];
    } else {
      for (const auto& q : m.y)
        if (q.dir == d) side += m.mip.base.objective[q.var] * x[q.var];
    }
    rep.second_stage_by_side[k] = side;
    rep.second_stage_cost += side;
  }
  for (const auto& a : r.policy.flights) {
    rep.ground_delay_periods += a.ground_delay;
    rep.airborne_delay_periods += a.airborne_delay;
    rep.delayed_flights += a.delayed();
    rep.overflow_flights += a.overflow;
  }
  rep.airports = airport_delay_stats(r.policy, inst.schedule);
  return r;
}

/// Builds and solves in one call; `fixed` is required for the deterministic mode.
inline SolveResult solve(const MaghpInstance& inst, Mode mode, const lp::MipOptions& opt = {},
                         const PeriodCapacities* fixed = nullptr) {
  return solve(build(inst, mode, fixed), inst, opt);
}

struct EdgeDelta {
  std::string origin;
  std::string destination;
  int flights = 0;
  double pct_a = 0.0;
  double pct_b = 0.0;

  double delta() const { return pct_b - pct_a; }
};

/// Share of delayed flights per directed airport pair under two policies.
/// Pairs without flights do not appear.
inline std::vector<EdgeDelta> delay_flow_report(const GroundHoldingPolicy& a, const GroundHoldingPolicy& b,
                                                const Schedule& s) {
  if (a.flights.size() != s.flights.size() || b.flights.size() != s.flights.size())
    throw std::invalid_argument("delay_flow_report: policies do not match the schedule");
  std::map<std::pair<std::string, std::string>, std::array<int, 3>> counts;
  for (std::size_t i = 0; i < s.flights.size(); ++i) {
    auto& c = counts[{s.flights[i].origin, s.flights[i].destination}];
    ++c[0];
    c[1] += a.flights[i].delayed();
    c[2] += b.flights[i].delayed();
  }
  std::vector<EdgeDelta> out;
  for (const auto& [edge, c] : counts)
    out.push_back({edge.first, edge.second, c[0], 100.0 * c[1] / c[0], 100.0 * c[2] / c[0]});
  return out;
}

// ---------------------------------------------------------------------------
// JSON.

inline nlohmann::json policy_to_json(const GroundHoldingPolicy& p) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& a : p.flights)
    j[a.id] = {{"assigned_dep_period", a.dep},
               {"assigned_arr_period", a.arr},
               {"g_f", a.ground_delay},
               {"a_f", a.airborne_delay},
               {"overflow", a.overflow}};
  return {{"flights", j}};
}

inline GroundHoldingPolicy policy_from_json(const nlohmann::json& j, const Schedule& s) {
  GroundHoldingPolicy p;
  const auto& fl = j.at("flights");
  for (const auto& f : s.flights) {
    if (!fl.contains(f.id)) throw ValidationError("policy lacks flight " + f.id);
    const auto& e = fl.at(f.id);
    p.flights.push_back(assign(f, e.at("assigned_dep_period").get<int>(), e.at("assigned_arr_period").get<int>(), s.grid));
  }
  validate_policy(p, s);
  return p;
}

inline nlohmann::json report_to_json(const SolveReport& r) {
  nlohmann::json airports = nlohmann::json::array();
  for (const auto& a : r.airports)
    airports.push_back({{"airport", a.airport},
                        {"departures", a.departures},
                        {"delayed_departure_pct", a.delayed_departure_pct()},
                        {"arrivals", a.arrivals},
                        {"delayed_arrival_pct", a.delayed_arrival_pct()}});
  return {{"mode", to_string(r.mode)},
          {"status", lp::to_string(r.status)},
          {"objective", r.objective},
          {"first_stage_cost", r.first_stage_cost},
          {"second_stage_cost", r.second_stage_cost},
          {"second_stage_departure", r.second_stage_by_side[dir_index(Direction::departure)]},
          {"second_stage_arrival", r.second_stage_by_side[dir_index(Direction::arrival)]},
          {"eps_arrival", r.eps_arrival},
          {"eps_departure", r.eps_departure},
          {"ground_delay_periods", r.ground_delay_periods},
          {"airborne_delay_periods", r.airborne_delay_periods},
          {"delayed_flights", r.delayed_flights},
          {"overflow_flights", r.overflow_flights},
          {"solver", {{"nodes", r.nodes},
                      {"lp_iterations", r.iterations},
                      {"mip_gap", r.gap},
                      {"best_bound", r.best_bound},
                      {"variables", r.num_variables},
                      {"constraints", r.num_constraints}}},
          {"airports", airports}};
}

}  // namespace gdp
