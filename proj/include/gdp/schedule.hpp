#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <tuple>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gdp/common.hpp"
#include "gdp/csv.hpp"

namespace gdp {

// ---------------------------------------------------------------------------
// Timestamps: minutes since 1970-01-01T00:00, no time zone.

inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y = static_cast<int>(yoe) + static_cast<int>(era) * 400 + (m <= 2);
}

/// Parses "YYYY-MM-DDTHH:MM" with optional ":SS" (seconds are truncated).
inline std::int64_t parse_timestamp(const std::string& s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  char t = 0;
  int consumed = 0;
  const int n = std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &y, &mo, &d, &t, &h, &mi, &consumed);
  if (n < 6 || (t != 'T' && t != ' ')) throw ParseError("bad timestamp '" + s + "'");
  if (static_cast<std::size_t>(consumed) != s.size()) {
    int more = 0;
    if (std::sscanf(s.c_str() + consumed, ":%2d%n", &sec, &more) != 1 ||
        static_cast<std::size_t>(consumed + more) != s.size())
      throw ParseError("bad timestamp '" + s + "'");
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 59 || h < 0 || mi < 0)
    throw ParseError("timestamp out of range '" + s + "'");
  return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 1440 + h * 60 + mi;
}

inline std::string format_timestamp(std::int64_t minutes) {
  std::int64_t days = minutes >= 0 ? minutes / 1440 : -((-minutes + 1439) / 1440);
  const std::int64_t rem = minutes - days * 1440;
  int y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d", y, m, d, static_cast<int>(rem / 60),
                static_cast<int>(rem % 60));
  return buf;
}

// ---------------------------------------------------------------------------

/// Discrete planning horizon. Periods 0..num_periods-1 are real; index
/// num_periods is the overflow period that absorbs flights pushed past the end.
struct TimeGrid {
  std::int64_t start = 0;  // minutes since epoch
  int num_periods = 48;
  int period_minutes = 15;

  int overflow() const { return num_periods; }

  void validate() const {
    if (num_periods < 1) throw ValidationError("TimeGrid: num_periods must be >= 1");
    if (period_minutes < 1) throw ValidationError("TimeGrid: period_minutes must be >= 1");
  }

  /// Floor division of the offset from the start.
  std::int64_t period_of(std::int64_t minutes) const {
    const std::int64_t off = minutes - start;
    return off >= 0 ? off / period_minutes : -((-off + period_minutes - 1) / period_minutes);
  }

  std::int64_t timestamp_of(int period) const { return start + static_cast<std::int64_t>(period) * period_minutes; }

  bool operator==(const TimeGrid&) const = default;
};

inline void to_json(nlohmann::json& j, const TimeGrid& g) {
  j = {{"start", format_timestamp(g.start)}, {"num_periods", g.num_periods}, {"period_minutes", g.period_minutes}};
}

inline void from_json(const nlohmann::json& j, TimeGrid& g) {
  g.start = parse_timestamp(j.at("start").get<std::string>());
  g.num_periods = j.value("num_periods", 48);
  g.period_minutes = j.value("period_minutes", 15);
  g.validate();
}

struct Airport {
  std::string code;
  int max_capacity_hist = 0;

  bool operator==(const Airport&) const = default;
};

struct Flight {
  std::string id;
  std::string origin;
  std::string destination;
  int sched_dep = 0;
  int sched_arr = 0;
  std::optional<std::string> tail;
  std::vector<int> dep_window;
  std::vector<int> arr_window;

  int duration() const { return sched_arr - sched_dep; }

  bool operator==(const Flight&) const = default;
};

struct TailConnection {
  std::string pred;
  std::string succ;
  int slack = 0;

  bool operator==(const TailConnection&) const = default;
};

struct CostConfig {
  double ground_cost = 1.0;
  double airborne_cost = 2.0;
  double overflow_multiplier = 1000.0;

  /// Per-flight price of landing in the overflow period.
  double overflow_cost() const { return overflow_multiplier * airborne_cost; }

  void validate() const {
    if (!(ground_cost > 0.0)) throw ValidationError("CostConfig: ground_cost must be positive");
    if (!(airborne_cost >= ground_cost)) throw ValidationError("CostConfig: airborne cost must be >= ground cost");
  }
};

struct Schedule {
  std::vector<Airport> airports;
  std::vector<Flight> flights;
  std::vector<TailConnection> connections;
  TimeGrid grid;

  std::optional<std::size_t> airport_index(const std::string& code) const {
    for (std::size_t i = 0; i < airports.size(); ++i)
      if (airports[i].code == code) return i;
    return std::nullopt;
  }

  std::optional<std::size_t> flight_index(const std::string& id) const {
    for (std::size_t i = 0; i < flights.size(); ++i)
      if (flights[i].id == id) return i;
    return std::nullopt;
  }

  bool operator==(const Schedule&) const = default;
};

/// Window containing sched and later periods up to `span`, truncated at the overflow period.
inline std::vector<int> contiguous_window(int sched, int span, const TimeGrid& grid) {
  std::vector<int> w;
  const int last = std::min(sched + span, grid.overflow());
  for (int t = sched; t <= last; ++t) w.push_back(t);
  return w;
}

inline std::pair<std::vector<int>, std::vector<int>> build_time_windows(const Flight& f, const TimeGrid& grid,
                                                                        int max_ground_delay, int max_airborne_delay) {
  if (max_ground_delay < 0 || max_airborne_delay < 0) throw std::invalid_argument("build_time_windows: negative delay");
  return {contiguous_window(f.sched_dep, max_ground_delay, grid),
          contiguous_window(f.sched_arr, max_ground_delay + max_airborne_delay, grid)};
}

inline void apply_time_windows(Schedule& s, int max_ground_delay, int max_airborne_delay) {
  for (auto& f : s.flights) std::tie(f.dep_window, f.arr_window) = build_time_windows(f, s.grid, max_ground_delay, max_airborne_delay);
}

inline void validate(const Schedule& s) {
  s.grid.validate();
  std::set<std::string> codes;
  for (const auto& a : s.airports) {
    if (!codes.insert(a.code).second) throw ValidationError("duplicate airport code " + a.code);
    if (a.max_capacity_hist < 0) throw ValidationError("airport " + a.code + ": negative historical maximum");
  }
  std::set<std::string> ids;
  for (const auto& f : s.flights) {
    if (!ids.insert(f.id).second) throw ValidationError("duplicate flight id " + f.id);
    if (!codes.count(f.origin) || !codes.count(f.destination))
      throw ValidationError("flight " + f.id + " references an unknown airport");
    if (f.sched_arr <= f.sched_dep) throw ValidationError("flight " + f.id + ": sched_arr must be after sched_dep");
    if (f.sched_dep < 0 || f.sched_arr >= s.grid.num_periods)
      throw ValidationError("flight " + f.id + ": schedule falls outside the planning horizon");
    if (!f.dep_window.empty() || !f.arr_window.empty()) {
      auto valid = [&](const std::vector<int>& w) {
        return std::all_of(w.begin(), w.end(), [&](int t) { return t >= 0 && t <= s.grid.overflow(); });
      };
      if (f.dep_window.empty() || f.arr_window.empty() || !valid(f.dep_window) || !valid(f.arr_window))
        throw ValidationError("flight " + f.id + ": window outside the grid");
      if (std::find(f.dep_window.begin(), f.dep_window.end(), f.sched_dep) == f.dep_window.end())
        throw ValidationError("flight " + f.id + ": departure window misses sched_dep");
      if (std::find(f.arr_window.begin(), f.arr_window.end(), f.sched_arr) == f.arr_window.end())
        throw ValidationError("flight " + f.id + ": arrival window misses sched_arr");
      if (*std::min_element(f.arr_window.begin(), f.arr_window.end()) -
              *std::min_element(f.dep_window.begin(), f.dep_window.end()) !=
          f.duration())
        throw ValidationError("flight " + f.id + ": window offsets disagree with the flight duration");
    }
  }
  std::set<std::string> succs;
  for (const auto& c : s.connections) {
    auto p = s.flight_index(c.pred), q = s.flight_index(c.succ);
    if (!p || !q) throw ValidationError("connection references an unknown flight");
    if (s.flights[*p].destination != s.flights[*q].origin)
      throw ValidationError("connection " + c.pred + "->" + c.succ + ": airports do not chain");
    if (c.slack < 0) throw ValidationError("connection " + c.pred + "->" + c.succ + ": negative slack");
    if (!succs.insert(c.succ).second) throw ValidationError("flight " + c.succ + " succeeds more than one flight");
  }
}

inline const std::vector<std::string>& schedule_header() {
  static const std::vector<std::string> h{"flight_id", "origin", "dest", "sched_dep_iso", "sched_arr_iso", "tail"};
  return h;
}

/// Parses flights; airports are the sorted set of codes seen. Windows are left
/// empty and connections unset (see apply_time_windows and build_connections).
inline Schedule parse_schedule(std::istream& in, const TimeGrid& grid) {
  grid.validate();
  auto table = csv::read(in, schedule_header());
  Schedule s;
  s.grid = grid;
  std::set<std::string> codes;
  for (const auto& row : table.rows) {
    Flight f;
    f.id = row.at(0);
    f.origin = row.at(1);
    f.destination = row.at(2);
    if (f.id.empty() || f.origin.empty() || f.destination.empty()) throw ParseError("empty identifier", row.line);
    try {
      f.sched_dep = static_cast<int>(grid.period_of(parse_timestamp(row.at(3))));
      f.sched_arr = static_cast<int>(grid.period_of(parse_timestamp(row.at(4))));
    } catch (const ParseError& e) {
      throw ParseError(e.detail(), row.line);
    }
    if (!row.at(5).empty()) f.tail = row.at(5);
    codes.insert(f.origin);
    codes.insert(f.destination);
    s.flights.push_back(std::move(f));
  }
  for (const auto& c : codes) s.airports.push_back(Airport{c, 0});
  validate(s);
  return s;
}

inline Schedule load_schedule(const std::string& path, const TimeGrid& grid) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return parse_schedule(in, grid);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.detail(), e.line());
  }
}

inline void write_schedule(std::ostream& os, const Schedule& s) {
  const auto& h = schedule_header();
  for (std::size_t i = 0; i < h.size(); ++i) os << (i ? "," : "") << h[i];
  os << '\n';
  for (const auto& f : s.flights)
    os << f.id << ',' << f.origin << ',' << f.destination << ',' << format_timestamp(s.grid.timestamp_of(f.sched_dep))
       << ',' << format_timestamp(s.grid.timestamp_of(f.sched_arr)) << ',' << f.tail.value_or("") << '\n';
}

struct ConnectionReport {
  std::vector<TailConnection> connections;
  std::vector<std::string> warnings;
};

/// Pairs consecutive flights of each tail (by scheduled departure). Slack is
/// the scheduled ground time above the minimum turnaround, clipped at zero.
inline ConnectionReport build_connections(const Schedule& s, int min_turnaround = 3) {
  if (min_turnaround < 0) throw std::invalid_argument("build_connections: negative turnaround");
  std::map<std::string, std::vector<std::size_t>> by_tail;
  for (std::size_t i = 0; i < s.flights.size(); ++i)
    if (s.flights[i].tail) by_tail[*s.flights[i].tail].push_back(i);

  ConnectionReport out;
  for (auto& [tail, idx] : by_tail) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return s.flights[a].sched_dep < s.flights[b].sched_dep;
    });
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
      const Flight& f = s.flights[idx[k]];
      const Flight& g = s.flights[idx[k + 1]];
      if (f.destination != g.origin) {
        out.warnings.push_back("tail " + tail + ": " + f.id + " lands at " + f.destination + " but " + g.id +
                               " departs " + g.origin + "; no connection");
        continue;
      }
      int slack = g.sched_dep - f.sched_arr - min_turnaround;
      if (slack < 0) {
        out.warnings.push_back("tail " + tail + ": " + f.id + "->" + g.id + " turnaround below minimum by " +
                               std::to_string(-slack) + " period(s); slack clipped to 0");
        slack = 0;
      }
      out.connections.push_back(TailConnection{f.id, g.id, slack});
    }
  }
  return out;
}

}  // namespace gdp
