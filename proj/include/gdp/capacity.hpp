#pragma once

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

#include "gdp/common.hpp"
#include "gdp/csv.hpp"
#include "gdp/schedule.hpp"

namespace gdp {

struct ThroughputRecord {
  std::string airport;
  long period = 0;
  Direction direction = Direction::arrival;
  int demand = 0;
  int throughput = 0;
  double avg_delay = 0.0;  // minutes
  int num_delayed = 0;

  void validate() const {
    if (demand < 0 || throughput < 0 || num_delayed < 0 || !(avg_delay >= 0.0))
      throw ValidationError("throughput record for " + airport + " has a negative field");
  }

  bool operator==(const ThroughputRecord&) const = default;
};

struct CapacityObservation {
  std::string airport;
  long period = 0;
  Direction direction = Direction::arrival;
  int capacity_hat = 0;

  bool operator==(const CapacityObservation&) const = default;
};

struct SelectionRule {
  int tau = 3;
  double delay_thresh = 30.0;
  int min_delayed = 1;
};

inline bool rule1(const ThroughputRecord& r, const SelectionRule& p) { return r.demand >= r.throughput + p.tau; }

inline bool rule2(const ThroughputRecord& r, const SelectionRule& p) {
  return r.avg_delay > p.delay_thresh && r.num_delayed > p.min_delayed;
}

/// True when the period looks saturated, so throughput is a fair read of capacity.
inline bool rule_select(const ThroughputRecord& r, const SelectionRule& p = {}) { return rule1(r, p) || rule2(r, p); }

inline std::vector<CapacityObservation> estimate_capacities(const std::vector<ThroughputRecord>& records,
                                                            const SelectionRule& p = {}) {
  std::vector<CapacityObservation> out;
  for (const auto& r : records)
    if (rule_select(r, p)) out.push_back({r.airport, r.period, r.direction, r.throughput});
  return out;
}

/// Records sorted by descending throughput; equal throughput keeps ascending period.
inline std::vector<ThroughputRecord> throughput_ranking(std::vector<ThroughputRecord> records, bool selected_only,
                                                        const SelectionRule& p = {}) {
  if (selected_only)
    records.erase(std::remove_if(records.begin(), records.end(), [&](const auto& r) { return !rule_select(r, p); }),
                  records.end());
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    if (a.throughput != b.throughput) return a.throughput > b.throughput;
    return a.period < b.period;
  });
  return records;
}

inline const std::vector<std::string>& throughput_header() {
  static const std::vector<std::string> h{"airport",    "period_iso",    "direction",  "demand",
                                          "throughput", "avg_delay_min", "num_delayed"};
  return h;
}

inline const std::vector<std::string>& observation_header() {
  static const std::vector<std::string> h{"airport", "period_iso", "direction", "capacity_hat"};
  return h;
}

/// Period indices are relative to `grid.start` and may run past the horizon.
inline std::vector<ThroughputRecord> parse_throughput(const csv::Table& t, const TimeGrid& grid) {
  std::vector<ThroughputRecord> out;
  for (const auto& row : t.rows) {
    ThroughputRecord r;
    r.airport = row.at(0);
    try {
      r.period = static_cast<long>(grid.period_of(parse_timestamp(row.at(1))));
      r.direction = parse_direction(row.at(2));
    } catch (const ParseError& e) {
      throw ParseError(e.detail(), row.line);
    }
    r.demand = static_cast<int>(csv::to_integer(row.at(3), row.line, "demand"));
    r.throughput = static_cast<int>(csv::to_integer(row.at(4), row.line, "throughput"));
    r.avg_delay = csv::to_double(row.at(5), row.line, "avg_delay_min");
    r.num_delayed = static_cast<int>(csv::to_integer(row.at(6), row.line, "num_delayed"));
    try {
      r.validate();
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), row.line);
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<ThroughputRecord> load_throughput(const std::string& path, const TimeGrid& grid) {
  return parse_throughput(csv::read_file(path, throughput_header()), grid);
}

inline void write_throughput(std::ostream& os, const std::vector<ThroughputRecord>& rs, const TimeGrid& grid) {
  os << "airport,period_iso,direction,demand,throughput,avg_delay_min,num_delayed\n";
  for (const auto& r : rs)
    os << r.airport << ',' << format_timestamp(grid.timestamp_of(static_cast<int>(r.period))) << ','
       << to_string(r.direction) << ',' << r.demand << ',' << r.throughput << ',' << csv::format_double(r.avg_delay)
       << ',' << r.num_delayed << '\n';
}

inline void write_observations(std::ostream& os, const std::vector<CapacityObservation>& obs, const TimeGrid& grid) {
  os << "airport,period_iso,direction,capacity_hat\n";
  for (const auto& o : obs)
    os << o.airport << ',' << format_timestamp(grid.timestamp_of(static_cast<int>(o.period))) << ','
       << to_string(o.direction) << ',' << o.capacity_hat << '\n';
}

inline std::vector<CapacityObservation> load_observations(const std::string& path, const TimeGrid& grid) {
  auto t = csv::read_file(path, observation_header());
  std::vector<CapacityObservation> out;
  for (const auto& row : t.rows) {
    CapacityObservation o;
    o.airport = row.at(0);
    try {
      o.period = static_cast<long>(grid.period_of(parse_timestamp(row.at(1))));
      o.direction = parse_direction(row.at(2));
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.detail(), row.line);
    }
    o.capacity_hat = static_cast<int>(csv::to_integer(row.at(3), row.line, "capacity_hat"));
    if (o.capacity_hat < 0) throw ParseError("negative capacity_hat", row.line);
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace gdp
