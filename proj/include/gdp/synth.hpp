#pragma once

// Desk-scale synthetic data: weather drives capacity, a random planning-day
// schedule supplies demand, and past days of the same daily window supply
// throughput history for capacity estimation and training.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "gdp/capacity.hpp"
#include "gdp/common.hpp"
#include "gdp/predictor.hpp"
#include "gdp/schedule.hpp"

namespace gdp {

/// Capacity lost at full severity of each weather driver.
struct WeatherResponse {
  double vil = 2.0;
  double visibility = 1.0;
  double wind = 1.0;
  double ceiling = 0.5;
};

struct SyntheticSpec {
  int airports = 3;
  int flights_per_pair = 2;
  int base_arrival_capacity = 3;
  int base_departure_capacity = 3;
  WeatherResponse response;
  double noise = 0.0;      // std of throughput noise, flights
  int history_days = 30;
  int max_surplus = 5;     // history demand runs up to capacity + max_surplus
  int min_turn = 1;        // periods between chained flights of one tail
  double departure_spread = 0.5;  // departures fall in this leading fraction of the horizon
  std::uint64_t seed = 1;

  void validate() const {
    if (airports < 2) throw ValidationError("synth: need at least two airports");
    if (airports > 99) throw ValidationError("synth: at most 99 airports");
    if (flights_per_pair < 1) throw ValidationError("synth: flights_per_pair must be positive");
    if (base_arrival_capacity < 1 || base_departure_capacity < 1) throw ValidationError("synth: capacities must be at least 1");
    if (!(noise >= 0.0)) throw ValidationError("synth: noise must be nonnegative");
    if (history_days < 1) throw ValidationError("synth: history_days must be positive");
    if (max_surplus < 0 || min_turn < 0) throw ValidationError("synth: negative surplus or turn");
    if (!(departure_spread > 0.0 && departure_spread <= 1.0)) throw ValidationError("synth: departure_spread must lie in (0,1]");
    for (double c : {response.vil, response.visibility, response.wind, response.ceiling})
      if (!(c >= 0.0)) throw ValidationError("synth: response coefficients must be nonnegative");
  }
};

struct CapacityTruth {
  std::string airport;
  long period = 0;
  Direction direction = Direction::arrival;
  int capacity = 0;
};

struct SyntheticData {
  Schedule schedule;
  std::vector<WeatherRecord> weather;
  std::vector<ThroughputRecord> throughput;
  std::vector<CapacityTruth> truth;
};

inline std::string synth_airport_code(int i) {
  return std::string("S") + static_cast<char>('0' + i / 10) + static_cast<char>('0' + i % 10);
}

/// Capacity implied by one weather row; features in weather_header order.
inline int synth_capacity(const Features& w, int base, const WeatherResponse& r) {
  const double ceiling = w[0], visibility = w[1], vil = w[2], wind = w[6];
  const double loss = r.vil * std::min(1.0, vil / 30.0) + r.visibility * std::clamp(1.0 - visibility / 10.0, 0.0, 1.0) +
                      r.wind * std::clamp((wind - 15.0) / 15.0, 0.0, 1.0) +
                      r.ceiling * std::clamp(1.0 - ceiling / 5000.0, 0.0, 1.0);
  return std::max(1, base - static_cast<int>(std::lround(loss)));
}

namespace detail {

inline double round_to(double x, double step) { return std::round(x / step) * step; }

/// One day of weather for one airport: a storm index that decays and gets hit by shocks.
inline std::vector<Features> synth_day_weather(int periods, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  double storm = uniform01(rng) < 0.3 ? 0.5 * uniform01(rng) : 0.0;
  std::vector<Features> out;
  for (int t = 0; t < periods; ++t) {
    storm = 0.85 * storm + 0.03 * n01(rng);
    if (uniform01(rng) < 0.08) storm += 0.4 + 0.5 * uniform01(rng);
    storm = std::clamp(storm, 0.0, 1.0);
    Features f;
    f[0] = round_to(std::max(200.0, 5000.0 * (1.0 - 0.85 * storm) + 300.0 * n01(rng)), 100.0);
    f[1] = round_to(std::clamp(10.0 * (1.0 - 0.75 * storm) + 0.5 * n01(rng), 0.25, 10.0), 0.25);
    f[2] = round_to(std::max(0.0, 30.0 * storm + n01(rng)), 0.1);
    f[3] = round_to(20.0 + 4.0 * std::sin(2.0 * std::numbers::pi * t / 96.0) + n01(rng), 0.1);
    f[4] = round_to(f[3] - 6.0 * (1.0 - storm) - 1.0 - 0.5 * std::abs(n01(rng)), 0.1);
    f[5] = std::floor(360.0 * uniform01(rng));
    f[6] = round_to(std::max(0.0, 8.0 + 22.0 * storm + 2.0 * n01(rng)), 0.5);
    out.push_back(f);
  }
  return out;
}

}  // namespace detail

/// Planning day at periods 0..P-1 of `grid`; history days at offsets of whole days before it.
inline SyntheticData generate_synthetic(const SyntheticSpec& spec, const TimeGrid& grid) {
  spec.validate();
  grid.validate();
  const int P = grid.num_periods;
  if (P < 4) throw ValidationError("synth: horizon must have at least 4 periods");
  const long day = 1440 / grid.period_minutes;
  if (1440 % grid.period_minutes != 0) throw ValidationError("synth: period length must divide a day");
  if (P > day) throw ValidationError("synth: horizon longer than a day");

  std::mt19937_64 rng(spec.seed);
  SyntheticData out;
  auto& s = out.schedule;
  s.grid = grid;
  for (int a = 0; a < spec.airports; ++a) s.airports.push_back({synth_airport_code(a), 0});

  // Weather and capacity, day -history_days .. 0.
  std::map<std::pair<std::string, long>, Features> wx;
  for (int a = 0; a < spec.airports; ++a) {
    const auto code = synth_airport_code(a);
    for (int d = -spec.history_days; d <= 0; ++d) {
      const auto days = detail::synth_day_weather(P, rng);
      for (int t = 0; t < P; ++t) {
        const long period = d * day + t;
        out.weather.push_back({code, period, days[t]});
        wx[{code, period}] = days[t];
        for (Direction dir : kDirections) {
          const int base = dir == Direction::arrival ? spec.base_arrival_capacity : spec.base_departure_capacity;
          out.truth.push_back({code, period, dir, synth_capacity(days[t], base, spec.response)});
        }
      }
    }
  }

  // Throughput history: demand around capacity, a queue when it exceeds it.
  std::normal_distribution<double> noise(0.0, spec.noise);
  for (const auto& c : out.truth) {
    if (c.period >= 0) continue;
    ThroughputRecord r;
    r.airport = c.airport;
    r.period = c.period;
    r.direction = c.direction;
    const int span = spec.max_surplus + 3;
    r.demand = std::max(0, c.capacity - 2 + static_cast<int>(uniform01(rng) * span));
    const int queue = std::max(0, r.demand - c.capacity);
    r.throughput = std::min(r.demand, c.capacity);
    if (spec.noise > 0.0) r.throughput = std::clamp(r.throughput + static_cast<int>(std::lround(noise(rng))), 0, r.demand);
    r.num_delayed = queue;
    r.avg_delay = queue > 0 ? grid.period_minutes * queue / 2.0 : 0.0;
    out.throughput.push_back(r);
  }

  // Planning-day schedule: flights_per_pair per ordered pair, departures early in the horizon.
  int next_id = 1;
  for (int a = 0; a < spec.airports; ++a)
    for (int b = 0; b < spec.airports; ++b) {
      if (a == b) continue;
      for (int k = 0; k < spec.flights_per_pair; ++k) {
        Flight f;
        char id[16];
        std::snprintf(id, sizeof id, "F%03d", next_id++);
        f.id = id;
        f.origin = synth_airport_code(a);
        f.destination = synth_airport_code(b);
        const int dur = 2 + static_cast<int>(uniform01(rng) * 3);  // 2..4
        const int band = std::max(1, static_cast<int>(std::lround(spec.departure_spread * P)));
        const int latest = std::max(0, std::min(band - 1, P - 1 - dur));
        f.sched_dep = static_cast<int>(uniform01(rng) * (latest + 1));
        f.sched_arr = std::min(P - 1, f.sched_dep + dur);
        s.flights.push_back(std::move(f));
      }
    }
  std::stable_sort(s.flights.begin(), s.flights.end(),
                   [](const Flight& x, const Flight& y) { return x.sched_dep < y.sched_dep; });

  // Tails: greedily chain a flight to the earliest later flight out of its destination.
  std::vector<bool> has_pred(s.flights.size(), false);
  int next_tail = 1;
  for (std::size_t i = 0; i < s.flights.size(); ++i) {
    if (s.flights[i].tail) continue;
    std::size_t cur = i;
    std::string tail = "T" + std::to_string(next_tail);
    bool chained = false;
    for (std::size_t j = 0; j < s.flights.size(); ++j) {
      const auto& g = s.flights[j];
      if (j == cur || has_pred[j] || g.tail || g.origin != s.flights[cur].destination) continue;
      if (g.sched_dep < s.flights[cur].sched_arr + spec.min_turn) continue;
      s.flights[cur].tail = tail;
      s.flights[j].tail = tail;
      has_pred[j] = true;
      chained = true;
      break;
    }
    if (chained) ++next_tail;
  }
  return out;
}

inline void write_truth(std::ostream& os, const std::vector<CapacityTruth>& ts, const TimeGrid& grid) {
  os << "airport,period_iso,direction,capacity\n";
  for (const auto& t : ts)
    os << t.airport << ',' << format_timestamp(grid.timestamp_of(static_cast<int>(t.period))) << ','
       << to_string(t.direction) << ',' << t.capacity << '\n';
}

}  // namespace gdp
