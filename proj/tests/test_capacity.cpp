#include <catch_amalgamated.hpp>

#include <random>
#include <set>
#include <sstream>

#include "gdp/capacity.hpp"

using namespace gdp;

namespace {

ThroughputRecord rec(long period, int demand, int throughput, double delay, int delayed,
                     Direction dir = Direction::arrival) {
  return {"AAA", period, dir, demand, throughput, delay, delayed};
}

// Written out from the selection rule directly, without the library helpers.
bool oracle(const ThroughputRecord& r, int tau) {
  const bool a = r.demand - r.throughput >= tau;
  const bool b = r.avg_delay > 30.0 && r.num_delayed >= 2;
  return a || b;
}

std::vector<ThroughputRecord> random_records(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> thr(0, 40), extra(-2, 8), delayed(0, 4);
  std::uniform_real_distribution<double> delay(0.0, 60.0);
  std::vector<ThroughputRecord> out;
  for (int i = 0; i < n; ++i) {
    int t = thr(rng);
    out.push_back(rec(i, std::max(0, t + extra(rng)), t, std::round(delay(rng)), delayed(rng),
                      i % 2 ? Direction::departure : Direction::arrival));
  }
  return out;
}

}  // namespace

TEST_CASE("selection rules", "[capacity]") {
  CHECK(rule_select(rec(0, 20, 15, 0, 0)));
  CHECK(rule_select(rec(0, 10, 10, 35, 2)));
  CHECK_FALSE(rule_select(rec(0, 10, 9, 31, 1)));
  // Boundaries: Rule 1 is inclusive, both halves of Rule 2 strict.
  CHECK(rule_select(rec(0, 18, 15, 0, 0)));
  CHECK_FALSE(rule_select(rec(0, 17, 15, 0, 0)));
  CHECK_FALSE(rule_select(rec(0, 10, 10, 30, 5)));
}

TEST_CASE("estimate_capacities", "[capacity]") {
  CHECK(estimate_capacities({}).empty());
  CHECK(estimate_capacities({rec(0, 10, 10, 0, 0)}).empty());

  auto obs = estimate_capacities({rec(0, 20, 15, 0, 0), rec(1, 10, 10, 35, 2)});
  REQUIRE(obs.size() == 2);
  CHECK(obs[0].capacity_hat == 15);
  CHECK(obs[1].capacity_hat == 10);

  std::vector<ThroughputRecord> mixed{
      rec(0, 20, 15, 0, 0), rec(1, 10, 10, 35, 2), rec(2, 10, 9, 31, 1), rec(3, 5, 5, 0, 0),
      rec(4, 9, 6, 10, 0),  rec(5, 7, 7, 45, 3),   rec(6, 8, 7, 29, 9),  rec(7, 4, 2, 31, 1),
      rec(8, 0, 0, 0, 0),   rec(9, 12, 11, 60, 1)};
  int expected = 0;
  for (const auto& r : mixed) expected += oracle(r, 3);
  REQUIRE(expected == 4);
  CHECK(estimate_capacities(mixed).size() == 4);
}

TEST_CASE("selection properties on random records", "[capacity]") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto rs = random_records(rng, 200);
    SelectionRule p;
    auto obs = estimate_capacities(rs, p);

    std::size_t i = 0;
    for (const auto& r : rs) {
      if (!oracle(r, 3)) continue;
      REQUIRE(i < obs.size());
      CHECK(obs[i].period == r.period);
      CHECK(obs[i].capacity_hat == r.throughput);
      ++i;
    }
    CHECK(i == obs.size());

    std::set<long> r1, r2, all;
    for (const auto& r : rs) {
      if (rule1(r, p)) r1.insert(r.period);
      if (rule2(r, p)) r2.insert(r.period);
    }
    for (const auto& o : obs) all.insert(o.period);
    std::set<long> uni = r1;
    uni.insert(r2.begin(), r2.end());
    CHECK(all == uni);

    std::size_t prev = rs.size() + 1;
    for (int tau = 0; tau <= 10; ++tau) {
      SelectionRule q;
      q.tau = tau;
      auto n = estimate_capacities(rs, q).size();
      CHECK(n <= prev);
      prev = n;
    }
  }
}

TEST_CASE("throughput ranking", "[capacity]") {
  auto ranked = throughput_ranking({rec(1, 0, 5, 0, 0), rec(2, 0, 9, 0, 0)}, false);
  CHECK(ranked[0].period == 2);
  CHECK(ranked[1].period == 1);

  ranked = throughput_ranking({rec(4, 0, 7, 0, 0), rec(1, 0, 7, 0, 0), rec(3, 0, 9, 0, 0), rec(2, 0, 7, 0, 0)}, false);
  std::vector<long> periods;
  for (const auto& r : ranked) periods.push_back(r.period);
  CHECK(periods == std::vector<long>{3, 1, 2, 4});

  ranked = throughput_ranking({rec(1, 20, 15, 0, 0), rec(2, 30, 30, 0, 0), rec(3, 10, 10, 35, 2)}, true);
  REQUIRE(ranked.size() == 2);
  CHECK(ranked[0].period == 1);
  CHECK(ranked[1].period == 3);
}

TEST_CASE("throughput CSV", "[capacity]") {
  TimeGrid g;
  g.start = parse_timestamp("2019-01-01T00:00");
  const std::string header = "airport,period_iso,direction,demand,throughput,avg_delay_min,num_delayed\n";

  std::istringstream in(header + "AAA,2019-01-01T01:00,arrival,20,15,0,0\nAAA,2019-01-02T00:00,departure,10,10,35.5,2\n");
  auto rs = parse_throughput(csv::read(in, throughput_header()), g);
  REQUIRE(rs.size() == 2);
  CHECK(rs[0].period == 4);
  CHECK(rs[1].period == 96);
  CHECK(rs[1].direction == Direction::departure);
  CHECK(rs[1].avg_delay == 35.5);

  std::ostringstream out;
  write_throughput(out, rs, g);
  std::istringstream again(out.str());
  CHECK(parse_throughput(csv::read(again, throughput_header()), g) == rs);

  auto bad = [&](const std::string& row) {
    std::istringstream s(header + row);
    return parse_throughput(csv::read(s, throughput_header()), g);
  };
  CHECK_THROWS_AS(bad("AAA,2019-01-01T01:00,arrival,20,15.5,0,0\n"), ParseError);
  CHECK_THROWS_AS(bad("AAA,2019-01-01T01:00,sideways,20,15,0,0\n"), ParseError);
  CHECK_THROWS_AS(bad("AAA,2019-01-01T01:00,arrival,20,-1,0,0\n"), ParseError);
  CHECK_THROWS_AS(bad("AAA,2019-01-01T01:00,arrival,20,x,0,0\n"), ParseError);
}
