#include <catch_amalgamated.hpp>

#include <sstream>

#include "gdp/schedule.hpp"

using namespace gdp;

namespace {

TimeGrid grid_at(const char* start, int periods = 48) {
  TimeGrid g;
  g.start = parse_timestamp(start);
  g.num_periods = periods;
  g.period_minutes = 15;
  return g;
}

Schedule parse(const std::string& text, const TimeGrid& g) {
  std::istringstream in(text);
  return parse_schedule(in, g);
}

const char* kHeader = "flight_id,origin,dest,sched_dep_iso,sched_arr_iso,tail\n";

Flight flight(const char* id, const char* o, const char* d, int dep, int arr, const char* tail = nullptr) {
  Flight f;
  f.id = id;
  f.origin = o;
  f.destination = d;
  f.sched_dep = dep;
  f.sched_arr = arr;
  if (tail) f.tail = tail;
  return f;
}

Schedule two_airports(std::vector<Flight> flights) {
  Schedule s;
  s.airports = {{"AAA", 0}, {"BBB", 0}};
  s.flights = std::move(flights);
  s.grid = grid_at("2019-12-31T09:00");
  return s;
}

}  // namespace

TEST_CASE("timestamps round trip", "[schedule]") {
  for (const char* t : {"1970-01-01T00:00", "2019-12-31T09:00", "2020-02-29T23:45", "1969-07-20T20:17"})
    CHECK(format_timestamp(parse_timestamp(t)) == t);
  CHECK(parse_timestamp("2019-12-31T09:00:59") == parse_timestamp("2019-12-31T09:00"));
  CHECK(parse_timestamp("2020-01-01T00:00") - parse_timestamp("2019-12-31T23:00") == 60);
  CHECK_THROWS_AS(parse_timestamp("2019-13-01T00:00"), ParseError);
  CHECK_THROWS_AS(parse_timestamp("yesterday"), ParseError);
  CHECK_THROWS_AS(parse_timestamp("2019-12-31T09:00Z"), ParseError);
}

TEST_CASE("grid floor division", "[schedule]") {
  auto g = grid_at("2019-12-31T09:00");
  CHECK(g.period_of(parse_timestamp("2019-12-31T09:14")) == 0);
  CHECK(g.period_of(parse_timestamp("2019-12-31T09:15")) == 1);
  CHECK(g.period_of(parse_timestamp("2019-12-31T08:59")) == -1);
  CHECK(g.overflow() == 48);
  nlohmann::json j = g;
  CHECK(j.get<TimeGrid>() == g);
  CHECK_THROWS_AS(nlohmann::json({{"start", "2019-12-31T09:00"}, {"num_periods", 0}}).get<TimeGrid>(), ValidationError);
}

TEST_CASE("schedule CSV parsing", "[schedule]") {
  auto g = grid_at("2019-12-31T09:00");

  SECTION("timestamps map to period indices") {
    auto s = parse(std::string(kHeader) + "F1,AAA,BBB,2019-12-31T09:00,2019-12-31T10:00,T1\n", g);
    REQUIRE(s.flights.size() == 1);
    CHECK(s.flights[0].sched_dep == 0);
    CHECK(s.flights[0].sched_arr == 4);
    CHECK(s.flights[0].tail == std::optional<std::string>("T1"));
    REQUIRE(s.airports.size() == 2);
    CHECK(s.airports[0].code == "AAA");
  }
  SECTION("empty flight section") {
    auto s = parse(kHeader, g);
    CHECK(s.flights.empty());
    CHECK(s.airports.empty());
  }
  SECTION("empty tail") {
    auto s = parse(std::string(kHeader) + "F1,AAA,BBB,2019-12-31T09:00,2019-12-31T10:00,\n", g);
    CHECK_FALSE(s.flights[0].tail.has_value());
  }
  SECTION("arrival not after departure") {
    CHECK_THROWS_AS(parse(std::string(kHeader) + "F1,AAA,BBB,2019-12-31T10:00,2019-12-31T10:00,\n", g),
                    ValidationError);
    CHECK_THROWS_AS(parse(std::string(kHeader) + "F1,AAA,BBB,2019-12-31T10:00,2019-12-31T10:10,\n", g),
                    ValidationError);
  }
  SECTION("outside the horizon") {
    CHECK_THROWS_AS(parse(std::string(kHeader) + "F1,AAA,BBB,2019-12-31T08:00,2019-12-31T10:00,\n", g),
                    ValidationError);
    CHECK_THROWS_AS(parse(std::string(kHeader) + "F1,AAA,BBB,2019-12-31T09:00,2019-12-31T21:00,\n", g),
                    ValidationError);
  }
  SECTION("bad rows report their line") {
    try {
      parse(std::string(kHeader) + "F1,AAA,BBB,2019-12-31T09:00,2019-12-31T10:00,\nF2,AAA,BBB,noon,2019-12-31T10:00,\n", g);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(std::string(e.what()).rfind("line 3: ", 0) == 0);
    }
    CHECK_THROWS_AS(parse(std::string(kHeader) + "F1,AAA,BBB\n", g), ParseError);
    CHECK_THROWS_AS(parse("id,o,d\n", g), ParseError);
  }
  SECTION("duplicate id") {
    CHECK_THROWS_AS(parse(std::string(kHeader) + "F1,AAA,BBB,2019-12-31T09:00,2019-12-31T10:00,\n"
                                                 "F1,BBB,AAA,2019-12-31T11:00,2019-12-31T12:00,\n",
                          g),
                    ValidationError);
  }
  SECTION("missing file names the path") {
    try {
      load_schedule("/nonexistent/flights.csv", g);
      FAIL("expected runtime_error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("/nonexistent/flights.csv") != std::string::npos);
    }
  }
}

TEST_CASE("schedule round trip", "[schedule]") {
  auto g = grid_at("2019-12-31T09:00");
  auto s = parse(std::string(kHeader) + "F1,AAA,BBB,2019-12-31T09:00,2019-12-31T10:00,T1\n"
                                        "F2,BBB,AAA,2019-12-31T11:15,2019-12-31T12:05,T1\n"
                                        "F3,CCC,AAA,2019-12-31T09:30,2019-12-31T11:00,\n",
                 g);
  std::ostringstream out;
  write_schedule(out, s);
  auto back = parse(out.str(), g);
  CHECK(back == s);
  std::ostringstream again;
  write_schedule(again, back);
  CHECK(again.str() == out.str());
}

TEST_CASE("tail connections", "[schedule]") {
  SECTION("slack above turnaround") {
    auto s = two_airports({flight("F1", "AAA", "BBB", 5, 10, "T1"), flight("F2", "BBB", "AAA", 15, 20, "T1")});
    auto r = build_connections(s, 3);
    REQUIRE(r.connections.size() == 1);
    CHECK(r.connections[0] == TailConnection{"F1", "F2", 15 - 10 - 3});
    CHECK(r.warnings.empty());
  }
  SECTION("single flight tail") {
    auto s = two_airports({flight("F1", "AAA", "BBB", 5, 10, "T1"), flight("F2", "BBB", "AAA", 15, 20)});
    auto r = build_connections(s, 3);
    CHECK(r.connections.empty());
    CHECK(r.warnings.empty());
  }
  SECTION("short turnaround is clipped with a warning") {
    auto s = two_airports({flight("F1", "AAA", "BBB", 5, 10, "T1"), flight("F2", "BBB", "AAA", 12, 20, "T1")});
    auto r = build_connections(s, 3);
    REQUIRE(r.connections.size() == 1);
    CHECK(r.connections[0].slack == 0);
    CHECK(r.warnings.size() == 1);
  }
  SECTION("ordering follows departure, not input order") {
    auto s = two_airports({flight("F3", "AAA", "BBB", 30, 34, "T1"), flight("F1", "AAA", "BBB", 0, 4, "T1"),
                           flight("F2", "BBB", "AAA", 10, 14, "T1")});
    auto r = build_connections(s, 3);
    REQUIRE(r.connections.size() == 2);
    CHECK(r.connections[0] == TailConnection{"F1", "F2", 3});
    CHECK(r.connections[1] == TailConnection{"F2", "F3", 13});
    s.connections = r.connections;
    CHECK_NOTHROW(validate(s));
  }
  SECTION("broken chain is skipped") {
    auto s = two_airports({flight("F1", "AAA", "BBB", 0, 4, "T1"), flight("F2", "AAA", "BBB", 10, 14, "T1")});
    auto r = build_connections(s, 3);
    CHECK(r.connections.empty());
    CHECK(r.warnings.size() == 1);
  }
  SECTION("connection validation") {
    auto s = two_airports({flight("F1", "AAA", "BBB", 0, 4), flight("F2", "AAA", "BBB", 10, 14)});
    s.connections = {{"F1", "F2", 0}};
    CHECK_THROWS_AS(validate(s), ValidationError);
    s.connections = {{"F1", "F9", 0}};
    CHECK_THROWS_AS(validate(s), ValidationError);
  }
}

TEST_CASE("time windows", "[schedule]") {
  TimeGrid g = grid_at("2019-12-31T09:00", 16);
  auto f = flight("F1", "AAA", "BBB", 0, 4);

  auto [d, a] = build_time_windows(f, g, 2, 1);
  CHECK(d == std::vector<int>{0, 1, 2});
  CHECK(a == std::vector<int>{4, 5, 6, 7});

  auto [d0, a0] = build_time_windows(f, g, 0, 0);
  CHECK(d0 == std::vector<int>{0});
  CHECK(a0 == std::vector<int>{4});

  auto late = flight("F2", "AAA", "BBB", 12, 15);
  auto [dl, al] = build_time_windows(late, g, 12, 4);
  CHECK(dl == std::vector<int>{12, 13, 14, 15, 16});
  CHECK(al == std::vector<int>{15, 16});
  CHECK(dl.back() == g.overflow());
  CHECK(al.back() == g.overflow());

  CHECK_THROWS(build_time_windows(f, g, -1, 0));

  // Every flight of a windowed schedule satisfies the offset invariant.
  Schedule s = two_airports({f, late});
  s.grid = g;
  apply_time_windows(s, 12, 4);
  CHECK_NOTHROW(validate(s));
  for (const auto& fl : s.flights) CHECK(fl.arr_window.front() - fl.dep_window.front() == fl.duration());
}

TEST_CASE("cost config", "[schedule]") {
  CostConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.overflow_cost() == 2000.0);
  c.airborne_cost = 0.5;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = CostConfig{};
  c.ground_cost = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}
