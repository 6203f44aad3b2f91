#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "gdp/sensitivity.hpp"
#include "support/micro.hpp"

using namespace gdp;
using Catch::Approx;

namespace {

DiscretePmf random_pmf(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> atoms(2, 8), value(0, 40);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::vector<double> s;
  const int n = atoms(rng);
  while (static_cast<int>(s.size()) < n) {
    double v = value(rng);
    if (std::find(s.begin(), s.end(), v) == s.end()) s.push_back(v);
  }
  std::sort(s.begin(), s.end());
  if (s.back() == 0.0) s.back() = 1.0;
  std::vector<double> p(s.size());
  double t = 0.0;
  for (auto& x : p) t += (x = w(rng));
  for (auto& x : p) x /= t;
  return DiscretePmf::make(s, p);
}

// Greedy fill of the box from the lowest support: the smallest attainable mean.
double greedy_min_mean(const DiscretePmf& pmf, double delta) {
  std::vector<double> p(pmf.size());
  double used = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) used += (p[i] = std::max(0.0, pmf.probs[i] * (1.0 - delta)));
  double left = 1.0 - used;
  for (std::size_t i = 0; i < p.size() && left > 0.0; ++i) {
    const double room = pmf.probs[i] * (1.0 + delta) - p[i];
    const double add = std::min(room, left);
    p[i] += add;
    left -= add;
  }
  double m = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) m += p[i] * pmf.supports[i];
  return m;
}

}  // namespace

TEST_CASE("reduce_pmf examples", "[sensitivity]") {
  const auto pmf = DiscretePmf::make({1.0, 3.0}, {0.5, 0.5});

  SECTION("no reduction keeps the prediction") {
    CHECK(reduce_pmf(pmf, 0.0, 1.0) == pmf);
    CHECK(reduce_pmf(pmf, 0.0, 0.01) == pmf);
  }
  SECTION("two atoms at a quarter reduction") {
    auto out = reduce_pmf(pmf, 0.25, 1.0);
    CHECK(out.mean() == Approx(1.5).margin(1e-12));
    CHECK(out.probs[0] == Approx(0.75).margin(1e-12));
    CHECK(out.probs[1] == Approx(0.25).margin(1e-12));

    // The same LP written out by hand: min p1 + 3 p3, p1 + 3 p3 >= 1.5, p1 + p3 = 1, 0 <= p <= 1.
    lp::LinearProgram lp;
    lp.add_variable(1.0, 0.0, 1.0);
    lp.add_variable(3.0, 0.0, 1.0);
    lp.add_constraint({{0, 1.0}, {1, 3.0}}, lp::Relation::greater_equal, 1.5);
    lp.add_constraint({{0, 1.0}, {1, 1.0}}, lp::Relation::equal, 1.0);
    auto sol = lp::solve_lp(lp);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == Approx(out.mean()).margin(1e-9));
  }
  SECTION("tight box cannot reach a deep cut") {
    try {
      reduce_pmf(pmf, 0.9, 0.01);
      FAIL("expected ReductionInfeasible");
    } catch (const ReductionInfeasible& e) {
      CHECK(e.target() == Approx(0.2));
      CHECK(e.min_mean() == Approx(greedy_min_mean(pmf, 0.01)).margin(1e-12));
      CHECK(std::string(e.what()).find("minimal attainable mean") != std::string::npos);
    }
    std::mt19937_64 rng(4);
    for (int i = 0; i < 20; ++i) CHECK_THROWS_AS(reduce_pmf(random_pmf(rng), 0.9, 0.01), ReductionInfeasible);
  }
  SECTION("bad arguments") {
    CHECK_THROWS_AS(reduce_pmf(DiscretePmf::point_mass(0.0), 0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(reduce_pmf(pmf, 1.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(reduce_pmf(pmf, 0.5, 0.0), std::invalid_argument);
  }
}

TEST_CASE("reduce_pmf properties on random PMFs", "[sensitivity]") {
  std::mt19937_64 rng(12);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto pmf = random_pmf(rng);
    const double mu = pmf.mean();
    for (double delta : {0.3, 1.0, 5.0}) {
      std::vector<double> prev_cdf(pmf.size(), 0.0);
      for (int k = 1; k <= 10; ++k) {
        const double r = 0.1 * k;
        const double target = mu * (1.0 - r);
        const bool reachable = greedy_min_mean(pmf, delta) <= target + 1e-9 * std::max(1.0, mu);
        if (!reachable) {
          ++infeasible;
          CHECK_THROWS_AS(reduce_pmf(pmf, r, delta), ReductionInfeasible);
          continue;
        }
        ++feasible;
        const auto out = reduce_pmf(pmf, r, delta);
        CHECK(out.mean() == Approx(target).margin(1e-6));
        CHECK(std::accumulate(out.probs.begin(), out.probs.end(), 0.0) == Approx(1.0).margin(1e-12));
        double cdf = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
          CHECK(std::abs(out.probs[i] - pmf.probs[i]) <= delta * pmf.probs[i] + 1e-9);
          // Larger cuts only move mass downward.
          cdf += out.probs[i];
          CHECK(cdf >= prev_cdf[i] - 1e-12);
          prev_cdf[i] = cdf;
        }
      }
    }
  }
  CHECK(feasible > 100);
  CHECK(infeasible > 10);
}

TEST_CASE("resampling", "[sensitivity]") {
  ReductionConfig cfg;
  cfg.seed = 9;

  SECTION("point masses") {
    cfg.reduction_level = 0.0;
    auto draws = resample_capacities(cfg, {DiscretePmf::point_mass(4.0), DiscretePmf::point_mass(7.0)});
    REQUIRE(draws.size() == 100);
    for (const auto& d : draws) CHECK(d == std::vector<int>{4, 7});
  }
  SECTION("fixed seed repeats") {
    cfg.reduction_level = 0.3;
    std::vector<DiscretePmf> m{DiscretePmf::over_range(std::vector<double>(7, 1.0 / 7)),
                               DiscretePmf::make({2, 5, 9}, {0.2, 0.5, 0.3})};
    CHECK(resample_capacities(cfg, m) == resample_capacities(cfg, m));
  }
  SECTION("sample mean sits near the reduced mean") {
    cfg.reduction_level = 0.4;
    cfg.sample_count = 10000;
    cfg.max_variability = 3.0;
    const auto pmf = DiscretePmf::make({2, 5, 9, 12}, {0.1, 0.4, 0.3, 0.2});
    const auto reduced = reduce_pmf(pmf, 0.4, 3.0);
    double var = 0.0;
    for (std::size_t i = 0; i < reduced.size(); ++i)
      var += reduced.probs[i] * std::pow(reduced.supports[i] - reduced.mean(), 2);
    auto draws = resample_capacities(cfg, {pmf, pmf});
    for (std::size_t s = 0; s < 2; ++s) {
      double total = 0.0;
      for (const auto& d : draws) total += d[s];
      const double se = std::sqrt(var / 10000.0);
      CHECK(std::abs(total / 10000.0 - pmf.mean() * 0.6) <= 3.0 * se);
    }
  }
  SECTION("infeasible slot is named") {
    cfg.reduction_level = 0.9;
    cfg.max_variability = 0.01;
    try {
      resample_capacities(cfg, {DiscretePmf::point_mass(3.0), DiscretePmf::make({1, 3}, {0.5, 0.5})});
      FAIL("expected ReductionInfeasible");
    } catch (const ReductionInfeasible& e) {
      CHECK(e.slot() == 0);
    }
  }
}

TEST_CASE("out-of-sample cost", "[sensitivity]") {
  Schedule s;
  s.grid.num_periods = 6;
  s.airports = {{"AAA", 3}, {"BBB", 3}};
  s.flights = {micro::make_flight("F1", "AAA", "BBB", 0, 2), micro::make_flight("F2", "AAA", "BBB", 0, 2),
               micro::make_flight("F3", "BBB", "AAA", 1, 3)};
  apply_time_windows(s, 2, 1);
  auto layout = CapacityLayout::single_group(s);
  CostConfig costs;
  GroundHoldingPolicy p = zero_delay_policy(s);
  p.flights[1] = assign(s.flights[1], 1, 3, s.grid);  // one period of ground delay

  const std::vector<int> ample{3, 3, 3, 3};
  CHECK(out_of_sample(p, s, layout, {ample}, costs) == first_stage_cost(p, costs));
  CHECK(out_of_sample(p, s, layout, {ample, ample, ample}, costs) == 1.0);

  // AAA departures capped at 0 queue F1 and F2 at C_g each, BBB arrivals at 0 queue both at C_a.
  const std::vector<int> tight{3, 0, 0, 3};
  const double c_tight = evaluate_policy(p, s, PeriodCapacities::from_slots(layout, tight, 6), costs).total();
  CHECK(c_tight == 1.0 + 2.0 * 1.0 + 2.0 * 2.0);
  CHECK(out_of_sample(p, s, layout, {tight}, costs) == c_tight);
  CHECK(out_of_sample(p, s, layout, {ample, tight}, costs) == Approx((1.0 + c_tight) / 2.0));
  CHECK_THROWS(out_of_sample(p, s, layout, {}, costs));
}

TEST_CASE("sensitivity sweep", "[sensitivity]") {
  auto c = micro::random_case(2);
  std::vector<DiscretePmf> marginals;
  for (std::size_t k = 0; k < c.inst.layout.num_slots(); ++k) marginals.push_back(DiscretePmf::make({0, 1, 2, 3}, {0.1, 0.2, 0.4, 0.3}));
  ReductionConfig cfg;
  cfg.seed = 3;
  cfg.max_variability = 10.0;
  const std::vector<double> rs{0.0, 0.2, 0.4, 0.6, 0.8};
  const std::vector<double> eps{0.0, 0.5, 1.0};

  auto a = sensitivity_sweep(c.inst, marginals, rs, eps, cfg);
  auto b = sensitivity_sweep(c.inst, marginals, rs, eps, cfg);
  std::ostringstream ta, tb;
  write_sweep_table(ta, a);
  write_sweep_table(tb, b);
  CHECK(ta.str() == tb.str());

  REQUIRE(a.phi_sp.size() == rs.size());
  for (std::size_t k = 0; k < rs.size(); ++k) {
    CHECK(a.best_phi_dr(k) == *std::min_element(a.phi_dr[k].begin(), a.phi_dr[k].end()));
    if (a.phi_sp[k] > 0.0)
      CHECK(a.pct_decrease[k] == Approx(100.0 * (a.phi_sp[k] - a.best_phi_dr(k)) / a.phi_sp[k]));
    if (k > 0) {
      CHECK(a.phi_sp[k] >= a.phi_sp[k - 1] - 1e-12);
      for (std::size_t e = 0; e < eps.size(); ++e) CHECK(a.phi_dr[k][e] >= a.phi_dr[k - 1][e] - 1e-12);
    }
  }
  CHECK(a.in_sample_dr[0] == Approx(a.in_sample_sp).margin(1e-6));

  std::istringstream in(ta.str());
  auto table = csv::read(in, {"r", "eps", "phi_sp", "phi_dr", "best_eps", "pct_decrease"});
  CHECK(table.rows.size() == rs.size());

  std::ostringstream series;
  write_radius_series(series, a, 1);
  std::istringstream sin(series.str());
  CHECK(csv::read(sin, {"eps", "phi_os_dr"}).rows.size() == eps.size());

  CHECK_THROWS(sensitivity_sweep(c.inst, marginals, {}, eps, cfg));
}
