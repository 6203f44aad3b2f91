// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "gdp/pipeline.hpp"
#include "support/micro.hpp"

using namespace gdp;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > limit_s) {
    o.ok = false;
    o.detail += "; over the " + csv::format_double(limit_s) + " s budget";
  }
  failures += !o.ok;
  char t[32];
  std::snprintf(t, sizeof t, "%.2f", secs);
  std::cout << (o.ok ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << " [" << t << " s]" << std::endl;
}

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("gdp_acceptance_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

PipelineConfig fixture(const fs::path& out) {
  auto c = load_config(GDP_FIXTURE_DIR "/three_airports.json");
  c.out = out;
  return c;
}

void prepare(const PipelineConfig& c) {
  std::ostringstream log;
  cmd_synth(c, log);
  cmd_estimate(c, log);
  cmd_train(c, log);
  cmd_predict(c, log);
}

lp::MipOptions exact() {
  lp::MipOptions o;
  o.gap_tol = 0.0;
  return o;
}

DiscretePmf random_pmf(std::mt19937_64& rng, std::size_t max_atoms, double scale) {
  std::uniform_int_distribution<std::size_t> atoms(1, max_atoms);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = atoms(rng);
  std::vector<double> s;
  while (s.size() < n) {
    const double v = std::round(unit(rng) * scale);
    if (std::find(s.begin(), s.end(), v) == s.end()) s.push_back(v);
  }
  std::sort(s.begin(), s.end());
  if (s.back() == 0.0) s.back() = 1.0;
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& v : p) total += (v = unit(rng) + 0.01);
  for (auto& v : p) v /= total;
  return DiscretePmf::make(s, p);
}

// Smallest mean the probability box allows: fill from the lowest support.
double box_min_mean(const DiscretePmf& pmf, double delta) {
  std::vector<double> p(pmf.size());
  double used = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) used += (p[i] = std::max(0.0, pmf.probs[i] * (1.0 - delta)));
  double left = 1.0 - used, m = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double add = std::min(pmf.probs[i] * (1.0 + delta) - p[i], std::max(0.0, left));
    p[i] += add;
    left -= add;
    m += p[i] * pmf.supports[i];
  }
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main() {
  const auto base = scratch("fixture");
  const auto cfg = fixture(base);
  std::optional<PlanningInputs> inputs;

  criterion("in-sample equivalence at zero radius", 60.0, [&] {
    prepare(cfg);
    inputs = planning_inputs(cfg);
    auto inst = inputs->inst;
    inst.eps_arrival = inst.eps_departure = 0.0;
    const auto sp = solve(inst, Mode::sp, exact());
    const auto dr = solve(inst, Mode::dr, exact());
    if (!sp.optimal() || !dr.optimal()) return Outcome{false, "a solve was not optimal"};
    const double a = sp.report.objective, b = dr.report.objective;
    const double rel = std::abs(a - b) / std::max(1.0, std::abs(a));
    return Outcome{rel <= 1e-6, "sp " + fmt(a) + ", dr " + fmt(b) + ", relative difference " + fmt(rel) + " (tol 1e-6)"};
  });

  criterion("conservatism monotonicity", 60.0, [&] {
    if (!inputs) return Outcome{false, "fixture unavailable"};
    auto inst = inputs->inst;
    std::vector<double> obj;
    for (double e : {0.0, 0.05, 0.1, 0.25, 0.5}) {
      inst.eps_arrival = inst.eps_departure = e;
      const auto r = solve(inst, Mode::dr, exact());
      if (!r.optimal()) return Outcome{false, "dr at eps " + fmt(e) + " not optimal"};
      obj.push_back(r.report.objective);
    }
    bool ok = true;
    std::string d = "objectives";
    for (std::size_t k = 0; k < obj.size(); ++k) {
      d += " " + fmt(obj[k]);
      if (k > 0 && obj[k] < obj[k - 1] - 1e-9) ok = false;
    }
    return Outcome{ok, d + " over eps {0, 0.05, 0.1, 0.25, 0.5}"};
  });

  criterion("Wasserstein closed form vs transport LP", 5.0, [] {
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const auto p = random_pmf(rng, 8, 20.0), q = random_pmf(rng, 8, 20.0);
      worst = std::max(worst, std::abs(wasserstein_1d(p, q) - wasserstein_lp(p, q)));
    }
    return Outcome{worst <= 1e-9, "100 pairs, max |difference| " + fmt(worst) + " (tol 1e-9)"};
  });

  criterion("inner maximization strong duality", 10.0, [] {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const auto c = random_pmf(rng, 6, 10.0);
      std::vector<double> q(c.size());
      for (auto& v : q) v = 100.0 * unit(rng);
      const double eps = 5.0 * unit(rng);
      DistanceMatrix dist;
      if (k % 2 == 0) {
        dist = DistanceMatrix::absolute(c.supports);
      } else {
        std::vector<std::vector<double>> pts;
        for (double s : c.supports) pts.push_back({s, std::round(10.0 * unit(rng))});
        dist = DistanceMatrix::euclidean(pts);
      }
      const double primal = worst_case_expectation(c.probs, q, dist, eps).value;
      worst = std::max(worst, std::abs(primal - worst_case_dual_value(c.probs, q, dist, eps)));
    }
    return Outcome{worst <= 1e-6, "50 triples, max |primal - dual| " + fmt(worst) + " (tol 1e-6)"};
  });

  criterion("MAGHP builders vs exhaustive enumeration", 60.0, [] {
    int matched = 0, total = 0;
    std::string bad;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto c = micro::random_case(seed);
      for (Mode mode : {Mode::det, Mode::sp, Mode::dr}) {
        ++total;
        const auto expected = micro::brute_force(c, mode);
        const auto r = solve(build(c.inst, mode, &c.fixed), c.inst, exact());
        const bool ok = expected ? r.optimal() && std::abs(r.report.objective - *expected) <= 1e-9 * std::max(1.0, *expected)
                                 : r.solution.status == lp::Status::infeasible;
        if (ok) ++matched;
        else if (bad.empty()) bad = "; first mismatch seed " + std::to_string(seed) + " " + to_string(mode);
      }
    }
    return Outcome{matched == total, std::to_string(matched) + "/" + std::to_string(total) + " (instance, mode) pairs match" + bad};
  });

  criterion("capacity reduction fidelity", 5.0, [] {
    std::mt19937_64 rng(31);
    int feasible = 0, infeasible = 0, bad = 0;
    double worst_mean = 0.0;
    for (int k = 0; k < 20; ++k) {
      const auto pmf = random_pmf(rng, 8, 30.0);
      for (double delta : {0.5, 1.0, 4.0})
        for (int i = 1; i <= 10; ++i) {
          const double r = 0.1 * i, target = pmf.mean() * (1.0 - r);
          const bool reachable = box_min_mean(pmf, delta) <= target + 1e-9 * std::max(1.0, pmf.mean());
          try {
            const auto out = reduce_pmf(pmf, r, delta);
            ++feasible;
            if (!reachable) ++bad;
            worst_mean = std::max(worst_mean, std::abs(out.mean() - target));
            double total = 0.0;
            for (std::size_t j = 0; j < out.size(); ++j) {
              total += out.probs[j];
              if (std::abs(out.probs[j] - pmf.probs[j]) > delta * pmf.probs[j] + 1e-9 || out.probs[j] < 0.0) ++bad;
            }
            if (std::abs(total - 1.0) > 1e-9) ++bad;
          } catch (const ReductionInfeasible& e) {
            ++infeasible;
            if (reachable || std::string(e.what()).find("minimal attainable mean") == std::string::npos) ++bad;
          }
        }
    }
    const bool ok = bad == 0 && worst_mean <= 1e-6 && feasible > 0 && infeasible > 0;
    return Outcome{ok, std::to_string(feasible) + " feasible, " + std::to_string(infeasible) +
                           " infeasible, max |mean - target| " + fmt(worst_mean) + ", " + std::to_string(bad) + " violations"};
  });

  criterion("sensitivity sweep ordering", 600.0, [&] {
    if (!inputs) return Outcome{false, "fixture unavailable"};
    const auto res = run_sweep(cfg, *inputs);
    bool mono = true, dominated = true;
    std::string d = "phi_sp/min phi_dr:";
    for (std::size_t k = 0; k < res.r_grid.size(); ++k) {
      d += " " + fmt(res.phi_sp[k]) + "/" + fmt(res.best_phi_dr(k));
      if (k > 0 && (res.phi_sp[k] < res.phi_sp[k - 1] || res.best_phi_dr(k) < res.best_phi_dr(k - 1))) mono = false;
      if (res.best_phi_dr(k) > res.phi_sp[k]) dominated = false;
    }
    const bool rising = res.phi_sp.back() > res.phi_sp.front();
    return Outcome{mono && dominated && rising, d + (mono && rising ? "; increasing in r" : "; NOT increasing in r") +
                                                    (dominated ? "; dr <= sp at every r" : "; dr > sp somewhere")};
  });

  criterion("predictor sanity", 60.0, [] {
    std::string d;
    bool ok = true;

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0), b(-0.5, 0.5);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      MlpModel m({4, 5, 6, 3});
      m.initialize(100 + trial);
      for (std::size_t l = 0; l < m.num_layers(); ++l)
        for (std::size_t o = 0; o < m.layer_sizes()[l + 1]; ++o) m.bias(l)[o] = b(rng);
      Dataset ds;
      for (int r = 0; r < 5; ++r) {
        ds.x.push_back({u(rng), u(rng), u(rng), u(rng)});
        ds.y.push_back(encode_one_hot(r % 3, 2));
      }
      std::vector<std::size_t> rows{0, 1, 2, 3, 4};
      std::vector<double> g;
      loss_and_gradient(m, ds, rows, g);
      const double h = 1e-5;
      for (std::size_t k = 0; k < m.params().size(); ++k) {
        const double keep = m.params()[k];
        m.params()[k] = keep + h;
        const double up = mean_loss(m, ds);
        m.params()[k] = keep - h;
        const double down = mean_loss(m, ds);
        m.params()[k] = keep;
        const double num = (up - down) / (2.0 * h);
        if (std::abs(num) + std::abs(g[k]) > 1e-7)
          worst = std::max(worst, std::abs(num - g[k]) / (std::abs(num) + std::abs(g[k])));
      }
    }
    ok = ok && worst <= 1e-4;
    d += "gradient rel err " + fmt(worst);

    auto wide = MlpModel::for_capacity(12);
    wide.initialize(9);
    std::uniform_real_distribution<double> x(-50.0, 50.0);
    double sum_err = 0.0;
    for (int i = 0; i < 200; ++i) {
      std::vector<double> in(kNumFeatures);
      for (auto& v : in) v = x(rng);
      const auto p = wide.predict_probs(in);
      sum_err = std::max(sum_err, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
    }
    ok = ok && sum_err <= 1e-9;
    d += ", softmax sum err " + fmt(sum_err);

    // Four separated clusters, five rows each.
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    Dataset toy;
    for (int c = 0; c < 4; ++c)
      for (int k = 0; k < 5; ++k) {
        std::vector<double> v(kNumFeatures, 0.5);
        v[0] = (c & 1 ? 0.9 : 0.1) + jitter(rng);
        v[1] = (c & 2 ? 0.9 : 0.1) + jitter(rng);
        for (std::size_t j = 2; j < kNumFeatures; ++j) v[j] += jitter(rng);
        toy.x.push_back(v);
        toy.y.push_back(encode_one_hot(c, 3));
      }
    TrainOptions opt;
    opt.seed = 42;
    opt.learning_rate = 1e-3;
    const auto m = train({kNumFeatures, 17, 32, 4}, toy, opt);
    int hits = 0;
    for (std::size_t r = 0; r < toy.size(); ++r) hits += toy.y[r][predict(m, toy.x[r]).argmax()] == 1.0;
    const double acc = hits / 20.0;
    ok = ok && acc >= 0.95;
    d += ", overfit accuracy " + fmt(acc) + " (lr 1e-3, 300 epochs)";

    const bool onehot = encode_one_hot(2, 5) == std::vector<double>{0, 0, 1, 0, 0, 0};
    ok = ok && onehot;
    d += onehot ? ", one-hot(2 of 0..5) = [0,0,1,0,0,0]" : ", one-hot example wrong";
    return Outcome{ok, d};
  });

  criterion("end-to-end determinism", 300.0, [] {
    const auto a = scratch("det_a"), b = scratch("det_b");
    for (const auto& dir : {a, b}) {
      const auto c = fixture(dir);
      std::ostringstream log;
      prepare(c);
      cmd_solve(c, log);
      cmd_sensitivity(c, log);
    }
    std::size_t files = 0, differ = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
      if (!e.is_regular_file()) continue;
      ++files;
      const auto other = b / fs::relative(e.path(), a);
      if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differ;
    }
    fs::remove_all(a);
    fs::remove_all(b);
    return Outcome{differ == 0 && files > 20, std::to_string(files) + " artifacts compared, " + std::to_string(differ) + " differ"};
  });

  fs::remove_all(base);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
