#pragma once

// Orchestration behind the gdp command line tool. Each cmd_* reads its inputs
// from the configured paths or from earlier artifacts in the output
// directory, and writes its own artifacts there.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gdp/capacity.hpp"
#include "gdp/distributions.hpp"
#include "gdp/maghp.hpp"
#include "gdp/predictor.hpp"
#include "gdp/schedule.hpp"
#include "gdp/sensitivity.hpp"
#include "gdp/synth.hpp"

namespace gdp {

namespace fs = std::filesystem;

// Failure classes; the tool maps them (and SolverFailure) to exit codes 2..5.
class InputError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class MissingArtifact : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class ReductionError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  fs::path out = "out";
  std::uint64_t seed = 1;
  TimeGrid grid{parse_timestamp("2024-07-01T08:00"), 48, 15};

  // Empty paths mean the synth outputs inside `out`.
  std::string schedule_path, weather_path, throughput_path;

  SelectionRule rule;

  TrainOptions train;
  double train_fraction = 0.8;
  double coverage_level = 0.9;

  int max_ground_delay = 2;
  int max_airborne_delay = 1;
  int min_turnaround = 3;
  CostConfig costs;

  double group_threshold = 0.5;
  std::size_t scenario_count = 30;

  Mode mode = Mode::sp;
  double eps_arrival = 0.0;
  double eps_departure = 0.0;
  std::vector<double> radii;
  lp::MipOptions mip;

  std::vector<double> r_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> eps_grid{0.0, 0.05, 0.1, 0.25, 0.5};
  double max_variability = 1.0;
  std::size_t sample_count = 100;

  SyntheticSpec synth;

  fs::path schedule_file() const { return schedule_path.empty() ? out / "schedule.csv" : fs::path(schedule_path); }
  fs::path weather_file() const { return weather_path.empty() ? out / "weather.csv" : fs::path(weather_path); }
  fs::path throughput_file() const { return throughput_path.empty() ? out / "throughput.csv" : fs::path(throughput_path); }
  fs::path observations_file() const { return out / "capacity_observations.csv"; }
  fs::path model_dir() const { return out / "models"; }
  fs::path predictions_file() const { return out / "predictions.json"; }

  void validate() const {
    grid.validate();
    costs.validate();
    synth.validate();
    if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw ValidationError("train.train_fraction must lie in (0,1]");
    if (!(coverage_level > 0.0 && coverage_level <= 1.0)) throw ValidationError("train.coverage_level must lie in (0,1]");
    if (max_ground_delay < 0 || max_airborne_delay < 0 || min_turnaround < 0)
      throw ValidationError("schedule: delays and turnaround must be nonnegative");
    if (!(group_threshold > 0.0)) throw ValidationError("scenarios.threshold must be positive");
    if (scenario_count < 1) throw ValidationError("scenarios.count must be at least 1");
    if (!(eps_arrival >= 0.0 && eps_departure >= 0.0)) throw ValidationError("solve: radii must be nonnegative");
    for (double e : radii)
      if (!(e >= 0.0)) throw ValidationError("solve.radii must be nonnegative");
    if (r_grid.empty() || eps_grid.empty()) throw ValidationError("sensitivity grids must be nonempty");
    for (double e : eps_grid)
      if (!(e >= 0.0)) throw ValidationError("sensitivity.eps_grid must be nonnegative");
    ReductionConfig{0.0, max_variability, sample_count, seed}.validate();
    for (double r : r_grid)
      if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("sensitivity.r_grid entries must lie in [0,1]");
  }
};

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError("config: " + where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ValidationError("config: unknown key '" + k + "' in " + where);
  }
}

template <class T>
void read_key(const nlohmann::json& j, const char* key, T& v) {
  if (j.contains(key)) j.at(key).get_to(v);
}

}  // namespace detail

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  using detail::check_keys;
  using detail::read_key;
  PipelineConfig c;
  check_keys(j, {"out", "seed", "grid", "data", "estimate", "train", "schedule", "costs", "scenarios", "solve",
                 "sensitivity", "synth"},
             "top level");
  if (j.contains("out")) c.out = j["out"].get<std::string>();
  read_key(j, "seed", c.seed);
  if (j.contains("grid")) {
    check_keys(j["grid"], {"start", "num_periods", "period_minutes"}, "grid");
    auto g = j["grid"];
    if (!g.contains("start")) g["start"] = format_timestamp(c.grid.start);
    if (!g.contains("num_periods")) g["num_periods"] = c.grid.num_periods;
    if (!g.contains("period_minutes")) g["period_minutes"] = c.grid.period_minutes;
    c.grid = g.get<TimeGrid>();
  }
  if (j.contains("data")) {
    const auto& d = j["data"];
    check_keys(d, {"schedule", "weather", "throughput"}, "data");
    read_key(d, "schedule", c.schedule_path);
    read_key(d, "weather", c.weather_path);
    read_key(d, "throughput", c.throughput_path);
  }
  if (j.contains("estimate")) {
    const auto& e = j["estimate"];
    check_keys(e, {"tau", "delay_thresh", "min_delayed"}, "estimate");
    read_key(e, "tau", c.rule.tau);
    read_key(e, "delay_thresh", c.rule.delay_thresh);
    read_key(e, "min_delayed", c.rule.min_delayed);
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    check_keys(t, {"learning_rate", "epochs", "batch_size", "train_fraction", "coverage_level"}, "train");
    read_key(t, "learning_rate", c.train.learning_rate);
    read_key(t, "epochs", c.train.epochs);
    read_key(t, "batch_size", c.train.batch_size);
    read_key(t, "train_fraction", c.train_fraction);
    read_key(t, "coverage_level", c.coverage_level);
  }
  if (j.contains("schedule")) {
    const auto& s = j["schedule"];
    check_keys(s, {"max_ground_delay", "max_airborne_delay", "min_turnaround"}, "schedule");
    read_key(s, "max_ground_delay", c.max_ground_delay);
    read_key(s, "max_airborne_delay", c.max_airborne_delay);
    read_key(s, "min_turnaround", c.min_turnaround);
  }
  if (j.contains("costs")) {
    const auto& k = j["costs"];
    check_keys(k, {"ground_cost", "airborne_cost", "overflow_multiplier"}, "costs");
    read_key(k, "ground_cost", c.costs.ground_cost);
    read_key(k, "airborne_cost", c.costs.airborne_cost);
    read_key(k, "overflow_multiplier", c.costs.overflow_multiplier);
  }
  if (j.contains("scenarios")) {
    const auto& s = j["scenarios"];
    check_keys(s, {"threshold", "count"}, "scenarios");
    read_key(s, "threshold", c.group_threshold);
    read_key(s, "count", c.scenario_count);
  }
  if (j.contains("solve")) {
    const auto& s = j["solve"];
    check_keys(s, {"mode", "eps_arrival", "eps_departure", "radii", "gap_tol", "node_limit"}, "solve");
    if (s.contains("mode")) c.mode = parse_mode(s["mode"].get<std::string>());
    read_key(s, "eps_arrival", c.eps_arrival);
    read_key(s, "eps_departure", c.eps_departure);
    read_key(s, "radii", c.radii);
    read_key(s, "gap_tol", c.mip.gap_tol);
    read_key(s, "node_limit", c.mip.node_limit);
  }
  if (j.contains("sensitivity")) {
    const auto& s = j["sensitivity"];
    check_keys(s, {"r_grid", "eps_grid", "max_variability", "sample_count"}, "sensitivity");
    read_key(s, "r_grid", c.r_grid);
    read_key(s, "eps_grid", c.eps_grid);
    read_key(s, "max_variability", c.max_variability);
    read_key(s, "sample_count", c.sample_count);
  }
  if (j.contains("synth")) {
    const auto& s = j["synth"];
    check_keys(s, {"airports", "flights_per_pair", "base_arrival_capacity", "base_departure_capacity", "response", "noise",
                   "history_days", "max_surplus", "min_turn", "departure_spread"},
               "synth");
    read_key(s, "airports", c.synth.airports);
    read_key(s, "flights_per_pair", c.synth.flights_per_pair);
    read_key(s, "base_arrival_capacity", c.synth.base_arrival_capacity);
    read_key(s, "base_departure_capacity", c.synth.base_departure_capacity);
    read_key(s, "noise", c.synth.noise);
    read_key(s, "history_days", c.synth.history_days);
    read_key(s, "max_surplus", c.synth.max_surplus);
    read_key(s, "min_turn", c.synth.min_turn);
    read_key(s, "departure_spread", c.synth.departure_spread);
    if (s.contains("response")) {
      const auto& r = s["response"];
      check_keys(r, {"vil", "visibility", "wind", "ceiling"}, "synth.response");
      read_key(r, "vil", c.synth.response.vil);
      read_key(r, "visibility", c.synth.response.visibility);
      read_key(r, "wind", c.synth.response.wind);
      read_key(r, "ceiling", c.synth.response.ceiling);
    }
  }
  return c;
}

inline PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("config file " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

/// Independent stream per pipeline stage (splitmix64 over seed and an FNV-1a tag hash).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : tag) h = (h ^ ch) * 1099511628211ull;
  std::uint64_t z = seed + h + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// File plumbing.

namespace detail {

inline void require_input(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw InputError("cannot open input file " + p.string());
}

inline void require_artifact(const fs::path& p, const char* producer) {
  if (!fs::is_regular_file(p))
    throw MissingArtifact("missing " + p.string() + " (run '" + producer + "' first)");
}

inline void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw InputError("cannot write " + p.string());
  os << text;
  if (!os) throw InputError("write failed for " + p.string());
}

inline nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(p.string() + ": " + e.what());
  }
}

/// Runs a loader and reports parse problems as input errors naming the file.
template <class F>
auto load_input(const fs::path& p, F&& f) {
  require_input(p);
  try {
    return f(p.string());
  } catch (const ParseError& e) {
    throw InputError(p.string() + ": " + e.what());
  }
}

inline std::string model_name(const std::string& airport, Direction d) { return airport + "_" + to_string(d); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands.

inline void cmd_synth(const PipelineConfig& cfg, std::ostream& log) {
  SyntheticSpec spec = cfg.synth;
  spec.seed = derive_seed(cfg.seed, "synth");
  const auto data = generate_synthetic(spec, cfg.grid);
  std::ostringstream sched, wx, thr, truth;
  write_schedule(sched, data.schedule);
  write_weather(wx, data.weather, cfg.grid);
  write_throughput(thr, data.throughput, cfg.grid);
  write_truth(truth, data.truth, cfg.grid);
  detail::write_file(cfg.out / "schedule.csv", sched.str());
  detail::write_file(cfg.out / "weather.csv", wx.str());
  detail::write_file(cfg.out / "throughput.csv", thr.str());
  detail::write_file(cfg.out / "capacity_truth.csv", truth.str());
  log << "synth: " << data.schedule.airports.size() << " airports, " << data.schedule.flights.size() << " flights, "
      << data.throughput.size() << " throughput records\n";
}

inline void cmd_estimate(const PipelineConfig& cfg, std::ostream& log) {
  const auto records =
      detail::load_input(cfg.throughput_file(), [&](const std::string& p) { return load_throughput(p, cfg.grid); });
  const auto obs = estimate_capacities(records, cfg.rule);
  if (obs.empty()) log << "warning: no throughput record passed the selection rules\n";
  std::ostringstream os;
  write_observations(os, obs, cfg.grid);
  detail::write_file(cfg.observations_file(), os.str());
  log << "estimate: " << obs.size() << " of " << records.size() << " records selected\n";
}

inline void cmd_train(const PipelineConfig& cfg, std::ostream& log) {
  const auto weather =
      detail::load_input(cfg.weather_file(), [&](const std::string& p) { return load_weather(p, cfg.grid); });
  detail::require_artifact(cfg.observations_file(), "estimate");
  std::vector<CapacityObservation> obs;
  try {
    obs = load_observations(cfg.observations_file().string(), cfg.grid);
  } catch (const ParseError& e) {
    throw InputError(cfg.observations_file().string() + ": " + e.what());
  }

  std::map<std::pair<std::string, long>, const Features*> wx;
  for (const auto& w : weather) wx[{w.airport, w.period}] = &w.features;
  std::map<std::string, int> max_cap;
  for (const auto& o : obs) max_cap[o.airport] = std::max({max_cap[o.airport], o.capacity_hat, 1});

  nlohmann::json summary = nlohmann::json::array();
  for (const auto& [airport, cap] : max_cap)
    for (Direction dir : kDirections) {
      std::vector<Features> xs;
      std::vector<int> ys;
      std::size_t unmatched = 0;
      for (const auto& o : obs) {
        if (o.airport != airport || o.direction != dir) continue;
        auto it = wx.find({o.airport, o.period});
        if (it == wx.end()) {
          ++unmatched;
          continue;
        }
        xs.push_back(*it->second);
        ys.push_back(o.capacity_hat);
      }
      if (unmatched) log << "warning: " << unmatched << " observations at " << airport << " have no weather row\n";
      if (xs.empty()) {
        log << "warning: no training rows for " << airport << ' ' << to_string(dir) << "; model skipped\n";
        continue;
      }

      const auto tag = detail::model_name(airport, dir);
      auto [tr, va] = split_indices(xs.size(), cfg.train_fraction, derive_seed(cfg.seed, "split/" + tag));
      if (va.empty()) va = tr;
      std::vector<std::vector<double>> raw;
      for (auto i : tr) raw.emplace_back(xs[i].begin(), xs[i].end());

      CapacityModel m;
      m.airport = airport;
      m.direction = dir;
      m.max_capacity = cap;
      m.normalizer = fit_normalizer(raw);
      Dataset ds;
      for (auto i : tr) {
        ds.x.push_back(m.normalizer.apply(xs[i]));
        ds.y.push_back(encode_one_hot(ys[i], cap));
      }
      TrainOptions opt = cfg.train;
      opt.seed = derive_seed(cfg.seed, "train/" + tag);
      m.mlp = train(MlpModel::for_capacity(cap).layer_sizes(), ds, opt);

      std::vector<std::vector<double>> preds;
      std::vector<int> actual;
      for (auto i : va) {
        preds.push_back(m.predict(xs[i]).probs);
        actual.push_back(ys[i]);
      }
      m.validation = metrics(preds, actual, cfg.coverage_level);
      detail::write_file(cfg.model_dir() / (tag + ".json"), model_to_json(m).dump(1) + "\n");
      summary.push_back({{"airport", airport},
                         {"direction", to_string(dir)},
                         {"train_rows", tr.size()},
                         {"validation_rows", va.size()},
                         {"validation", m.validation}});
      log << "train: " << tag << " on " << tr.size() << " rows, validation rmse "
          << csv::format_double(m.validation.rmse) << ", cr " << csv::format_double(m.validation.cr) << '\n';
    }
  detail::write_file(cfg.model_dir() / "summary.json", summary.dump(1) + "\n");
}

inline CapacityModel load_model(const PipelineConfig& cfg, const std::string& airport, Direction dir) {
  const auto path = cfg.model_dir() / (detail::model_name(airport, dir) + ".json");
  detail::require_artifact(path, "train");
  auto m = model_from_json(detail::read_json(path));
  if (m.airport != airport || m.direction != dir) throw ValidationError(path.string() + " holds a model for another series");
  if (m.mlp.input_dim() != kNumFeatures)
    throw ValidationError(path.string() + ": model expects " + std::to_string(m.mlp.input_dim()) + " features, weather has " +
                          std::to_string(kNumFeatures));
  return m;
}

struct PredictionSeries {
  std::string airport;
  Direction direction = Direction::arrival;
  int max_capacity = 0;
  std::vector<DiscretePmf> pmfs;  // one per horizon period
};

inline void cmd_predict(const PipelineConfig& cfg, std::ostream& log) {
  const auto sched =
      detail::load_input(cfg.schedule_file(), [&](const std::string& p) { return load_schedule(p, cfg.grid); });
  const auto weather =
      detail::load_input(cfg.weather_file(), [&](const std::string& p) { return load_weather(p, cfg.grid); });
  std::map<std::pair<std::string, long>, const Features*> wx;
  for (const auto& w : weather) wx[{w.airport, w.period}] = &w.features;

  nlohmann::json series = nlohmann::json::array();
  for (const auto& ap : sched.airports)
    for (Direction dir : kDirections) {
      const auto model = load_model(cfg, ap.code, dir);
      nlohmann::json pmfs = nlohmann::json::array();
      std::ostringstream heat;
      heat << "period,capacity,prob\n";
      for (int t = 0; t < cfg.grid.num_periods; ++t) {
        auto it = wx.find({ap.code, t});
        if (it == wx.end())
          throw InputError(cfg.weather_file().string() + ": no weather row for " + ap.code + " at " +
                           format_timestamp(cfg.grid.timestamp_of(t)));
        const auto pmf = model.predict(*it->second);
        pmfs.push_back(pmf);
        for (std::size_t i = 0; i < pmf.size(); ++i)
          heat << t << ',' << csv::format_double(pmf.supports[i]) << ',' << csv::format_double(pmf.probs[i]) << '\n';
      }
      series.push_back({{"airport", ap.code}, {"direction", to_string(dir)}, {"max_capacity", model.max_capacity},
                        {"pmfs", std::move(pmfs)}});
      detail::write_file(cfg.out / "heatmaps" / (detail::model_name(ap.code, dir) + ".csv"), heat.str());
    }
  nlohmann::json doc{{"grid", cfg.grid}, {"series", std::move(series)}};
  detail::write_file(cfg.predictions_file(), doc.dump(1) + "\n");
  log << "predict: " << sched.airports.size() * 2 << " series over " << cfg.grid.num_periods << " periods\n";
}

inline std::vector<PredictionSeries> load_predictions(const PipelineConfig& cfg) {
  detail::require_artifact(cfg.predictions_file(), "predict");
  const auto doc = detail::read_json(cfg.predictions_file());
  const auto g = doc.at("grid").get<TimeGrid>();
  if (g.start != cfg.grid.start || g.num_periods != cfg.grid.num_periods || g.period_minutes != cfg.grid.period_minutes)
    throw ValidationError("predictions.json was made for a different time grid");
  std::vector<PredictionSeries> out;
  for (const auto& s : doc.at("series")) {
    PredictionSeries p;
    p.airport = s.at("airport").get<std::string>();
    p.direction = parse_direction(s.at("direction").get<std::string>());
    p.max_capacity = s.at("max_capacity").get<int>();
    p.pmfs = s.at("pmfs").get<std::vector<DiscretePmf>>();
    if (p.pmfs.size() != static_cast<std::size_t>(g.num_periods))
      throw ValidationError("predictions.json: series " + p.airport + " has the wrong number of periods");
    out.push_back(std::move(p));
  }
  return out;
}

/// Instance for solve and sensitivity, plus the per-slot centroid marginals.
struct PlanningInputs {
  MaghpInstance inst;
  std::vector<DiscretePmf> marginals;  // by CapacityLayout slot
  PeriodCapacities nominal;            // most likely capacity per slot, for det
  std::vector<std::string> warnings;
};

inline std::string describe_slot(const CapacityLayout& l, std::size_t slot) {
  const std::size_t d = slot % 2, ag = slot / 2, a = ag / l.groups.size(), g = ag % l.groups.size();
  return l.airports[a] + " " + to_string(static_cast<Direction>(d)) + " (periods " + std::to_string(l.groups[g].first) +
         "-" + std::to_string(l.groups[g].second - 1) + ")";
}

inline PlanningInputs planning_inputs(const PipelineConfig& cfg) {
  PlanningInputs out;
  auto& inst = out.inst;
  auto& s = inst.schedule;
  s = detail::load_input(cfg.schedule_file(), [&](const std::string& p) { return load_schedule(p, cfg.grid); });
  apply_time_windows(s, cfg.max_ground_delay, cfg.max_airborne_delay);
  auto conn = build_connections(s, cfg.min_turnaround);
  s.connections = std::move(conn.connections);
  out.warnings = std::move(conn.warnings);

  const auto preds = load_predictions(cfg);
  const int P = cfg.grid.num_periods;
  std::vector<std::vector<DiscretePmf>> per_period(P, std::vector<DiscretePmf>(s.airports.size() * 2));
  for (std::size_t a = 0; a < s.airports.size(); ++a)
    for (Direction d : kDirections) {
      auto it = std::find_if(preds.begin(), preds.end(),
                             [&](const auto& p) { return p.airport == s.airports[a].code && p.direction == d; });
      if (it == preds.end())
        throw MissingArtifact("predictions.json has no " + std::string(to_string(d)) + " series for " + s.airports[a].code);
      s.airports[a].max_capacity_hist = std::max(s.airports[a].max_capacity_hist, it->max_capacity);
      for (int t = 0; t < P; ++t) per_period[t][a * 2 + dir_index(d)] = it->pmfs[t];
    }

  const auto groups = reduce_scenarios(per_period, cfg.group_threshold);
  inst.layout.airports.clear();
  for (const auto& a : s.airports) inst.layout.airports.push_back(a.code);
  for (const auto& g : groups) inst.layout.groups.emplace_back(static_cast<int>(g.begin), static_cast<int>(g.end));
  out.marginals.resize(inst.layout.num_slots());
  std::vector<int> mode_caps(inst.layout.num_slots());
  for (std::size_t a = 0; a < s.airports.size(); ++a)
    for (std::size_t g = 0; g < groups.size(); ++g)
      for (Direction d : kDirections) {
        const auto k = inst.layout.slot(a, g, d);
        out.marginals[k] = groups[g].centroids[a * 2 + dir_index(d)];
        mode_caps[k] = static_cast<int>(std::lround(out.marginals[k].supports[out.marginals[k].argmax()]));
      }
  out.nominal = PeriodCapacities::from_slots(inst.layout, mode_caps, P);

  inst.costs = cfg.costs;
  inst.scenarios = sample_scenarios(out.marginals, cfg.scenario_count, derive_seed(cfg.seed, "scenarios"));
  inst.eps_arrival = cfg.eps_arrival;
  inst.eps_departure = cfg.eps_departure;
  inst.validate();
  return out;
}

inline SolveResult solve_or_throw(const MaghpInstance& inst, Mode mode, const lp::MipOptions& opt,
                                  const PeriodCapacities* fixed) {
  auto res = solve(inst, mode, opt, fixed);
  if (!res.optimal())
    throw SolverFailure(std::string(to_string(mode)) + " model ended with status " + lp::to_string(res.solution.status));
  return res;
}

inline void cmd_solve(const PipelineConfig& cfg, std::ostream& log) {
  auto in = planning_inputs(cfg);
  for (const auto& w : in.warnings) log << "warning: " << w << '\n';
  const auto mode = cfg.mode;
  const std::string tag = to_string(mode);
  detail::write_file(cfg.out / "scenarios.json",
                     nlohmann::json{{"groups", in.inst.layout.groups}, {"scenarios", in.inst.scenarios}}.dump(1) + "\n");

  auto res = solve(in.inst, mode, cfg.mip, mode == Mode::det ? &in.nominal : nullptr);
  auto report = report_to_json(res.report);
  report["scenario_count"] = in.inst.scenarios.size();
  report["time_groups"] = in.inst.layout.groups.size();
  detail::write_file(cfg.out / ("report_" + tag + ".json"), report.dump(1) + "\n");
  if (!res.optimal())
    throw SolverFailure(tag + " model ended with status " + lp::to_string(res.solution.status) + "; see report_" + tag +
                        ".json");
  detail::write_file(cfg.out / ("policy_" + tag + ".json"), policy_to_json(res.policy).dump(1) + "\n");
  log << "solve " << tag << ": objective " << csv::format_double(res.report.objective) << ", "
      << res.report.delayed_flights << " delayed flights, " << res.report.nodes << " nodes\n";

  if (!cfg.radii.empty()) {
    std::ostringstream series;
    series << "eps,in_sample_objective\n";
    auto inst = in.inst;
    for (double e : cfg.radii) {
      inst.eps_arrival = inst.eps_departure = e;
      const auto r = solve_or_throw(inst, Mode::dr, cfg.mip, nullptr);
      series << csv::format_double(e) << ',' << csv::format_double(r.report.objective) << '\n';
    }
    detail::write_file(cfg.out / "in_sample_series.csv", series.str());
    log << "solve: in-sample series over " << cfg.radii.size() << " radii\n";
  }
}

inline SweepResult run_sweep(const PipelineConfig& cfg, const PlanningInputs& in) {
  ReductionConfig rc{0.0, cfg.max_variability, cfg.sample_count, derive_seed(cfg.seed, "resample")};
  // Fail on an unreachable reduction before paying for the solves.
  for (double r : cfg.r_grid)
    for (std::size_t k = 0; k < in.marginals.size(); ++k) try {
        reduce_pmf(in.marginals[k], r, cfg.max_variability);
      } catch (const ReductionInfeasible& e) {
        throw ReductionError("reduction r=" + csv::format_double(r) + " infeasible for airport " +
                             describe_slot(in.inst.layout, k) + ": target mean " + csv::format_double(e.target()) +
                             " is below the minimal attainable mean " + csv::format_double(e.min_mean()) +
                             " at max_variability " + csv::format_double(cfg.max_variability));
      }
  const auto pol = solve_sweep_policies(in.inst, cfg.eps_grid, cfg.mip);
  return sensitivity_sweep(in.inst, in.marginals, cfg.r_grid, cfg.eps_grid, rc, pol);
}

inline void cmd_sensitivity(const PipelineConfig& cfg, std::ostream& log) {
  const auto in = planning_inputs(cfg);
  for (const auto& w : in.warnings) log << "warning: " << w << '\n';
  const auto res = run_sweep(cfg, in);
  std::ostringstream table;
  write_sweep_table(table, res);
  detail::write_file(cfg.out / "sensitivity_table.csv", table.str());
  for (std::size_t k = 0; k < res.r_grid.size(); ++k) {
    std::ostringstream series;
    write_radius_series(series, res, k);
    detail::write_file(cfg.out / "radius_series" / ("r" + csv::format_double(res.r_grid[k]) + ".csv"), series.str());
  }
  log << "sensitivity: " << res.r_grid.size() << " reduction levels x " << res.eps_grid.size() << " radii\n";
}

}  // namespace gdp
