// gdp: capacity prediction and ground holding pipeline.
//
//   gdp synth | estimate | train | predict | solve | sensitivity
//
// Exit codes: 0 ok, 1 bad configuration, 2 input I/O, 3 missing artifact,
// 4 solver non-optimal, 5 infeasible capacity reduction.

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "gdp/pipeline.hpp"

namespace {

int run(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const gdp::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const gdp::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const gdp::MissingArtifact& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const gdp::SolverFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const gdp::ReductionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Airport capacity prediction and distributionally robust ground holding"};
  app.require_subcommand(1);

  std::string config_path, out;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Random seed (overrides the config)");
  app.add_option("--out", out, "Output directory (overrides the config)");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic schedule, weather and throughput dataset");
  std::optional<int> airports, per_pair, history;
  std::optional<double> noise;
  synth->add_option("--airports", airports, "Number of airports");
  synth->add_option("--flights-per-pair", per_pair, "Flights per ordered airport pair");
  synth->add_option("--noise", noise, "Throughput noise standard deviation");
  synth->add_option("--history-days", history, "Days of throughput history");

  auto* estimate = app.add_subcommand("estimate", "Select saturated periods and estimate capacities");
  auto* train = app.add_subcommand("train", "Train one capacity model per airport and direction");
  auto* predict = app.add_subcommand("predict", "Predict capacity distributions over the horizon");

  auto* solve = app.add_subcommand("solve", "Solve the ground holding model");
  std::optional<std::string> mode;
  std::optional<double> eps_a, eps_d;
  std::vector<double> radii;
  solve->add_option("--mode", mode, "det, sp or dr")->check(CLI::IsMember({"det", "sp", "dr"}));
  solve->add_option("--eps-arrival", eps_a, "Arrival ambiguity radius");
  solve->add_option("--eps-departure", eps_d, "Departure ambiguity radius");
  solve->add_option("--radii", radii, "Radii for the in-sample series");

  auto* sens = app.add_subcommand("sensitivity", "Out-of-sample sweep over capacity reductions and radii");
  std::optional<double> delta;
  std::optional<std::size_t> samples;
  sens->add_option("--max-variability", delta, "Probability box half-width, relative");
  sens->add_option("--samples", samples, "Samples per reduction level");

  CLI11_PARSE(app, argc, argv);

  gdp::PipelineConfig cfg;
  int rc = run([&] {
    if (!config_path.empty()) cfg = gdp::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.out = out;
    if (airports) cfg.synth.airports = *airports;
    if (per_pair) cfg.synth.flights_per_pair = *per_pair;
    if (noise) cfg.synth.noise = *noise;
    if (history) cfg.synth.history_days = *history;
    if (mode) cfg.mode = gdp::parse_mode(*mode);
    if (eps_a) cfg.eps_arrival = *eps_a;
    if (eps_d) cfg.eps_departure = *eps_d;
    if (!radii.empty()) cfg.radii = radii;
    if (delta) cfg.max_variability = *delta;
    if (samples) cfg.sample_count = *samples;
    cfg.validate();
  });
  if (rc != 0) return rc;

  return run([&] {
    if (synth->parsed()) gdp::cmd_synth(cfg, std::cerr);
    else if (estimate->parsed()) gdp::cmd_estimate(cfg, std::cerr);
    else if (train->parsed()) gdp::cmd_train(cfg, std::cerr);
    else if (predict->parsed()) gdp::cmd_predict(cfg, std::cerr);
    else if (solve->parsed()) gdp::cmd_solve(cfg, std::cerr);
    else if (sens->parsed()) gdp::cmd_sensitivity(cfg, std::cerr);
  });
}
