#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gdp/common.hpp"
#include "gdp/csv.hpp"
#include "gdp/distributions.hpp"
#include "gdp/schedule.hpp"

namespace gdp {

inline constexpr std::size_t kNumFeatures = 7;

using Features = std::array<double, kNumFeatures>;

struct WeatherRecord {
  std::string airport;
  long period = 0;
  Features features{};  // ceiling, visibility, vil, temperature, dew_point, wind_dir, wind_speed

  bool operator==(const WeatherRecord&) const = default;
};

inline const std::vector<std::string>& weather_header() {
  static const std::vector<std::string> h{"airport",     "period_iso", "ceiling",  "visibility", "vil",
                                          "temperature", "dew_point",  "wind_dir", "wind_speed"};
  return h;
}

inline std::vector<WeatherRecord> parse_weather(const csv::Table& t, const TimeGrid& grid) {
  const auto& h = weather_header();
  std::vector<WeatherRecord> out;
  for (const auto& row : t.rows) {
    WeatherRecord w;
    w.airport = row.at(0);
    try {
      w.period = static_cast<long>(grid.period_of(parse_timestamp(row.at(1))));
    } catch (const ParseError& e) {
      throw ParseError(e.detail(), row.line);
    }
    for (std::size_t k = 0; k < kNumFeatures; ++k) w.features[k] = csv::to_double(row.at(k + 2), row.line, h[k + 2].c_str());
    out.push_back(std::move(w));
  }
  return out;
}

inline std::vector<WeatherRecord> load_weather(const std::string& path, const TimeGrid& grid) {
  return parse_weather(csv::read_file(path, weather_header()), grid);
}

inline void write_weather(std::ostream& os, const std::vector<WeatherRecord>& ws, const TimeGrid& grid) {
  const auto& h = weather_header();
  for (std::size_t i = 0; i < h.size(); ++i) os << (i ? "," : "") << h[i];
  os << '\n';
  for (const auto& w : ws) {
    os << w.airport << ',' << format_timestamp(grid.timestamp_of(static_cast<int>(w.period)));
    for (double v : w.features) os << ',' << csv::format_double(v);
    os << '\n';
  }
}

inline std::vector<double> encode_one_hot(int capacity, int max_capacity) {
  if (max_capacity < 0 || capacity < 0 || capacity > max_capacity)
    throw std::out_of_range("encode_one_hot: capacity " + std::to_string(capacity) + " outside 0.." +
                            std::to_string(max_capacity));
  std::vector<double> v(static_cast<std::size_t>(max_capacity) + 1, 0.0);
  v[static_cast<std::size_t>(capacity)] = 1.0;
  return v;
}

// ---------------------------------------------------------------------------
// Min-max scaling fitted on training rows.

struct NormalizationStats {
  std::vector<double> min;
  std::vector<double> max;

  std::vector<double> apply(std::span<const double> row) const {
    if (row.size() != min.size()) throw std::invalid_argument("normalizer: dimension mismatch");
    std::vector<double> out(row.size());
    for (std::size_t k = 0; k < row.size(); ++k) {
      const double span = max[k] - min[k];
      out[k] = span > 0.0 ? std::clamp((row[k] - min[k]) / span, 0.0, 1.0) : 0.0;
    }
    return out;
  }
};

inline NormalizationStats fit_normalizer(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("fit_normalizer: empty training set");
  NormalizationStats s{rows[0], rows[0]};
  for (const auto& r : rows) {
    if (r.size() != s.min.size()) throw std::invalid_argument("fit_normalizer: ragged rows");
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (!std::isfinite(r[k])) throw std::invalid_argument("fit_normalizer: non-finite feature");
      s.min[k] = std::min(s.min[k], r[k]);
      s.max[k] = std::max(s.max[k], r[k]);
    }
  }
  return s;
}

inline std::vector<double> apply_normalizer(const NormalizationStats& s, std::span<const double> row) { return s.apply(row); }

inline void to_json(nlohmann::json& j, const NormalizationStats& s) { j = {{"min", s.min}, {"max", s.max}}; }

inline void from_json(const nlohmann::json& j, NormalizationStats& s) {
  j.at("min").get_to(s.min);
  j.at("max").get_to(s.max);
  if (s.min.size() != s.max.size()) throw ValidationError("normalizer: min/max length mismatch");
  for (std::size_t k = 0; k < s.min.size(); ++k)
    if (!(s.max[k] >= s.min[k])) throw ValidationError("normalizer: max < min");
}

// ---------------------------------------------------------------------------

/// Fully connected ReLU network with a softmax head. Parameters live in one
/// flat vector: for each layer, the weight matrix row-major (out x in), then bias.
class MlpModel {
 public:
  MlpModel() = default;

  explicit MlpModel(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw std::invalid_argument("MlpModel: need input and output sizes");
    for (auto s : sizes_)
      if (s == 0) throw std::invalid_argument("MlpModel: zero-width layer");
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      offsets_.push_back(n);
      n += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
    }
    params_.assign(n, 0.0);
  }

  /// Capacity classifier layout: features -> 17 -> 32 -> max_capacity + 1.
  static MlpModel for_capacity(int max_capacity, std::size_t input_dim = kNumFeatures) {
    if (max_capacity < 0) throw std::invalid_argument("MlpModel: negative max capacity");
    return MlpModel({input_dim, 17, 32, static_cast<std::size_t>(max_capacity) + 1});
  }

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t num_layers() const { return sizes_.size() - 1; }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  double* weights(std::size_t l) { return params_.data() + offsets_[l]; }
  const double* weights(std::size_t l) const { return params_.data() + offsets_[l]; }
  double* bias(std::size_t l) { return weights(l) + sizes_[l + 1] * sizes_[l]; }
  const double* bias(std::size_t l) const { return weights(l) + sizes_[l + 1] * sizes_[l]; }

  /// He-normal weights, zero biases.
  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::fill(params_.begin(), params_.end(), 0.0);
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const double sd = std::sqrt(2.0 / static_cast<double>(sizes_[l]));
      double* w = weights(l);
      for (std::size_t k = 0; k < sizes_[l + 1] * sizes_[l]; ++k) w[k] = sd * standard_normal(rng);
    }
  }

  /// Activations of every layer; the last entry is the softmax output.
  std::vector<std::vector<double>> forward(std::span<const double> x) const {
    if (x.size() != input_dim()) throw std::invalid_argument("MlpModel: input dimension mismatch");
    std::vector<std::vector<double>> acts;
    acts.emplace_back(x.begin(), x.end());
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const auto& in = acts.back();
      std::vector<double> z(sizes_[l + 1]);
      const double* w = weights(l);
      const double* b = bias(l);
      for (std::size_t o = 0; o < z.size(); ++o) {
        double s = b[o];
        for (std::size_t i = 0; i < in.size(); ++i) s += w[o * in.size() + i] * in[i];
        z[o] = s;
      }
      if (l + 1 < num_layers())
        for (auto& v : z) v = std::max(v, 0.0);
      else
        softmax(z);
      acts.push_back(std::move(z));
    }
    return acts;
  }

  std::vector<double> predict_probs(std::span<const double> x) const { return forward(x).back(); }

  static void softmax(std::vector<double>& z) {
    const double m = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (auto& v : z) total += (v = std::exp(v - m));
    for (auto& v : z) v /= total;
  }

  /// Adds d(loss)/d(params) for one example into `grad`; returns the cross-entropy.
  double accumulate_gradient(std::span<const double> x, std::span<const double> target, std::vector<double>& grad,
                             double scale = 1.0) const {
    if (target.size() != output_dim()) throw std::invalid_argument("MlpModel: target dimension mismatch");
    auto acts = forward(x);
    const auto& p = acts.back();
    double loss = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k)
      if (target[k] > 0.0) loss -= target[k] * std::log(std::max(p[k], 1e-300));

    // Softmax with cross-entropy: dL/dz = p - y when the target sums to one.
    std::vector<double> delta(p.size());
    const double tsum = std::accumulate(target.begin(), target.end(), 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) delta[k] = p[k] * tsum - target[k];

    for (std::size_t l = num_layers(); l-- > 0;) {
      const auto& in = acts[l];
      double* gw = grad.data() + offsets_[l];
      double* gb = gw + sizes_[l + 1] * sizes_[l];
      for (std::size_t o = 0; o < delta.size(); ++o) {
        const double d = delta[o] * scale;
        if (d == 0.0) continue;
        gb[o] += d;
        for (std::size_t i = 0; i < in.size(); ++i) gw[o * in.size() + i] += d * in[i];
      }
      if (l == 0) break;
      std::vector<double> prev(in.size(), 0.0);
      const double* w = weights(l);
      for (std::size_t o = 0; o < delta.size(); ++o)
        for (std::size_t i = 0; i < in.size(); ++i) prev[i] += w[o * in.size() + i] * delta[o];
      for (std::size_t i = 0; i < in.size(); ++i)
        if (in[i] <= 0.0) prev[i] = 0.0;  // ReLU derivative
      delta = std::move(prev);
    }
    return loss;
  }

  bool operator==(const MlpModel&) const = default;

 private:
  template <class Rng>
  static double standard_normal(Rng& rng) {
    // Box-Muller on our own uniform so results do not depend on the standard library.
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

struct Dataset {
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> y;  // target distributions, typically one-hot

  std::size_t size() const { return x.size(); }
};

/// Mean cross-entropy and its gradient over the given rows.
inline double loss_and_gradient(const MlpModel& m, const Dataset& d, std::span<const std::size_t> rows,
                                std::vector<double>& grad) {
  grad.assign(m.params().size(), 0.0);
  if (rows.empty()) return 0.0;
  const double scale = 1.0 / static_cast<double>(rows.size());
  double loss = 0.0;
  for (auto r : rows) loss += m.accumulate_gradient(d.x[r], d.y[r], grad, scale);
  return loss * scale;
}

inline double mean_loss(const MlpModel& m, const Dataset& d) {
  double loss = 0.0;
  for (std::size_t r = 0; r < d.size(); ++r) {
    auto p = m.predict_probs(d.x[r]);
    for (std::size_t k = 0; k < p.size(); ++k)
      if (d.y[r][k] > 0.0) loss -= d.y[r][k] * std::log(std::max(p[k], 1e-300));
  }
  return d.size() ? loss / static_cast<double>(d.size()) : 0.0;
}

struct TrainOptions {
  double learning_rate = 1e-4;
  int epochs = 300;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

/// Seeded Fisher-Yates shuffle.
template <class Rng>
void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
  }
}

/// Mini-batch Adam on mean cross-entropy, starting from `model`'s parameters.
inline MlpModel train(MlpModel model, const Dataset& data, const TrainOptions& opt) {
  if (data.size() == 0) throw std::invalid_argument("train: no examples");
  if (data.y.size() != data.x.size()) throw std::invalid_argument("train: features and targets differ in length");
  for (std::size_t r = 0; r < data.size(); ++r)
    if (data.x[r].size() != model.input_dim() || data.y[r].size() != model.output_dim())
      throw std::invalid_argument("train: dimension mismatch at example " + std::to_string(r));
  if (opt.batch_size == 0 || opt.epochs < 0) throw std::invalid_argument("train: bad hyperparameters");

  std::mt19937_64 rng(opt.seed ^ 0x5851f42d4c957f2dULL);
  auto& w = model.params();
  std::vector<double> m(w.size(), 0.0), v(w.size(), 0.0), g;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  long step = 0;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    shuffle_indices(order, rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
      const std::size_t end = std::min(order.size(), start + opt.batch_size);
      std::span<const std::size_t> batch(order.data() + start, end - start);
      const double loss = loss_and_gradient(model, data, batch, g);
      if (!std::isfinite(loss))
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch starting " +
                                 std::to_string(start));
      epoch_loss += loss * static_cast<double>(batch.size());
      ++step;
      const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(step));
      for (std::size_t k = 0; k < w.size(); ++k) {
        m[k] = opt.beta1 * m[k] + (1.0 - opt.beta1) * g[k];
        v[k] = opt.beta2 * v[k] + (1.0 - opt.beta2) * g[k] * g[k];
        w[k] -= opt.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + opt.adam_eps);
      }
    }
    (void)epoch_loss;
  }
  return model;
}

/// Seeded initialization followed by training; the usual entry point.
inline MlpModel train(const std::vector<std::size_t>& sizes, const Dataset& data, const TrainOptions& opt) {
  MlpModel model(sizes);
  model.initialize(opt.seed);
  return train(std::move(model), data, opt);
}

inline DiscretePmf predict(const MlpModel& m, std::span<const double> x) {
  auto p = m.predict_probs(x);
  std::vector<double> s(p.size());
  std::iota(s.begin(), s.end(), 0.0);
  return DiscretePmf{std::move(s), std::move(p)};
}

/// Seeded 80:20 style split. Returns (train rows, validation rows).
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double train_fraction,
                                                                                     std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  shuffle_indices(idx, rng);
  auto k = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n > 0) k = std::clamp<std::size_t>(k, 1, n);
  std::vector<std::size_t> a(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::size_t> b(idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
  return {a, b};
}

// ---------------------------------------------------------------------------
// Evaluation metrics.

struct Interval {
  std::size_t lo = 0;
  std::size_t hi = 0;
  double mass = 0.0;

  std::size_t length() const { return hi - lo; }
  bool contains(std::size_t k) const { return lo <= k && k <= hi; }
};

/// Shortest contiguous index range with mass >= level; ties prefer more mass,
/// then the leftmost range. Mass is compared exactly as summed.
inline Interval shortest_interval(std::span<const double> probs, double level) {
  if (probs.empty()) throw std::invalid_argument("shortest_interval: empty PMF");
  const std::size_t n = probs.size();
  Interval best{0, n - 1, std::accumulate(probs.begin(), probs.end(), 0.0)};
  bool found = false;
  for (std::size_t lo = 0; lo < n; ++lo) {
    double mass = 0.0;
    for (std::size_t hi = lo; hi < n; ++hi) {
      mass += probs[hi];
      if (mass < level) continue;
      const Interval cand{lo, hi, mass};
      if (!found || cand.length() < best.length() || (cand.length() == best.length() && cand.mass > best.mass)) {
        best = cand;
        found = true;
      }
      break;
    }
  }
  return best;
}

struct Metrics {
  double rmse = 0.0;
  double cr = 0.0;
  double acil_mean = 0.0;
  double acil_std = 0.0;
};

inline void to_json(nlohmann::json& j, const Metrics& m) {
  j = {{"rmse", m.rmse}, {"cr", m.cr}, {"acil_mean", m.acil_mean}, {"acil_std", m.acil_std}};
}

inline Metrics metrics(const std::vector<std::vector<double>>& preds, const std::vector<int>& actuals,
                       double ci_level = 0.9) {
  if (preds.empty()) throw std::invalid_argument("metrics: empty input");
  if (preds.size() != actuals.size()) throw std::invalid_argument("metrics: length mismatch");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw std::invalid_argument("metrics: ci_level must lie in (0,1)");
  const double n = static_cast<double>(preds.size());
  double se = 0.0, covered = 0.0, len = 0.0, len2 = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& p = preds[i];
    const auto point = static_cast<double>(std::max_element(p.begin(), p.end()) - p.begin());
    se += (point - actuals[i]) * (point - actuals[i]);
    const auto iv = shortest_interval(p, ci_level);
    if (actuals[i] >= 0 && iv.contains(static_cast<std::size_t>(actuals[i]))) covered += 1.0;
    const auto L = static_cast<double>(iv.length());
    len += L;
    len2 += L * L;
  }
  Metrics m;
  m.rmse = std::sqrt(se / n);
  m.cr = covered / n;
  m.acil_mean = len / n;
  m.acil_std = std::sqrt(std::max(0.0, len2 / n - m.acil_mean * m.acil_mean));
  return m;
}

// ---------------------------------------------------------------------------
// Model files.

struct CapacityModel {
  std::string airport;
  Direction direction = Direction::arrival;
  int max_capacity = 0;
  NormalizationStats normalizer;
  MlpModel mlp;
  Metrics validation;

  DiscretePmf predict(std::span<const double> raw_features) const {
    return gdp::predict(mlp, normalizer.apply(raw_features));
  }
};

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json model_to_json(const CapacityModel& m) {
  return {{"format", "gdp-capacity-mlp"},
          {"version", kModelFormatVersion},
          {"airport", m.airport},
          {"direction", to_string(m.direction)},
          {"max_capacity", m.max_capacity},
          {"layer_sizes", m.mlp.layer_sizes()},
          {"params", m.mlp.params()},
          {"normalizer", m.normalizer},
          {"validation", m.validation}};
}

inline CapacityModel model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "gdp-capacity-mlp") throw ValidationError("not a capacity model file");
  if (j.value("version", 0) != kModelFormatVersion)
    throw ValidationError("unsupported model version " + std::to_string(j.value("version", 0)));
  CapacityModel m;
  m.airport = j.at("airport").get<std::string>();
  m.direction = parse_direction(j.at("direction").get<std::string>());
  m.max_capacity = j.at("max_capacity").get<int>();
  m.mlp = MlpModel(j.at("layer_sizes").get<std::vector<std::size_t>>());
  auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != m.mlp.params().size()) throw ValidationError("model parameter count does not match layer sizes");
  for (double p : params)
    if (!std::isfinite(p)) throw ValidationError("model has non-finite parameters");
  m.mlp.params() = std::move(params);
  if (m.mlp.output_dim() != static_cast<std::size_t>(m.max_capacity) + 1)
    throw ValidationError("model output size does not match max_capacity");
  m.normalizer = j.at("normalizer").get<NormalizationStats>();
  if (m.normalizer.min.size() != m.mlp.input_dim()) throw ValidationError("normalizer size does not match input");
  if (j.contains("validation")) {
    const auto& v = j["validation"];
    m.validation = Metrics{v.value("rmse", 0.0), v.value("cr", 0.0), v.value("acil_mean", 0.0), v.value("acil_std", 0.0)};
  }
  return m;
}

}  // namespace gdp
