#include "edgeflow/mlp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "edgeflow/error.hpp"
#include "edgeflow/fileio.hpp"
#include "edgeflow/rng.hpp"

namespace edgeflow {

namespace {

constexpr std::size_t kNumLayers = kLayerSizes.size() - 1;

std::string sizes_text(const std::vector<int>& sizes) {
  std::string s = "[";
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(sizes[i]);
  }
  return s + "]";
}

std::vector<int> expected_sizes() { return {kLayerSizes.begin(), kLayerSizes.end()}; }

/// Activations of one forward pass, kept for backpropagation.
/// pre[l] is the affine output of layer l; post[l] its activation, with
/// post[0] the scaled input.
struct Trace {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
  std::array<double, kNumClasses> probs{};
  double log_norm = 0.0;  // log sum exp of the output logits
};

void run_forward(const MlpModel& model, const FeatureVector& fv, Trace& t) {
  t.pre.resize(kNumLayers);
  t.post.resize(kNumLayers + 1);
  const auto input = scale_features(model, fv);
  t.post[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < kNumLayers; ++l) {
    const DenseLayer& layer = model.layers[l];
    const std::vector<double>& in = t.post[l];
    std::vector<double>& z = t.pre[l];
    z.assign(static_cast<std::size_t>(layer.fan_out), 0.0);
    for (int o = 0; o < layer.fan_out; ++o) {
      double acc = layer.biases[static_cast<std::size_t>(o)];
      const double* row = &layer.weights[static_cast<std::size_t>(o) * layer.fan_in];
      for (int i = 0; i < layer.fan_in; ++i) acc += row[i] * in[static_cast<std::size_t>(i)];
      z[static_cast<std::size_t>(o)] = acc;
    }
    std::vector<double>& a = t.post[l + 1];
    if (l + 1 < kNumLayers) {
      a.resize(z.size());
      for (std::size_t k = 0; k < z.size(); ++k) a[k] = z[k] > 0.0 ? z[k] : 0.0;
    } else {
      const double peak = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (double v : z) sum += std::exp(v - peak);
      t.log_norm = peak + std::log(sum);
      a.resize(z.size());
      for (std::size_t k = 0; k < z.size(); ++k) {
        a[k] = std::exp(z[k] - t.log_norm);
        t.probs[k] = a[k];
      }
    }
  }
}

void check_batch(std::span<const LabeledSample> batch) {
  for (const LabeledSample& s : batch) {
    if (!s.features) throw Error("sample '" + s.tag + "' has no features");
    if (!valid_level(s.label)) throw Error("sample '" + s.tag + "' has label " + std::to_string(s.label) + " outside 1..5");
  }
}

}  // namespace

MlpModel MlpModel::initialize(std::uint64_t seed, std::array<double, 3> feature_scale) {
  MlpModel model;
  model.feature_scale = feature_scale;
  Rng rng(mix_seed(seed, 0));
  for (std::size_t l = 0; l < kNumLayers; ++l) {
    DenseLayer layer;
    layer.fan_in = kLayerSizes[l];
    layer.fan_out = kLayerSizes[l + 1];
    const double limit = std::sqrt(6.0 / (layer.fan_in + layer.fan_out));
    layer.weights.resize(static_cast<std::size_t>(layer.fan_in) * layer.fan_out);
    for (double& w : layer.weights) w = rng.uniform(-limit, limit);
    layer.biases.assign(static_cast<std::size_t>(layer.fan_out), 0.0);
    model.layers.push_back(std::move(layer));
  }
  model.validate();
  return model;
}

void MlpModel::validate() const {
  std::vector<int> sizes;
  if (!layers.empty()) sizes.push_back(layers.front().fan_in);
  for (const DenseLayer& layer : layers) sizes.push_back(layer.fan_out);
  if (sizes != expected_sizes()) {
    throw Error("model: layer sizes " + sizes_text(sizes) + " do not match required " + sizes_text(expected_sizes()));
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    if (l > 0 && layer.fan_in != layers[l - 1].fan_out) throw Error("model: layer " + std::to_string(l) + " fan-in mismatch");
    if (layer.weights.size() != static_cast<std::size_t>(layer.fan_in) * layer.fan_out ||
        layer.biases.size() != static_cast<std::size_t>(layer.fan_out)) {
      throw Error("model: layer " + std::to_string(l) + " parameter buffers have the wrong size");
    }
  }
  for (double s : feature_scale) {
    if (!(s > 0.0) || !std::isfinite(s)) throw Error("model: feature scales must be finite and > 0");
  }
}

std::size_t MlpModel::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const DenseLayer& layer : layers) n += layer.weights.size() + layer.biases.size();
  return n;
}

int round_half_up(double value) noexcept { return static_cast<int>(std::floor(value + 0.5)); }

std::array<double, 3> scale_features(const MlpModel& model, const FeatureVector& fv) noexcept {
  return {static_cast<double>(fv.near) / model.feature_scale[0], static_cast<double>(fv.mid) / model.feature_scale[1],
          static_cast<double>(fv.far) / model.feature_scale[2]};
}

IntensityEstimate estimate_from_distribution(const std::array<double, kNumClasses>& probs) noexcept {
  IntensityEstimate est;
  est.class_distribution = probs;
  double value = 0.0;
  for (int k = 0; k < kNumClasses; ++k) value += (k + 1) * probs[static_cast<std::size_t>(k)];
  est.value = std::clamp(value, static_cast<double>(kMinLevel), static_cast<double>(kMaxLevel));
  return est;
}

IntensityEstimate forward(const MlpModel& model, const FeatureVector& fv) {
  Trace t;
  run_forward(model, fv, t);
  return estimate_from_distribution(t.probs);
}

double mean_loss(const MlpModel& model, std::span<const LabeledSample> batch) {
  if (batch.empty()) throw Error("loss: empty batch");
  check_batch(batch);
  Trace t;
  double total = 0.0;
  for (const LabeledSample& s : batch) {
    run_forward(model, *s.features, t);
    total += t.log_norm - t.pre.back()[static_cast<std::size_t>(s.label - 1)];
  }
  return total / static_cast<double>(batch.size());
}

double loss_and_gradients(const MlpModel& model, std::span<const LabeledSample> batch, Gradients& grads) {
  if (batch.empty()) throw Error("loss: empty batch");
  check_batch(batch);
  grads.layers.resize(model.layers.size());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    DenseLayer& g = grads.layers[l];
    g.fan_in = model.layers[l].fan_in;
    g.fan_out = model.layers[l].fan_out;
    g.weights.assign(model.layers[l].weights.size(), 0.0);
    g.biases.assign(model.layers[l].biases.size(), 0.0);
  }

  Trace t;
  std::vector<double> delta;
  std::vector<double> upstream;
  double total = 0.0;
  for (const LabeledSample& s : batch) {
    run_forward(model, *s.features, t);
    const auto target = static_cast<std::size_t>(s.label - 1);
    total += t.log_norm - t.pre.back()[target];

    // Softmax + cross-entropy: dL/dz = p - onehot.
    delta.assign(t.probs.begin(), t.probs.end());
    delta[target] -= 1.0;

    for (std::size_t l = kNumLayers; l-- > 0;) {
      const DenseLayer& layer = model.layers[l];
      DenseLayer& g = grads.layers[l];
      const std::vector<double>& in = t.post[l];
      for (int o = 0; o < layer.fan_out; ++o) {
        const double d = delta[static_cast<std::size_t>(o)];
        g.biases[static_cast<std::size_t>(o)] += d;
        double* row = &g.weights[static_cast<std::size_t>(o) * layer.fan_in];
        for (int i = 0; i < layer.fan_in; ++i) row[i] += d * in[static_cast<std::size_t>(i)];
      }
      if (l == 0) break;
      upstream.assign(static_cast<std::size_t>(layer.fan_in), 0.0);
      for (int o = 0; o < layer.fan_out; ++o) {
        const double d = delta[static_cast<std::size_t>(o)];
        const double* row = &layer.weights[static_cast<std::size_t>(o) * layer.fan_in];
        for (int i = 0; i < layer.fan_in; ++i) upstream[static_cast<std::size_t>(i)] += row[i] * d;
      }
      const std::vector<double>& z_prev = t.pre[l - 1];
      for (std::size_t i = 0; i < upstream.size(); ++i) {
        if (z_prev[i] <= 0.0) upstream[i] = 0.0;
      }
      delta.swap(upstream);
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  for (DenseLayer& g : grads.layers) {
    for (double& v : g.weights) v *= inv;
    for (double& v : g.biases) v *= inv;
  }
  return total * inv;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw Error("train: learning_rate must be > 0");
  if (max_epochs < 1) throw Error("train: max_epochs must be >= 1");
  if (!(target_loss >= 0.0)) throw Error("train: target_loss must be >= 0");
  if (batch_size < 1) throw Error("train: batch_size must be >= 1");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw Error("train: split_ratio must lie in (0, 1)");
  for (double s : feature_scale) {
    if (!(s > 0.0) || !std::isfinite(s)) throw Error("train: feature scales must be finite and > 0");
  }
}

TrainResult train(const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw Error("train: empty dataset");
  check_batch(data);

  TrainResult result;
  result.model = MlpModel::initialize(cfg.rng_seed, cfg.feature_scale);
  MlpModel& model = result.model;

  Dataset order = data;
  Rng rng(mix_seed(cfg.rng_seed, 1));
  Gradients grads;
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(std::span<LabeledSample>(order));
    for (std::size_t begin = 0; begin < order.size(); begin += batch) {
      const std::size_t n = std::min(batch, order.size() - begin);
      const double loss = loss_and_gradients(model, std::span<const LabeledSample>(order).subspan(begin, n), grads);
      if (!std::isfinite(loss)) {
        throw Error("train: loss became non-finite at epoch " + std::to_string(epoch + 1) +
                    "; learning_rate is likely too large");
      }
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        DenseLayer& layer = model.layers[l];
        const DenseLayer& g = grads.layers[l];
        for (std::size_t k = 0; k < layer.weights.size(); ++k) layer.weights[k] -= cfg.learning_rate * g.weights[k];
        for (std::size_t k = 0; k < layer.biases.size(); ++k) layer.biases[k] -= cfg.learning_rate * g.biases[k];
      }
    }
    const double epoch_loss = mean_loss(model, data);
    if (!std::isfinite(epoch_loss)) {
      throw Error("train: loss became non-finite at epoch " + std::to_string(epoch + 1) +
                  "; learning_rate is likely too large");
    }
    result.epoch_loss.push_back(epoch_loss);
    if (epoch_loss <= cfg.target_loss) {
      result.reached_target = true;
      break;
    }
  }
  return result;
}

AccuracyReport score_estimates(std::span<const ScoredEstimate> scored) {
  if (scored.empty()) throw Error("evaluate: empty test set");
  std::size_t exact = 0;
  std::size_t within = 0;
  double abs_err = 0.0;
  for (const ScoredEstimate& s : scored) {
    const int diff = std::abs(round_half_up(s.value) - s.label);
    exact += diff == 0;
    within += diff <= 1;
    abs_err += std::abs(s.value - s.label);
  }
  const auto n = static_cast<double>(scored.size());
  return {scored.size(), exact / n, within / n, abs_err / n};
}

AccuracyReport evaluate(const MlpModel& model, const Dataset& test) {
  if (test.empty()) throw Error("evaluate: empty test set");
  check_batch(test);
  std::vector<ScoredEstimate> scored;
  scored.reserve(test.size());
  for (const LabeledSample& s : test) scored.push_back({forward(model, *s.features).value, s.label});
  return score_estimates(scored);
}

namespace {

constexpr char kMagic[8] = {'E', 'F', 'L', 'O', 'W', 'M', 'L', 'P'};
constexpr std::uint32_t kActivationRelu = 1;
constexpr std::uint32_t kActivationSoftmax = 1;

class Writer {
 public:
  void raw(const char* p, std::size_t n) { out.insert(out.end(), p, p + n); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::span<const std::uint8_t> take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw Error("model: truncated file");
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32() {
    const auto s = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(s[static_cast<std::size_t>(i)]) << (8 * i);
    return v;
  }
  double f64() {
    const auto s = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(s[static_cast<std::size_t>(i)]) << (8 * i);
    return std::bit_cast<double>(v);
  }
  bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_model(const MlpModel& model) {
  model.validate();
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kModelFormatVersion);
  w.u32(kActivationRelu);
  w.u32(kActivationSoftmax);
  w.u32(static_cast<std::uint32_t>(kLayerSizes.size()));
  for (int s : kLayerSizes) w.u32(static_cast<std::uint32_t>(s));
  for (double s : model.feature_scale) w.f64(s);
  for (const DenseLayer& layer : model.layers) {
    for (double v : layer.weights) w.f64(v);
    for (double v : layer.biases) w.f64(v);
  }
  return std::move(w.out);
}

MlpModel decode_model(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.take(sizeof kMagic);
  if (!std::equal(magic.begin(), magic.end(), kMagic)) throw Error("model: bad magic, not an edgeflow model file");
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    throw Error("model: unsupported format version " + std::to_string(version) + " (expected " +
                std::to_string(kModelFormatVersion) + ")");
  }
  if (r.u32() != kActivationRelu || r.u32() != kActivationSoftmax) throw Error("model: unsupported activation");
  const std::uint32_t count = r.u32();
  if (count > 64) throw Error("model: implausible layer count " + std::to_string(count));
  std::vector<int> sizes;
  for (std::uint32_t i = 0; i < count; ++i) sizes.push_back(static_cast<int>(r.u32()));
  if (sizes != expected_sizes()) {
    throw Error("model: dimension mismatch, layer sizes " + sizes_text(sizes) + " but expected " +
                sizes_text(expected_sizes()));
  }
  MlpModel model;
  for (double& s : model.feature_scale) s = r.f64();
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.fan_in = sizes[l];
    layer.fan_out = sizes[l + 1];
    layer.weights.resize(static_cast<std::size_t>(layer.fan_in) * layer.fan_out);
    layer.biases.resize(static_cast<std::size_t>(layer.fan_out));
    for (double& v : layer.weights) v = r.f64();
    for (double& v : layer.biases) v = r.f64();
    model.layers.push_back(std::move(layer));
  }
  if (!r.done()) throw Error("model: trailing bytes after parameters");
  model.validate();
  return model;
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, encode_model(model));
}

MlpModel load_model(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_model(bytes);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace edgeflow
