#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "edgeflow/dataset.hpp"

namespace edgeflow {

/// 3 inputs, hidden layers of 10/20/10/10 rectifier units, 5 softmax outputs.
inline constexpr std::array<int, 6> kLayerSizes{3, 10, 20, 10, 10, 5};
inline constexpr int kNumClasses = 5;
inline constexpr std::array<double, 3> kDefaultFeatureScale{6000.0, 6000.0, 6000.0};

/// Affine layer; weights are fan_out x fan_in, row-major.
struct DenseLayer {
  int fan_in = 0;
  int fan_out = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  double& weight(int out, int in) noexcept { return weights[static_cast<std::size_t>(out) * fan_in + in]; }
  double weight(int out, int in) const noexcept { return weights[static_cast<std::size_t>(out) * fan_in + in]; }

  bool operator==(const DenseLayer&) const = default;
};

struct MlpModel {
  /// Inputs are divided by these before the first layer.
  std::array<double, 3> feature_scale = kDefaultFeatureScale;
  std::vector<DenseLayer> layers;

  /// Glorot-uniform weights, zero biases, drawn from `seed`.
  static MlpModel initialize(std::uint64_t seed, std::array<double, 3> feature_scale = kDefaultFeatureScale);

  /// Throws edgeflow::Error unless layer shapes follow kLayerSizes and every
  /// feature scale is finite and > 0.
  void validate() const;

  std::size_t parameter_count() const noexcept;

  bool operator==(const MlpModel&) const = default;
};

struct IntensityEstimate {
  /// Expected class index sum_k k * p_k, in [1, 5].
  double value = 1.0;
  std::array<double, kNumClasses> class_distribution{};
};

/// round(value) with halves going up.
int round_half_up(double value) noexcept;

/// Scaled network input for a feature vector.
std::array<double, 3> scale_features(const MlpModel& model, const FeatureVector& fv) noexcept;

/// Expected-class estimate from a probability vector over levels 1..5.
IntensityEstimate estimate_from_distribution(const std::array<double, kNumClasses>& probs) noexcept;

IntensityEstimate forward(const MlpModel& model, const FeatureVector& fv);

/// Parameter-shaped container for loss gradients.
struct Gradients {
  std::vector<DenseLayer> layers;
};

/// Mean cross-entropy of the softmax outputs against one-hot labels.
double mean_loss(const MlpModel& model, std::span<const LabeledSample> batch);

/// Mean loss and its backpropagated gradient with respect to every weight
/// and bias. Samples are accumulated in order.
double loss_and_gradients(const MlpModel& model, std::span<const LabeledSample> batch, Gradients& grads);

struct TrainConfig {
  double learning_rate = 0.05;
  int max_epochs = 3000;
  double target_loss = 0.05;
  int batch_size = 16;
  std::uint64_t rng_seed = 7;
  double split_ratio = 0.8;
  std::array<double, 3> feature_scale = kDefaultFeatureScale;

  void validate() const;
};

struct TrainResult {
  MlpModel model;
  /// Mean training loss after each completed epoch.
  std::vector<double> epoch_loss;
  bool reached_target = false;
};

/// Mini-batch gradient descent on mean cross-entropy. Samples are reshuffled
/// every epoch from cfg.rng_seed; training stops after max_epochs or once the
/// epoch loss is <= target_loss. Throws for an empty dataset, samples without
/// features or with labels outside 1..5, and non-finite loss.
TrainResult train(const Dataset& data, const TrainConfig& cfg);

struct AccuracyReport {
  std::size_t count = 0;
  double exact_rate = 0.0;
  /// Includes exact matches.
  double within_one_rate = 0.0;
  double mean_abs_error = 0.0;
};

struct ScoredEstimate {
  double value = 0.0;
  int label = kMinLevel;
};

AccuracyReport score_estimates(std::span<const ScoredEstimate> scored);
AccuracyReport evaluate(const MlpModel& model, const Dataset& test);

/// Binary container, little-endian:
///   "EFLOWMLP" | u32 version | u32 hidden activation | u32 output activation |
///   u32 layer count L | u32 sizes[L] | f64 feature_scale[3] |
///   per layer: f64 weights[out*in] row-major, f64 biases[out]
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> encode_model(const MlpModel& model);
MlpModel decode_model(std::span<const std::uint8_t> bytes);

void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace edgeflow
