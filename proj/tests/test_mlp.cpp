#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edgeflow/error.hpp"
#include "edgeflow/mlp.hpp"
#include "edgeflow/rng.hpp"
#include "grad_check.hpp"

using namespace edgeflow;

namespace {

LabeledSample sample(std::uint64_t n, std::uint64_t m, std::uint64_t f, int label) {
  return {FeatureVector{n, m, f}, "", label, ""};
}

Dataset random_batch(Rng& rng, int n) {
  Dataset d;
  for (int i = 0; i < n; ++i) {
    d.push_back(sample(static_cast<std::uint64_t>(rng.integer(0, 6000)), static_cast<std::uint64_t>(rng.integer(0, 6000)),
                       static_cast<std::uint64_t>(rng.integer(0, 6000)), static_cast<int>(rng.integer(1, 5))));
  }
  return d;
}

MlpModel random_model(std::uint64_t seed) {
  MlpModel m = MlpModel::initialize(seed);
  Rng rng(seed + 99);
  for (auto& l : m.layers) {
    for (double& b : l.biases) b = rng.uniform(-0.2, 0.2);
  }
  return m;
}

int argmax_level(const IntensityEstimate& e) {
  return static_cast<int>(std::max_element(e.class_distribution.begin(), e.class_distribution.end()) -
                          e.class_distribution.begin()) +
         1;
}

}  // namespace

TEST_CASE("initialized model has the fixed topology") {
  const MlpModel m = MlpModel::initialize(1);
  REQUIRE(m.layers.size() == 5);
  for (std::size_t l = 0; l < 5; ++l) {
    CHECK(m.layers[l].fan_in == kLayerSizes[l]);
    CHECK(m.layers[l].fan_out == kLayerSizes[l + 1]);
    const double limit = std::sqrt(6.0 / (kLayerSizes[l] + kLayerSizes[l + 1]));
    for (double w : m.layers[l].weights) CHECK(std::abs(w) <= limit);
  }
  CHECK(m.parameter_count() == 30 + 10 + 200 + 20 + 200 + 10 + 100 + 10 + 50 + 5);
  CHECK(m.feature_scale == kDefaultFeatureScale);
  CHECK(MlpModel::initialize(1) == m);
  CHECK_FALSE(MlpModel::initialize(2) == m);
}

TEST_CASE("expected class index from a distribution") {
  CHECK(estimate_from_distribution({0, 0, 1, 0, 0}).value == 3.0);
  CHECK(estimate_from_distribution({0.2, 0.2, 0.2, 0.2, 0.2}).value == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(estimate_from_distribution({0, 0, 0.3, 0.7, 0}).value == doctest::Approx(3.7).epsilon(1e-12));
  CHECK(estimate_from_distribution({1, 0, 0, 0, 0}).value == 1.0);
  CHECK(estimate_from_distribution({0, 0, 0, 0, 1}).value == 5.0);
}

TEST_CASE("forward of a model saturated on level 3 yields 3.0") {
  MlpModel m = MlpModel::initialize(4);
  auto& out = m.layers.back();
  std::fill(out.weights.begin(), out.weights.end(), 0.0);
  out.biases = {0, 0, 1000, 0, 0};
  const IntensityEstimate e = forward(m, {1234, 55, 999});
  CHECK(e.value == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(e.class_distribution[2] == doctest::Approx(1.0));
}

TEST_CASE("softmax outputs sum to one and the estimate stays in range") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    MlpModel m = MlpModel::initialize(rng.next());
    for (auto& l : m.layers) {
      for (double& w : l.weights) w *= rng.uniform(0.5, 8.0);
      for (double& b : l.biases) b = rng.uniform(-2, 2);
    }
    const FeatureVector fv{static_cast<std::uint64_t>(rng.integer(0, 20000)), static_cast<std::uint64_t>(rng.integer(0, 20000)),
                           static_cast<std::uint64_t>(rng.integer(0, 20000))};
    const IntensityEstimate e = forward(m, fv);
    const double sum = std::accumulate(e.class_distribution.begin(), e.class_distribution.end(), 0.0);
    REQUIRE(std::abs(sum - 1.0) <= 1e-6);
    REQUIRE(e.value >= 1.0);
    REQUIRE(e.value <= 5.0);
    double expect = 0.0;
    for (int k = 0; k < 5; ++k) expect += (k + 1) * e.class_distribution[static_cast<std::size_t>(k)];
    REQUIRE(e.value == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("hidden-unit permutation leaves the output unchanged") {
  const MlpModel m = random_model(8);
  MlpModel p = m;
  // Reverse the 20 units of the second hidden layer.
  const int units = m.layers[1].fan_out;
  std::vector<int> perm(static_cast<std::size_t>(units));
  std::iota(perm.rbegin(), perm.rend(), 0);
  for (int o = 0; o < units; ++o) {
    const int src = perm[static_cast<std::size_t>(o)];
    for (int i = 0; i < m.layers[1].fan_in; ++i) p.layers[1].weight(o, i) = m.layers[1].weight(src, i);
    p.layers[1].biases[static_cast<std::size_t>(o)] = m.layers[1].biases[static_cast<std::size_t>(src)];
    for (int k = 0; k < m.layers[2].fan_out; ++k) p.layers[2].weight(k, o) = m.layers[2].weight(k, src);
  }
  CHECK_FALSE(p == m);
  for (FeatureVector fv : {FeatureVector{100, 2000, 300}, FeatureVector{5000, 0, 4000}, FeatureVector{0, 0, 0}}) {
    CHECK(forward(p, fv).value == doctest::Approx(forward(m, fv).value).epsilon(1e-12));
  }
}

TEST_CASE("backprop gradients match central differences") {
  // A clean batch: no rectifier flips inside the stencil, every coordinate checked.
  {
    Rng rng(1);
    const MlpModel m = random_model(1);
    const Dataset batch = random_batch(rng, 5);
    const auto r = gradcheck::run(m, batch, 1e-3, false);
    CHECK(r.kinked == 0);
    CHECK(r.checked == m.parameter_count());
    CHECK(r.worst_relative <= 1e-4);
  }
  // Across many seeds, every coordinate away from a kink agrees.
  for (std::uint64_t seed = 2; seed <= 12; ++seed) {
    Rng rng(seed);
    const MlpModel m = random_model(seed);
    const auto r = gradcheck::run(m, random_batch(rng, 5), 1e-3, true);
    CHECK(r.worst_relative <= 1e-4);
    CHECK(r.checked + r.kinked == m.parameter_count());
    CHECK(r.checked > m.parameter_count() * 9 / 10);
  }
}

TEST_CASE("training memorizes a single repeated sample") {
  Dataset d(10, sample(100, 200, 300, 2));
  TrainConfig cfg;
  cfg.max_epochs = 200;
  cfg.target_loss = 0.0;
  const TrainResult r = train(d, cfg);
  CHECK(r.epoch_loss.size() == 200);
  CHECK(argmax_level(forward(r.model, {100, 200, 300})) == 2);
}

TEST_CASE("training separates two far-count regimes") {
  Rng rng(21);
  Dataset d;
  for (int i = 0; i < 60; ++i) {
    const bool high = i % 2 == 0;
    const auto far = static_cast<std::uint64_t>(high ? rng.integer(2000, 4000) : rng.integer(200, 400));
    d.push_back(sample(static_cast<std::uint64_t>(rng.integer(0, 3000)), static_cast<std::uint64_t>(rng.integer(0, 3000)),
                       far, high ? 5 : 1));
  }
  TrainConfig cfg;
  cfg.max_epochs = 1500;
  const TrainResult r = train(d, cfg);
  CHECK(evaluate(r.model, d).exact_rate >= 0.95);
}

TEST_CASE("training is bit-for-bit deterministic") {
  Rng rng(3);
  const Dataset d = random_batch(rng, 40);
  TrainConfig cfg;
  cfg.max_epochs = 50;
  const TrainResult a = train(d, cfg);
  const TrainResult b = train(d, cfg);
  CHECK(encode_model(a.model) == encode_model(b.model));
  CHECK(a.epoch_loss == b.epoch_loss);
  cfg.rng_seed += 1;
  CHECK_FALSE(encode_model(train(d, cfg).model) == encode_model(a.model));
}

TEST_CASE("full-batch loss is non-increasing at a small learning rate") {
  Rng rng(4);
  const Dataset d = random_batch(rng, 32);
  TrainConfig cfg;
  cfg.learning_rate = 1e-4;
  cfg.batch_size = static_cast<int>(d.size());
  cfg.max_epochs = 100;
  cfg.target_loss = 0.0;
  const TrainResult r = train(d, cfg);
  for (std::size_t i = 1; i < r.epoch_loss.size(); ++i) CHECK(r.epoch_loss[i] <= r.epoch_loss[i - 1]);
}

TEST_CASE("training stops once the target loss is reached") {
  Dataset d(8, sample(10, 10, 10, 4));
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.target_loss = 0.5;
  cfg.max_epochs = 5000;
  const TrainResult r = train(d, cfg);
  CHECK(r.reached_target);
  CHECK(r.epoch_loss.back() <= 0.5);
  CHECK(r.epoch_loss.size() < 5000);
}

TEST_CASE("training error paths") {
  CHECK_THROWS_AS(train({}, {}), Error);
  Dataset no_features{{std::nullopt, "a.ppm", 2, ""}};
  CHECK_THROWS_AS(train(no_features, {}), Error);
  CHECK_THROWS_AS(train({sample(1, 2, 3, 6)}, {}), Error);
  TrainConfig bad;
  bad.learning_rate = 0;
  CHECK_THROWS_AS(train({sample(1, 2, 3, 3)}, bad), Error);

  // Overflowing parameters turn the loss into inf/nan.
  const Dataset d{sample(1'000'000'000'000'000'000ULL, 3, 4, 1), sample(5, 1'000'000'000'000'000'000ULL, 9, 5)};
  TrainConfig diverge;
  diverge.learning_rate = 1e300;
  diverge.max_epochs = 20;
  CHECK_THROWS_AS(train(d, diverge), Error);
}

TEST_CASE("accuracy scoring") {
  const ScoredEstimate perfect[] = {{1, 1}, {2, 2}, {5, 5}};
  const AccuracyReport p = score_estimates(perfect);
  CHECK(p.exact_rate == 1.0);
  CHECK(p.within_one_rate == 1.0);
  CHECK(p.mean_abs_error == 0.0);

  // round(3.7) = 4 is one level from 5, so it counts toward within-one.
  const ScoredEstimate mixed[] = {{3.7, 5}, {1.0, 1}};
  const AccuracyReport m = score_estimates(mixed);
  CHECK(m.exact_rate == 0.5);
  CHECK(m.within_one_rate == 1.0);
  CHECK(m.mean_abs_error == doctest::Approx(0.65));

  const ScoredEstimate close[] = {{2.9, 3}};
  CHECK(score_estimates(close).exact_rate == 1.0);
  const ScoredEstimate tie[] = {{2.5, 3}};
  CHECK(score_estimates(tie).exact_rate == 1.0);
  const ScoredEstimate far_off[] = {{1.2, 4}};
  CHECK(score_estimates(far_off).within_one_rate == 0.0);

  CHECK(round_half_up(3.5) == 4);
  CHECK(round_half_up(3.4999) == 3);
  CHECK_THROWS_AS(score_estimates({}), Error);
  CHECK_THROWS_AS(evaluate(MlpModel::initialize(1), {}), Error);
}

TEST_CASE("within-one rate never trails the exact rate") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ScoredEstimate> s;
    for (int i = 0; i < 1 + trial % 17; ++i) s.push_back({rng.uniform(1.0, 5.0), static_cast<int>(rng.integer(1, 5))});
    const AccuracyReport r = score_estimates(s);
    CHECK(r.exact_rate >= 0.0);
    CHECK(r.exact_rate <= 1.0);
    CHECK(r.within_one_rate >= r.exact_rate);
  }
}

TEST_CASE("model file round-trips byte for byte") {
  const MlpModel m = random_model(17);
  const auto bytes = encode_model(m);
  const MlpModel back = decode_model(bytes);
  CHECK(back == m);
  CHECK(encode_model(back) == bytes);
  CHECK(bytes.size() == 8 + 4 * 4 + 6 * 4 + 3 * 8 + m.parameter_count() * 8);
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "EFLOWMLP");
}

TEST_CASE("model decoding rejects damaged files") {
  const auto bytes = encode_model(random_model(18));
  for (std::size_t cut : {std::size_t{0}, std::size_t{7}, std::size_t{30}, bytes.size() - 1}) {
    CHECK_THROWS_AS(decode_model(std::span(bytes).first(cut)), Error);
  }
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(decode_model(trailing), Error);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_model(bad_magic), Error);

  auto bad_version = bytes;
  bad_version[8] = 2;
  CHECK_THROWS_WITH_AS(decode_model(bad_version), doctest::Contains("version"), Error);

  // Same header with layer sizes [3, 10, 10, 5].
  std::vector<std::uint8_t> small(bytes.begin(), bytes.begin() + 20);
  auto put = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) small.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  put(4);
  for (std::uint32_t s : {3u, 10u, 10u, 5u}) put(s);
  small.resize(small.size() + 8 * (3 + 30 + 10 + 100 + 10 + 50 + 5), 0);
  CHECK_THROWS_WITH_AS(decode_model(small), doctest::Contains("[3,10,10,5]"), Error);
}
