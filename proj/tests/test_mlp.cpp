#include <gtest/gtest.h>

#include <cmath>

#include "opinionlens/error.hpp"
#include "opinionlens/mlp.hpp"
#include "opinionlens/util.hpp"
#include "test_support.hpp"

using namespace opinionlens;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an opinionlens::Error";
  return ErrorCode::kEmpty;
}

std::vector<LabeledVector> gaussians(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    LabeledVector v;
    v.label = static_cast<int>(i % 2);
    for (std::size_t d = 0; d < dim; ++d) v.x.push_back(rng.normal() * 0.5 + (v.label ? 2.0 : -2.0) * (d < 2));
    out.push_back(std::move(v));
  }
  return out;
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.hidden1 = 16;
  cfg.hidden2 = 8;
  cfg.max_epochs = 30;
  cfg.batch_size = 16;
  cfg.learning_rate = 1e-2;
  cfg.seed = 4;
  return cfg;
}

}  // namespace

TEST(MlpInit, SameSeedSameParameters) {
  const LayerDims dims{20, 10, 6, 2};
  EXPECT_EQ(MlpModel::init(dims, 1), MlpModel::init(dims, 1));
  EXPECT_NE(MlpModel::init(dims, 1), MlpModel::init(dims, 2));
}

TEST(MlpInit, WeightsWithinFanInBoundAndBiasesZero) {
  const LayerDims dims{50, 20, 10, 2};
  const auto m = MlpModel::init(dims, 8);
  for (std::size_t l = 0; l < 3; ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(dims[l]));
    for (double w : m.layers()[l].weights.data) EXPECT_LE(std::abs(w), bound);
    for (double b : m.layers()[l].bias) EXPECT_EQ(b, 0.0);
  }
  EXPECT_EQ(m.parameter_count(), 50u * 20 + 20 + 20 * 10 + 10 + 10 * 2 + 2);
}

TEST(MlpInit, BadDims) {
  EXPECT_EQ(code_of([] { MlpModel::init({0, 4, 4, 2}, 1); }), ErrorCode::kBadDims);
  EXPECT_EQ(code_of([] { MlpModel::init({4, 0, 4, 2}, 1); }), ErrorCode::kBadDims);
  EXPECT_EQ(code_of([] { MlpModel::init({4, 4, 4, 3}, 1); }), ErrorCode::kBadDims);
}

TEST(MlpForward, ZeroModelIsUniform) {
  const auto m = MlpModel::zeros({6, 4, 3, 2});
  const auto p = m.forward(std::vector<double>{1, -2, 3, 0, 5, 9});
  EXPECT_EQ(p[0], 0.5);
  EXPECT_EQ(p[1], 0.5);
  EXPECT_EQ(code_of([&] { m.forward(std::vector<double>{1, 2}); }), ErrorCode::kDimensionMismatch);
}

TEST(MlpForward, HandSetToyModel) {
  auto m = MlpModel::zeros({3, 2, 2, 2});
  auto& L = m.layers();
  L[0].weights.data = {1.0, -1.0, 0.5, 0.0, 2.0, -1.0};
  L[0].bias = {0.1, -0.2};
  L[1].weights.data = {1.0, 1.0, -1.0, 0.5};
  L[1].bias = {0.0, 0.3};
  L[2].weights.data = {2.0, -1.0, -0.5, 1.5};
  L[2].bias = {0.05, -0.05};
  const double x0 = 0.3, x1 = -0.7, x2 = 1.2;
  // Layer 1: pre-activations then ReLU.
  const double a0 = std::max(0.0, 1.0 * x0 - 1.0 * x1 + 0.5 * x2 + 0.1);
  const double a1 = std::max(0.0, 0.0 * x0 + 2.0 * x1 - 1.0 * x2 - 0.2);
  const double b0 = std::max(0.0, a0 + a1);
  const double b1 = std::max(0.0, -a0 + 0.5 * a1 + 0.3);
  const double z0 = 2.0 * b0 - b1 + 0.05;
  const double z1 = -0.5 * b0 + 1.5 * b1 - 0.05;
  const double p1 = 1.0 / (1.0 + std::exp(z0 - z1));
  const auto p = m.forward(std::vector<double>{x0, x1, x2});
  EXPECT_NEAR(p[1], p1, 1e-12);
  EXPECT_NEAR(p[0], 1.0 - p1, 1e-12);
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
}

TEST(MlpLoss, GradientMatchesFiniteDifferences) {
  auto m = MlpModel::init({8, 5, 4, 2}, 11);
  for (std::size_t i = 0; i < m.parameter_count(); ++i) m.parameter(i) += 0.01 * std::sin(static_cast<double>(i));
  const auto data = gaussians(6, 8, 2);
  const double l2 = 1e-3;
  const auto lg = loss_and_grad(m, data, l2);
  std::vector<double> flat_grad;
  for (const auto& g : lg.grad) {
    flat_grad.insert(flat_grad.end(), g.weights.data.begin(), g.weights.data.end());
    flat_grad.insert(flat_grad.end(), g.bias.begin(), g.bias.end());
  }
  ASSERT_EQ(flat_grad.size(), m.parameter_count());
  const double h = 1e-6;
  for (std::size_t i = 0; i < m.parameter_count(); ++i) {
    auto plus = m, minus = m;
    plus.parameter(i) += h;
    minus.parameter(i) -= h;
    const double numeric = (loss(plus, data, l2) - loss(minus, data, l2)) / (2 * h);
    EXPECT_NEAR(flat_grad[i], numeric, 1e-6 * std::max(1.0, std::abs(numeric))) << "param " << i;
  }
}

TEST(MlpLoss, PenaltyOnlyTermOnZeroBiasedModel) {
  auto m = MlpModel::zeros({2, 2, 2, 2});
  m.layers()[0].weights.data = {1.0, 2.0, 0.0, 0.0};
  m.layers()[1].bias = {3.0, 3.0};
  // All-zero downstream weights keep logits equal, so CE = ln 2.
  const std::vector<LabeledVector> batch = {{{1.0, 1.0}, 0}};
  EXPECT_NEAR(loss(m, batch, 0.1), std::log(2.0) + 0.1 * 5.0, 1e-12);
}

TEST(MlpLoss, DuplicatingBatchKeepsMeanLoss) {
  const auto m = MlpModel::init({8, 5, 4, 2}, 3);
  auto data = gaussians(10, 8, 5);
  const double once = loss(m, data, 1e-4);
  auto twice = data;
  twice.insert(twice.end(), data.begin(), data.end());
  EXPECT_NEAR(loss(m, twice, 1e-4), once, 1e-12);
}

TEST(MlpTrain, SeparableGaussiansReachHighAccuracy) {
  const auto data = gaussians(600, 10, 21);
  const auto result = train(data, small_config());
  const auto test = gaussians(400, 10, 99);
  EXPECT_GE(accuracy(result.model, test), 0.99);
  EXPECT_TRUE(result.model.all_finite());
  EXPECT_GE(result.report.epochs.size(), 1u);
  EXPECT_LE(result.report.best_epoch, result.report.stopping_epoch);
}

TEST(MlpTrain, DegenerateAndBadLabels) {
  auto data = gaussians(20, 4, 1);
  for (auto& d : data) d.label = 1;
  EXPECT_EQ(code_of([&] { train(data, small_config()); }), ErrorCode::kDegenerateLabels);
  data[0].label = 2;
  EXPECT_EQ(code_of([&] { train(data, small_config()); }), ErrorCode::kBadLabel);
}

TEST(MlpTrain, BitIdenticalAcrossRuns) {
  const auto data = gaussians(200, 6, 8);
  const auto a = train(data, small_config());
  const auto b = train(data, small_config());
  EXPECT_EQ(serialize(a.model), serialize(b.model));
  EXPECT_EQ(a.report.to_json(), b.report.to_json());
}

TEST(MlpTrain, ValidationLossIsMinimizedByReturnedModel) {
  const auto data = gaussians(200, 6, 13);
  const auto r = train(data, small_config());
  double min_val = r.report.epochs.front().val_loss;
  for (const auto& e : r.report.epochs) min_val = std::min(min_val, e.val_loss);
  EXPECT_EQ(r.report.best_val_loss, min_val);
}

TEST(MlpFile, RoundTripPreservesEverything) {
  auto m = train(gaussians(100, 6, 2), small_config()).model;
  m.metadata().embedder_id = "test-embedder";
  m.metadata().created_at = "2026-01-01T00:00:00Z";
  m.metadata().class_names = {"left", "right"};
  const auto bytes = serialize(m);
  const auto back = deserialize(bytes);
  EXPECT_EQ(back, m);
  EXPECT_EQ(serialize(back), bytes);
  const std::string path = opinionlens::testing::temp_dir("mlp") + "/m.olmlp";
  save(m, path);
  EXPECT_EQ(load(path), m);
}

TEST(MlpFile, CorruptionIsDetected) {
  const auto bytes = serialize(MlpModel::init({4, 3, 3, 2}, 1));
  EXPECT_EQ(code_of([&] { deserialize(bytes.substr(0, bytes.size() - 9)); }), ErrorCode::kChecksumMismatch);
  auto flipped = bytes;
  flipped[bytes.size() - 20] ^= 0x01;
  EXPECT_EQ(code_of([&] { deserialize(flipped); }), ErrorCode::kChecksumMismatch);
  auto v9 = bytes;
  v9[5] = '9';
  EXPECT_EQ(code_of([&] { deserialize(v9); }), ErrorCode::kVersionMismatch);
  EXPECT_EQ(code_of([&] { deserialize("NOTAMODEL-----------"); }), ErrorCode::kFormatError);
  EXPECT_EQ(code_of([&] { load("/nonexistent/model.olmlp"); }), ErrorCode::kIoError);
}
