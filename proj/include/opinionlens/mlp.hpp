#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace opinionlens {

// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  bool operator==(const Matrix&) const = default;
};

struct DenseLayer {
  Matrix weights;             // out × in
  std::vector<double> bias;   // out

  bool operator==(const DenseLayer&) const = default;
};

// [input D, hidden H1, hidden H2, classes C]
using LayerDims = std::array<std::size_t, 4>;

struct MlpMetadata {
  std::uint64_t seed = 0;
  std::size_t epochs_trained = 0;
  double train_loss = 0.0;
  std::string embedder_id;
  // Left empty unless the caller stamps it; an empty value keeps model files a
  // pure function of (data, config, seed).
  std::string created_at;
  std::vector<std::string> class_names;
  nlohmann::ordered_json train_config = nlohmann::ordered_json::object();

  bool operator==(const MlpMetadata&) const = default;
};

// Two ReLU hidden layers and a softmax output.
class MlpModel {
 public:
  MlpModel() = default;

  // Scaled-uniform fan-in initialization U(-sqrt(6/fan_in), +sqrt(6/fan_in)),
  // zero biases. Throws kBadDims for any zero dimension or C != 2.
  static MlpModel init(const LayerDims& dims, std::uint64_t seed);
  // All parameters zero; forward() yields the uniform distribution.
  static MlpModel zeros(const LayerDims& dims);

  const LayerDims& dims() const { return dims_; }
  std::size_t input_dim() const { return dims_[0]; }
  std::size_t num_classes() const { return dims_[3]; }

  // Class probabilities. Throws kDimensionMismatch when x has the wrong size.
  std::vector<double> forward(std::span<const double> x) const;

  std::array<DenseLayer, 3>& layers() { return layers_; }
  const std::array<DenseLayer, 3>& layers() const { return layers_; }
  MlpMetadata& metadata() { return metadata_; }
  const MlpMetadata& metadata() const { return metadata_; }

  std::size_t parameter_count() const;
  // Flat views in file order W1, b1, W2, b2, W3, b3.
  double& parameter(std::size_t flat_index);
  double parameter(std::size_t flat_index) const;
  bool all_finite() const;

  bool operator==(const MlpModel&) const = default;

 private:
  LayerDims dims_{};
  std::array<DenseLayer, 3> layers_;
  MlpMetadata metadata_;
};

struct LabeledVector {
  std::vector<double> x;
  int label = 0;
};

struct LossAndGrad {
  double loss = 0.0;
  std::array<DenseLayer, 3> grad;
};

// Mean cross-entropy over the batch plus l2_penalty · Σ‖W‖² over the three
// weight matrices (biases are not penalized).
LossAndGrad loss_and_grad(const MlpModel& model, std::span<const LabeledVector> batch,
                          double l2_penalty);
// Loss only, same definition.
double loss(const MlpModel& model, std::span<const LabeledVector> batch, double l2_penalty);

enum class Optimizer { kSgd, kAdam };

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 50;
  Optimizer optimizer = Optimizer::kAdam;
  std::size_t early_stop_patience = 5;
  double val_fraction = 0.1;
  std::uint64_t seed = 0;
  double l2_penalty = 1e-5;
  std::size_t hidden1 = 256;
  std::size_t hidden2 = 64;

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::size_t stopping_epoch = 0;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  double final_val_accuracy = 0.0;

  nlohmann::ordered_json to_json() const;
};

struct TrainResult {
  MlpModel model;
  TrainReport report;
};

// Deterministic given config.seed. A seeded val_fraction slice of the data
// drives early stopping; the parameters with the lowest validation loss are
// returned. Throws kDegenerateLabels unless both classes are present, kBadLabel
// for labels outside {0, 1}.
TrainResult train(std::span<const LabeledVector> data, const TrainConfig& config);

double accuracy(const MlpModel& model, std::span<const LabeledVector> data);

// Model file v1: "OLMLP1", u32 LE header length, JSON header, f64 LE
// parameters (W1, b1, W2, b2, W3, b3 row-major), u32 LE CRC32 of all prior bytes.
std::string serialize(const MlpModel& model);
MlpModel deserialize(std::string_view bytes);
void save(const MlpModel& model, const std::string& path);
MlpModel load(const std::string& path);

}  // namespace opinionlens
