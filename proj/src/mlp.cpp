#include "opinionlens/mlp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "opinionlens/error.hpp"
#include "opinionlens/util.hpp"

namespace opinionlens {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void check_dims(const LayerDims& dims) {
  for (std::size_t d : dims) {
    if (d == 0) throw Error(ErrorCode::kBadDims, "layer dimensions must be >= 1");
  }
  if (dims[3] != 2) throw Error(ErrorCode::kBadDims, "classifier heads have exactly 2 classes");
}

std::array<DenseLayer, 3> zero_layers(const LayerDims& dims) {
  std::array<DenseLayer, 3> layers;
  for (std::size_t l = 0; l < 3; ++l) {
    layers[l].weights = Matrix(dims[l + 1], dims[l]);
    layers[l].bias.assign(dims[l + 1], 0.0);
  }
  return layers;
}

}  // namespace

MlpModel MlpModel::zeros(const LayerDims& dims) {
  check_dims(dims);
  MlpModel m;
  m.dims_ = dims;
  m.layers_ = zero_layers(dims);
  return m;
}

MlpModel MlpModel::init(const LayerDims& dims, std::uint64_t seed) {
  MlpModel m = zeros(dims);
  m.metadata_.seed = seed;
  Rng rng(seed);
  for (auto& layer : m.layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.weights.cols));
    for (double& w : layer.weights.data) w = rng.uniform(-limit, limit);
  }
  return m;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weights.data.size() + layer.bias.size();
  return n;
}

double& MlpModel::parameter(std::size_t flat_index) {
  for (auto& layer : layers_) {
    if (flat_index < layer.weights.data.size()) return layer.weights.data[flat_index];
    flat_index -= layer.weights.data.size();
    if (flat_index < layer.bias.size()) return layer.bias[flat_index];
    flat_index -= layer.bias.size();
  }
  throw std::out_of_range("parameter index");
}

double MlpModel::parameter(std::size_t flat_index) const {
  return const_cast<MlpModel*>(this)->parameter(flat_index);
}

bool MlpModel::all_finite() const {
  for (const auto& layer : layers_) {
    for (double w : layer.weights.data) {
      if (!std::isfinite(w)) return false;
    }
    for (double b : layer.bias) {
      if (!std::isfinite(b)) return false;
    }
  }
  return true;
}

namespace {

// Per-sample activations; reused across a batch to avoid reallocation.
struct Workspace {
  std::vector<std::size_t> nonzero;
  std::vector<double> z1, a1, z2, a2, logits, probs;
  std::vector<double> d3, d2, d1;
};

// Dense layer over a sparse-aware input: zero input entries are skipped, which
// leaves the sums bit-identical to the dense loop.
void affine_sparse(const DenseLayer& layer, std::span<const double> x,
                   const std::vector<std::size_t>& nonzero, std::vector<double>& out) {
  const std::size_t rows = layer.weights.rows, cols = layer.weights.cols;
  out.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* w = &layer.weights.data[r * cols];
    double s = 0.0;
    for (std::size_t k : nonzero) s += w[k] * x[k];
    out[r] = s + layer.bias[r];
  }
}

void affine(const DenseLayer& layer, const std::vector<double>& x, std::vector<double>& out) {
  const std::size_t rows = layer.weights.rows, cols = layer.weights.cols;
  out.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* w = &layer.weights.data[r * cols];
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += w[c] * x[c];
    out[r] = s + layer.bias[r];
  }
}

void relu(const std::vector<double>& z, std::vector<double>& a) {
  a.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
}

// Returns log-sum-exp of the logits and fills probabilities.
double softmax(const std::vector<double>& logits, std::vector<double>& probs) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  probs.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - m);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return m + std::log(sum);
}

void forward_into(const std::array<DenseLayer, 3>& layers, std::span<const double> x, Workspace& ws) {
  ws.nonzero.clear();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) ws.nonzero.push_back(i);
  }
  affine_sparse(layers[0], x, ws.nonzero, ws.z1);
  relu(ws.z1, ws.a1);
  affine(layers[1], ws.a1, ws.z2);
  relu(ws.z2, ws.a2);
  affine(layers[2], ws.a2, ws.logits);
}

double weight_sq_norm(const std::array<DenseLayer, 3>& layers) {
  double s = 0.0;
  for (const auto& layer : layers) {
    for (double w : layer.weights.data) s += w * w;
  }
  return s;
}

void check_example(const MlpModel& model, const LabeledVector& ex) {
  if (ex.x.size() != model.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "input dim " + std::to_string(ex.x.size()) +
                                                   " != model dim " + std::to_string(model.input_dim()));
  }
  if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= model.num_classes()) {
    throw Error(ErrorCode::kBadLabel, "label " + std::to_string(ex.label) + " out of range");
  }
}

// Shared by loss_and_grad() and training; `items` index into the batch.
double accumulate(const MlpModel& model, std::span<const LabeledVector* const> items, double l2,
                  std::array<DenseLayer, 3>* grad, Workspace& ws) {
  if (items.empty()) throw Error(ErrorCode::kEmpty, "empty batch");
  const auto& layers = model.layers();
  if (grad) *grad = zero_layers(model.dims());
  double total = 0.0;
  for (const LabeledVector* ex : items) {
    check_example(model, *ex);
    forward_into(layers, ex->x, ws);
    const double lse = softmax(ws.logits, ws.probs);
    total += lse - ws.logits[static_cast<std::size_t>(ex->label)];
    if (!grad) continue;

    // dL/dlogits = p - onehot(y)
    ws.d3 = ws.probs;
    ws.d3[static_cast<std::size_t>(ex->label)] -= 1.0;
    auto& g3 = (*grad)[2];
    for (std::size_t r = 0; r < g3.weights.rows; ++r) {
      g3.bias[r] += ws.d3[r];
      double* gw = &g3.weights.data[r * g3.weights.cols];
      for (std::size_t c = 0; c < g3.weights.cols; ++c) gw[c] += ws.d3[r] * ws.a2[c];
    }
    ws.d2.assign(ws.a2.size(), 0.0);
    for (std::size_t r = 0; r < layers[2].weights.rows; ++r) {
      const double* w = &layers[2].weights.data[r * layers[2].weights.cols];
      for (std::size_t c = 0; c < ws.d2.size(); ++c) ws.d2[c] += w[c] * ws.d3[r];
    }
    for (std::size_t i = 0; i < ws.d2.size(); ++i) {
      if (ws.z2[i] <= 0.0) ws.d2[i] = 0.0;
    }
    auto& g2 = (*grad)[1];
    for (std::size_t r = 0; r < g2.weights.rows; ++r) {
      g2.bias[r] += ws.d2[r];
      double* gw = &g2.weights.data[r * g2.weights.cols];
      for (std::size_t c = 0; c < g2.weights.cols; ++c) gw[c] += ws.d2[r] * ws.a1[c];
    }
    ws.d1.assign(ws.a1.size(), 0.0);
    for (std::size_t r = 0; r < layers[1].weights.rows; ++r) {
      const double* w = &layers[1].weights.data[r * layers[1].weights.cols];
      for (std::size_t c = 0; c < ws.d1.size(); ++c) ws.d1[c] += w[c] * ws.d2[r];
    }
    for (std::size_t i = 0; i < ws.d1.size(); ++i) {
      if (ws.z1[i] <= 0.0) ws.d1[i] = 0.0;
    }
    auto& g1 = (*grad)[0];
    for (std::size_t r = 0; r < g1.weights.rows; ++r) {
      g1.bias[r] += ws.d1[r];
      if (ws.d1[r] == 0.0) continue;
      double* gw = &g1.weights.data[r * g1.weights.cols];
      for (std::size_t k : ws.nonzero) gw[k] += ws.d1[r] * ex->x[k];
    }
  }
  const double n = static_cast<double>(items.size());
  if (grad) {
    for (std::size_t l = 0; l < 3; ++l) {
      auto& g = (*grad)[l];
      const auto& w = layers[l].weights.data;
      for (std::size_t i = 0; i < g.weights.data.size(); ++i) {
        g.weights.data[i] = g.weights.data[i] / n + 2.0 * l2 * w[i];
      }
      for (double& b : g.bias) b /= n;
    }
  }
  return total / n + l2 * weight_sq_norm(layers);
}

std::vector<const LabeledVector*> pointers(std::span<const LabeledVector> batch) {
  std::vector<const LabeledVector*> out;
  out.reserve(batch.size());
  for (const auto& ex : batch) out.push_back(&ex);
  return out;
}

}  // namespace

std::vector<double> MlpModel::forward(std::span<const double> x) const {
  if (x.size() != input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "input dim " + std::to_string(x.size()) +
                                                   " != model dim " + std::to_string(input_dim()));
  }
  Workspace ws;
  forward_into(layers_, x, ws);
  softmax(ws.logits, ws.probs);
  return ws.probs;
}

LossAndGrad loss_and_grad(const MlpModel& model, std::span<const LabeledVector> batch,
                          double l2_penalty) {
  Workspace ws;
  LossAndGrad out;
  const auto items = pointers(batch);
  out.loss = accumulate(model, items, l2_penalty, &out.grad, ws);
  return out;
}

double loss(const MlpModel& model, std::span<const LabeledVector> batch, double l2_penalty) {
  Workspace ws;
  const auto items = pointers(batch);
  return accumulate(model, items, l2_penalty, nullptr, ws);
}

double accuracy(const MlpModel& model, std::span<const LabeledVector> data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : data) {
    const auto p = model.forward(ex.x);
    const int predicted = p[1] > p[0] ? 1 : 0;
    correct += predicted == ex.label ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------

void TrainConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::kInvalidSpec, why); };
  if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (max_epochs < 1) fail("max_epochs must be >= 1");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) fail("val_fraction must be in [0, 1)");
  if (!(l2_penalty >= 0.0)) fail("l2_penalty must be >= 0");
  if (hidden1 < 1 || hidden2 < 1) fail("hidden sizes must be >= 1");
}

ordered_json TrainConfig::to_json() const {
  ordered_json j;
  j["learning_rate"] = learning_rate;
  j["batch_size"] = batch_size;
  j["max_epochs"] = max_epochs;
  j["optimizer"] = optimizer == Optimizer::kAdam ? "adam" : "sgd";
  j["adam_beta1"] = 0.9;
  j["adam_beta2"] = 0.999;
  j["adam_epsilon"] = 1e-8;
  j["early_stop_patience"] = early_stop_patience;
  j["val_fraction"] = val_fraction;
  j["seed"] = seed;
  j["l2_penalty"] = l2_penalty;
  j["hidden"] = {hidden1, hidden2};
  return j;
}

ordered_json TrainReport::to_json() const {
  ordered_json j;
  j["stopping_epoch"] = stopping_epoch;
  j["best_epoch"] = best_epoch;
  j["best_val_loss"] = best_val_loss;
  j["final_val_accuracy"] = final_val_accuracy;
  ordered_json rows = ordered_json::array();
  for (const auto& e : epochs) {
    rows.push_back({{"epoch", e.epoch},
                    {"train_loss", e.train_loss},
                    {"train_accuracy", e.train_accuracy},
                    {"val_loss", e.val_loss},
                    {"val_accuracy", e.val_accuracy}});
  }
  j["epochs"] = std::move(rows);
  return j;
}

namespace {

class AdamState {
 public:
  explicit AdamState(const LayerDims& dims) : m_(zero_layers(dims)), v_(zero_layers(dims)) {}

  void step(std::array<DenseLayer, 3>& params, const std::array<DenseLayer, 3>& grad, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t l = 0; l < 3; ++l) {
      update(params[l].weights.data, grad[l].weights.data, m_[l].weights.data, v_[l].weights.data, lr, c1, c2);
      update(params[l].bias, grad[l].bias, m_[l].bias, v_[l].bias, lr, c1, c2);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  static void update(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                     std::vector<double>& v, double lr, double c1, double c2) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEpsilon);
    }
  }

  std::array<DenseLayer, 3> m_, v_;
  std::uint64_t t_ = 0;
};

void sgd_step(std::array<DenseLayer, 3>& params, const std::array<DenseLayer, 3>& grad, double lr) {
  for (std::size_t l = 0; l < 3; ++l) {
    for (std::size_t i = 0; i < params[l].weights.data.size(); ++i) {
      params[l].weights.data[i] -= lr * grad[l].weights.data[i];
    }
    for (std::size_t i = 0; i < params[l].bias.size(); ++i) params[l].bias[i] -= lr * grad[l].bias[i];
  }
}

double accuracy_of(const MlpModel& model, std::span<const LabeledVector* const> items) {
  if (items.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto* ex : items) {
    const auto p = model.forward(ex->x);
    correct += (p[1] > p[0] ? 1 : 0) == ex->label ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(items.size());
}

}  // namespace

TrainResult train(std::span<const LabeledVector> data, const TrainConfig& config) {
  config.validate();
  if (data.empty()) throw Error(ErrorCode::kDegenerateLabels, "empty training set");
  bool seen[2] = {false, false};
  for (const auto& ex : data) {
    if (ex.label < 0 || ex.label > 1) throw Error(ErrorCode::kBadLabel, "labels must be 0 or 1");
    seen[ex.label] = true;
  }
  if (!seen[0] || !seen[1]) {
    throw Error(ErrorCode::kDegenerateLabels, "training data contains a single class");
  }

  const std::size_t dim = data.front().x.size();
  for (const auto& ex : data) {
    if (ex.x.size() != dim) throw Error(ErrorCode::kDimensionMismatch, "inconsistent input dims");
  }

  // Seeded train/validation partition.
  std::vector<const LabeledVector*> all = pointers(data);
  Rng split_rng(mix_seed(config.seed, 0x5e1));
  split_rng.shuffle(all);
  auto n_val = static_cast<std::size_t>(std::llround(config.val_fraction * static_cast<double>(all.size())));
  if (config.val_fraction > 0.0 && n_val == 0 && all.size() >= 2) n_val = 1;
  if (n_val >= all.size()) n_val = all.size() - 1;
  std::vector<const LabeledVector*> val(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<const LabeledVector*> fit(all.begin() + static_cast<std::ptrdiff_t>(n_val), all.end());
  // Without a validation slice, early stopping watches the training loss.
  const std::vector<const LabeledVector*>& monitor = val.empty() ? fit : val;

  TrainResult result;
  MlpModel model = MlpModel::init({dim, config.hidden1, config.hidden2, 2}, config.seed);
  AdamState adam(model.dims());
  Workspace ws;
  std::array<DenseLayer, 3> grad;

  MlpModel best = model;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng order_rng(mix_seed(config.seed, 0xe90c, epoch));
    std::vector<const LabeledVector*> order = fit;
    order_rng.shuffle(order);
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      std::span<const LabeledVector* const> batch(order.data() + begin, end - begin);
      accumulate(model, batch, config.l2_penalty, &grad, ws);
      if (config.optimizer == Optimizer::kAdam) {
        adam.step(model.layers(), grad, config.learning_rate);
      } else {
        sgd_step(model.layers(), grad, config.learning_rate);
      }
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = accumulate(model, fit, config.l2_penalty, nullptr, ws);
    stats.train_accuracy = accuracy_of(model, fit);
    stats.val_loss = accumulate(model, monitor, config.l2_penalty, nullptr, ws);
    stats.val_accuracy = accuracy_of(model, monitor);
    if (!std::isfinite(stats.train_loss) || !std::isfinite(stats.val_loss)) {
      throw Error(ErrorCode::kDegenerateLabels, "training diverged at epoch " + std::to_string(epoch));
    }
    result.report.epochs.push_back(stats);
    result.report.stopping_epoch = epoch;

    if (stats.val_loss < best_val) {
      best_val = stats.val_loss;
      best = model;
      best.metadata().train_loss = stats.train_loss;
      result.report.best_epoch = epoch;
      result.report.final_val_accuracy = stats.val_accuracy;
      since_best = 0;
    } else if (++since_best >= config.early_stop_patience && config.early_stop_patience > 0) {
      break;
    }
  }

  result.report.best_val_loss = best_val;
  best.metadata().seed = config.seed;
  best.metadata().epochs_trained = result.report.stopping_epoch;
  best.metadata().train_config = config.to_json();
  best.metadata().train_config["best_epoch"] = result.report.best_epoch;
  result.model = std::move(best);
  return result;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kMagicPrefix = "OLMLP";
constexpr char kVersionChar = '1';
constexpr const char* kFormatVersion = "v1";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::string_view s, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos + i])) << (8 * i);
  return v;
}

double get_f64(std::string_view s, std::size_t pos) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[pos + i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string serialize(const MlpModel& model) {
  const auto& meta = model.metadata();
  ordered_json header;
  header["format_version"] = kFormatVersion;
  header["layer_dims"] = model.dims();
  header["activation"] = "relu";
  header["output"] = "softmax";
  header["embedder_id"] = meta.embedder_id;
  header["seed"] = meta.seed;
  ordered_json md;
  md["epochs_trained"] = meta.epochs_trained;
  // Stored as text so the header round-trips the exact double.
  md["train_loss"] = format_double(meta.train_loss);
  md["created_at"] = meta.created_at;
  md["class_names"] = meta.class_names;
  md["train_config"] = meta.train_config;
  header["metadata"] = std::move(md);
  const std::string header_text = header.dump();

  std::string out(kMagicPrefix);
  out.push_back(kVersionChar);
  put_u32(out, static_cast<std::uint32_t>(header_text.size()));
  out += header_text;
  for (const auto& layer : model.layers()) {
    for (double w : layer.weights.data) put_f64(out, w);
    for (double b : layer.bias) put_f64(out, b);
  }
  put_u32(out, crc32(out));
  return out;
}

MlpModel deserialize(std::string_view bytes) {
  if (bytes.size() < kMagicPrefix.size() || bytes.substr(0, kMagicPrefix.size()) != kMagicPrefix) {
    throw Error(ErrorCode::kFormatError, "not a model file (bad magic)");
  }
  if (bytes.size() < kMagicPrefix.size() + 1 + 4 + 4) {
    throw Error(ErrorCode::kChecksumMismatch, "model file truncated");
  }
  if (bytes[kMagicPrefix.size()] != kVersionChar) {
    throw Error(ErrorCode::kVersionMismatch,
                std::string("unsupported model format version ") + bytes[kMagicPrefix.size()]);
  }
  const std::size_t body = bytes.size() - 4;
  if (crc32(bytes.substr(0, body)) != get_u32(bytes, body)) {
    throw Error(ErrorCode::kChecksumMismatch, "model file checksum mismatch");
  }
  std::size_t pos = kMagicPrefix.size() + 1;
  const std::uint32_t header_len = get_u32(bytes, pos);
  pos += 4;
  if (pos + header_len > body) throw Error(ErrorCode::kFormatError, "header overruns file");
  const ordered_json header = ordered_json::parse(bytes.substr(pos, header_len), nullptr, false);
  pos += header_len;
  if (header.is_discarded() || !header.is_object()) {
    throw Error(ErrorCode::kFormatError, "model header is not valid JSON");
  }
  if (header.value("format_version", "") != kFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "unsupported model format version " + header.value("format_version", "?"));
  }

  MlpModel model;
  try {
    const auto dims = header.at("layer_dims").get<std::vector<std::size_t>>();
    if (dims.size() != 4) throw Error(ErrorCode::kBadDims, "layer_dims must have 4 entries");
    model = MlpModel::zeros({dims[0], dims[1], dims[2], dims[3]});
    auto& meta = model.metadata();
    meta.embedder_id = header.at("embedder_id").get<std::string>();
    meta.seed = header.at("seed").get<std::uint64_t>();
    const ordered_json& md = header.at("metadata");
    meta.epochs_trained = md.at("epochs_trained").get<std::size_t>();
    if (!parse_double(md.at("train_loss").get<std::string>(), meta.train_loss)) {
      throw Error(ErrorCode::kFormatError, "bad train_loss");
    }
    meta.created_at = md.at("created_at").get<std::string>();
    meta.class_names = md.at("class_names").get<std::vector<std::string>>();
    meta.train_config = md.at("train_config");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("model header: ") + e.what());
  }

  if (body - pos != model.parameter_count() * 8) {
    throw Error(ErrorCode::kFormatError, "parameter block size does not match layer_dims");
  }
  for (auto& layer : model.layers()) {
    for (double& w : layer.weights.data) {
      w = get_f64(bytes, pos);
      pos += 8;
    }
    for (double& b : layer.bias) {
      b = get_f64(bytes, pos);
      pos += 8;
    }
  }
  if (!model.all_finite()) throw Error(ErrorCode::kFormatError, "non-finite parameters");
  return model;
}

void save(const MlpModel& model, const std::string& path) { write_file(path, serialize(model)); }

MlpModel load(const std::string& path) { return deserialize(read_file(path)); }

}  // namespace opinionlens
