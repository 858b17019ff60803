#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tfs/landmarks.hpp"

namespace tfs {

enum class Encoding { Absolute, Relative };

std::string_view to_string(Encoding enc);
Encoding parse_encoding(std::string_view name);  // "absolute" | "relative"

std::size_t feature_dim(Encoding enc);  // 63 or 60

using FeatureVector = std::vector<double>;

// Absolute: [x0,y0,z0, ..., x20,y20,z20].
// Relative: wrist minus landmark, (r - a_i) for i = 1..20.
FeatureVector encode(const HandLandmarks& hand, Encoding enc);

struct LabeledHand {
  HandLandmarks hand;
  std::string label;
};

// Row-major dense matrix; rows are samples.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

inline constexpr std::array<std::size_t, 3> kHiddenWidths{60, 40, 30};
inline constexpr double kBatchNormEpsilon = 1e-5;

// Fully connected layer, weight is out x in row-major.
struct Dense {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;
  std::vector<double> bias;
};

struct BatchNorm {
  std::vector<double> gamma;
  std::vector<double> beta;
};

// Trainable parameters. Gradients use the same shape.
struct MlpParameters {
  std::array<Dense, 4> dense;
  std::array<BatchNorm, 3> norm;

  // Every tensor in a fixed order: dense weight/bias by layer, then
  // gamma/beta by layer. Optimizers and gradient checks walk this list.
  std::vector<std::vector<double>*> tensors();
  std::vector<const std::vector<double>*> tensors() const;

  MlpParameters zeros_like() const;
  std::size_t count() const;
};

struct RunningStats {
  std::vector<double> mean;
  std::vector<double> var;
};

// in -> 60 -> 40 -> 30 -> n_classes. Hidden layers are
// linear -> batchnorm -> relu; the output layer is linear -> sigmoid.
struct MlpModel {
  Encoding encoding = Encoding::Relative;
  std::vector<std::string> class_labels;
  MlpParameters params;
  std::array<RunningStats, 3> running;

  std::size_t input_dim() const { return params.dense[0].in; }
  std::size_t n_classes() const { return class_labels.size(); }
  std::array<std::size_t, 5> layer_dims() const;

  // He-uniform weights, zero biases, gamma 1, beta 0, running mean 0 / var 1.
  static MlpModel initialize(Encoding enc, std::vector<std::string> labels, std::uint64_t seed);
};

enum class Mode { Train, Infer };

// Per-class sigmoid scores for each row. Train normalizes with the batch's
// own mean and (biased) variance; Infer uses the running statistics. Neither
// mutates the model. Throws DimensionMismatch on a wrong feature length.
Matrix forward(const MlpModel& model, const Matrix& features, Mode mode);
std::vector<double> forward(const MlpModel& model, std::span<const double> features, Mode mode);

// Highest score, lowest index on ties.
std::size_t argmax(std::span<const double> scores);
std::size_t predict_index(const MlpModel& model, std::span<const double> features);
const std::string& predict_label(const MlpModel& model, const HandLandmarks& hand);

struct BatchStatistics {
  std::array<std::vector<double>, 3> mean;
  std::array<std::vector<double>, 3> var;  // biased
};

struct BackpropResult {
  double loss = 0.0;  // mean over rows of the summed per-class BCE
  MlpParameters grads;
  BatchStatistics stats;
  std::size_t correct = 0;  // train-mode argmax hits
};

// Train-mode loss against one-hot targets and its exact gradient.
BackpropResult backprop(const MlpModel& model, const Matrix& features,
                        std::span<const std::size_t> targets);

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
  int epochs = 200;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::Adam;
  double bn_momentum = 0.1;  // weight of the new batch in the running average

  void validate() const;  // throws InvalidParams
};

struct EpochRecord {
  double loss = 0.0;
  double accuracy = 0.0;  // train-mode, accumulated over the epoch's batches
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochRecord> history;
};

// Deterministic in (data order, cfg). Class labels are the sorted distinct
// labels. Throws InsufficientData with fewer than two classes and
// NonFiniteLoss if a batch loss diverges.
TrainResult train(std::span<const LabeledHand> data, const TrainConfig& cfg, Encoding enc);

// Infer-mode fraction of hands whose predicted label equals the truth.
double evaluate_accuracy(const MlpModel& model, std::span<const LabeledHand> data);

// JSON model file: {"header": {format_version, encoding, layer_dims,
// class_labels}, "layers": [...], "batchnorm": [...]}. Doubles are written
// in shortest round-trip form, so load(save(m)) is bit-exact.
std::string save_model(const MlpModel& model);
MlpModel load_model(std::string_view bytes);  // throws CorruptModel

}  // namespace tfs
