#include "tfs/mlp.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"
#include "tfs/errors.hpp"

namespace tfs {

// ---------------------------------------------------------------- encoding

std::string_view to_string(Encoding enc) {
  return enc == Encoding::Absolute ? "absolute" : "relative";
}

Encoding parse_encoding(std::string_view name) {
  if (name == "absolute") return Encoding::Absolute;
  if (name == "relative") return Encoding::Relative;
  throw InvalidParams("unknown encoding '" + std::string(name) + "'");
}

std::size_t feature_dim(Encoding enc) {
  return enc == Encoding::Absolute ? 3 * kLandmarkCount : 3 * (kLandmarkCount - 1);
}

FeatureVector encode(const HandLandmarks& hand, Encoding enc) {
  FeatureVector f;
  f.reserve(feature_dim(enc));
  if (enc == Encoding::Absolute) {
    for (const auto& p : hand.landmarks) {
      f.push_back(p.x);
      f.push_back(p.y);
      f.push_back(p.z);
    }
    return f;
  }
  const Landmark& r = hand[lm::kWrist];
  for (std::size_t i = 1; i < kLandmarkCount; ++i) {
    f.push_back(r.x - hand[i].x);
    f.push_back(r.y - hand[i].y);
    f.push_back(r.z - hand[i].z);
  }
  return f;
}

// ---------------------------------------------------------------- parameters

std::vector<std::vector<double>*> MlpParameters::tensors() {
  std::vector<std::vector<double>*> out;
  for (auto& d : dense) {
    out.push_back(&d.weight);
    out.push_back(&d.bias);
  }
  for (auto& n : norm) {
    out.push_back(&n.gamma);
    out.push_back(&n.beta);
  }
  return out;
}

std::vector<const std::vector<double>*> MlpParameters::tensors() const {
  std::vector<const std::vector<double>*> out;
  for (const auto& d : dense) {
    out.push_back(&d.weight);
    out.push_back(&d.bias);
  }
  for (const auto& n : norm) {
    out.push_back(&n.gamma);
    out.push_back(&n.beta);
  }
  return out;
}

MlpParameters MlpParameters::zeros_like() const {
  MlpParameters z = *this;
  for (auto* t : z.tensors()) std::fill(t->begin(), t->end(), 0.0);
  return z;
}

std::size_t MlpParameters::count() const {
  std::size_t n = 0;
  for (const auto* t : tensors()) n += t->size();
  return n;
}

std::array<std::size_t, 5> MlpModel::layer_dims() const {
  return {params.dense[0].in, params.dense[0].out, params.dense[1].out, params.dense[2].out,
          params.dense[3].out};
}

MlpModel MlpModel::initialize(Encoding enc, std::vector<std::string> labels, std::uint64_t seed) {
  if (labels.empty()) throw InvalidParams("model needs at least one class label");
  MlpModel m;
  m.encoding = enc;
  m.class_labels = std::move(labels);

  const std::array<std::size_t, 5> dims{feature_dim(enc), kHiddenWidths[0], kHiddenWidths[1],
                                        kHiddenWidths[2], m.class_labels.size()};
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < 4; ++l) {
    Dense& d = m.params.dense[l];
    d.in = dims[l];
    d.out = dims[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(d.in));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    d.weight.resize(d.in * d.out);
    for (auto& w : d.weight) w = uniform(rng);
    d.bias.assign(d.out, 0.0);
  }
  for (std::size_t l = 0; l < 3; ++l) {
    const std::size_t width = dims[l + 1];
    m.params.norm[l].gamma.assign(width, 1.0);
    m.params.norm[l].beta.assign(width, 0.0);
    m.running[l].mean.assign(width, 0.0);
    m.running[l].var.assign(width, 1.0);
  }
  return m;
}

// ---------------------------------------------------------------- forward

namespace {

Matrix linear(const Matrix& x, const Dense& d) {
  Matrix z(x.rows, d.out);
  for (std::size_t b = 0; b < x.rows; ++b) {
    const double* xr = x.row(b);
    double* zr = z.row(b);
    for (std::size_t o = 0; o < d.out; ++o) {
      const double* w = d.weight.data() + o * d.in;
      double acc = d.bias[o];
      for (std::size_t i = 0; i < d.in; ++i) acc += w[i] * xr[i];
      zr[o] = acc;
    }
  }
  return z;
}

double sigmoid(double l) {
  if (l >= 0.0) return 1.0 / (1.0 + std::exp(-l));
  const double e = std::exp(l);
  return e / (1.0 + e);
}

// log(1 + e^l) without overflow.
double softplus(double l) { return std::max(l, 0.0) + std::log1p(std::exp(-std::abs(l))); }

struct HiddenCache {
  Matrix input;
  Matrix xhat;
  Matrix pre_relu;
  std::vector<double> inv_std;
};

struct ForwardPass {
  std::array<HiddenCache, 3> hidden;
  Matrix last_hidden;  // input to the output layer
  Matrix logits;
  BatchStatistics stats;
};

ForwardPass run_forward(const MlpModel& model, const Matrix& features, Mode mode) {
  if (features.cols != model.input_dim()) {
    throw DimensionMismatch(model.input_dim(), features.cols);
  }
  ForwardPass pass;
  Matrix x = features;
  const std::size_t rows = x.rows;
  for (std::size_t l = 0; l < 3; ++l) {
    HiddenCache& c = pass.hidden[l];
    const Dense& d = model.params.dense[l];
    const BatchNorm& bn = model.params.norm[l];
    Matrix z = linear(x, d);
    c.input = std::move(x);

    std::vector<double> mean(d.out, 0.0);
    std::vector<double> var(d.out, 0.0);
    if (mode == Mode::Train) {
      for (std::size_t b = 0; b < rows; ++b) {
        for (std::size_t o = 0; o < d.out; ++o) mean[o] += z(b, o);
      }
      for (auto& m : mean) m /= static_cast<double>(rows);
      for (std::size_t b = 0; b < rows; ++b) {
        for (std::size_t o = 0; o < d.out; ++o) {
          const double dev = z(b, o) - mean[o];
          var[o] += dev * dev;
        }
      }
      for (auto& v : var) v /= static_cast<double>(rows);
    } else {
      mean = model.running[l].mean;
      var = model.running[l].var;
    }

    c.inv_std.resize(d.out);
    for (std::size_t o = 0; o < d.out; ++o) c.inv_std[o] = 1.0 / std::sqrt(var[o] + kBatchNormEpsilon);

    c.xhat = Matrix(rows, d.out);
    c.pre_relu = Matrix(rows, d.out);
    Matrix act(rows, d.out);
    for (std::size_t b = 0; b < rows; ++b) {
      for (std::size_t o = 0; o < d.out; ++o) {
        const double xh = (z(b, o) - mean[o]) * c.inv_std[o];
        const double y = bn.gamma[o] * xh + bn.beta[o];
        c.xhat(b, o) = xh;
        c.pre_relu(b, o) = y;
        act(b, o) = y > 0.0 ? y : 0.0;
      }
    }
    pass.stats.mean[l] = std::move(mean);
    pass.stats.var[l] = std::move(var);
    x = std::move(act);
  }
  pass.logits = linear(x, model.params.dense[3]);
  pass.last_hidden = std::move(x);
  return pass;
}

double score_from_logit(double l) {
  // Keep scores inside the open interval even when the logit saturates.
  constexpr double kBelowOne = 1.0 - DBL_EPSILON / 2.0;
  return std::clamp(sigmoid(l), std::numeric_limits<double>::denorm_min(), kBelowOne);
}

}  // namespace

Matrix forward(const MlpModel& model, const Matrix& features, Mode mode) {
  ForwardPass pass = run_forward(model, features, mode);
  Matrix scores = std::move(pass.logits);
  for (auto& v : scores.data) v = score_from_logit(v);
  return scores;
}

std::vector<double> forward(const MlpModel& model, std::span<const double> features, Mode mode) {
  Matrix x(1, features.size());
  std::copy(features.begin(), features.end(), x.data.begin());
  return forward(model, x, mode).data;
}

std::size_t argmax(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

std::size_t predict_index(const MlpModel& model, std::span<const double> features) {
  return argmax(forward(model, features, Mode::Infer));
}

const std::string& predict_label(const MlpModel& model, const HandLandmarks& hand) {
  return model.class_labels[predict_index(model, encode(hand, model.encoding))];
}

// ---------------------------------------------------------------- backward

BackpropResult backprop(const MlpModel& model, const Matrix& features,
                        std::span<const std::size_t> targets) {
  if (targets.size() != features.rows) throw InvalidParams("targets and features differ in length");
  ForwardPass pass = run_forward(model, features, Mode::Train);
  const std::size_t rows = features.rows;
  const std::size_t classes = model.n_classes();
  const double inv_rows = 1.0 / static_cast<double>(rows);

  BackpropResult r;
  r.grads = model.params.zeros_like();

  Matrix upstream(rows, classes);
  for (std::size_t b = 0; b < rows; ++b) {
    const double* lr = pass.logits.row(b);
    std::size_t best = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      const double t = c == targets[b] ? 1.0 : 0.0;
      r.loss += softplus(lr[c]) - t * lr[c];
      upstream(b, c) = (sigmoid(lr[c]) - t) * inv_rows;
      if (lr[c] > lr[best]) best = c;
    }
    if (best == targets[b]) ++r.correct;
  }
  r.loss *= inv_rows;

  // dense layer: accumulate weight/bias grads, return grad w.r.t. its input
  auto dense_backward = [](const Dense& d, Dense& g, const Matrix& input, const Matrix& dz,
                           bool need_input_grad) {
    Matrix dx;
    if (need_input_grad) dx = Matrix(input.rows, d.in);
    for (std::size_t b = 0; b < input.rows; ++b) {
      const double* xr = input.row(b);
      for (std::size_t o = 0; o < d.out; ++o) {
        const double go = dz(b, o);
        if (go == 0.0) continue;
        double* gw = g.weight.data() + o * d.in;
        for (std::size_t i = 0; i < d.in; ++i) gw[i] += go * xr[i];
        g.bias[o] += go;
        if (need_input_grad) {
          const double* w = d.weight.data() + o * d.in;
          double* dxr = dx.row(b);
          for (std::size_t i = 0; i < d.in; ++i) dxr[i] += go * w[i];
        }
      }
    }
    return dx;
  };

  Matrix grad = dense_backward(model.params.dense[3], r.grads.dense[3], pass.last_hidden,
                               upstream, true);

  for (std::size_t li = 3; li-- > 0;) {
    const HiddenCache& c = pass.hidden[li];
    const BatchNorm& bn = model.params.norm[li];
    BatchNorm& gbn = r.grads.norm[li];
    const std::size_t width = c.xhat.cols;

    Matrix dxhat(rows, width);
    std::vector<double> sum_dxhat(width, 0.0);
    std::vector<double> sum_dxhat_xhat(width, 0.0);
    for (std::size_t b = 0; b < rows; ++b) {
      for (std::size_t o = 0; o < width; ++o) {
        const double dy = c.pre_relu(b, o) > 0.0 ? grad(b, o) : 0.0;
        gbn.gamma[o] += dy * c.xhat(b, o);
        gbn.beta[o] += dy;
        const double dxh = dy * bn.gamma[o];
        dxhat(b, o) = dxh;
        sum_dxhat[o] += dxh;
        sum_dxhat_xhat[o] += dxh * c.xhat(b, o);
      }
    }
    Matrix dz(rows, width);
    for (std::size_t b = 0; b < rows; ++b) {
      for (std::size_t o = 0; o < width; ++o) {
        dz(b, o) = c.inv_std[o] * inv_rows *
                   (static_cast<double>(rows) * dxhat(b, o) - sum_dxhat[o] -
                    c.xhat(b, o) * sum_dxhat_xhat[o]);
      }
    }
    grad = dense_backward(model.params.dense[li], r.grads.dense[li], c.input, dz, li > 0);
  }

  r.stats = std::move(pass.stats);
  return r;
}

// ---------------------------------------------------------------- training

void TrainConfig::validate() const {
  if (epochs <= 0) throw InvalidParams("epochs must be positive");
  if (batch_size < 2) throw InvalidParams("batch_size must be at least 2 for batchnorm");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidParams("learning_rate must be positive");
  }
  if (!(bn_momentum > 0.0 && bn_momentum < 1.0)) throw InvalidParams("bn_momentum must be in (0,1)");
}

namespace {

class AdamState {
 public:
  explicit AdamState(const MlpParameters& shape) : m_(shape.zeros_like()), v_(shape.zeros_like()) {}

  void step(MlpParameters& params, const MlpParameters& grads, double lr) {
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    auto p = params.tensors();
    auto g = grads.tensors();
    auto m = m_.tensors();
    auto v = v_.tensors();
    for (std::size_t k = 0; k < p.size(); ++k) {
      auto& pk = *p[k];
      const auto& gk = *g[k];
      auto& mk = *m[k];
      auto& vk = *v[k];
      for (std::size_t i = 0; i < pk.size(); ++i) {
        mk[i] = kBeta1 * mk[i] + (1.0 - kBeta1) * gk[i];
        vk[i] = kBeta2 * vk[i] + (1.0 - kBeta2) * gk[i] * gk[i];
        pk[i] -= lr * (mk[i] / c1) / (std::sqrt(vk[i] / c2) + kEps);
      }
    }
  }

 private:
  MlpParameters m_;
  MlpParameters v_;
  long t_ = 0;
};

void sgd_step(MlpParameters& params, const MlpParameters& grads, double lr) {
  auto p = params.tensors();
  auto g = grads.tensors();
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (std::size_t i = 0; i < p[k]->size(); ++i) (*p[k])[i] -= lr * (*g[k])[i];
  }
}

Matrix encode_all(std::span<const LabeledHand> data, Encoding enc) {
  Matrix x(data.size(), feature_dim(enc));
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto f = encode(data[n].hand, enc);
    std::copy(f.begin(), f.end(), x.row(n));
  }
  return x;
}

}  // namespace

TrainResult train(std::span<const LabeledHand> data, const TrainConfig& cfg, Encoding enc) {
  cfg.validate();
  std::set<std::string> distinct;
  for (const auto& s : data) distinct.insert(s.label);
  if (distinct.size() < 2) {
    throw InsufficientData("training needs at least two classes, got " +
                           std::to_string(distinct.size()));
  }
  std::vector<std::string> labels(distinct.begin(), distinct.end());

  const Matrix all = encode_all(data, enc);
  std::vector<std::size_t> targets(data.size());
  for (std::size_t n = 0; n < data.size(); ++n) {
    targets[n] = static_cast<std::size_t>(
        std::lower_bound(labels.begin(), labels.end(), data[n].label) - labels.begin());
  }

  TrainResult result{MlpModel::initialize(enc, labels, cfg.seed), {}};
  MlpModel& model = result.model;
  AdamState adam(model.params);
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const double momentum = cfg.bn_momentum;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t seen = 0;

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t rows = std::min(cfg.batch_size, order.size() - start);
      // A single-row batch has zero variance; skip the trailing remainder.
      if (rows < 2) continue;
      Matrix batch(rows, all.cols);
      std::vector<std::size_t> batch_targets(rows);
      for (std::size_t b = 0; b < rows; ++b) {
        const std::size_t n = order[start + b];
        std::copy(all.row(n), all.row(n) + all.cols, batch.row(b));
        batch_targets[b] = targets[n];
      }

      BackpropResult r = backprop(model, batch, batch_targets);
      if (!std::isfinite(r.loss)) throw NonFiniteLoss(epoch + 1);

      const double unbias = static_cast<double>(rows) / static_cast<double>(rows - 1);
      for (std::size_t l = 0; l < 3; ++l) {
        auto& run = model.running[l];
        for (std::size_t o = 0; o < run.mean.size(); ++o) {
          run.mean[o] = (1.0 - momentum) * run.mean[o] + momentum * r.stats.mean[l][o];
          run.var[o] = (1.0 - momentum) * run.var[o] + momentum * r.stats.var[l][o] * unbias;
        }
      }

      if (cfg.optimizer == Optimizer::Adam) {
        adam.step(model.params, r.grads, cfg.learning_rate);
      } else {
        sgd_step(model.params, r.grads, cfg.learning_rate);
      }

      loss_sum += r.loss * static_cast<double>(rows);
      correct += r.correct;
      seen += rows;
    }

    EpochRecord rec;
    if (seen > 0) {
      rec.loss = loss_sum / static_cast<double>(seen);
      rec.accuracy = static_cast<double>(correct) / static_cast<double>(seen);
    }
    result.history.push_back(rec);
  }
  return result;
}

double evaluate_accuracy(const MlpModel& model, std::span<const LabeledHand> data) {
  if (data.empty()) throw InvalidParams("cannot evaluate accuracy on an empty set");
  const Matrix scores = forward(model, encode_all(data, model.encoding), Mode::Infer);
  std::size_t correct = 0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    const std::span<const double> row(scores.row(n), scores.cols);
    if (model.class_labels[argmax(row)] == data[n].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

// ---------------------------------------------------------------- model file

namespace {

constexpr int kFormatVersion = 1;

std::vector<double> read_array(const nlohmann::json& j, const char* key, std::size_t expected,
                               const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_array()) throw CorruptModel(where + ": missing '" + key + "'");
  if (it->size() != expected) {
    throw CorruptModel(where + ": '" + key + "' has " + std::to_string(it->size()) +
                       " values, expected " + std::to_string(expected));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : *it) {
    if (!v.is_number()) throw CorruptModel(where + ": '" + key + "' holds a non-number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw CorruptModel(where + ": '" + key + "' holds a non-finite value");
    out.push_back(d);
  }
  return out;
}

}  // namespace

std::string save_model(const MlpModel& model) {
  using nlohmann::ordered_json;
  ordered_json j;
  ordered_json header;
  header["format_version"] = kFormatVersion;
  header["encoding"] = std::string(to_string(model.encoding));
  const auto dims = model.layer_dims();
  header["layer_dims"] = std::vector<std::size_t>(dims.begin(), dims.end());
  header["class_labels"] = model.class_labels;
  j["header"] = std::move(header);

  j["layers"] = ordered_json::array();
  for (const auto& d : model.params.dense) {
    ordered_json layer;
    layer["weight"] = d.weight;
    layer["bias"] = d.bias;
    j["layers"].push_back(std::move(layer));
  }
  j["batchnorm"] = ordered_json::array();
  for (std::size_t l = 0; l < 3; ++l) {
    ordered_json bn;
    bn["gamma"] = model.params.norm[l].gamma;
    bn["beta"] = model.params.norm[l].beta;
    bn["running_mean"] = model.running[l].mean;
    bn["running_var"] = model.running[l].var;
    j["batchnorm"].push_back(std::move(bn));
  }
  return j.dump();
}

MlpModel load_model(std::string_view bytes) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::exception& e) {
    throw CorruptModel(std::string("model is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw CorruptModel("model root is not an object");

  MlpModel m;
  try {
    const json& header = j.at("header");
    if (header.at("format_version").get<int>() != kFormatVersion) {
      throw CorruptModel("unsupported format_version");
    }
    const auto enc_name = header.at("encoding").get<std::string>();
    if (enc_name != "absolute" && enc_name != "relative") {
      throw CorruptModel("unknown encoding '" + enc_name + "'");
    }
    m.encoding = parse_encoding(enc_name);
    m.class_labels = header.at("class_labels").get<std::vector<std::string>>();
    const auto dims = header.at("layer_dims").get<std::vector<std::size_t>>();

    if (m.class_labels.empty()) throw CorruptModel("no class labels");
    const std::set<std::string> unique(m.class_labels.begin(), m.class_labels.end());
    if (unique.size() != m.class_labels.size() || unique.count("") != 0) {
      throw CorruptModel("class labels must be distinct and nonempty");
    }
    const std::vector<std::size_t> expected{feature_dim(m.encoding), kHiddenWidths[0],
                                            kHiddenWidths[1], kHiddenWidths[2],
                                            m.class_labels.size()};
    if (dims != expected) throw CorruptModel("layer_dims do not match the declared architecture");

    const json& layers = j.at("layers");
    const json& norms = j.at("batchnorm");
    if (!layers.is_array() || layers.size() != 4) throw CorruptModel("expected 4 dense layers");
    if (!norms.is_array() || norms.size() != 3) throw CorruptModel("expected 3 batchnorm layers");

    for (std::size_t l = 0; l < 4; ++l) {
      const std::string where = "layer " + std::to_string(l);
      Dense& d = m.params.dense[l];
      d.in = dims[l];
      d.out = dims[l + 1];
      d.weight = read_array(layers[l], "weight", d.in * d.out, where);
      d.bias = read_array(layers[l], "bias", d.out, where);
    }
    for (std::size_t l = 0; l < 3; ++l) {
      const std::string where = "batchnorm " + std::to_string(l);
      const std::size_t width = dims[l + 1];
      m.params.norm[l].gamma = read_array(norms[l], "gamma", width, where);
      m.params.norm[l].beta = read_array(norms[l], "beta", width, where);
      m.running[l].mean = read_array(norms[l], "running_mean", width, where);
      m.running[l].var = read_array(norms[l], "running_var", width, where);
      for (double v : m.running[l].var) {
        if (!(v > 0.0)) throw CorruptModel(where + ": running_var must be positive");
      }
    }
  } catch (const json::exception& e) {
    throw CorruptModel(std::string("model structure: ") + e.what());
  }
  return m;
}

}  // namespace tfs
