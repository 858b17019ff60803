#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>

#include "json.hpp"
#include "../support/random_hands.hpp"
#include "tfs/errors.hpp"
#include "tfs/mlp.hpp"
#include "tfs/synth.hpp"

namespace tfs {
namespace {

std::vector<std::string> labels_n(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(synth::class_label(k));
  return out;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix m(rows, cols);
  for (auto& v : m.data) v = d(rng);
  return m;
}

// Perturbs gamma/beta and running stats so the check exercises every term.
MlpModel perturbed_model(Encoding enc, std::size_t classes, std::uint64_t seed) {
  MlpModel m = MlpModel::initialize(enc, labels_n(classes), seed);
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (auto* t : m.params.tensors()) {
    for (auto& v : *t) v += u(rng);
  }
  for (auto& r : m.running) {
    for (auto& v : r.mean) v = u(rng);
    for (auto& v : r.var) v = 1.0 + u(rng);
  }
  return m;
}

TEST(Encode, Dimensions) {
  const auto& h = synth::open_palm_template();
  EXPECT_EQ(encode(h, Encoding::Absolute).size(), 63u);
  EXPECT_EQ(encode(h, Encoding::Relative).size(), 60u);
  EXPECT_EQ(feature_dim(Encoding::Absolute), 63u);
  EXPECT_EQ(feature_dim(Encoding::Relative), 60u);
}

TEST(Encode, RelativeIsWristMinusLandmark) {
  const auto& h = synth::open_palm_template();
  const auto f = encode(h, Encoding::Relative);
  for (std::size_t i = 1; i < kLandmarkCount; ++i) {
    EXPECT_EQ(f[3 * (i - 1) + 0], h[0].x - h[i].x);
    EXPECT_EQ(f[3 * (i - 1) + 1], h[0].y - h[i].y);
    EXPECT_EQ(f[3 * (i - 1) + 2], h[0].z - h[i].z);
  }
}

TEST(Encode, RelativeIsTranslationInvariant) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> t(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const HandLandmarks h = testing::random_hand(rng, 0.0, 1.0);
    HandLandmarks moved = h;
    const double dx = t(rng), dy = t(rng), dz = t(rng);
    for (auto& p : moved.landmarks) p = {p.x + dx, p.y + dy, p.z + dz};
    const auto a = encode(h, Encoding::Relative);
    const auto b = encode(moved, Encoding::Relative);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
  }
}

TEST(Encoding, Names) {
  EXPECT_EQ(parse_encoding("absolute"), Encoding::Absolute);
  EXPECT_EQ(parse_encoding("relative"), Encoding::Relative);
  EXPECT_EQ(to_string(Encoding::Relative), "relative");
  EXPECT_THROW(parse_encoding("polar"), InvalidParams);
}

TEST(Initialize, Shapes) {
  const MlpModel m = MlpModel::initialize(Encoding::Absolute, labels_n(30), 1);
  const std::array<std::size_t, 5> dims{63, 60, 40, 30, 30};
  EXPECT_EQ(m.layer_dims(), dims);
  EXPECT_EQ(m.params.count(), 63u * 60 + 60 + 60 * 40 + 40 + 40 * 30 + 30 + 30 * 30 + 30 + 2 * (60 + 40 + 30));
  for (const auto& r : m.running) {
    for (double v : r.mean) EXPECT_EQ(v, 0.0);
    for (double v : r.var) EXPECT_EQ(v, 1.0);
  }
}

TEST(Initialize, HeUniformBounds) {
  const MlpModel m = MlpModel::initialize(Encoding::Relative, labels_n(5), 9);
  for (const auto& d : m.params.dense) {
    const double bound = std::sqrt(6.0 / static_cast<double>(d.in));
    for (double w : d.weight) EXPECT_LE(std::abs(w), bound);
    for (double b : d.bias) EXPECT_EQ(b, 0.0);
  }
}

TEST(Forward, ZeroWeightsGiveOneHalf) {
  MlpModel m = MlpModel::initialize(Encoding::Absolute, labels_n(30), 1);
  for (auto& d : m.params.dense) std::fill(d.weight.begin(), d.weight.end(), 0.0);
  const auto f = encode(synth::open_palm_template(), Encoding::Absolute);
  const auto s = forward(m, f, Mode::Infer);
  ASSERT_EQ(s.size(), 30u);
  for (double v : s) EXPECT_EQ(v, 0.5);
}

TEST(Forward, ScoresStrictlyInsideUnitInterval) {
  MlpModel m = perturbed_model(Encoding::Absolute, 7, 3);
  for (auto& w : m.params.dense[3].weight) w *= 1e4;
  const Matrix x = random_matrix(50, 63, 8);
  for (auto mode : {Mode::Train, Mode::Infer}) {
    const Matrix s = forward(m, x, mode);
    ASSERT_EQ(s.rows, 50u);
    ASSERT_EQ(s.cols, 7u);
    for (double v : s.data) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

TEST(Forward, WrongLengthThrows) {
  const MlpModel m = MlpModel::initialize(Encoding::Relative, labels_n(3), 1);
  const std::vector<double> x(63, 0.0);
  EXPECT_THROW(forward(m, x, Mode::Infer), DimensionMismatch);
}

TEST(Forward, InferIsRowIndependentAndPure) {
  const MlpModel m = perturbed_model(Encoding::Absolute, 4, 11);
  const MlpModel copy = m;
  const Matrix x = random_matrix(6, 63, 2);
  const Matrix batch = forward(m, x, Mode::Infer);
  for (std::size_t r = 0; r < x.rows; ++r) {
    const auto single = forward(m, std::span<const double>(x.row(r), x.cols), Mode::Infer);
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(single[c], batch(r, c));
  }
  EXPECT_EQ(save_model(m), save_model(copy));
}

TEST(Forward, TrainModeNormalizesWithBatchStatistics) {
  const MlpModel m = perturbed_model(Encoding::Absolute, 3, 5);
  const Matrix x = random_matrix(16, 63, 6);
  const std::vector<std::size_t> targets(16, 0);
  const auto r = backprop(m, x, targets);
  const auto& d = m.params.dense[0];
  for (std::size_t o = 0; o < d.out; ++o) {
    double mean = 0.0;
    std::vector<double> z(x.rows);
    for (std::size_t n = 0; n < x.rows; ++n) {
      z[n] = d.bias[o];
      for (std::size_t i = 0; i < d.in; ++i) z[n] += d.weight[o * d.in + i] * x(n, i);
      mean += z[n];
    }
    mean /= static_cast<double>(x.rows);
    double var = 0.0;
    for (double v : z) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.rows);
    EXPECT_NEAR(r.stats.mean[0][o], mean, 1e-12);
    EXPECT_NEAR(r.stats.var[0][o], var, 1e-12);
  }
}

TEST(Forward, TrainAndInferAgreeWhenRunningStatsMatchBatch) {
  MlpModel m = perturbed_model(Encoding::Absolute, 3, 5);
  const Matrix x = random_matrix(16, 63, 6);
  const std::vector<std::size_t> targets(16, 0);
  const auto r = backprop(m, x, targets);
  for (std::size_t l = 0; l < 3; ++l) {
    m.running[l].mean = r.stats.mean[l];
    m.running[l].var = r.stats.var[l];
  }
  const Matrix a = forward(m, x, Mode::Train);
  const Matrix b = forward(m, x, Mode::Infer);
  for (std::size_t k = 0; k < a.data.size(); ++k) EXPECT_NEAR(a.data[k], b.data[k], 1e-12);
}

TEST(Argmax, LowestIndexOnTies) {
  const std::vector<double> s{0.1, 0.7, 0.7, 0.2};
  EXPECT_EQ(argmax(s), 1u);
}

TEST(Argmax, InvariantUnderPositiveAffineMapOfLogits) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> d(0.0, 2.0);
  std::uniform_real_distribution<double> a(0.1, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> logits(30);
    for (auto& v : logits) v = d(rng);
    const double scale = a(rng), shift = d(rng);
    std::vector<double> s1, s2;
    for (double l : logits) {
      s1.push_back(1.0 / (1.0 + std::exp(-l)));
      s2.push_back(1.0 / (1.0 + std::exp(-(scale * l + shift))));
    }
    EXPECT_EQ(argmax(s1), argmax(s2));
  }
}

double loss_at(const MlpModel& m, const Matrix& x, std::span<const std::size_t> t) {
  return backprop(m, x, t).loss;
}

void gradient_check(Encoding enc, std::size_t classes, std::uint64_t seed) {
  const MlpModel m = perturbed_model(enc, classes, seed);
  const Matrix x = random_matrix(8, feature_dim(enc), seed + 10);
  std::vector<std::size_t> t(8);
  for (std::size_t n = 0; n < t.size(); ++n) t[n] = n % classes;
  const auto analytic = backprop(m, x, t).grads;

  constexpr double h = 1e-5;
  MlpModel probe = m;
  auto params = probe.params.tensors();
  const auto grads = analytic.tensors();
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (std::size_t i = 0; i < params[k]->size(); ++i) {
      const double saved = (*params[k])[i];
      (*params[k])[i] = saved + h;
      const double up = loss_at(probe, x, t);
      (*params[k])[i] = saved - h;
      const double down = loss_at(probe, x, t);
      (*params[k])[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = (*grads[k])[i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
      worst = std::max(worst, rel);
      EXPECT_LE(rel, 1e-4) << "tensor " << k << " index " << i << " analytic " << a
                           << " numeric " << numeric;
    }
  }
  ::testing::Test::RecordProperty("worst_relative_error", std::to_string(worst));
}

TEST(Backprop, MatchesFiniteDifferencesAbsolute) { gradient_check(Encoding::Absolute, 5, 21); }
TEST(Backprop, MatchesFiniteDifferencesRelative) { gradient_check(Encoding::Relative, 3, 22); }

TEST(Backprop, LossIsSummedBinaryCrossEntropy) {
  MlpModel m = MlpModel::initialize(Encoding::Absolute, labels_n(4), 1);
  for (auto& d : m.params.dense) std::fill(d.weight.begin(), d.weight.end(), 0.0);
  const Matrix x = random_matrix(5, 63, 1);
  const std::vector<std::size_t> t{0, 1, 2, 3, 0};
  // Every score is 0.5, so each class contributes log 2.
  EXPECT_NEAR(backprop(m, x, t).loss, 4.0 * std::log(2.0), 1e-12);
}

std::vector<LabeledHand> two_class_data(std::size_t per_class, std::uint64_t seed) {
  synth::PoseParams p;
  p.noise_sigma = 0.01;
  p.seed = seed;
  return synth::generate_class_dataset(2, per_class, p);
}

TEST(Train, SeparableTwoClassReachesHighAccuracy) {
  const auto data = two_class_data(100, 1);
  TrainConfig cfg;
  cfg.epochs = 30;
  for (auto enc : {Encoding::Absolute, Encoding::Relative}) {
    const auto r = train(data, cfg, enc);
    EXPECT_GE(evaluate_accuracy(r.model, data), 0.99);
    EXPECT_EQ(r.history.size(), 30u);
    EXPECT_LT(r.history.back().loss, r.history.front().loss);
  }
}

TEST(Train, SgdAlsoLearns) {
  const auto data = two_class_data(50, 2);
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.optimizer = Optimizer::Sgd;
  cfg.learning_rate = 0.05;
  EXPECT_GE(evaluate_accuracy(train(data, cfg, Encoding::Relative).model, data), 0.99);
}

TEST(Train, DeterministicForSameSeed) {
  const auto data = two_class_data(30, 3);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 17;
  const auto a = train(data, cfg, Encoding::Relative);
  const auto b = train(data, cfg, Encoding::Relative);
  EXPECT_EQ(save_model(a.model), save_model(b.model));
  cfg.seed = 18;
  EXPECT_NE(save_model(train(data, cfg, Encoding::Relative).model), save_model(a.model));
}

TEST(Train, SortedClassLabels) {
  auto data = two_class_data(5, 1);
  for (auto& s : data) s.label = s.label == "c00" ? "zeta" : "alpha";
  TrainConfig cfg;
  cfg.epochs = 1;
  const auto r = train(data, cfg, Encoding::Absolute);
  EXPECT_EQ(r.model.class_labels, (std::vector<std::string>{"alpha", "zeta"}));
}

TEST(Train, OneClassIsInsufficient) {
  auto data = two_class_data(5, 1);
  for (auto& s : data) s.label = "only";
  EXPECT_THROW(train(data, {}, Encoding::Relative), InsufficientData);
  EXPECT_THROW(train({}, {}, Encoding::Relative), InsufficientData);
}

TEST(Train, DivergenceIsReported) {
  const auto data = two_class_data(20, 1);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.optimizer = Optimizer::Sgd;
  cfg.learning_rate = 1e300;
  EXPECT_THROW(train(data, cfg, Encoding::Absolute), NonFiniteLoss);
}

TEST(Train, RejectsBadConfig) {
  const auto data = two_class_data(5, 1);
  TrainConfig cfg;
  cfg.batch_size = 1;
  EXPECT_THROW(train(data, cfg, Encoding::Relative), InvalidParams);
  cfg = {};
  cfg.epochs = 0;
  EXPECT_THROW(train(data, cfg, Encoding::Relative), InvalidParams);
  cfg = {};
  cfg.learning_rate = -1.0;
  EXPECT_THROW(train(data, cfg, Encoding::Relative), InvalidParams);
}

TEST(ModelFile, RoundTripIsBitExact) {
  const MlpModel m = perturbed_model(Encoding::Absolute, 6, 31);
  const MlpModel back = load_model(save_model(m));
  EXPECT_EQ(back.class_labels, m.class_labels);
  EXPECT_EQ(back.encoding, m.encoding);
  const Matrix x = random_matrix(100, 63, 32);
  const Matrix a = forward(m, x, Mode::Infer);
  const Matrix b = forward(back, x, Mode::Infer);
  for (std::size_t k = 0; k < a.data.size(); ++k) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a.data[k]), std::bit_cast<std::uint64_t>(b.data[k]));
  }
  EXPECT_EQ(save_model(back), save_model(m));
}

TEST(ModelFile, TruncatedFileIsCorrupt) {
  const std::string bytes = save_model(MlpModel::initialize(Encoding::Relative, labels_n(3), 1));
  for (std::size_t cut : {std::size_t{0}, bytes.size() / 3, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_THROW(load_model(bytes.substr(0, cut)), CorruptModel) << cut;
  }
}

TEST(ModelFile, InconsistentContentIsCorrupt) {
  const auto m = MlpModel::initialize(Encoding::Relative, labels_n(3), 1);
  auto j = nlohmann::json::parse(save_model(m));

  auto bad = j;
  bad["header"]["format_version"] = 2;
  EXPECT_THROW(load_model(bad.dump()), CorruptModel);
  bad = j;
  bad["header"]["encoding"] = "absolute";
  EXPECT_THROW(load_model(bad.dump()), CorruptModel);
  bad = j;
  bad["header"]["class_labels"] = {"a", "a", "b"};
  EXPECT_THROW(load_model(bad.dump()), CorruptModel);
  bad = j;
  bad["layers"][1]["bias"].erase(0);
  EXPECT_THROW(load_model(bad.dump()), CorruptModel);
  bad = j;
  bad["batchnorm"][0]["running_var"][0] = 0.0;
  EXPECT_THROW(load_model(bad.dump()), CorruptModel);
  bad = j;
  bad["layers"].erase(3);
  EXPECT_THROW(load_model(bad.dump()), CorruptModel);
}

}  // namespace
}  // namespace tfs
