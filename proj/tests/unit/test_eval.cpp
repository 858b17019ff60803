#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "tfs/errors.hpp"
#include "tfs/eval.hpp"
#include "tfs/synth.hpp"

namespace tfs {
namespace {

using eval::PredictionPair;

// Two-sided p by composite Simpson integration of the t density on [0, |t|].
double simpson_two_sided_p(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
  auto f = [&](double x) { return c * std::pow(1.0 + x * x / df, -(df + 1) / 2); };
  const double b = std::abs(t);
  const int n = 200000;
  const double h = b / n;
  double s = f(0.0) + f(b);
  for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return 1.0 - 2.0 * s * h / 3.0;
}

TEST(Confusion, AllCorrect) {
  std::vector<PredictionPair> pairs;
  for (int i = 0; i < 10; ++i) pairs.emplace_back(i % 2 ? "a" : "b", i % 2 ? "a" : "b");
  const auto cm = eval::confusion(pairs, {"a", "b"});
  EXPECT_EQ(cm.counts[0][0] + cm.counts[1][1], 10u);
  EXPECT_EQ(eval::accuracy(cm), 1.0);
  for (const auto& r : eval::tp_rate_per_class(cm)) EXPECT_EQ(r, 1.0);
}

TEST(Confusion, EmptyInputIsZeroMatrix) {
  const auto cm = eval::confusion({}, {"a", "b"});
  ASSERT_EQ(cm.counts.size(), 2u);
  for (const auto& row : cm.counts) {
    EXPECT_EQ(row.size(), 3u);
    for (auto c : row) EXPECT_EQ(c, 0u);
  }
  EXPECT_THROW(eval::accuracy(cm), EmptyMatrix);
  for (const auto& r : eval::tp_rate_per_class(cm)) EXPECT_FALSE(r);
}

TEST(Confusion, ThreeOfFour) {
  const std::vector<PredictionPair> pairs{{"a", "a"}, {"a", "b"}, {"b", "b"}, {"b", "b"}};
  EXPECT_EQ(eval::accuracy(eval::confusion(pairs, {"a", "b"})), 0.75);
}

TEST(Confusion, RatesFromDiagonal) {
  std::vector<PredictionPair> pairs;
  for (int i = 0; i < 10; ++i) pairs.emplace_back("a", i < 8 ? "a" : "b");
  for (int i = 0; i < 10; ++i) pairs.emplace_back("b", i < 6 ? std::optional<std::string>("b") : std::nullopt);
  const auto cm = eval::confusion(pairs, {"a", "b"});
  EXPECT_DOUBLE_EQ(eval::accuracy(cm), 0.70);
  const auto r = eval::tp_rate_per_class(cm);
  EXPECT_DOUBLE_EQ(*r[0], 0.8);
  EXPECT_DOUBLE_EQ(*r[1], 0.6);
  EXPECT_EQ(cm.counts[1][cm.rejected_column()], 4u);
}

TEST(Confusion, AllRejectedRateIsZero) {
  const std::vector<PredictionPair> pairs{{"a", std::nullopt}, {"a", std::nullopt}, {"b", "b"}};
  const auto r = eval::tp_rate_per_class(eval::confusion(pairs, {"a", "b"}));
  EXPECT_EQ(r[0], 0.0);
}

TEST(Confusion, UnknownLabels) {
  EXPECT_THROW(eval::confusion(std::vector<PredictionPair>{{"z", "a"}}, {"a"}), UnknownLabel);
  EXPECT_THROW(eval::confusion(std::vector<PredictionPair>{{"a", "z"}}, {"a"}), UnknownLabel);
}

TEST(Confusion, AccuracyMatchesDirectCount) {
  std::mt19937_64 rng(3);
  const std::vector<std::string> labels{"a", "b", "c", "d"};
  std::uniform_int_distribution<int> pick(0, 4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PredictionPair> pairs;
    int correct = 0;
    const int n = 1 + trial;
    for (int i = 0; i < n; ++i) {
      const std::string truth = labels[pick(rng) % 4];
      const int p = pick(rng);
      std::optional<std::string> pred = p == 4 ? std::nullopt : std::optional<std::string>(labels[p]);
      correct += pred == truth;
      pairs.emplace_back(truth, pred);
    }
    const auto cm = eval::confusion(pairs, labels);
    EXPECT_EQ(cm.total(), static_cast<std::uint64_t>(n));
    EXPECT_DOUBLE_EQ(eval::accuracy(cm), static_cast<double>(correct) / n);
  }
}

TEST(Reports, CsvAndSummary) {
  const std::vector<PredictionPair> pairs{{"a", "a"}, {"a", std::nullopt}, {"b", "a"}};
  const auto cm = eval::confusion(pairs, {"a", "b"});
  std::ostringstream c, p;
  eval::write_confusion_csv(c, cm);
  EXPECT_EQ(c.str(), "truth,a,b,rejected\na,1,0,1\nb,1,0,0\n");
  eval::write_per_class_csv(p, cm);
  EXPECT_EQ(p.str(), "label,support,true_positives,tp_rate\na,2,1,0.5\nb,1,0,0\n");
  const auto j = eval::summary_json(cm);
  EXPECT_EQ(j["samples"], 3);
  EXPECT_EQ(j["rejected"], 1);
  EXPECT_DOUBLE_EQ(j["accuracy"].get<double>(), 1.0 / 3.0);
  EXPECT_EQ(j["tp_rate"]["a"], 0.5);
}

TEST(TTest, IdenticalListsGiveZero) {
  const std::vector<double> xs{0.8, 0.9, 0.85};
  const auto r = eval::t_test(xs, xs);
  EXPECT_EQ(r.t, 0.0);
  EXPECT_EQ(r.p, 1.0);
  EXPECT_EQ(r.df, 4.0);
}

TEST(TTest, ShiftedListsMatchIntegration) {
  const std::vector<double> xs{1, 2, 3};
  const std::vector<double> ys{11, 12, 13};
  const auto r = eval::t_test(xs, ys);
  EXPECT_NEAR(r.t, -10.0 / std::sqrt(2.0 / 3.0), 1e-12);
  EXPECT_LT(r.p, 0.001);
  EXPECT_NEAR(r.p, simpson_two_sided_p(r.t, r.df), 1e-9);
}

TEST(TTest, RandomListsMatchIntegration) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xs(2 + trial % 9), ys(2 + trial % 5);
    for (auto& v : xs) v = d(rng);
    for (auto& v : ys) v = d(rng) + 0.5;
    const auto r = eval::t_test(xs, ys);
    EXPECT_NEAR(r.p, simpson_two_sided_p(r.t, r.df), 1e-8) << trial;
  }
}

TEST(TTest, KnownTable) {
  // Two-sided 5% critical values of Student's t.
  EXPECT_NEAR(stats::student_t_two_sided_p(12.706204736, 1), 0.05, 1e-9);
  EXPECT_NEAR(stats::student_t_two_sided_p(2.228138852, 10), 0.05, 1e-9);
  EXPECT_NEAR(stats::student_t_two_sided_p(1.959963985, 1e7), 0.05, 1e-6);
}

TEST(TTest, SwapNegatesT) {
  const std::vector<double> xs{0.91, 0.93, 0.92, 0.95};
  const std::vector<double> ys{0.88, 0.90, 0.91};
  const auto a = eval::t_test(xs, ys);
  const auto b = eval::t_test(ys, xs);
  EXPECT_EQ(a.t, -b.t);
  EXPECT_EQ(a.p, b.p);
}

TEST(TTest, Degenerate) {
  const std::vector<double> zeros{0, 0};
  const std::vector<double> one{1};
  const std::vector<double> two{1, 2};
  EXPECT_THROW(eval::t_test(zeros, zeros), DegenerateSample);
  EXPECT_THROW(eval::t_test(one, two), DegenerateSample);
}

TEST(IncompleteBeta, ClosedForms) {
  for (double x : {0.0, 0.1, 0.5, 0.93, 1.0}) {
    EXPECT_NEAR(stats::incomplete_beta(1, 1, x), x, 1e-14);
    EXPECT_NEAR(stats::incomplete_beta(2, 1, x), x * x, 1e-14);
    EXPECT_NEAR(stats::incomplete_beta(0.5, 0.5, x), 2.0 / M_PI * std::asin(std::sqrt(x)), 1e-13);
  }
}

eval::AuditRecord rec(std::string g, bool hand, bool kp, std::optional<bool> hd = std::nullopt) {
  return {std::move(g), hand, kp, hd};
}

TEST(Audit, AllOk) {
  std::vector<eval::AuditRecord> rs(30, rec("single", true, true));
  const auto s = eval::audit_summary(rs);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].both_ok, 30u);
  EXPECT_EQ(s[0].hand_fail, 0u);
  EXPECT_EQ(s[0].keypoint_fail, 0u);
  EXPECT_FALSE(s[0].handedness_accuracy);
}

TEST(Audit, CountsSumToRecords) {
  std::vector<eval::AuditRecord> rs;
  for (int i = 0; i < 30; ++i) rs.push_back(rec("20%", i >= 3, i >= 10));
  for (int i = 0; i < 30; ++i) rs.push_back(rec("FLBR", true, true, i < 3));
  const auto s = eval::audit_summary(rs);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].group, "20%");
  EXPECT_EQ(s[0].hand_fail, 3u);
  EXPECT_EQ(s[0].keypoint_fail, 7u);
  EXPECT_EQ(s[0].both_ok, 20u);
  EXPECT_NEAR(*s[1].handedness_accuracy, 0.10, 1e-15);
  for (const auto& g : s) EXPECT_EQ(g.both_ok + g.hand_fail + g.keypoint_fail, g.records);
}

TEST(Audit, ParsesCsv) {
  std::stringstream ss("group,hand_detect_ok,keypoints_ok,handedness_ok\nFL,true,true,1\nFL,1,0,\nBR,false,false,false\n");
  const auto rs = eval::parse_audit_csv(ss);
  ASSERT_EQ(rs.size(), 3u);
  EXPECT_EQ(rs[0].handedness_ok, true);
  EXPECT_FALSE(rs[1].keypoints_ok);
  EXPECT_FALSE(rs[1].handedness_ok);
  EXPECT_EQ(rs[2].group, "BR");
  const auto j = eval::audit_json(eval::audit_summary(rs));
  EXPECT_EQ(j[0]["group"], "FL");
  EXPECT_EQ(j[0]["keypoint_fail"], 1);
  EXPECT_EQ(j[0]["handedness_accuracy"], 1.0);
}

TEST(Audit, RejectsBadCsv) {
  for (const char* text : {"g,false,true,\n", "g,yes,true,\n", "g,true\n", ",true,true,\n"}) {
    std::stringstream ss(text);
    EXPECT_THROW(eval::parse_audit_csv(ss), MalformedRecord) << text;
  }
}

std::vector<LabeledHand> dataset(std::size_t classes, std::size_t per_class, std::uint64_t seed) {
  synth::PoseParams p;
  p.noise_sigma = 0.01;
  p.seed = seed;
  return synth::generate_class_dataset(classes, per_class, p);
}

TEST(Bootstrap, LengthAndDeterminism) {
  const auto tr = dataset(3, 20, 1);
  const auto te = dataset(3, 10, 2);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 100;
  const auto a = eval::bootstrap_eval(tr, te, cfg, Encoding::Relative, 4);
  const auto b = eval::bootstrap_eval(tr, te, cfg, Encoding::Relative, 4);
  ASSERT_EQ(a.size(), 4u);
  EXPECT_EQ(a, b);
  for (double v : a) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Bootstrap, SingleSampleTrainSetFailsWithRepeatIndex) {
  const auto tr = dataset(2, 1, 1);
  const std::vector<LabeledHand> one{tr[0]};
  const auto te = dataset(2, 2, 2);
  try {
    eval::bootstrap_eval(one, te, {}, Encoding::Relative, 3);
    FAIL() << "expected BootstrapFailure";
  } catch (const BootstrapFailure& e) {
    EXPECT_EQ(e.repeat(), 0);
  }
}

TEST(Bootstrap, RejectsZeroRepeats) {
  const auto tr = dataset(2, 5, 1);
  EXPECT_THROW(eval::bootstrap_eval(tr, tr, {}, Encoding::Relative, 0), InvalidParams);
}

}  // namespace
}  // namespace tfs
