#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tfs/mlp.hpp"
#include "tfs/stats.hpp"

namespace tfs::eval {

// Rows are truth labels, columns predictions, plus a final "rejected"
// column for samples that produced no prediction.
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::uint64_t>> counts;  // labels.size() x (labels.size() + 1)

  std::size_t rejected_column() const { return labels.size(); }
  std::uint64_t total() const;
  std::uint64_t row_total(std::size_t truth) const;
  std::size_t index_of(const std::string& label) const;  // throws UnknownLabel
};

using PredictionPair = std::pair<std::string, std::optional<std::string>>;

// Both truth and predicted labels must belong to `labels`.
ConfusionMatrix confusion(std::span<const PredictionPair> pairs, std::vector<std::string> labels);

// Rejections count as errors. Throws EmptyMatrix when there are no samples.
double accuracy(const ConfusionMatrix& cm);

// counts[c][c] / row_total(c); absent for classes without truth samples.
std::vector<std::optional<double>> tp_rate_per_class(const ConfusionMatrix& cm);

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm);
void write_per_class_csv(std::ostream& out, const ConfusionMatrix& cm);
nlohmann::ordered_json summary_json(const ConfusionMatrix& cm);

// For repeat r in [0, repeats): resample train_set with replacement (same
// size) using seed cfg.seed + r, train a fresh model with that seed, and
// score it on test_set. Repeats run concurrently; results are ordered by r.
// Training failures surface as BootstrapFailure carrying the repeat index.
std::vector<double> bootstrap_eval(std::span<const LabeledHand> train_set,
                                   std::span<const LabeledHand> test_set, const TrainConfig& cfg,
                                   Encoding enc, int repeats);

using stats::t_test;
using stats::TTestResult;

struct AuditRecord {
  std::string group;
  bool hand_detect_ok = false;
  bool keypoints_ok = false;
  std::optional<bool> handedness_ok;
};

struct AuditGroupSummary {
  std::string group;
  std::size_t records = 0;
  std::size_t both_ok = 0;
  std::size_t hand_fail = 0;
  std::size_t keypoint_fail = 0;
  std::optional<double> handedness_accuracy;
};

// Groups in order of first appearance.
std::vector<AuditGroupSummary> audit_summary(std::span<const AuditRecord> records);

// CSV with header group,hand_detect_ok,keypoints_ok,handedness_ok. Booleans
// are true/false or 1/0; handedness_ok may be empty. MalformedRecord on bad
// rows, including keypoints_ok without hand_detect_ok.
std::vector<AuditRecord> parse_audit_csv(std::istream& in);
nlohmann::ordered_json audit_json(std::span<const AuditGroupSummary> groups);

}  // namespace tfs::eval
