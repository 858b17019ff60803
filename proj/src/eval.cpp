#include "tfs/eval.hpp"

#include <algorithm>
#include <future>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "tfs/errors.hpp"

namespace tfs::eval {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (const auto& row : counts) {
    for (auto c : row) n += c;
  }
  return n;
}

std::uint64_t ConfusionMatrix::row_total(std::size_t truth) const {
  std::uint64_t n = 0;
  for (auto c : counts.at(truth)) n += c;
  return n;
}

std::size_t ConfusionMatrix::index_of(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw UnknownLabel(label);
  return static_cast<std::size_t>(it - labels.begin());
}

ConfusionMatrix confusion(std::span<const PredictionPair> pairs, std::vector<std::string> labels) {
  ConfusionMatrix cm;
  cm.labels = std::move(labels);
  cm.counts.assign(cm.labels.size(), std::vector<std::uint64_t>(cm.labels.size() + 1, 0));
  for (const auto& [truth, predicted] : pairs) {
    const std::size_t t = cm.index_of(truth);
    const std::size_t p = predicted ? cm.index_of(*predicted) : cm.rejected_column();
    ++cm.counts[t][p];
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw EmptyMatrix();
  std::uint64_t diag = 0;
  for (std::size_t i = 0; i < cm.labels.size(); ++i) diag += cm.counts[i][i];
  return static_cast<double>(diag) / static_cast<double>(total);
}

std::vector<std::optional<double>> tp_rate_per_class(const ConfusionMatrix& cm) {
  std::vector<std::optional<double>> rates;
  for (std::size_t i = 0; i < cm.labels.size(); ++i) {
    const auto n = cm.row_total(i);
    if (n == 0) {
      rates.emplace_back();
    } else {
      rates.emplace_back(static_cast<double>(cm.counts[i][i]) / static_cast<double>(n));
    }
  }
  return rates;
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm) {
  out << "truth";
  for (const auto& l : cm.labels) out << ',' << l;
  out << ",rejected\n";
  for (std::size_t i = 0; i < cm.labels.size(); ++i) {
    out << cm.labels[i];
    for (auto c : cm.counts[i]) out << ',' << c;
    out << '\n';
  }
}

void write_per_class_csv(std::ostream& out, const ConfusionMatrix& cm) {
  const auto rates = tp_rate_per_class(cm);
  out << "label,support,true_positives,tp_rate\n";
  for (std::size_t i = 0; i < cm.labels.size(); ++i) {
    out << cm.labels[i] << ',' << cm.row_total(i) << ',' << cm.counts[i][i] << ',';
    if (rates[i]) {
      std::ostringstream v;
      v.precision(17);
      v << *rates[i];
      out << v.str();
    }
    out << '\n';
  }
}

nlohmann::ordered_json summary_json(const ConfusionMatrix& cm) {
  nlohmann::ordered_json j;
  j["samples"] = cm.total();
  j["accuracy"] = cm.total() > 0 ? nlohmann::ordered_json(accuracy(cm)) : nlohmann::ordered_json();
  std::uint64_t rejected = 0;
  for (const auto& row : cm.counts) rejected += row[cm.rejected_column()];
  j["rejected"] = rejected;
  nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
  const auto rates = tp_rate_per_class(cm);
  for (std::size_t i = 0; i < cm.labels.size(); ++i) {
    per_class[cm.labels[i]] = rates[i] ? nlohmann::ordered_json(*rates[i]) : nlohmann::ordered_json();
  }
  j["tp_rate"] = std::move(per_class);
  return j;
}

std::vector<double> bootstrap_eval(std::span<const LabeledHand> train_set,
                                   std::span<const LabeledHand> test_set, const TrainConfig& cfg,
                                   Encoding enc, int repeats) {
  if (repeats < 1) throw InvalidParams("repeats must be at least 1");
  if (train_set.empty()) throw InvalidParams("bootstrap needs a nonempty training set");
  if (test_set.empty()) throw InvalidParams("bootstrap needs a nonempty test set");
  cfg.validate();

  auto run_repeat = [&](int r) {
    TrainConfig local = cfg;
    local.seed = cfg.seed + static_cast<std::uint64_t>(r);
    std::mt19937_64 rng(local.seed);
    std::uniform_int_distribution<std::size_t> pick(0, train_set.size() - 1);
    std::vector<LabeledHand> sample;
    sample.reserve(train_set.size());
    for (std::size_t i = 0; i < train_set.size(); ++i) sample.push_back(train_set[pick(rng)]);
    try {
      const auto trained = train(sample, local, enc);
      return evaluate_accuracy(trained.model, test_set);
    } catch (const Error& e) {
      throw BootstrapFailure(r, e.what());
    }
  };

  std::vector<std::future<double>> jobs;
  jobs.reserve(static_cast<std::size_t>(repeats));
  for (int r = 0; r < repeats; ++r) jobs.push_back(std::async(std::launch::async, run_repeat, r));
  std::vector<double> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

std::vector<AuditGroupSummary> audit_summary(std::span<const AuditRecord> records) {
  std::vector<AuditGroupSummary> groups;
  std::vector<std::size_t> handedness_seen;
  std::vector<std::size_t> handedness_right;
  for (const auto& r : records) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const AuditGroupSummary& g) { return g.group == r.group; });
    if (it == groups.end()) {
      groups.push_back({r.group, 0, 0, 0, 0, std::nullopt});
      handedness_seen.push_back(0);
      handedness_right.push_back(0);
      it = groups.end() - 1;
    }
    const auto k = static_cast<std::size_t>(it - groups.begin());
    ++it->records;
    if (!r.hand_detect_ok) {
      ++it->hand_fail;
    } else if (r.keypoints_ok) {
      ++it->both_ok;
    } else {
      ++it->keypoint_fail;
    }
    if (r.handedness_ok) {
      ++handedness_seen[k];
      if (*r.handedness_ok) ++handedness_right[k];
    }
  }
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (handedness_seen[k] > 0) {
      groups[k].handedness_accuracy =
          static_cast<double>(handedness_right[k]) / static_cast<double>(handedness_seen[k]);
    }
  }
  return groups;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<bool> parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "0" || s == "False" || s == "FALSE") return false;
  return std::nullopt;
}

}  // namespace

std::vector<AuditRecord> parse_audit_csv(std::istream& in) {
  std::vector<AuditRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (n == 1 && line.rfind("group,", 0) == 0) continue;
    auto cells = split_csv(line);
    if (cells.size() == 3) cells.emplace_back();
    if (cells.size() != 4) throw MalformedRecord(n, "expected 4 columns");
    AuditRecord r;
    r.group = cells[0];
    if (r.group.empty()) throw MalformedRecord(n, "empty group");
    const auto hand = parse_bool(cells[1]);
    const auto keys = parse_bool(cells[2]);
    if (!hand || !keys) throw MalformedRecord(n, "hand_detect_ok/keypoints_ok must be booleans");
    r.hand_detect_ok = *hand;
    r.keypoints_ok = *keys;
    if (r.keypoints_ok && !r.hand_detect_ok) {
      throw MalformedRecord(n, "keypoints_ok requires hand_detect_ok");
    }
    if (!cells[3].empty()) {
      r.handedness_ok = parse_bool(cells[3]);
      if (!r.handedness_ok) throw MalformedRecord(n, "handedness_ok must be a boolean or empty");
    }
    out.push_back(std::move(r));
  }
  return out;
}

nlohmann::ordered_json audit_json(std::span<const AuditGroupSummary> groups) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& g : groups) {
    nlohmann::ordered_json o;
    o["group"] = g.group;
    o["records"] = g.records;
    o["both_ok"] = g.both_ok;
    o["hand_fail"] = g.hand_fail;
    o["keypoint_fail"] = g.keypoint_fail;
    o["handedness_accuracy"] =
        g.handedness_accuracy ? nlohmann::ordered_json(*g.handedness_accuracy) : nlohmann::ordered_json();
    j.push_back(std::move(o));
  }
  return j;
}

}  // namespace tfs::eval
