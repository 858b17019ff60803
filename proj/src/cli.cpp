#include "tfs/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "tfs/dispatcher.hpp"
#include "tfs/errors.hpp"
#include "tfs/eval.hpp"
#include "tfs/landmarks.hpp"
#include "tfs/mlp.hpp"
#include "tfs/rule_classifier.hpp"
#include "tfs/synth.hpp"

namespace tfs::cli {

namespace fs = std::filesystem;

namespace {

// Path problems found before any work starts; reported as usage errors.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  return out;
}

void require_file(const std::string& path, const char* flag) {
  if (!fs::is_regular_file(path)) {
    throw UsageError(std::string(flag) + ": '" + path + "' is not a readable file");
  }
}

void require_output_file(const std::string& path, const char* flag) {
  const fs::path p(path);
  const fs::path parent = p.has_parent_path() ? p.parent_path() : fs::path(".");
  if (!fs::is_directory(parent)) {
    throw UsageError(std::string(flag) + ": directory '" + parent.string() + "' does not exist");
  }
  if (fs::is_directory(p)) throw UsageError(std::string(flag) + ": '" + path + "' is a directory");
}

void require_output_dir(const std::string& path, const char* flag) {
  if (fs::exists(path) && !fs::is_directory(path)) {
    throw UsageError(std::string(flag) + ": '" + path + "' exists and is not a directory");
  }
  fs::create_directories(path);
}

// Wraps errors from a particular file so messages name it.
template <typename Fn>
auto with_file(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const MalformedRecord& e) {
    throw MalformedRecord(e.line(), path + ": " + e.cause());
  }
}

std::vector<Frame> load_frames(const std::string& path, YDirection y) {
  auto in = open_in(path);
  auto frames = with_file(path, [&] { return parse_frames(in); });
  for (auto& f : frames) f = canonicalize(f, y);
  return frames;
}

std::vector<LabelRow> load_labels(const std::string& path) {
  auto in = open_in(path);
  return with_file(path, [&] { return parse_labels(in); });
}

// Joins single-hand frames to their labels. Frames without a label row or
// with a hand count other than one are skipped.
std::vector<LabeledHand> labeled_hands(const std::vector<Frame>& frames,
                                       const std::vector<LabelRow>& labels, std::size_t& skipped) {
  std::map<std::string, std::string> by_id;
  for (const auto& [id, label] : labels) {
    if (!by_id.emplace(id, label).second) throw DataError("duplicate label row for frame '" + id + "'");
  }
  std::vector<LabeledHand> out;
  skipped = 0;
  for (const auto& f : frames) {
    auto it = by_id.find(f.frame_id);
    if (it == by_id.end() || f.hands.size() != 1) {
      ++skipped;
      continue;
    }
    out.push_back({f.hands.front(), it->second});
  }
  return out;
}

YDirection y_direction(const std::string& name) {
  return name == "down" ? YDirection::Down : YDirection::Up;
}

struct GenOptions {
  std::size_t classes = 30;
  std::size_t per_class = 50;
  std::uint64_t seed = 0;
  double noise = 0.01;
  std::string kind = "single";
  std::string out;
  std::string map;
  std::string y = "up";
};

int cmd_gen(const GenOptions& o, std::ostream& out) {
  require_output_dir(o.out, "--out");
  if (!o.map.empty()) require_file(o.map, "--map");
  const KeypointMap map = o.map.empty() ? KeypointMap::default_map() : KeypointMap::from_json(read_file(o.map));

  std::vector<Frame> frames;
  std::vector<LabelRow> labels;
  synth::PoseParams pose;
  pose.noise_sigma = o.noise;
  pose.seed = o.seed;

  if (o.kind == "single" || o.kind == "mixed") {
    auto data = synth::generate_class_dataset(o.classes, o.per_class, pose);
    auto [f, l] = synth::export_dataset(data, "s");
    frames = std::move(f);
    labels = std::move(l);
  }
  if (o.kind == "point-on-hand" || o.kind == "mixed") {
    std::uint64_t frame_seed = o.seed;
    std::size_t n = 0;
    for (const auto& [index, label] : map.entries()) {
      for (std::size_t i = 0; i < o.per_class; ++i) {
        pose.seed = ++frame_seed;
        std::ostringstream id;
        id << 'p' << std::setw(6) << std::setfill('0') << n++;
        frames.push_back(synth::generate_pointing_frame(index, pose, id.str()));
        labels.emplace_back(id.str(), label);
      }
    }
  }
  if (o.kind == "mixed") {
    // Empty detections carry no label row.
    for (std::size_t i = 0; i < o.per_class; ++i) {
      std::ostringstream id;
      id << 'n' << std::setw(6) << std::setfill('0') << i;
      frames.push_back(Frame{id.str(), {}});
    }
  }
  // Canonical frames are y-up; negating again converts to y-down.
  for (auto& f : frames) f = canonicalize(f, y_direction(o.y));

  const fs::path dir(o.out);
  auto fo = open_out(dir / "frames.jsonl");
  write_frames(fo, frames);
  auto lo = open_out(dir / "labels.csv");
  write_labels(lo, labels);
  out << "wrote " << frames.size() << " frames and " << labels.size() << " labels to " << o.out
      << '\n';
  return kExitOk;
}

struct TrainOptions {
  std::string in;
  std::string labels;
  std::string out;
  std::string encoding = "relative";
  TrainConfig cfg;
  std::string y = "up";
  int repeats = 0;
  std::string test_in;
  std::string test_labels;
};

int cmd_train(const TrainOptions& o, std::ostream& out) {
  require_file(o.in, "--in");
  require_file(o.labels, "--labels");
  require_output_file(o.out, "--out");
  if (o.repeats > 0) {
    if (o.test_in.empty() || o.test_labels.empty()) {
      throw UsageError("--repeats needs --test-in and --test-labels");
    }
    require_file(o.test_in, "--test-in");
    require_file(o.test_labels, "--test-labels");
  }
  o.cfg.validate();

  std::size_t skipped = 0;
  const auto data = labeled_hands(load_frames(o.in, y_direction(o.y)), load_labels(o.labels), skipped);
  if (data.empty()) throw InsufficientData("no labelled single-hand frames in " + o.in);

  const Encoding encoding = parse_encoding(o.encoding);
  const auto result = train(data, o.cfg, encoding);
  const auto& last = result.history.back();
  auto mo = open_out(o.out);
  mo << save_model(result.model);
  out << std::setprecision(6) << "trained " << o.encoding << " model on " << data.size()
      << " hands (" << skipped << " frames skipped), " << result.model.n_classes() << " classes\n"
      << "epoch " << result.history.size() << " loss " << last.loss << '\n'
      << "final train accuracy " << evaluate_accuracy(result.model, data) << '\n';

  if (o.repeats > 0) {
    std::size_t test_skipped = 0;
    const auto test = labeled_hands(load_frames(o.test_in, y_direction(o.y)), load_labels(o.test_labels),
                                    test_skipped);
    if (test.empty()) throw InsufficientData("no labelled single-hand frames in " + o.test_in);
    const auto accs = eval::bootstrap_eval(data, test, o.cfg, encoding, o.repeats);
    nlohmann::ordered_json j;
    j["encoding"] = std::string(o.encoding);
    j["seed"] = o.cfg.seed;
    j["accuracies"] = accs;
    out << "bootstrap " << j.dump() << '\n';
  }
  return kExitOk;
}

struct ClassifyOptions {
  std::string model;
  std::string map;
  std::string in;
  std::string out;
  std::string y = "up";
};

int cmd_classify(const ClassifyOptions& o, std::ostream& out) {
  require_file(o.model, "--model");
  require_file(o.map, "--map");
  require_file(o.in, "--in");
  if (!o.out.empty()) require_output_file(o.out, "--out");

  const MlpModel model = load_model(read_file(o.model));
  const KeypointMap map = KeypointMap::from_json(read_file(o.map));
  const auto frames = load_frames(o.in, y_direction(o.y));

  std::ofstream file;
  if (!o.out.empty()) file = open_out(o.out);
  std::ostream& sink = o.out.empty() ? out : file;
  for (const auto& f : frames) {
    sink << serialize_prediction(f.frame_id, recognize(f, model, map), model) << '\n';
  }
  return kExitOk;
}

struct EvalOptions {
  std::string in;
  std::string labels;
  std::string out;
};

int cmd_eval(const EvalOptions& o, std::ostream& out) {
  require_file(o.in, "--in");
  require_file(o.labels, "--labels");
  if (!o.out.empty()) require_output_dir(o.out, "--out");

  auto pin = open_in(o.in);
  const auto predictions = with_file(o.in, [&] { return parse_predictions(pin); });
  const auto labels = load_labels(o.labels);

  std::map<std::string, std::optional<std::string>> predicted;
  for (const auto& p : predictions) predicted[p.frame_id] = p.label;

  std::set<std::string> label_set;
  std::vector<eval::PredictionPair> pairs;
  for (const auto& [id, truth] : labels) {
    auto it = predicted.find(id);
    if (it == predicted.end()) throw DataError(o.in + ": no prediction for frame '" + id + "'");
    label_set.insert(truth);
    if (it->second) label_set.insert(*it->second);
    pairs.emplace_back(truth, it->second);
  }
  const auto cm = eval::confusion(pairs, {label_set.begin(), label_set.end()});
  const auto summary = eval::summary_json(cm);
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    auto c = open_out(dir / "confusion.csv");
    eval::write_confusion_csv(c, cm);
    auto r = open_out(dir / "per_class.csv");
    eval::write_per_class_csv(r, cm);
    auto s = open_out(dir / "summary.json");
    s << summary.dump(2) << '\n';
  }
  out << summary.dump() << '\n';
  return kExitOk;
}

struct AuditOptions {
  std::string in;
  std::string out;
};

int cmd_audit(const AuditOptions& o, std::ostream& out) {
  require_file(o.in, "--in");
  if (!o.out.empty()) require_output_file(o.out, "--out");
  auto in = open_in(o.in);
  const auto records = with_file(o.in, [&] { return eval::parse_audit_csv(in); });
  const auto j = eval::audit_json(eval::audit_summary(records));
  if (!o.out.empty()) {
    auto f = open_out(o.out);
    f << j.dump(2) << '\n';
  }
  out << j.dump() << '\n';
  return kExitOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Thai finger spelling recognition from hand landmarks"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "write a synthetic dataset (frames.jsonl + labels.csv)");
  g->add_option("--classes", gen.classes, "single-hand classes (2..30)")->check(CLI::Range(2, 30));
  g->add_option("--per-class", gen.per_class, "samples per class")->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed, "generator seed");
  g->add_option("--noise", gen.noise, "landmark noise sigma")->check(CLI::NonNegativeNumber);
  g->add_option("--kind", gen.kind, "single | point-on-hand | mixed")
      ->check(CLI::IsMember({"single", "point-on-hand", "mixed"}));
  g->add_option("--map", gen.map, "keypoint map for point-on-hand labels");
  g->add_option("--y-axis", gen.y, "axis convention of the written frames")
      ->check(CLI::IsMember({"up", "down"}));
  g->add_option("--out", gen.out, "output directory")->required();

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "train the single-hand classifier");
  t->add_option("--in", tr.in, "landmark JSONL")->required();
  t->add_option("--labels", tr.labels, "label CSV")->required();
  t->add_option("--out", tr.out, "model file to write")->required();
  t->add_option("--encoding", tr.encoding, "absolute | relative")
      ->check(CLI::IsMember({"absolute", "relative"}));
  t->add_option("--epochs", tr.cfg.epochs)->check(CLI::PositiveNumber);
  t->add_option("--batch", tr.cfg.batch_size)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
  t->add_option("--lr", tr.cfg.learning_rate)->check(CLI::PositiveNumber);
  t->add_option("--seed", tr.cfg.seed);
  t->add_option("--repeats", tr.repeats, "bootstrap repeats evaluated on --test-in")
      ->check(CLI::PositiveNumber);
  t->add_option("--test-in", tr.test_in, "held-out landmark JSONL for --repeats");
  t->add_option("--test-labels", tr.test_labels, "held-out label CSV for --repeats");
  t->add_option("--y-axis", tr.y)->check(CLI::IsMember({"up", "down"}));

  ClassifyOptions cl;
  auto* c = app.add_subcommand("classify", "predict a sign for every frame");
  c->add_option("--model", cl.model, "model file")->required();
  c->add_option("--map", cl.map, "keypoint map JSON")->required();
  c->add_option("--in", cl.in, "landmark JSONL")->required();
  c->add_option("--out", cl.out, "prediction JSONL (default stdout)");
  c->add_option("--y-axis", cl.y)->check(CLI::IsMember({"up", "down"}));

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "score predictions against labels");
  e->add_option("--in", ev.in, "prediction JSONL")->required();
  e->add_option("--labels", ev.labels, "label CSV")->required();
  e->add_option("--out", ev.out, "report directory");

  AuditOptions au;
  auto* a = app.add_subcommand("audit", "summarize detection audit records");
  a->add_option("--in", au.in, "audit CSV")->required();
  a->add_option("--out", au.out, "summary JSON");

  std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rest.begin(), rest.end());  // CLI11 consumes vectors from the back
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& pe) {
    err << "usage error: " << pe.what() << '\n';
    return kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out);
    if (t->parsed()) return cmd_train(tr, out);
    if (c->parsed()) return cmd_classify(cl, out);
    if (e->parsed()) return cmd_eval(ev, out);
    return cmd_audit(au, out);
  } catch (const UsageError& ue) {
    err << "usage error: " << ue.what() << '\n';
    return kExitUsage;
  } catch (const InvalidParams& ip) {
    err << "usage error: " << ip.what() << '\n';
    return kExitUsage;
  } catch (const DataError& de) {
    err << "data error: " << de.what() << '\n';
    return kExitData;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace tfs::cli
