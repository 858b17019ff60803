#include "tfs/dispatcher.hpp"

#include <istream>

#include "json.hpp"
#include "tfs/errors.hpp"

namespace tfs {

std::string_view to_string(Route route) {
  switch (route) {
    case Route::SingleHand:
      return "single_hand";
    case Route::PointOnHand:
      return "point_on_hand";
    case Route::NoHands:
      break;
  }
  return "no_hands";
}

SignPrediction recognize(const Frame& frame, const MlpModel& model, const KeypointMap& map) {
  SignPrediction p;
  switch (hand_count(frame)) {
    case 0:
      p.route = Route::NoHands;
      break;
    case 1: {
      p.route = Route::SingleHand;
      auto scores = forward(model, encode(frame.hands.front(), model.encoding), Mode::Infer);
      p.label = model.class_labels[argmax(scores)];
      p.scores = std::move(scores);
      break;
    }
    default:
      p.route = Route::PointOnHand;
      p.rb = classify_point_on_hand(frame, map);
      p.label = p.rb->sign;
      break;
  }
  return p;
}

std::string serialize_prediction(const std::string& frame_id, const SignPrediction& p,
                                 const MlpModel& model) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["frame_id"] = frame_id;
  j["route"] = std::string(to_string(p.route));
  j["label"] = p.label ? ordered_json(*p.label) : ordered_json(nullptr);
  if (p.scores) {
    ordered_json scores = ordered_json::object();
    for (std::size_t c = 0; c < p.scores->size(); ++c) scores[model.class_labels[c]] = (*p.scores)[c];
    j["scores"] = std::move(scores);
  }
  if (p.rb) {
    const RbOutcome& rb = *p.rb;
    ordered_json r;
    r["kind"] = std::string(to_string(rb.kind));
    if (rb.pointing_hand) r["pointing_hand"] = *rb.pointing_hand == HandSlot::First ? 0 : 1;
    if (rb.nearest) {
      r["nearest_landmark"] = rb.nearest->landmark_index;
      r["distance"] = rb.nearest->distance;
    }
    if (rb.threshold) r["threshold"] = *rb.threshold;
    j["rb"] = std::move(r);
  }
  return j.dump();
}

std::vector<PredictionRecord> parse_predictions(std::istream& in) {
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw MalformedRecord(n, std::string("invalid JSON: ") + e.what());
    }
    PredictionRecord rec;
    if (!j.is_object() || !j.contains("frame_id") || !j["frame_id"].is_string()) {
      throw MalformedRecord(n, "missing frame_id");
    }
    rec.frame_id = j["frame_id"].get<std::string>();
    const auto route = j.value("route", std::string{});
    if (route == "single_hand") {
      rec.route = Route::SingleHand;
    } else if (route == "point_on_hand") {
      rec.route = Route::PointOnHand;
    } else if (route == "no_hands") {
      rec.route = Route::NoHands;
    } else {
      throw MalformedRecord(n, "unknown route '" + route + "'");
    }
    auto label = j.find("label");
    if (label == j.end()) throw MalformedRecord(n, "missing label");
    if (label->is_string()) {
      rec.label = label->get<std::string>();
    } else if (!label->is_null()) {
      throw MalformedRecord(n, "label must be a string or null");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace tfs
