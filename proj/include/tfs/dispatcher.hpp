#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tfs/landmarks.hpp"
#include "tfs/mlp.hpp"
#include "tfs/rule_classifier.hpp"

namespace tfs {

enum class Route { SingleHand, PointOnHand, NoHands };

std::string_view to_string(Route route);

struct SignPrediction {
  Route route = Route::NoHands;
  std::optional<std::string> label;
  std::optional<std::vector<double>> scores;  // SingleHand only, model class order
  std::optional<RbOutcome> rb;                // PointOnHand only
};

// One hand goes to the MLP, two hands to the rule-based classifier, none
// yields NoHands. Only DimensionMismatch from the model can escape.
SignPrediction recognize(const Frame& frame, const MlpModel& model, const KeypointMap& map);

// Prediction JSONL, one object per frame:
//   {"frame_id", "route", "label" (string|null), "scores"?, "rb"?}
std::string serialize_prediction(const std::string& frame_id, const SignPrediction& p,
                                 const MlpModel& model);

struct PredictionRecord {
  std::string frame_id;
  Route route = Route::NoHands;
  std::optional<std::string> label;
};

// Reads the fields eval needs from a prediction stream; MalformedRecord on error.
std::vector<PredictionRecord> parse_predictions(std::istream& in);

}  // namespace tfs
