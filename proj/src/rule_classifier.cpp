#include "tfs/rule_classifier.hpp"

#include <charconv>

#include "json.hpp"
#include "tfs/errors.hpp"

namespace tfs {

KeypointMap::KeypointMap(std::map<std::size_t, std::string> entries) : entries_(std::move(entries)) {
  for (const auto& [index, label] : entries_) {
    if (index >= kLandmarkCount) {
      throw InvalidKeypointMap("landmark index " + std::to_string(index) + " outside 0..20");
    }
    if (label.empty()) {
      throw InvalidKeypointMap("empty label for landmark " + std::to_string(index));
    }
  }
}

KeypointMap KeypointMap::default_map() {
  // Fingertips, then the joint below each tip, walking index to pinky.
  return KeypointMap({{8, "A"},
                      {12, "B"},
                      {16, "C"},
                      {20, "D"},
                      {7, "E"},
                      {11, "F"},
                      {15, "G"},
                      {19, "H"},
                      {6, "I"},
                      {10, "J"},
                      {14, "K"}});
}

KeypointMap KeypointMap::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidKeypointMap(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidKeypointMap("keypoint map must be a JSON object");

  std::map<std::size_t, std::string> entries;
  for (const auto& [key, value] : j.items()) {
    std::size_t index = 0;
    const auto* end = key.data() + key.size();
    const auto [ptr, ec] = std::from_chars(key.data(), end, index);
    if (key.empty() || ec != std::errc{} || ptr != end) {
      throw InvalidKeypointMap("key '" + key + "' is not a landmark index");
    }
    if (!value.is_string()) throw InvalidKeypointMap("label for '" + key + "' is not a string");
    // Keys like "8" and "08" would otherwise collide silently.
    if (!entries.emplace(index, value.get<std::string>()).second) {
      throw InvalidKeypointMap("landmark " + key + " mapped twice");
    }
  }
  return KeypointMap(std::move(entries));
}

std::string KeypointMap::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [index, label] : entries_) j[std::to_string(index)] = label;
  return j.dump(2);
}

std::optional<std::string> KeypointMap::lookup(std::size_t landmark_index) const {
  auto it = entries_.find(landmark_index);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string_view to_string(RbKind kind) {
  switch (kind) {
    case RbKind::Sign:
      return "sign";
    case RbKind::NotTwoHands:
      return "not_two_hands";
    case RbKind::NotPointOnHand:
      return "not_point_on_hand";
    case RbKind::OutOfThreshold:
      return "out_of_threshold";
    case RbKind::UnmappedLandmark:
      break;
  }
  return "unmapped_landmark";
}

std::optional<PointOnHandRoles> assign_roles(const Frame& frame) {
  if (frame.hands.size() != 2) return std::nullopt;
  const auto& first = frame.hands[0];
  const auto& second = frame.hands[1];
  if (is_pointing(first) && is_open_palm(second)) {
    return PointOnHandRoles{HandSlot::First, first, second};
  }
  if (is_pointing(second) && is_open_palm(first)) {
    return PointOnHandRoles{HandSlot::Second, second, first};
  }
  return std::nullopt;
}

RbOutcome classify_point_on_hand(const Frame& frame, const KeypointMap& map) {
  RbOutcome out;
  if (hand_count(frame) != 2) {
    out.kind = RbKind::NotTwoHands;
    return out;
  }
  const auto roles = assign_roles(frame);
  if (!roles) {
    out.kind = RbKind::NotPointOnHand;
    return out;
  }
  out.pointing_hand = roles->pointing_slot;

  const Vec2 tip = xy(roles->pointing[lm::kIndexTip]);
  const NearestResult nearest = nearest_landmark(tip, roles->open_palm);
  out.nearest = nearest;
  out.threshold = relative_threshold(roles->open_palm);

  if (nearest.distance > *out.threshold) {
    out.kind = RbKind::OutOfThreshold;
    return out;
  }
  out.sign = map.lookup(nearest.landmark_index);
  out.kind = out.sign ? RbKind::Sign : RbKind::UnmappedLandmark;
  return out;
}

}  // namespace tfs
