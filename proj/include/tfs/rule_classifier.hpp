#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "tfs/geometry.hpp"
#include "tfs/landmarks.hpp"

namespace tfs {

// Which landmark of the open-palm hand spells which sign.
class KeypointMap {
 public:
  KeypointMap() = default;

  // Throws InvalidKeypointMap on an index outside 0..20 or an empty label.
  explicit KeypointMap(std::map<std::size_t, std::string> entries);

  // Eleven signs A..K on distinct open-palm landmarks. This is a stand-in
  // layout; real deployments should supply their own map file.
  static KeypointMap default_map();

  // {"<landmark_index>": "<label>", ...}
  static KeypointMap from_json(std::string_view text);
  std::string to_json() const;

  std::optional<std::string> lookup(std::size_t landmark_index) const;
  const std::map<std::size_t, std::string>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::size_t, std::string> entries_;
};

enum class RbKind { Sign, NotTwoHands, NotPointOnHand, OutOfThreshold, UnmappedLandmark };
enum class HandSlot { First, Second };

std::string_view to_string(RbKind kind);

struct RbOutcome {
  RbKind kind = RbKind::NotTwoHands;
  std::optional<std::string> sign;
  std::optional<NearestResult> nearest;
  std::optional<double> threshold;
  std::optional<HandSlot> pointing_hand;

  friend bool operator==(const RbOutcome&, const RbOutcome&) = default;
};

struct PointOnHandRoles {
  HandSlot pointing_slot = HandSlot::First;
  HandLandmarks pointing;
  HandLandmarks open_palm;
};

// Requires exactly two hands, one pointing and the other an open palm. If
// both assignments are valid, the first hand in frame order points.
std::optional<PointOnHandRoles> assign_roles(const Frame& frame);

// Point-on-hand recognition: two-hand check, role assignment, nearest
// open-palm landmark to the pointing index tip, relative threshold, lookup.
RbOutcome classify_point_on_hand(const Frame& frame, const KeypointMap& map);

}  // namespace tfs
