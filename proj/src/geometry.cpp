#include "tfs/geometry.hpp"

#include <cmath>
#include <utility>

namespace tfs {

namespace {

std::pair<std::size_t, std::size_t> finger_joints(Finger finger) {
  switch (finger) {
    case Finger::Index:
      return {lm::kIndexMcp, lm::kIndexTip};
    case Finger::Middle:
      return {lm::kMiddleMcp, lm::kMiddleTip};
    case Finger::Ring:
      return {lm::kRingMcp, lm::kRingTip};
    case Finger::Pinky:
      break;
  }
  return {lm::kPinkyMcp, lm::kPinkyTip};
}

double length(Vec2 v) { return std::hypot(v.x, v.y); }

}  // namespace

FingerVector finger_vector(const HandLandmarks& hand, Finger finger) {
  const auto [mcp, tip] = finger_joints(finger);
  return xy(hand[tip]) - xy(hand[mcp]);
}

bool is_open_palm(const HandLandmarks& hand) {
  const bool fingers_up = hand[8].y > hand[5].y && hand[12].y > hand[9].y &&
                          hand[16].y > hand[13].y && hand[20].y > hand[17].y;
  if (!fingers_up) return false;
  const double thumb_side = hand[lm::kThumbTip].x - hand[lm::kThumbMcp].x;
  const double wrist_side = hand[lm::kWrist].x - hand[lm::kThumbMcp].x;
  return thumb_side * wrist_side < 0.0;
}

bool is_pointing(const HandLandmarks& hand) {
  const auto index = finger_vector(hand, Finger::Index);
  return dot(index, finger_vector(hand, Finger::Middle)) < 0.0 &&
         dot(index, finger_vector(hand, Finger::Ring)) < 0.0 &&
         dot(index, finger_vector(hand, Finger::Pinky)) < 0.0;
}

NearestResult nearest_landmark(Vec2 p, const HandLandmarks& hand) {
  std::size_t best = 0;
  double best_sq = 0.0;
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    const Vec2 d = xy(hand[i]) - p;
    const double sq = d.x * d.x + d.y * d.y;
    if (i == 0 || sq < best_sq) {
      best = i;
      best_sq = sq;
    }
  }
  return {best, std::sqrt(best_sq)};
}

double relative_threshold(const HandLandmarks& hand) {
  const double sum = length(finger_vector(hand, Finger::Index)) +
                     length(finger_vector(hand, Finger::Middle)) +
                     length(finger_vector(hand, Finger::Ring)) +
                     length(finger_vector(hand, Finger::Pinky));
  return sum / 4.0 / 3.0;
}

}  // namespace tfs
