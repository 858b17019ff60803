#pragma once

#include <cstddef>

#include "tfs/landmarks.hpp"

namespace tfs {

// Geometric predicates on a single hand, evaluated in the xy-plane of the
// canonical y-up frame. All comparisons are strict; ties fail.

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline Vec2 xy(const Landmark& p) { return {p.x, p.y}; }

// Tip minus MCP, projected to xy.
using FingerVector = Vec2;

enum class Finger { Index, Middle, Ring, Pinky };

struct NearestResult {
  std::size_t landmark_index = 0;
  double distance = 0.0;

  friend bool operator==(const NearestResult&, const NearestResult&) = default;
};

FingerVector finger_vector(const HandLandmarks& hand, Finger finger);

// Upright open palm: the four fingertips lie above their MCPs and the thumb
// MCP lies between the thumb tip and the wrist along x.
bool is_open_palm(const HandLandmarks& hand);

// Index finger opposes each of the other three finger vectors.
bool is_pointing(const HandLandmarks& hand);

// Closest of the 21 landmarks to p by 2D Euclidean distance; lowest index
// wins ties.
NearestResult nearest_landmark(Vec2 p, const HandLandmarks& hand);

// Acceptance radius for a point-on-hand tip: one third of the mean
// straight-line MCP-to-tip length of the four non-thumb fingers.
double relative_threshold(const HandLandmarks& hand);

}  // namespace tfs
