#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tfs {

inline constexpr std::size_t kLandmarkCount = 21;

// Standard 21-point hand topology.
namespace lm {
inline constexpr std::size_t kWrist = 0;
inline constexpr std::size_t kThumbCmc = 1;
inline constexpr std::size_t kThumbMcp = 2;
inline constexpr std::size_t kThumbIp = 3;
inline constexpr std::size_t kThumbTip = 4;
inline constexpr std::size_t kIndexMcp = 5;
inline constexpr std::size_t kIndexTip = 8;
inline constexpr std::size_t kMiddleMcp = 9;
inline constexpr std::size_t kMiddleTip = 12;
inline constexpr std::size_t kRingMcp = 13;
inline constexpr std::size_t kRingTip = 16;
inline constexpr std::size_t kPinkyMcp = 17;
inline constexpr std::size_t kPinkyTip = 20;
}  // namespace lm

struct Landmark {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Landmark&, const Landmark&) = default;
};

enum class Handedness { Left, Right };

std::string_view to_string(Handedness h);

struct HandLandmarks {
  std::array<Landmark, kLandmarkCount> landmarks{};
  Handedness handedness = Handedness::Right;
  double score = 1.0;

  const Landmark& operator[](std::size_t i) const { return landmarks[i]; }
  Landmark& operator[](std::size_t i) { return landmarks[i]; }

  friend bool operator==(const HandLandmarks&, const HandLandmarks&) = default;
};

// One detector observation. At most two hands.
struct Frame {
  std::string frame_id;
  std::vector<HandLandmarks> hands;

  friend bool operator==(const Frame&, const Frame&) = default;
};

enum class YDirection { Up, Down };

// Throws InvalidParams if a hand or frame breaks its invariants
// (non-finite coordinate, score outside [0,1], more than two hands).
void validate(const HandLandmarks& hand);
void validate(const Frame& frame);

// Maps a frame into the canonical y-up convention. Down negates every y.
Frame canonicalize(const Frame& frame, YDirection source);

inline std::size_t hand_count(const Frame& frame) { return frame.hands.size(); }

// JSONL landmark stream, one frame per nonempty line:
//   {"frame_id": "...", "hands": [{"handedness": "Left"|"Right",
//     "score": s, "landmarks": [[x,y,z] x 21]}]}
// Throws MalformedRecord with the 1-based line number.
std::vector<Frame> parse_frames(std::istream& in);
std::vector<Frame> parse_frames(std::string_view text);
Frame parse_frame_line(std::string_view line, std::size_t line_number);

std::string serialize_frame(const Frame& frame);
void write_frames(std::ostream& out, const std::vector<Frame>& frames);

// Label CSV: "frame_id,label" rows with an optional header row.
using LabelRow = std::pair<std::string, std::string>;
std::vector<LabelRow> parse_labels(std::istream& in);
void write_labels(std::ostream& out, const std::vector<LabelRow>& rows);

}  // namespace tfs
