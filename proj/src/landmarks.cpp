#include "tfs/landmarks.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "tfs/errors.hpp"

namespace tfs {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

bool finite(const Landmark& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t\r") == std::string_view::npos;
}

double read_number(const json& v, std::size_t line, const char* what) {
  if (!v.is_number()) throw MalformedRecord(line, std::string(what) + " is not a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw MalformedRecord(line, std::string(what) + " is not finite");
  return d;
}

HandLandmarks read_hand(const json& h, std::size_t line) {
  if (!h.is_object()) throw MalformedRecord(line, "hand entry is not an object");
  HandLandmarks hand;

  auto it = h.find("handedness");
  if (it == h.end() || !it->is_string()) throw MalformedRecord(line, "missing handedness");
  const auto label = it->get<std::string>();
  if (label == "Left") {
    hand.handedness = Handedness::Left;
  } else if (label == "Right") {
    hand.handedness = Handedness::Right;
  } else {
    throw MalformedRecord(line, "unknown handedness label '" + label + "'");
  }

  it = h.find("score");
  if (it == h.end()) throw MalformedRecord(line, "missing score");
  hand.score = read_number(*it, line, "score");
  if (hand.score < 0.0 || hand.score > 1.0) throw MalformedRecord(line, "score outside [0,1]");

  it = h.find("landmarks");
  if (it == h.end() || !it->is_array()) throw MalformedRecord(line, "missing landmarks array");
  if (it->size() != kLandmarkCount) {
    throw MalformedRecord(line, "expected 21 landmarks, got " + std::to_string(it->size()));
  }
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    const json& p = (*it)[i];
    if (!p.is_array() || p.size() != 3) {
      throw MalformedRecord(line, "landmark " + std::to_string(i) + " is not an [x,y,z] triple");
    }
    hand[i] = {read_number(p[0], line, "x"), read_number(p[1], line, "y"),
               read_number(p[2], line, "z")};
  }
  return hand;
}

}  // namespace

std::string_view to_string(Handedness h) { return h == Handedness::Left ? "Left" : "Right"; }

void validate(const HandLandmarks& hand) {
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    if (!finite(hand[i])) {
      throw InvalidParams("landmark " + std::to_string(i) + " has a non-finite component");
    }
  }
  if (!(hand.score >= 0.0 && hand.score <= 1.0)) throw InvalidParams("hand score outside [0,1]");
}

void validate(const Frame& frame) {
  if (frame.hands.size() > 2) throw InvalidParams("frame has more than two hands");
  for (const auto& h : frame.hands) validate(h);
}

Frame canonicalize(const Frame& frame, YDirection source) {
  Frame out = frame;
  if (source == YDirection::Down) {
    for (auto& hand : out.hands) {
      for (auto& p : hand.landmarks) p.y = -p.y;
    }
  }
  return out;
}

Frame parse_frame_line(std::string_view line, std::size_t line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw MalformedRecord(line_number, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw MalformedRecord(line_number, "record is not a JSON object");

  Frame frame;
  auto id = j.find("frame_id");
  if (id == j.end() || !id->is_string()) throw MalformedRecord(line_number, "missing frame_id");
  frame.frame_id = id->get<std::string>();

  auto hands = j.find("hands");
  if (hands == j.end() || !hands->is_array()) {
    throw MalformedRecord(line_number, "missing hands array");
  }
  if (hands->size() > 2) {
    throw MalformedRecord(line_number, "more than two hands (" + std::to_string(hands->size()) + ")");
  }
  for (const auto& h : *hands) frame.hands.push_back(read_hand(h, line_number));
  return frame;
}

std::vector<Frame> parse_frames(std::istream& in) {
  std::vector<Frame> frames;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (blank(line)) continue;
    frames.push_back(parse_frame_line(strip_cr(line), n));
  }
  return frames;
}

std::vector<Frame> parse_frames(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_frames(in);
}

std::string serialize_frame(const Frame& frame) {
  ordered_json j;
  j["frame_id"] = frame.frame_id;
  j["hands"] = ordered_json::array();
  for (const auto& hand : frame.hands) {
    ordered_json h;
    h["handedness"] = std::string(to_string(hand.handedness));
    h["score"] = hand.score;
    ordered_json pts = ordered_json::array();
    for (const auto& p : hand.landmarks) pts.push_back({p.x, p.y, p.z});
    h["landmarks"] = std::move(pts);
    j["hands"].push_back(std::move(h));
  }
  return j.dump();
}

void write_frames(std::ostream& out, const std::vector<Frame>& frames) {
  for (const auto& f : frames) out << serialize_frame(f) << '\n';
}

std::vector<LabelRow> parse_labels(std::istream& in) {
  std::vector<LabelRow> rows;
  std::string raw;
  std::size_t n = 0;
  while (std::getline(in, raw)) {
    ++n;
    const auto line = strip_cr(raw);
    if (blank(line)) continue;
    if (n == 1 && line == "frame_id,label") continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) throw MalformedRecord(n, "expected 'frame_id,label'");
    auto id = line.substr(0, comma);
    auto label = line.substr(comma + 1);
    if (id.empty()) throw MalformedRecord(n, "empty frame_id");
    if (label.empty()) throw MalformedRecord(n, "empty label");
    if (label.find(',') != std::string_view::npos) throw MalformedRecord(n, "too many columns");
    rows.emplace_back(std::string(id), std::string(label));
  }
  return rows;
}

void write_labels(std::ostream& out, const std::vector<LabelRow>& rows) {
  out << "frame_id,label\n";
  for (const auto& [id, label] : rows) {
    if (id.find(',') != std::string::npos || label.find(',') != std::string::npos) {
      throw InvalidParams("label CSV fields may not contain commas");
    }
    out << id << ',' << label << '\n';
  }
}

}  // namespace tfs
