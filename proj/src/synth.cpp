#include "tfs/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "tfs/errors.hpp"
#include "tfs/rule_classifier.hpp"

namespace tfs::synth {

namespace {

using Table = std::array<std::array<double, 3>, kLandmarkCount>;

HandLandmarks from_table(const Table& t, Handedness h) {
  HandLandmarks hand;
  hand.handedness = h;
  hand.score = 1.0;
  for (std::size_t i = 0; i < kLandmarkCount; ++i) hand[i] = {t[i][0], t[i][1], t[i][2]};
  return hand;
}

// clang-format off
constexpr Table kOpenPalm{{
    { 0.00, 0.00,  0.00},   // wrist
    {-0.07, 0.05, -0.01},   // thumb
    {-0.13, 0.10, -0.02},
    {-0.18, 0.15, -0.03},
    {-0.22, 0.20, -0.04},
    {-0.08, 0.30, -0.01},   // index
    {-0.09, 0.40, -0.02},
    {-0.10, 0.48, -0.03},
    {-0.11, 0.55, -0.04},
    { 0.00, 0.32, -0.01},   // middle
    { 0.00, 0.43, -0.02},
    { 0.00, 0.52, -0.03},
    { 0.00, 0.60, -0.04},
    { 0.07, 0.30, -0.01},   // ring
    { 0.08, 0.40, -0.02},
    { 0.09, 0.48, -0.03},
    { 0.10, 0.55, -0.04},
    { 0.13, 0.26, -0.01},   // pinky
    { 0.15, 0.33, -0.02},
    { 0.17, 0.39, -0.03},
    { 0.19, 0.44, -0.04},
}};

constexpr Table kPointing{{
    { 0.00, 0.00,  0.00},   // wrist
    {-0.06, 0.06, -0.01},   // thumb, folded across the palm
    {-0.10, 0.13, -0.02},
    {-0.08, 0.20, -0.04},
    {-0.03, 0.22, -0.05},
    {-0.07, 0.30, -0.01},   // index, extended
    {-0.09, 0.42, -0.02},
    {-0.11, 0.51, -0.03},
    {-0.12, 0.59, -0.04},
    { 0.00, 0.31, -0.01},   // middle, curled
    { 0.02, 0.37, -0.05},
    { 0.01, 0.29, -0.08},
    { 0.00, 0.24, -0.06},
    { 0.06, 0.29, -0.01},   // ring, curled
    { 0.08, 0.34, -0.05},
    { 0.07, 0.27, -0.08},
    { 0.06, 0.22, -0.06},
    { 0.11, 0.25, -0.01},   // pinky, curled
    { 0.13, 0.29, -0.04},
    { 0.12, 0.23, -0.06},
    { 0.11, 0.19, -0.05},
}};

// Curl level per digit (thumb, index, middle, ring, pinky): 0 extended,
// 1 half curled, 2 fully curled. Chosen by greedy farthest-point selection
// over all 3^5 combinations, so every prefix is well separated.
constexpr std::array<std::array<int, 5>, kMaxClasses> kCurlCodes{{
    {0, 0, 0, 0, 0}, {2, 2, 2, 2, 2}, {0, 2, 0, 2, 0}, {2, 0, 2, 0, 2}, {2, 0, 1, 2, 0},
    {2, 2, 1, 0, 0}, {0, 1, 2, 1, 0}, {2, 1, 0, 1, 2}, {0, 0, 2, 2, 2}, {0, 2, 2, 0, 2},
    {0, 0, 0, 2, 1}, {0, 2, 0, 0, 1}, {0, 1, 1, 2, 1}, {2, 0, 1, 1, 2}, {2, 0, 1, 0, 0},
    {2, 1, 1, 0, 2}, {2, 2, 1, 2, 0}, {2, 0, 0, 0, 2}, {0, 2, 1, 1, 2}, {2, 0, 0, 1, 0},
    {2, 1, 0, 0, 0}, {2, 0, 2, 1, 0}, {2, 1, 2, 0, 0}, {0, 0, 1, 0, 2}, {0, 0, 2, 0, 0},
    {0, 1, 0, 1, 0}, {0, 2, 2, 2, 0}, {2, 1, 1, 1, 0}, {2, 1, 2, 1, 2}, {2, 2, 0, 2, 2},
}};
// clang-format on

struct Vec3 {
  double x, y, z;
};

Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

struct DigitSpec {
  Vec3 base;
  Vec3 along;  // extended direction
  Vec3 bend;   // direction the digit curls toward
  std::array<double, 3> segments;
  std::array<double, 3> joint_bend_deg;  // at full curl
};

// Appends three joints; each segment turns from `along` toward `bend` by the
// accumulated joint angles scaled by curl in [0, 1].
void append_digit(Table& t, std::size_t first, const DigitSpec& d, double curl) {
  Vec3 p = d.base;
  double phi = 0.0;
  for (std::size_t s = 0; s < 3; ++s) {
    phi += curl * radians(d.joint_bend_deg[s]);
    p = p + d.segments[s] * (std::cos(phi) * d.along + std::sin(phi) * d.bend);
    t[first + s] = {p.x, p.y, p.z};
  }
}

HandLandmarks build_class_template(const std::array<int, 5>& code) {
  Table t{};
  t[0] = {0.0, 0.0, 0.0};
  const Vec3 thumb_base{-0.06, 0.06, 0.0};
  t[1] = {thumb_base.x, thumb_base.y, thumb_base.z};
  const double ta = radians(135.0);
  append_digit(t, 2,
               {thumb_base,
                {std::cos(ta), std::sin(ta), 0.0},
                {std::sin(ta), -std::cos(ta), 0.0},
                {0.07, 0.06, 0.05},
                {30.0, 45.0, 40.0}},
               code[0] / 2.0);

  struct Finger {
    Vec3 mcp;
    double angle_deg;
    std::array<double, 3> segments;
  };
  const std::array<Finger, 4> fingers{{{{-0.08, 0.30, 0.0}, 95.0, {0.10, 0.07, 0.06}},
                                       {{0.00, 0.32, 0.0}, 90.0, {0.11, 0.08, 0.07}},
                                       {{0.07, 0.30, 0.0}, 85.0, {0.10, 0.075, 0.065}},
                                       {{0.13, 0.26, 0.0}, 78.0, {0.07, 0.055, 0.05}}}};
  for (std::size_t f = 0; f < fingers.size(); ++f) {
    const std::size_t mcp = 5 + 4 * f;
    const auto& fi = fingers[f];
    t[mcp] = {fi.mcp.x, fi.mcp.y, fi.mcp.z};
    const double a = radians(fi.angle_deg);
    append_digit(t, mcp + 1,
                 {fi.mcp, {std::cos(a), std::sin(a), 0.0}, {0.0, 0.0, -1.0}, fi.segments,
                  {70.0, 90.0, 60.0}},
                 code[f + 1] / 2.0);
  }
  return from_table(t, Handedness::Right);
}

void add_noise(HandLandmarks& hand, double sigma, std::mt19937_64& rng) {
  if (sigma == 0.0) return;
  std::normal_distribution<double> n(0.0, sigma);
  for (auto& p : hand.landmarks) {
    p.x += n(rng);
    p.y += n(rng);
    p.z += n(rng);
  }
}

void transform(HandLandmarks& hand, const PoseParams& p) {
  const double c = std::cos(radians(p.rotation_deg));
  const double s = std::sin(radians(p.rotation_deg));
  for (auto& q : hand.landmarks) {
    const double x = q.x;
    const double y = q.y;
    q.x = p.scale * (c * x - s * y) + p.translation.x;
    q.y = p.scale * (s * x + c * y) + p.translation.y;
    q.z = p.scale * q.z;
  }
}

double mean_finger_length(const HandLandmarks& hand) { return 3.0 * relative_threshold(hand); }

}  // namespace

void PoseParams::validate() const {
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw InvalidParams("noise_sigma must be finite and >= 0");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidParams("scale must be positive");
  if (!std::isfinite(rotation_deg) || !std::isfinite(translation.x) ||
      !std::isfinite(translation.y)) {
    throw InvalidParams("pose transform must be finite");
  }
}

const HandLandmarks& open_palm_template() {
  static const HandLandmarks t = from_table(kOpenPalm, Handedness::Right);
  return t;
}

const HandLandmarks& pointing_template() {
  static const HandLandmarks t = from_table(kPointing, Handedness::Left);
  return t;
}

const HandLandmarks& class_template(std::size_t k) {
  static const auto templates = [] {
    std::vector<HandLandmarks> out;
    for (const auto& code : kCurlCodes) out.push_back(build_class_template(code));
    return out;
  }();
  if (k >= templates.size()) throw InvalidParams("class template index out of range");
  return templates[k];
}

double template_distance(const HandLandmarks& a, const HandLandmarks& b) {
  double sq = 0.0;
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    const double dx = a[i].x - b[i].x;
    const double dy = a[i].y - b[i].y;
    const double dz = a[i].z - b[i].z;
    sq += dx * dx + dy * dy + dz * dz;
  }
  return std::sqrt(sq);
}

HandLandmarks apply_pose(const HandLandmarks& hand, const PoseParams& p) {
  p.validate();
  std::mt19937_64 rng(p.seed);
  HandLandmarks out = hand;
  add_noise(out, p.noise_sigma, rng);
  transform(out, p);
  return out;
}

HandLandmarks generate_open_palm(const PoseParams& p) { return apply_pose(open_palm_template(), p); }

Frame generate_pointing_frame(std::size_t target_index, const PoseParams& p, std::string frame_id) {
  p.validate();
  if (target_index >= kLandmarkCount) throw InvalidParams("target landmark outside 0..20");
  std::mt19937_64 rng(p.seed);

  HandLandmarks palm = open_palm_template();
  add_noise(palm, p.noise_sigma, rng);
  const Vec2 target = xy(palm[target_index]);

  // Quarter turn counter-clockwise, exact: (x, y) -> (-y, x).
  HandLandmarks pointer = pointing_template();
  for (auto& q : pointer.landmarks) q = {-q.y, q.x, q.z - 0.05};
  const Vec2 offset = target - xy(pointer[lm::kIndexTip]);
  for (auto& q : pointer.landmarks) {
    q.x += offset.x;
    q.y += offset.y;
  }
  pointer[lm::kIndexTip].x = target.x;
  pointer[lm::kIndexTip].y = target.y;
  add_noise(pointer, p.noise_sigma, rng);

  transform(palm, p);
  transform(pointer, p);
  return Frame{std::move(frame_id), {palm, pointer}};
}

std::string class_label(std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "c%02zu", k);
  return buf;
}

std::vector<LabeledHand> generate_class_dataset(std::size_t n_classes, std::size_t per_class,
                                                const PoseParams& p) {
  p.validate();
  if (n_classes < 2 || n_classes > kMaxClasses) {
    throw InvalidParams("n_classes must be in [2, 30]");
  }
  if (per_class == 0) throw InvalidParams("per_class must be positive");

  const double required = kSeparationSigmas * p.noise_sigma;
  for (std::size_t a = 0; a < n_classes; ++a) {
    for (std::size_t b = a + 1; b < n_classes; ++b) {
      const double d = template_distance(class_template(a), class_template(b));
      if (d < required) {
        throw InvalidParams("templates " + class_label(a) + " and " + class_label(b) +
                            " are closer than 10 noise sigmas");
      }
    }
  }

  std::mt19937_64 rng(p.seed);
  std::vector<LabeledHand> out;
  out.reserve(n_classes * per_class);
  for (std::size_t k = 0; k < n_classes; ++k) {
    for (std::size_t i = 0; i < per_class; ++i) {
      HandLandmarks hand = class_template(k);
      add_noise(hand, p.noise_sigma, rng);
      transform(hand, p);
      out.push_back({hand, class_label(k)});
    }
  }
  return out;
}

Frame occlude(const Frame& frame, const OcclusionSpec& spec, std::uint64_t seed) {
  constexpr std::array<double, 4> kLevels{0.0, 0.2, 0.5, 0.8};
  if (std::find(kLevels.begin(), kLevels.end(), spec.fraction) == kLevels.end()) {
    throw InvalidParams("occlusion fraction must be one of 0, 0.2, 0.5, 0.8");
  }
  if (spec.fraction == 0.0 || frame.hands.size() < 2) return frame;

  Frame out = frame;
  if (spec.mode == OcclusionMode::DropHand) {
    out.hands.resize(1);
    return out;
  }

  std::size_t occluded = 1;
  if (auto roles = assign_roles(frame)) occluded = roles->pointing_slot == HandSlot::First ? 1 : 0;
  HandLandmarks& palm = out.hands[occluded];
  const HandLandmarks& other = out.hands[1 - occluded];

  Vec2 centroid{};
  for (const auto& q : other.landmarks) {
    centroid.x += q.x / static_cast<double>(kLandmarkCount);
    centroid.y += q.y / static_cast<double>(kLandmarkCount);
  }
  std::array<std::size_t, kLandmarkCount> order{};
  for (std::size_t i = 0; i < kLandmarkCount; ++i) order[i] = i;
  std::array<double, kLandmarkCount> dist{};
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    const Vec2 d = xy(palm[i]) - centroid;
    dist[i] = d.x * d.x + d.y * d.y;
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

  const auto count = static_cast<std::size_t>(std::lround(spec.fraction * kLandmarkCount));
  const double sigma = spec.fraction * mean_finger_length(frame.hands[occluded]) / 2.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  for (std::size_t k = 0; k < count; ++k) {
    Landmark& q = palm[order[k]];
    q.x += n(rng);
    q.y += n(rng);
    q.z += n(rng);
  }
  return out;
}

std::pair<std::vector<Frame>, std::vector<LabelRow>> export_dataset(
    const std::vector<LabeledHand>& data, std::string_view id_prefix) {
  std::pair<std::vector<Frame>, std::vector<LabelRow>> out;
  out.first.reserve(data.size());
  out.second.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06zu", i);
    std::string id = std::string(id_prefix) + buf;
    out.first.push_back(Frame{id, {data[i].hand}});
    out.second.emplace_back(std::move(id), data[i].label);
  }
  return out;
}

}  // namespace tfs::synth
