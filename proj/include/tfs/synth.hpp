#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tfs/geometry.hpp"
#include "tfs/landmarks.hpp"
#include "tfs/mlp.hpp"

namespace tfs::synth {

// Jitter and placement applied to a template. Noise is added first, then
// the hand is scaled, rotated in-plane and translated about the origin.
struct PoseParams {
  double noise_sigma = 0.0;
  double scale = 1.0;
  double rotation_deg = 0.0;
  Vec2 translation{};
  std::uint64_t seed = 0;

  void validate() const;  // throws InvalidParams
};

// Upright right-hand open palm, y-up. Inequality margins:
//   fingertip above MCP by 0.25 / 0.28 / 0.25 / 0.18 (index..pinky);
//   thumb tip 0.09 left of the thumb MCP, wrist 0.13 right of it.
const HandLandmarks& open_palm_template();

// Upright pointing hand: index extended (tilted 0.05 toward the thumb),
// middle/ring/pinky curled back below their MCPs by 0.07 / 0.07 / 0.06.
// Every index-vs-finger dot product is at most -0.0174.
const HandLandmarks& pointing_template();

// The k-th single-hand class template, k in [0, kMaxClasses).
inline constexpr std::size_t kMaxClasses = 30;
const HandLandmarks& class_template(std::size_t k);

// Class templates must be at least this many noise sigmas apart, measured
// as the Euclidean norm of the 63-component coordinate difference.
inline constexpr double kSeparationSigmas = 10.0;

double template_distance(const HandLandmarks& a, const HandLandmarks& b);

HandLandmarks apply_pose(const HandLandmarks& hand, const PoseParams& p);

HandLandmarks generate_open_palm(const PoseParams& p);

// Two-hand frame [open palm, pointing hand]. The pointing hand comes in
// from the right, index pointing left, with its tip placed on the target
// landmark of the (jittered) open palm before the pose transform.
Frame generate_pointing_frame(std::size_t target_index, const PoseParams& p,
                              std::string frame_id = {});

// per_class samples for each of the first n_classes templates, grouped by
// class, labelled "c00", "c01", ...
std::vector<LabeledHand> generate_class_dataset(std::size_t n_classes, std::size_t per_class,
                                                const PoseParams& p);

std::string class_label(std::size_t k);

enum class OcclusionMode { DropHand, PerturbRegion };

// fraction is one of 0.0, 0.2, 0.5, 0.8.
struct OcclusionSpec {
  double fraction = 0.0;
  OcclusionMode mode = OcclusionMode::PerturbRegion;
};

// Landmark-level stand-in for inter-hand occlusion. DropHand removes the
// second hand. PerturbRegion jitters the round(fraction * 21) open-palm
// landmarks closest to the other hand's centroid with sigma
// fraction * (mean finger length) / 2.
Frame occlude(const Frame& frame, const OcclusionSpec& spec, std::uint64_t seed);

// Frames "<prefix>000000", ... and matching label rows.
std::pair<std::vector<Frame>, std::vector<LabelRow>> export_dataset(
    const std::vector<LabeledHand>& data, std::string_view id_prefix);

}  // namespace tfs::synth
