#pragma once

#include <random>

#include "tfs/landmarks.hpp"

namespace tfs::testing {

inline HandLandmarks random_hand(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  HandLandmarks h;
  for (auto& p : h.landmarks) p = {u(rng), u(rng), u(rng)};
  h.handedness = (rng() & 1) ? Handedness::Left : Handedness::Right;
  h.score = score(rng);
  return h;
}

inline Frame random_frame(std::mt19937_64& rng, std::size_t hands, std::string id) {
  Frame f{std::move(id), {}};
  for (std::size_t i = 0; i < hands; ++i) f.hands.push_back(random_hand(rng));
  return f;
}

}  // namespace tfs::testing
