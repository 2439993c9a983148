// Observation normalization with fixed, arena-derived bounds. Deterministic
// by construction; saturation is clamped to the unit range and counted.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>

#include "padland/geometry.hpp"

namespace padland::rl {

struct NormalizationBounds {
  double maxGroundDistanceM = 30.0;
  double maxAltitudeM = 20.0;
};

struct NormalizationStats {
  std::uint64_t samples = 0;
  std::uint64_t saturations = 0;
};

// (rotation difference, horizontal distance, vertical distance) in [-1, 1].
inline std::array<double, 3> normalize_observation(const geom::PositionalObservation& obs,
                                                   double heightM,
                                                   const NormalizationBounds& bounds,
                                                   NormalizationStats* stats = nullptr) {
  auto clampUnit = [&](double v) {
    if (stats && (v > 1.0 || v < -1.0)) stats->saturations += 1;
    return std::clamp(v, -1.0, 1.0);
  };
  if (stats) stats->samples += 1;
  return {clampUnit(obs.horizontalAngleDeg / 180.0),
          clampUnit(obs.groundDistanceM / bounds.maxGroundDistanceM),
          clampUnit(heightM / bounds.maxAltitudeM)};
}

}  // namespace padland::rl
