// Test-side projection oracle, written independently of the library's
// detection code. Builds ground-truth view geometry for a point target from
// first principles and projects it into pixel space with the tangent law, so
// extraction code can be checked against scene ground truth rather than
// against itself.
#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "padland/geometry.hpp"

namespace testoracle {

constexpr double kDegPerRad = 57.29577951308232;

struct Scene {
  double uavX = 0.0, uavY = 0.0, uavZ = 0.0;
  double yawDeg = 0.0;
  double gimbalDeg = 0.0;
  double targetX = 0.0, targetY = 0.0;
};

struct GroundTruthView {
  double bearingDeg = 0.0;        // target azimuth relative to heading, + right
  double elevationDeg = 0.0;      // from vertical axis, longitudinal plane
  double alongHeadingM = 0.0;     // displacement component along heading
  double groundPlaneDistM = 0.0;  // full horizontal displacement
};

inline GroundTruthView groundTruthView(const Scene& s) {
  const double yawRad = s.yawDeg / kDegPerRad;
  const double dx = s.targetX - s.uavX;
  const double dy = s.targetY - s.uavY;
  // Rotate the displacement into the heading frame (u along heading, v left).
  const double u = std::cos(yawRad) * dx + std::sin(yawRad) * dy;
  const double v = -std::sin(yawRad) * dx + std::cos(yawRad) * dy;
  GroundTruthView g;
  g.bearingDeg = std::atan2(-v, u) * kDegPerRad;  // +v is left, so right is -v
  g.elevationDeg = std::atan2(u, s.uavZ) * kDegPerRad;
  g.alongHeadingM = u;
  g.groundPlaneDistM = std::hypot(dx, dy);
  return g;
}

// Tangent-law projection of the target point. Returns nothing outside the
// angular frustum.
inline std::optional<padland::geom::PixelPoint> projectPoint(
    const Scene& s, const padland::geom::CameraModel& cam) {
  const GroundTruthView g = groundTruthView(s);
  const double halfH = cam.hfovDeg / 2.0;
  const double halfV = cam.vfovDeg / 2.0;
  const double pitchOffset = g.elevationDeg - s.gimbalDeg;
  if (std::abs(g.bearingDeg) > halfH || std::abs(pitchOffset) > halfV) return std::nullopt;
  padland::geom::PixelPoint p;
  p.x = cam.imageWidth * 0.5 *
        (1.0 + std::tan(g.bearingDeg / kDegPerRad) / std::tan(halfH / kDegPerRad));
  p.y = cam.imageHeight * 0.5 *
        (1.0 + std::tan(pitchOffset / kDegPerRad) / std::tan(halfV / kDegPerRad));
  return p;
}

// Symmetric bounding box of the given pixel half-width around a point; the
// center of the box is exactly the point.
inline padland::geom::BoundingBox boxAround(const padland::geom::PixelPoint& p, double halfPx) {
  return {p.x - halfPx, p.y - halfPx, p.x + halfPx, p.y + halfPx};
}

}  // namespace testoracle
