// Synthetic detection oracle. Stands in for a learned object detector: it
// projects the landing target into pixel space from ground truth, wraps the
// corners in an axis-aligned box, and optionally corrupts the result with
// pixel jitter and dropouts.
//
// Projection model: a pinhole camera yaw-locked to the UAV heading,
// roll-leveled by the gimbal, pitched gimbalPitch degrees up from straight
// down. Pixel coordinates follow the projective law in the camera frame, so
// the view is the full angular cone around the gimbal axis; a target sitting
// centimeters behind the nadir point is still seen when looking down. On the
// vertical image axis the gimbal tilt cancels algebraically, which is why
// the extraction chain recovers the vertical angle and the along-heading
// distance exactly in exact-pinhole mode; the horizontal angle read from the
// image approaches the true bearing as the target nears the image center,
// with the gimbal tracking loop keeping it there.
#pragma once

#include <algorithm>
#include <optional>

#include "padland/geometry.hpp"
#include "padland/rng.hpp"
#include "padland/vec3.hpp"

namespace padland::sim {

struct NoiseSpec {
  double pixelJitterSigma = 2.0;
  double missProbability = 0.02;

  static NoiseSpec none() { return {0.0, 0.0}; }
};

// Azimuth/elevation pair of a ground point as seen from the UAV.
struct ViewAngles {
  double azimuthDeg = 0.0;    // about the vertical axis, relative to heading
  double elevationDeg = 0.0;  // from vertical, in the longitudinal plane
};

// Ground point -> view angles. `relativeHeight` is the camera altitude above
// the point's plane and must be positive.
inline ViewAngles view_angles(double dx, double dy, double relativeHeightM, double yawDeg) {
  const double yaw = degToRad(yawDeg);
  const double forward = dx * std::cos(yaw) + dy * std::sin(yaw);
  const double right = dx * std::sin(yaw) - dy * std::cos(yaw);
  ViewAngles v;
  v.azimuthDeg = radToDeg(std::atan2(right, forward));
  v.elevationDeg = radToDeg(std::atan2(forward, relativeHeightM));
  return v;
}

// Ground point -> pixel through the tilted pinhole. Returns nothing when the
// point is outside the camera frustum. Displacements are world-frame
// deltas from the camera to the point; relativeHeight is the camera altitude
// above the point's plane.
inline std::optional<geom::PixelPoint> project_point(double dx, double dy,
                                                     double relativeHeightM, double yawDeg,
                                                     double gimbalPitchDeg,
                                                     const geom::CameraModel& cam) {
  const double yaw = degToRad(yawDeg);
  const double forward = dx * std::cos(yaw) + dy * std::sin(yaw);
  const double right = dx * std::sin(yaw) - dy * std::cos(yaw);
  const double alpha = degToRad(gimbalPitchDeg);
  // Camera frame: x right, y image-down (increasing vertical angle), z axis.
  const double zc = forward * std::sin(alpha) + relativeHeightM * std::cos(alpha);
  if (!(zc > 1e-9)) return std::nullopt;
  const double xc = right / zc;
  const double yc = (forward * std::cos(alpha) - relativeHeightM * std::sin(alpha)) / zc;
  const double tanHalfH = std::tan(degToRad(cam.hfovDeg) / 2.0);
  const double tanHalfV = std::tan(degToRad(cam.vfovDeg) / 2.0);
  if (std::abs(xc) > tanHalfH || std::abs(yc) > tanHalfV) return std::nullopt;
  return geom::PixelPoint{cam.imageWidth * 0.5 * (1.0 + xc / tanHalfH),
                          cam.imageHeight * 0.5 * (1.0 + yc / tanHalfV)};
}

struct DetectionScene {
  double uavX = 0.0, uavY = 0.0;
  double relativeHeightM = 0.0;  // UAV altitude above the target plane
  double yawDeg = 0.0;
  double gimbalPitchDeg = 0.0;
  double targetX = 0.0, targetY = 0.0;
  double targetHeadingDeg = 0.0;
  double targetHalfExtentM = 0.3;  // 60x60 cm target
};

// Projects the target's four corners and returns their axis-aligned pixel
// envelope, jittered and possibly dropped per the noise spec. Absent whenever
// the target center is outside the camera frustum.
inline std::optional<geom::BoundingBox> render_detection(const DetectionScene& scene,
                                                         const geom::CameraModel& cam,
                                                         const NoiseSpec& noise, Rng& rng) {
  if (!(scene.relativeHeightM > 0.0)) return std::nullopt;

  const double dx = scene.targetX - scene.uavX;
  const double dy = scene.targetY - scene.uavY;
  const auto centerPix = project_point(dx, dy, scene.relativeHeightM, scene.yawDeg,
                                       scene.gimbalPitchDeg, cam);
  if (!centerPix.has_value()) return std::nullopt;

  if (noise.missProbability > 0.0 && rng.uniform() < noise.missProbability) return std::nullopt;

  const double heading = degToRad(scene.targetHeadingDeg);
  const double ch = std::cos(heading), sh = std::sin(heading);
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  const double e = scene.targetHalfExtentM;
  const double cornersLocal[4][2] = {{e, e}, {e, -e}, {-e, -e}, {-e, e}};
  for (const auto& c : cornersLocal) {
    const double cx = dx + c[0] * ch - c[1] * sh;
    const double cy = dy + c[0] * sh + c[1] * ch;
    const auto pix = project_point(cx, cy, scene.relativeHeightM, scene.yawDeg,
                                   scene.gimbalPitchDeg, cam);
    // Corner outside the frustum: fall back to the center pixel so a
    // partially visible target still yields a (clipped) box.
    const geom::PixelPoint p = pix.value_or(*centerPix);
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }

  geom::BoundingBox box{xmin, ymin, xmax, ymax};
  if (noise.pixelJitterSigma > 0.0) {
    box.xmin += rng.normal(0.0, noise.pixelJitterSigma);
    box.ymin += rng.normal(0.0, noise.pixelJitterSigma);
    box.xmax += rng.normal(0.0, noise.pixelJitterSigma);
    box.ymax += rng.normal(0.0, noise.pixelJitterSigma);
    if (box.xmin > box.xmax) std::swap(box.xmin, box.xmax);
    if (box.ymin > box.ymax) std::swap(box.ymin, box.ymax);
  }
  box.xmin = std::clamp(box.xmin, 0.0, static_cast<double>(cam.imageWidth));
  box.xmax = std::clamp(box.xmax, 0.0, static_cast<double>(cam.imageWidth));
  box.ymin = std::clamp(box.ymin, 0.0, static_cast<double>(cam.imageHeight));
  box.ymax = std::clamp(box.ymax, 0.0, static_cast<double>(cam.imageHeight));
  if (box.width() < 1.0 || box.height() < 1.0) {
    // Degenerate after clamping; pad to a 1px box around the center if
    // possible, otherwise report a miss.
    const auto c = *centerPix;
    if (!cam.contains(c.x, c.y)) return std::nullopt;
    box.xmin = std::clamp(c.x - 0.5, 0.0, cam.imageWidth - 1.0);
    box.xmax = box.xmin + 1.0;
    box.ymin = std::clamp(c.y - 0.5, 0.0, cam.imageHeight - 1.0);
    box.ymax = box.ymin + 1.0;
  }
  return box;
}

// Rate-limited gimbal tracking: move the pitch toward the latest vertical
// angle, clamped to the mechanical range.
inline double gimbal_track(double currentPitchDeg, double omegaDeg, double slewDegPerS,
                           double dtS, double minDeg = 0.0, double maxDeg = 90.0) {
  const double maxStep = slewDegPerS * dtS;
  const double delta = std::clamp(omegaDeg - currentPitchDeg, -maxStep, maxStep);
  return std::clamp(currentPitchDeg + delta, minDeg, maxDeg);
}

}  // namespace padland::sim
