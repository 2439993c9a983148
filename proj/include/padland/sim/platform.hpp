// Moving landing platform: a point on the ground plane following one of three
// motion programs (linear with wall reflection, circular, random waypoints).
#pragma once

#include <algorithm>
#include <stdexcept>
#include <variant>

#include "padland/rng.hpp"
#include "padland/vec3.hpp"

namespace padland::sim {

struct LinearPath {};

struct CircularPath {
  double centerX = 0.0;
  double centerY = 0.0;
  double radiusM = 1.5;
  double phaseRad = 0.0;   // current angular position on the circle
  int direction = 1;       // +1 counterclockwise, -1 clockwise
};

struct WaypointRandomPath {
  double targetX = 0.0;
  double targetY = 0.0;
  double minSpeed = 0.0;
  double maxSpeed = 0.4;
  double arrivalToleranceM = 0.05;
};

using PathSpec = std::variant<LinearPath, CircularPath, WaypointRandomPath>;

struct PlatformBounds {
  double minX = -10.0, maxX = 10.0;
  double minY = -10.0, maxY = 10.0;
};

struct PlatformState {
  double x = 0.0, y = 0.0;
  double headingDeg = 0.0;  // direction of travel
  double speedMps = 0.0;
  PathSpec path = LinearPath{};

  Vec3 velocity() const {
    const double h = degToRad(headingDeg);
    return {speedMps * std::cos(h), speedMps * std::sin(h), 0.0};
  }
};

namespace detail {

// Reflects position/heading off the bounds walls, preserving speed.
inline void reflectAtWalls(PlatformState& p, const PlatformBounds& b) {
  double hx = std::cos(degToRad(p.headingDeg));
  double hy = std::sin(degToRad(p.headingDeg));
  if (p.x < b.minX) {
    p.x = b.minX + (b.minX - p.x);
    hx = -hx;
  } else if (p.x > b.maxX) {
    p.x = b.maxX - (p.x - b.maxX);
    hx = -hx;
  }
  if (p.y < b.minY) {
    p.y = b.minY + (b.minY - p.y);
    hy = -hy;
  } else if (p.y > b.maxY) {
    p.y = b.maxY - (p.y - b.maxY);
    hy = -hy;
  }
  p.headingDeg = radToDeg(std::atan2(hy, hx));
}

}  // namespace detail

// Advances the platform by dt. Circular paths are parameterized by phase, so
// a full period closes exactly; linear paths reflect at the walls; waypoint
// mode resamples heading and speed when the current waypoint is reached.
inline PlatformState platform_update(const PlatformState& platform, double dtS,
                                     const PlatformBounds& bounds, Rng& rng) {
  if (!(dtS > 0.0)) throw std::invalid_argument("platform_update: dt must be positive");
  PlatformState next = platform;
  if (next.speedMps == 0.0) return next;

  if (auto* circ = std::get_if<CircularPath>(&next.path)) {
    const double angularRate = next.speedMps / circ->radiusM * circ->direction;
    circ->phaseRad += angularRate * dtS;
    next.x = circ->centerX + circ->radiusM * std::cos(circ->phaseRad);
    next.y = circ->centerY + circ->radiusM * std::sin(circ->phaseRad);
    // Travel direction is the tangent.
    next.headingDeg = radToDeg(circ->phaseRad + circ->direction * kPi / 2.0);
    return next;
  }

  if (auto* wp = std::get_if<WaypointRandomPath>(&next.path)) {
    const double dx = wp->targetX - next.x;
    const double dy = wp->targetY - next.y;
    if (std::sqrt(dx * dx + dy * dy) <= wp->arrivalToleranceM) {
      wp->targetX = rng.uniform(bounds.minX, bounds.maxX);
      wp->targetY = rng.uniform(bounds.minY, bounds.maxY);
      next.speedMps = rng.uniform(wp->minSpeed, wp->maxSpeed);
    }
    next.headingDeg = radToDeg(std::atan2(wp->targetY - next.y, wp->targetX - next.x));
    const double step = next.speedMps * dtS;
    next.x += step * std::cos(degToRad(next.headingDeg));
    next.y += step * std::sin(degToRad(next.headingDeg));
    return next;
  }

  const double h = degToRad(next.headingDeg);
  next.x += next.speedMps * dtS * std::cos(h);
  next.y += next.speedMps * dtS * std::sin(h);
  detail::reflectAtWalls(next, bounds);
  return next;
}

}  // namespace padland::sim
