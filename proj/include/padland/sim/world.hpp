// Deterministic quadrotor + moving-platform world. One SimWorld instance is
// an episode factory: reset(seed) spawns a randomized episode, step(action)
// advances one control period (several physics substeps), classifies
// terminals, and renders the synthetic detection for the next frame.
//
// Coordinates: world z up, the platform's top surface is the z = 0 plane, so
// UAV altitude above the platform is simply position.z and touchdown happens
// at z near zero. (config, seed, action sequence) fully determines every
// StepResult, bit for bit. Instances share no state; run one per worker.
#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "padland/action.hpp"
#include "padland/geometry.hpp"
#include "padland/rng.hpp"
#include "padland/sim/detection.hpp"
#include "padland/sim/platform.hpp"
#include "padland/sim/quadrotor.hpp"

namespace padland::sim {

struct ArenaConfig {
  double extentX = 24.0;   // arena spans [-extentX/2, extentX/2]
  double extentY = 24.0;
  double ceiling = 25.0;
  int physicsHz = 240;
  int controlFps = 8;

  double physicsDt() const { return 1.0 / physicsHz; }
  double controlPeriod() const { return 1.0 / controlFps; }
  int substepsPerControl() const { return physicsHz / controlFps; }

  void validate() const {
    if (extentX <= 0.0 || extentY <= 0.0 || ceiling <= 0.0)
      throw std::invalid_argument("ArenaConfig: extents and ceiling must be positive");
    if (physicsHz <= 0 || controlFps <= 0 || physicsHz % controlFps != 0)
      throw std::invalid_argument(
          "ArenaConfig: physics rate must be a positive multiple of the control rate");
  }
};

enum class PathKind { Linear, Circular, WaypointRandom };

struct EpisodeSpec {
  double spawnAltitudeMin = 2.0;
  double spawnAltitudeMax = 20.0;
  double spawnLateralMin = 1.0;
  double spawnLateralMax = 5.0;
  double spawnHeadingErrorDeg = 30.0;
  double platformSpawnRadius = 3.0;
  double platformSpeedMin = 0.0;
  double platformSpeedMax = 1.0;
  double circleRadiusM = 1.5;
  std::vector<PathKind> paths{PathKind::Linear, PathKind::Circular, PathKind::WaypointRandom};
  double maxSeconds = 80.0;
  double platformHalfExtentM = 0.5;  // 100x100 cm platform
  double targetHalfExtentM = 0.3;    // 60x60 cm target centered on it
  double targetVolumeHeightM = 0.3;  // reward volume above the target
  double contactThresholdM = 0.05;
  double attitudeLimitDeg = 60.0;
};

// How normalized actions map onto the stabilization setpoints. Pitch and
// roll command horizontal velocity (up to the ground-speed cap) which a
// proportional regulator converts into tilt setpoints bounded by tiltLimit;
// zero command therefore brakes to hover, the way a position-mode flight
// stack treats stick release. Yaw commands a turn rate, throttle a climb
// rate.
struct ControlLimits {
  double tiltLimitDeg = 20.0;
  double yawRateLimitDegS = 90.0;
  double climbRateLimitMps = 1.5;
  double horizontalSpeedCapMps = 0.4;
  double velocityTiltGainDegPerMps = 30.0;
  double gimbalSlewDegPerS = 90.0;
};

struct WindSpec {
  bool enabled = false;
  double maxForceN = 0.2;
};

struct SimConfig {
  ArenaConfig arena;
  EpisodeSpec episode;
  UavParams uav;
  PidGains pid;
  ControlLimits control;
  geom::CameraModel camera = geom::CameraModel::defaults();
  NoiseSpec noise;
  WindSpec wind;

  void validate() const {
    arena.validate();
    camera.validate();
    if (episode.spawnAltitudeMax >= arena.ceiling)
      throw std::invalid_argument("SimConfig: spawn altitude range exceeds the ceiling");
    const double reach = episode.platformSpawnRadius + episode.spawnLateralMax + 1.0;
    if (reach >= extentMin() / 2.0)
      throw std::invalid_argument("SimConfig: arena too small for the spawn radius");
    if (episode.paths.empty())
      throw std::invalid_argument("SimConfig: at least one platform path kind required");
  }

  double extentMin() const { return std::min(arena.extentX, arena.extentY); }

  PlatformBounds platformBounds() const {
    const double mx = arena.extentX / 2.0 - 1.0;
    const double my = arena.extentY / 2.0 - 1.0;
    return {-mx, mx, -my, my};
  }
};

enum class Terminal { None, Landing, Crash, Timeout };

inline const char* to_string(Terminal t) {
  switch (t) {
    case Terminal::Landing: return "landing";
    case Terminal::Crash: return "crash";
    case Terminal::Timeout: return "timeout";
    default: return "none";
  }
}

// Privileged state for rewards and test oracles; never fed to the policy.
struct GroundTruth {
  double headingErrorDeg = 0.0;      // platform azimuth relative to UAV heading
  double horizontalDistanceM = 0.0;  // ground-plane distance UAV -> platform
  double heightM = 0.0;              // altitude above the platform plane
  double platformFrameX = 0.0;       // UAV offset in the platform's moving frame
  double platformFrameY = 0.0;
  bool insideTargetVolume = false;
  double uavRadialSpeedMps = 0.0;    // V_d along the UAV-platform line
  double descentSpeedMps = 0.0;      // positive when descending
};

struct SimState {
  UavBody uav;
  PlatformState platform;
  PidState pid;
  double timeS = 0.0;
  std::int64_t frameId = 0;
  Terminal terminal = Terminal::None;
  Rng rng;
};

struct StepResult {
  SimState state;  // snapshot after the step
  std::optional<geom::BoundingBox> detection;
  Terminal terminal = Terminal::None;
  GroundTruth groundTruth;
};

class SimWorld {
 public:
  explicit SimWorld(SimConfig config) : config_(std::move(config)) { config_.validate(); }

  const SimConfig& config() const { return config_; }
  const SimState& state() const { return state_; }

  // Spawns a fresh randomized episode. Identical (config, seed) pairs produce
  // bit-identical initial states.
  StepResult reset(std::uint64_t seed) {
    state_ = SimState{};
    state_.rng = Rng(seed);
    Rng& rng = state_.rng;
    const EpisodeSpec& ep = config_.episode;

    PlatformState& plat = state_.platform;
    plat.x = rng.uniform(-ep.platformSpawnRadius, ep.platformSpawnRadius);
    plat.y = rng.uniform(-ep.platformSpawnRadius, ep.platformSpawnRadius);
    plat.headingDeg = rng.uniform(0.0, 360.0);
    plat.speedMps = rng.uniform(ep.platformSpeedMin, ep.platformSpeedMax);
    switch (ep.paths[rng.uniformIndex(ep.paths.size())]) {
      case PathKind::Linear:
        plat.path = LinearPath{};
        break;
      case PathKind::Circular: {
        CircularPath c;
        c.radiusM = ep.circleRadiusM;
        c.centerX = plat.x;
        c.centerY = plat.y;
        c.phaseRad = rng.uniform(0.0, 2.0 * kPi);
        c.direction = rng.uniform() < 0.5 ? 1 : -1;
        plat.x = c.centerX + c.radiusM * std::cos(c.phaseRad);
        plat.y = c.centerY + c.radiusM * std::sin(c.phaseRad);
        plat.headingDeg = radToDeg(c.phaseRad + c.direction * kPi / 2.0);
        plat.path = c;
        break;
      }
      case PathKind::WaypointRandom: {
        WaypointRandomPath w;
        w.minSpeed = ep.platformSpeedMin;
        w.maxSpeed = ep.platformSpeedMax;
        const PlatformBounds b = config_.platformBounds();
        w.targetX = rng.uniform(b.minX, b.maxX);
        w.targetY = rng.uniform(b.minY, b.maxY);
        plat.path = w;
        break;
      }
    }

    UavBody& uav = state_.uav;
    uav = UavBody{};
    const double altitude = rng.uniform(ep.spawnAltitudeMin, ep.spawnAltitudeMax);
    const double lateral = rng.uniform(ep.spawnLateralMin, ep.spawnLateralMax);
    const double bearing = rng.uniform(0.0, 2.0 * kPi);
    uav.position = {plat.x + lateral * std::cos(bearing), plat.y + lateral * std::sin(bearing),
                    altitude};
    const double toPlatform =
        radToDeg(std::atan2(plat.y - uav.position.y, plat.x - uav.position.x));
    uav.yawDeg = wrapDeg(toPlatform + rng.uniform(-ep.spawnHeadingErrorDeg, ep.spawnHeadingErrorDeg));
    for (auto& f : uav.motorForces) f = config_.uav.hoverForcePerMotor();
    const ViewAngles va = view_angles(plat.x - uav.position.x, plat.y - uav.position.y,
                                      altitude, uav.yawDeg);
    uav.gimbalPitchDeg = std::clamp(va.elevationDeg, 0.0, 90.0);

    return makeResult();
  }

  // Applies the gimbal command produced by the control loop. Commands are
  // expected to be slew-limited already (gimbal_track); the clamp here only
  // enforces the mechanical range.
  void setGimbal(double pitchDeg) {
    state_.uav.gimbalPitchDeg = std::clamp(pitchDeg, 0.0, 90.0);
  }

  // Advances one control period. Out-of-range action components are clamped
  // to the unit interval; non-finite actions are a caller bug.
  StepResult step(const ControlAction& action) {
    if (!action.finite()) throw std::invalid_argument("SimWorld::step: non-finite action");
    if (state_.terminal != Terminal::None) return makeResult();

    const ControlLimits& lim = config_.control;
    double desiredForward = std::clamp(action.pitch, -1.0, 1.0) * lim.horizontalSpeedCapMps;
    double desiredRight = std::clamp(action.roll, -1.0, 1.0) * lim.horizontalSpeedCapMps;
    const double desiredNorm = std::hypot(desiredForward, desiredRight);
    if (desiredNorm > lim.horizontalSpeedCapMps) {
      const double scale = lim.horizontalSpeedCapMps / desiredNorm;
      desiredForward *= scale;
      desiredRight *= scale;
    }
    AttitudeSetpoint sp;
    sp.yawRateDegS = std::clamp(action.yaw, -1.0, 1.0) * lim.yawRateLimitDegS;
    sp.climbRateMps = std::clamp(action.throttle, -1.0, 1.0) * lim.climbRateLimitMps;

    const double dt = config_.arena.physicsDt();
    const PlatformBounds bounds = config_.platformBounds();
    for (int i = 0; i < config_.arena.substepsPerControl(); ++i) {
      const AttitudeSetpoint effective =
          regulateVelocity(sp, desiredForward, desiredRight);
      state_.uav.motorForces = pid_stabilize(state_.uav, effective, config_.uav, config_.pid,
                                             state_.pid, dt);
      Vec3 wind{};
      if (config_.wind.enabled) {
        wind = {state_.rng.uniform(-config_.wind.maxForceN, config_.wind.maxForceN),
                state_.rng.uniform(-config_.wind.maxForceN, config_.wind.maxForceN),
                state_.rng.uniform(-config_.wind.maxForceN, config_.wind.maxForceN)};
      }
      integrate_body(state_.uav, config_.uav, dt, wind);
      state_.platform = platform_update(state_.platform, dt, bounds, state_.rng);
      state_.timeS += dt;
      classifyTerminal();
      if (state_.terminal != Terminal::None) break;
    }
    state_.frameId += 1;
    return makeResult();
  }

  GroundTruth groundTruth() const { return computeGroundTruth(); }

 private:
  // Velocity error in the heading frame -> tilt setpoints. Enforces the
  // ground-speed cap and brakes actively on zero command.
  AttitudeSetpoint regulateVelocity(const AttitudeSetpoint& base, double desiredForward,
                                    double desiredRight) const {
    const ControlLimits& lim = config_.control;
    const double yaw = degToRad(state_.uav.yawDeg);
    const Vec3 v = state_.uav.velocity;
    const double vForward = std::cos(yaw) * v.x + std::sin(yaw) * v.y;
    const double vRight = std::sin(yaw) * v.x - std::cos(yaw) * v.y;
    AttitudeSetpoint out = base;
    out.pitchDeg = std::clamp(lim.velocityTiltGainDegPerMps * (desiredForward - vForward),
                              -lim.tiltLimitDeg, lim.tiltLimitDeg);
    out.rollDeg = std::clamp(lim.velocityTiltGainDegPerMps * (desiredRight - vRight),
                             -lim.tiltLimitDeg, lim.tiltLimitDeg);
    return out;
  }

  void classifyTerminal() {
    const EpisodeSpec& ep = config_.episode;
    const UavBody& uav = state_.uav;
    const GroundTruth gt = computeGroundTruth();

    const bool overPlatform = std::abs(gt.platformFrameX) <= ep.platformHalfExtentM &&
                              std::abs(gt.platformFrameY) <= ep.platformHalfExtentM;
    if (overPlatform && uav.position.z <= ep.contactThresholdM) {
      state_.terminal = Terminal::Landing;
      return;
    }
    if (!overPlatform && uav.position.z <= 0.0) {
      state_.terminal = Terminal::Crash;
      return;
    }
    if (std::abs(uav.rollDeg) > ep.attitudeLimitDeg || std::abs(uav.pitchDeg) > ep.attitudeLimitDeg) {
      state_.terminal = Terminal::Crash;
      return;
    }
    if (std::abs(uav.position.x) > config_.arena.extentX / 2.0 ||
        std::abs(uav.position.y) > config_.arena.extentY / 2.0 ||
        uav.position.z > config_.arena.ceiling) {
      state_.terminal = Terminal::Crash;
      return;
    }
    if (state_.timeS >= ep.maxSeconds) state_.terminal = Terminal::Timeout;
  }

  GroundTruth computeGroundTruth() const {
    const UavBody& uav = state_.uav;
    const PlatformState& plat = state_.platform;
    GroundTruth gt;
    const double dx = plat.x - uav.position.x;
    const double dy = plat.y - uav.position.y;
    gt.horizontalDistanceM = std::sqrt(dx * dx + dy * dy);
    gt.heightM = uav.position.z;
    gt.headingErrorDeg =
        radToDeg(std::atan2(dx * std::sin(degToRad(uav.yawDeg)) - dy * std::cos(degToRad(uav.yawDeg)),
                            dx * std::cos(degToRad(uav.yawDeg)) + dy * std::sin(degToRad(uav.yawDeg))));
    const double h = degToRad(plat.headingDeg);
    const double rx = uav.position.x - plat.x;
    const double ry = uav.position.y - plat.y;
    gt.platformFrameX = std::cos(h) * rx + std::sin(h) * ry;
    gt.platformFrameY = -std::sin(h) * rx + std::cos(h) * ry;
    gt.insideTargetVolume = std::abs(gt.platformFrameX) <= config_.episode.targetHalfExtentM &&
                            std::abs(gt.platformFrameY) <= config_.episode.targetHalfExtentM &&
                            uav.position.z >= 0.0 &&
                            uav.position.z <= config_.episode.targetVolumeHeightM;
    if (gt.horizontalDistanceM > 1e-12) {
      gt.uavRadialSpeedMps = (uav.velocity.x * dx + uav.velocity.y * dy) / gt.horizontalDistanceM;
    }
    gt.descentSpeedMps = -uav.velocity.z;
    return gt;
  }

  StepResult makeResult() {
    StepResult r;
    r.terminal = state_.terminal;
    r.groundTruth = computeGroundTruth();
    DetectionScene scene;
    scene.uavX = state_.uav.position.x;
    scene.uavY = state_.uav.position.y;
    scene.relativeHeightM = state_.uav.position.z;
    scene.yawDeg = state_.uav.yawDeg;
    scene.gimbalPitchDeg = state_.uav.gimbalPitchDeg;
    scene.targetX = state_.platform.x;
    scene.targetY = state_.platform.y;
    scene.targetHeadingDeg = state_.platform.headingDeg;
    scene.targetHalfExtentM = config_.episode.targetHalfExtentM;
    r.detection = render_detection(scene, config_.camera, config_.noise, state_.rng);
    r.state = state_;
    return r;
  }

  SimConfig config_;
  SimState state_;
};

// One-line StepResult summary for trajectory dumps; fields are
// frame time terminal x y z roll pitch yaw gimbal platX platY platHeading
// hdist height inTarget, space-separated with 6-decimal reals.
inline std::string format_step_record(const StepResult& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%lld %.6f %s %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f %d",
                static_cast<long long>(r.state.frameId), r.state.timeS, to_string(r.terminal),
                r.state.uav.position.x, r.state.uav.position.y, r.state.uav.position.z,
                r.state.uav.rollDeg, r.state.uav.pitchDeg, r.state.uav.yawDeg,
                r.state.uav.gimbalPitchDeg, r.state.platform.x, r.state.platform.y,
                r.state.platform.headingDeg, r.groundTruth.horizontalDistanceM,
                r.groundTruth.heightM, r.groundTruth.insideTargetVolume ? 1 : 0);
  return std::string(buf);
}

}  // namespace padland::sim
