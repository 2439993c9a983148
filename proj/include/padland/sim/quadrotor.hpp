// Rigid-body quadrotor with per-motor thrust and cascaded PID stabilization.
//
// Frames and signs:
//   - World: x forward, y left, z up. Body matches world at zero attitude.
//   - Euler ZYX (yaw, pitch, roll). Positive pitch tilts the nose down and
//     accelerates the craft forward (+x); positive roll accelerates it to the
//     right (-y); positive yaw rate turns counterclockwise.
//   - X motor layout: 0 front-left, 1 front-right, 2 rear-right, 3 rear-left.
//
// Integration is semi-implicit Euler at the configured physics step. All
// state is plain doubles; identical inputs give bit-identical trajectories.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "padland/vec3.hpp"

namespace padland::sim {

struct UavParams {
  double massKg = 0.43;          // Mavic-class airframe
  double armLengthM = 0.10;
  double inertiaX = 2.2e-3;      // kg m^2
  double inertiaY = 2.2e-3;
  double inertiaZ = 4.0e-3;
  double maxMotorThrustN = 2.2;  // per motor
  double yawTorquePerThrust = 0.012;  // motor drag coefficient, N*m per N
  double linearDragNsPerM = 0.05;
  double gravityMps2 = 9.81;

  double hoverForcePerMotor() const { return massKg * gravityMps2 / 4.0; }
};

struct UavBody {
  Vec3 position;           // m, world
  Vec3 velocity;           // m/s, world
  double rollDeg = 0.0;
  double pitchDeg = 0.0;
  double yawDeg = 0.0;
  Vec3 angularVelDegS;     // body rates p, q, r
  std::array<double, 4> motorForces{0.0, 0.0, 0.0, 0.0};
  double gimbalPitchDeg = 0.0;

  bool finite() const {
    return std::isfinite(position.x) && std::isfinite(position.y) &&
           std::isfinite(position.z) && std::isfinite(velocity.x) &&
           std::isfinite(velocity.y) && std::isfinite(velocity.z) &&
           std::isfinite(rollDeg) && std::isfinite(pitchDeg) && std::isfinite(yawDeg) &&
           std::isfinite(angularVelDegS.x) && std::isfinite(angularVelDegS.y) &&
           std::isfinite(angularVelDegS.z);
  }
};

// Attitude + climb-rate targets for the stabilization cascade.
struct AttitudeSetpoint {
  double rollDeg = 0.0;
  double pitchDeg = 0.0;
  double yawRateDegS = 0.0;
  double climbRateMps = 0.0;
};

struct PidGains {
  double angleP = 10.0;        // angle error -> rate setpoint, 1/s
  double rateP = 30.0;         // rate error -> angular accel, 1/s
  double rateI = 2.0;          // integral on rate error, 1/s^2
  double rateIntegralLimit = 60.0;  // deg/s accumulated
  double climbP = 4.0;         // climb-rate error -> vertical accel, 1/s
  double rateLimitDegS = 220.0;
};

struct PidState {
  Vec3 rateIntegralDeg;  // integrated rate error per axis
};

// One stabilization step: setpoints -> four motor forces, clamped to
// [0, maxMotorThrust]. Throws on non-finite body state, that is a simulation
// bug, not a recoverable condition.
inline std::array<double, 4> pid_stabilize(const UavBody& body, const AttitudeSetpoint& sp,
                                           const UavParams& params, const PidGains& gains,
                                           PidState& pid, double dtS) {
  if (!body.finite()) throw std::logic_error("pid_stabilize: non-finite body state");

  auto clampRate = [&](double r) {
    return std::clamp(r, -gains.rateLimitDegS, gains.rateLimitDegS);
  };
  const double rollRateSp = clampRate(gains.angleP * (sp.rollDeg - body.rollDeg));
  const double pitchRateSp = clampRate(gains.angleP * (sp.pitchDeg - body.pitchDeg));
  const double yawRateSp = clampRate(sp.yawRateDegS);

  const Vec3 rateErr = {rollRateSp - body.angularVelDegS.x,
                        pitchRateSp - body.angularVelDegS.y,
                        yawRateSp - body.angularVelDegS.z};
  pid.rateIntegralDeg += rateErr * dtS;
  auto clampI = [&](double v) {
    return std::clamp(v, -gains.rateIntegralLimit, gains.rateIntegralLimit);
  };
  pid.rateIntegralDeg = {clampI(pid.rateIntegralDeg.x), clampI(pid.rateIntegralDeg.y),
                         clampI(pid.rateIntegralDeg.z)};

  // Commanded angular acceleration (rad/s^2) -> torque via the inertia.
  const Vec3 alphaRad = {
      degToRad(gains.rateP * rateErr.x + gains.rateI * pid.rateIntegralDeg.x),
      degToRad(gains.rateP * rateErr.y + gains.rateI * pid.rateIntegralDeg.y),
      degToRad(gains.rateP * rateErr.z + gains.rateI * pid.rateIntegralDeg.z)};
  const Vec3 torque = {params.inertiaX * alphaRad.x, params.inertiaY * alphaRad.y,
                       params.inertiaZ * alphaRad.z};

  // Collective thrust: hold the commanded climb rate, compensating for tilt.
  const double verticalAccel =
      params.gravityMps2 + gains.climbP * (sp.climbRateMps - body.velocity.z);
  const double tilt = std::max(
      std::cos(degToRad(body.rollDeg)) * std::cos(degToRad(body.pitchDeg)), 0.5);
  double totalForce = params.massKg * verticalAccel / tilt;
  totalForce = std::clamp(totalForce, 0.0, 4.0 * params.maxMotorThrustN);

  const double arm = params.armLengthM / std::sqrt(2.0);
  const double tx = torque.x / (4.0 * arm);
  const double ty = torque.y / (4.0 * arm);
  const double tz = torque.z / (4.0 * params.yawTorquePerThrust);
  const double base = totalForce / 4.0;

  std::array<double, 4> forces = {
      base + tx - ty - tz,   // front-left
      base - tx - ty + tz,   // front-right
      base - tx + ty - tz,   // rear-right
      base + tx + ty + tz};  // rear-left
  for (auto& f : forces) f = std::clamp(f, 0.0, params.maxMotorThrustN);
  return forces;
}

// Advances the rigid body by one physics substep with the given motor forces
// plus an optional external world-frame disturbance force.
inline void integrate_body(UavBody& body, const UavParams& params, double dtS,
                           const Vec3& disturbanceForceN = {}) {
  const double arm = params.armLengthM / std::sqrt(2.0);
  const auto& f = body.motorForces;
  const double thrust = f[0] + f[1] + f[2] + f[3];
  const Vec3 torque = {arm * (f[0] - f[1] - f[2] + f[3]),
                       arm * (-f[0] - f[1] + f[2] + f[3]),
                       params.yawTorquePerThrust * (-f[0] + f[1] - f[2] + f[3])};

  // Angular dynamics in the body frame, including the gyroscopic term.
  const Vec3 omegaRad = {degToRad(body.angularVelDegS.x), degToRad(body.angularVelDegS.y),
                         degToRad(body.angularVelDegS.z)};
  const Vec3 inertiaOmega = {params.inertiaX * omegaRad.x, params.inertiaY * omegaRad.y,
                             params.inertiaZ * omegaRad.z};
  const Vec3 gyro = omegaRad.cross(inertiaOmega);
  const Vec3 alphaRad = {(torque.x - gyro.x) / params.inertiaX,
                         (torque.y - gyro.y) / params.inertiaY,
                         (torque.z - gyro.z) / params.inertiaZ};
  body.angularVelDegS += Vec3{radToDeg(alphaRad.x), radToDeg(alphaRad.y),
                              radToDeg(alphaRad.z)} * dtS;

  // Euler-angle kinematics from body rates.
  const double p = degToRad(body.angularVelDegS.x);
  const double q = degToRad(body.angularVelDegS.y);
  const double r = degToRad(body.angularVelDegS.z);
  const double sr = std::sin(degToRad(body.rollDeg)), cr = std::cos(degToRad(body.rollDeg));
  const double tp = std::tan(degToRad(body.pitchDeg)), cp = std::cos(degToRad(body.pitchDeg));
  body.rollDeg += radToDeg(p + sr * tp * q + cr * tp * r) * dtS;
  body.pitchDeg += radToDeg(cr * q - sr * r) * dtS;
  body.yawDeg = wrapDeg(body.yawDeg + radToDeg((sr * q + cr * r) / cp) * dtS);

  const Mat3 rot = eulerZyxToMatrix(body.rollDeg, body.pitchDeg, body.yawDeg);
  Vec3 force = rot * Vec3{0.0, 0.0, thrust};
  force.z -= params.massKg * params.gravityMps2;
  force += body.velocity * -params.linearDragNsPerM;
  force += disturbanceForceN;

  body.velocity += force * (dtS / params.massKg);
  body.position += body.velocity * dtS;
}

}  // namespace padland::sim
