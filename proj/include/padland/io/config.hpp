// JSON configuration loading. Every field is optional and falls back to the
// compiled-in defaults, so a config file only needs to spell out what it
// changes. Unknown keys are ignored.
#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "padland/eval/harness.hpp"
#include "padland/rl/landing_env.hpp"
#include "padland/rl/normalize.hpp"
#include "padland/rl/ppo.hpp"
#include "padland/rl/reward.hpp"
#include "padland/result.hpp"
#include "padland/sim/world.hpp"

namespace padland::io {

using nlohmann::json;

struct AppConfig {
  sim::SimConfig sim;
  rl::TrainConfig train;
  eval::EvalConfig eval;
  rl::RewardSpec reward;
  rl::NormalizationBounds bounds;
  int holdLastFrames = 8;
};

namespace detail {

inline sim::PathKind pathKindFromString(const std::string& s) {
  if (s == "linear") return sim::PathKind::Linear;
  if (s == "circular") return sim::PathKind::Circular;
  if (s == "waypoint") return sim::PathKind::WaypointRandom;
  throw std::invalid_argument("config: unknown path kind '" + s + "'");
}

inline void applySim(const json& j, sim::SimConfig& cfg) {
  if (j.contains("arena")) {
    const auto& a = j["arena"];
    cfg.arena.extentX = a.value("extent_x", cfg.arena.extentX);
    cfg.arena.extentY = a.value("extent_y", cfg.arena.extentY);
    cfg.arena.ceiling = a.value("ceiling", cfg.arena.ceiling);
    cfg.arena.physicsHz = a.value("physics_hz", cfg.arena.physicsHz);
    cfg.arena.controlFps = a.value("control_fps", cfg.arena.controlFps);
  }
  if (j.contains("episode")) {
    const auto& e = j["episode"];
    auto& ep = cfg.episode;
    ep.spawnAltitudeMin = e.value("spawn_altitude_min", ep.spawnAltitudeMin);
    ep.spawnAltitudeMax = e.value("spawn_altitude_max", ep.spawnAltitudeMax);
    ep.spawnLateralMin = e.value("spawn_lateral_min", ep.spawnLateralMin);
    ep.spawnLateralMax = e.value("spawn_lateral_max", ep.spawnLateralMax);
    ep.spawnHeadingErrorDeg = e.value("spawn_heading_error_deg", ep.spawnHeadingErrorDeg);
    ep.platformSpawnRadius = e.value("platform_spawn_radius", ep.platformSpawnRadius);
    ep.platformSpeedMin = e.value("platform_speed_min", ep.platformSpeedMin);
    ep.platformSpeedMax = e.value("platform_speed_max", ep.platformSpeedMax);
    ep.circleRadiusM = e.value("circle_radius_m", ep.circleRadiusM);
    ep.maxSeconds = e.value("max_seconds", ep.maxSeconds);
    if (e.contains("paths")) {
      ep.paths.clear();
      for (const auto& p : e["paths"]) ep.paths.push_back(pathKindFromString(p));
    }
  }
  if (j.contains("uav")) {
    const auto& u = j["uav"];
    cfg.uav.massKg = u.value("mass_kg", cfg.uav.massKg);
    cfg.uav.armLengthM = u.value("arm_length_m", cfg.uav.armLengthM);
    cfg.uav.maxMotorThrustN = u.value("max_motor_thrust_n", cfg.uav.maxMotorThrustN);
    cfg.uav.inertiaX = u.value("inertia_x", cfg.uav.inertiaX);
    cfg.uav.inertiaY = u.value("inertia_y", cfg.uav.inertiaY);
    cfg.uav.inertiaZ = u.value("inertia_z", cfg.uav.inertiaZ);
    cfg.uav.linearDragNsPerM = u.value("linear_drag", cfg.uav.linearDragNsPerM);
  }
  if (j.contains("pid")) {
    const auto& p = j["pid"];
    cfg.pid.angleP = p.value("angle_p", cfg.pid.angleP);
    cfg.pid.rateP = p.value("rate_p", cfg.pid.rateP);
    cfg.pid.rateI = p.value("rate_i", cfg.pid.rateI);
    cfg.pid.climbP = p.value("climb_p", cfg.pid.climbP);
  }
  if (j.contains("control")) {
    const auto& c = j["control"];
    cfg.control.tiltLimitDeg = c.value("tilt_limit_deg", cfg.control.tiltLimitDeg);
    cfg.control.yawRateLimitDegS = c.value("yaw_rate_limit_deg_s", cfg.control.yawRateLimitDegS);
    cfg.control.climbRateLimitMps = c.value("climb_rate_limit_mps", cfg.control.climbRateLimitMps);
    cfg.control.horizontalSpeedCapMps =
        c.value("horizontal_speed_cap_mps", cfg.control.horizontalSpeedCapMps);
    cfg.control.gimbalSlewDegPerS = c.value("gimbal_slew_deg_s", cfg.control.gimbalSlewDegPerS);
  }
  if (j.contains("camera")) {
    const auto& c = j["camera"];
    cfg.camera.imageWidth = c.value("image_width", cfg.camera.imageWidth);
    cfg.camera.imageHeight = c.value("image_height", cfg.camera.imageHeight);
    cfg.camera.hfovDeg = c.value("hfov_deg", cfg.camera.hfovDeg);
    cfg.camera.vfovDeg = c.value("vfov_deg", cfg.camera.vfovDeg);
    const std::string mapping = c.value("mapping", std::string("linear"));
    cfg.camera.mapping = mapping == "exact" ? geom::AngleMapping::ExactPinhole
                                            : geom::AngleMapping::Linear;
  }
  if (j.contains("noise")) {
    const auto& n = j["noise"];
    cfg.noise.pixelJitterSigma = n.value("pixel_jitter_sigma", cfg.noise.pixelJitterSigma);
    cfg.noise.missProbability = n.value("miss_probability", cfg.noise.missProbability);
  }
  if (j.contains("wind")) {
    const auto& w = j["wind"];
    cfg.wind.enabled = w.value("enabled", cfg.wind.enabled);
    cfg.wind.maxForceN = w.value("max_force_n", cfg.wind.maxForceN);
  }
}

inline void applyTrain(const json& j, rl::TrainConfig& cfg) {
  if (!j.contains("train")) return;
  const auto& t = j["train"];
  cfg.gamma = t.value("gamma", cfg.gamma);
  cfg.lambda = t.value("lambda", cfg.lambda);
  cfg.clipEpsilon = t.value("clip_epsilon", cfg.clipEpsilon);
  cfg.learningRate = t.value("learning_rate", cfg.learningRate);
  cfg.rolloutLength = t.value("rollout_length", cfg.rolloutLength);
  cfg.epochs = t.value("epochs", cfg.epochs);
  cfg.minibatchSize = t.value("minibatch_size", cfg.minibatchSize);
  cfg.totalSteps = t.value("total_steps", cfg.totalSteps);
  cfg.entropyCoef = t.value("entropy_coef", cfg.entropyCoef);
  cfg.entropyCoefFinal = t.value("entropy_coef_final", cfg.entropyCoefFinal);
  cfg.valueCoef = t.value("value_coef", cfg.valueCoef);
  cfg.learningRateFinal = t.value("learning_rate_final", cfg.learningRateFinal);
  cfg.maxGradNorm = t.value("max_grad_norm", cfg.maxGradNorm);
  cfg.numEnvs = t.value("num_envs", cfg.numEnvs);
  cfg.seed = t.value("seed", cfg.seed);
  cfg.stopAtSuccessRate = t.value("stop_at_success_rate", cfg.stopAtSuccessRate);
  cfg.successWindow = t.value("success_window", cfg.successWindow);
  cfg.checkpointEveryIters = t.value("checkpoint_every_iters", cfg.checkpointEveryIters);
  if (t.contains("hidden")) {
    cfg.arch.hidden.clear();
    for (const auto& h : t["hidden"]) cfg.arch.hidden.push_back(h.get<int>());
  }
}

inline void applyEval(const json& j, eval::EvalConfig& cfg) {
  if (!j.contains("eval")) return;
  const auto& e = j["eval"];
  cfg.runs = e.value("runs", cfg.runs);
  cfg.startAltitudeMinM = e.value("start_altitude_min", cfg.startAltitudeMinM);
  cfg.startAltitudeMaxM = e.value("start_altitude_max", cfg.startAltitudeMaxM);
  cfg.uavSpeedCapMps = e.value("uav_speed_cap_mps", cfg.uavSpeedCapMps);
  cfg.seed = e.value("seed", cfg.seed);
  cfg.maxSecondsPerRun = e.value("max_seconds_per_run", cfg.maxSecondsPerRun);
  if (e.contains("platform_speeds")) {
    cfg.platformSpeedsMps.clear();
    for (const auto& s : e["platform_speeds"]) cfg.platformSpeedsMps.push_back(s.get<double>());
  }
  if (e.contains("platform_paths")) {
    cfg.platformPaths.clear();
    for (const auto& p : e["platform_paths"]) cfg.platformPaths.push_back(pathKindFromString(p));
  }
  if (e.contains("noise")) {
    const auto& n = e["noise"];
    cfg.noise.pixelJitterSigma = n.value("pixel_jitter_sigma", cfg.noise.pixelJitterSigma);
    cfg.noise.missProbability = n.value("miss_probability", cfg.noise.missProbability);
  }
}

inline void applyBounds(const json& j, rl::NormalizationBounds& bounds) {
  if (!j.contains("bounds")) return;
  const auto& b = j["bounds"];
  bounds.maxGroundDistanceM = b.value("max_ground_distance_m", bounds.maxGroundDistanceM);
  bounds.maxAltitudeM = b.value("max_altitude_m", bounds.maxAltitudeM);
}

}  // namespace detail

inline Result<AppConfig> parse_config(const std::string& text) {
  AppConfig cfg;
  if (text.empty()) return cfg;
  json j;
  try {
    j = json::parse(text);
    detail::applySim(j, cfg.sim);
    detail::applyTrain(j, cfg.train);
    detail::applyEval(j, cfg.eval);
    detail::applyBounds(j, cfg.bounds);
    cfg.holdLastFrames = j.value("hold_last_frames", cfg.holdLastFrames);
  } catch (const std::exception& e) {
    return Result<AppConfig>::failure(std::string("config parse error: ") + e.what());
  }
  cfg.eval.baseSim = cfg.sim;
  cfg.eval.bounds = cfg.bounds;
  cfg.eval.holdLastFrames = cfg.holdLastFrames;
  return cfg;
}

inline Result<AppConfig> load_config(const std::string& path) {
  if (path.empty()) return parse_config("");
  std::ifstream in(path);
  if (!in) return Result<AppConfig>::failure("cannot open config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

}  // namespace padland::io
