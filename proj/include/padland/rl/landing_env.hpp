// Training environment: SimWorld composed with the per-frame vision pipeline
// (detection -> extraction -> gimbal tracking -> normalization) and the
// milestone reward. The policy only ever sees the normalized 3-vector built
// from (possibly noisy, possibly held-over) detections; rewards come from
// simulator ground truth.
//
// Detection handling mirrors the deployment control loop: a missed or
// out-of-range frame holds the last observation for up to holdLastFrames
// frames, after which the episode ends as lost (the runtime would enter its
// search fallback; the policy is no longer in control, so there is nothing to
// learn from those steps).
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "padland/action.hpp"
#include "padland/geometry.hpp"
#include "padland/rl/normalize.hpp"
#include "padland/rl/reward.hpp"
#include "padland/rl/rollout.hpp"
#include "padland/sim/world.hpp"

namespace padland::rl {

class LandingEnv {
 public:
  LandingEnv(sim::SimConfig config, RewardSpec rewardSpec, NormalizationBounds bounds,
             std::uint64_t episodeSeedStream, int holdLastFrames = 8)
      : world_(std::move(config)),
        rewardSpec_(rewardSpec),
        bounds_(bounds),
        episodeRng_(episodeSeedStream),
        holdLastFrames_(holdLastFrames) {}

  int observationSize() const { return 3; }
  int actionSize() const { return 4; }
  const sim::SimWorld& world() const { return world_; }

  std::vector<double> reset(std::uint64_t seed) {
    const sim::StepResult r = world_.reset(seed);
    tracker_ = ProgressTracker::fromGroundTruth(r.groundTruth);
    lastObservation_.reset();
    lastNormalized_ = {0.0, 0.0, 0.0};
    lastObsTime_ = 0.0;
    missedFrames_ = 0;
    finished_ = false;
    ingestDetection(r);
    return {lastNormalized_.begin(), lastNormalized_.end()};
  }

  std::vector<double> resetNext() { return reset(episodeRng_.nextU64()); }

  EnvStep step(std::span<const double> action) {
    ControlAction act{action[0], action[1], action[2], action[3]};
    const sim::StepResult r = world_.step(act);

    EnvStep out;
    const RewardOutcome ro = compute_reward(tracker_, r.groundTruth, rewardSpec_);
    tracker_ = ro.tracker;
    out.reward = ro.reward;

    ingestDetection(r);
    out.done = r.terminal != sim::Terminal::None || missedFrames_ > holdLastFrames_;
    // Timeouts and lost tracking cut the horizon without reaching a terminal
    // state of the task; landing and crashing are true terminals.
    out.truncated = out.done && r.terminal != sim::Terminal::Landing &&
                    r.terminal != sim::Terminal::Crash;
    out.success = r.terminal == sim::Terminal::Landing &&
                  std::abs(r.groundTruth.platformFrameX) <= world_.config().episode.targetHalfExtentM &&
                  std::abs(r.groundTruth.platformFrameY) <= world_.config().episode.targetHalfExtentM;
    finished_ = out.done;
    out.observation.assign(lastNormalized_.begin(), lastNormalized_.end());
    return out;
  }

  bool finished() const { return finished_; }

 private:
  void ingestDetection(const sim::StepResult& r) {
    if (r.detection.has_value()) {
      geom::VehicleState vehicle;
      vehicle.heightM = r.state.uav.position.z;
      vehicle.gimbalPitchDeg = r.state.uav.gimbalPitchDeg;
      vehicle.speedMps = r.groundTruth.uavRadialSpeedMps;
      const double dt = lastObservation_ ? r.state.timeS - lastObsTime_ : 0.0;
      auto extracted =
          geom::extract_observation(*r.detection, world_.config().camera, vehicle,
                                    lastObservation_, dt);
      if (extracted.ok()) {
        const auto& obs = extracted.value();
        lastObservation_ = obs;
        lastObsTime_ = r.state.timeS;
        lastNormalized_ = normalize_observation(obs, vehicle.heightM, bounds_);
        missedFrames_ = 0;
        world_.setGimbal(sim::gimbal_track(r.state.uav.gimbalPitchDeg, obs.signedVerticalAngleDeg,
                                           world_.config().control.gimbalSlewDegPerS,
                                           world_.config().arena.controlPeriod()));
        return;
      }
    }
    missedFrames_ += 1;  // hold lastNormalized_ as-is
  }

  sim::SimWorld world_;
  RewardSpec rewardSpec_;
  NormalizationBounds bounds_;
  Rng episodeRng_;
  int holdLastFrames_;

  ProgressTracker tracker_;
  std::optional<geom::PositionalObservation> lastObservation_;
  std::array<double, 3> lastNormalized_{};
  double lastObsTime_ = 0.0;
  int missedFrames_ = 0;
  bool finished_ = false;
};

}  // namespace padland::rl
