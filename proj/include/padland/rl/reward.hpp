// Milestone-based shaping rewards for the landing task.
//
// Clauses, evaluated independently every step against simulator ground truth:
//   - heading milestone: turned 10 degrees closer +0.1 / further -0.3
//   - heading band: within 5 degrees of the target +0.1
//   - horizontal milestone: moved 0.2 m closer +0.1 / further -0.3
//   - vertical milestone: moved 0.2 m closer +0.1 / further -0.3
//   - entered the landing target volume +15 (on the inward transition)
//   - inside the landing target volume +0.2 (every step while inside)
// Milestones are cumulative-progress thresholds, not per-step deltas: each
// axis keeps the value at which its clause last fired and fires again only
// when the current value differs from it by a full threshold, after which the
// milestone snaps to the current value. Oscillation smaller than a threshold
// around a fixed point therefore never scores. Penalties outweigh rewards by
// design. The per-step total always lies in [-0.9, +15.6].
#pragma once

#include <cmath>

#include "padland/sim/world.hpp"

namespace padland::rl {

struct RewardSpec {
  double turnTowardReward = 0.1;
  double turnAwayPenalty = -0.3;
  double withinHeadingReward = 0.1;
  double moveTowardReward = 0.1;   // per axis
  double moveAwayPenalty = -0.3;   // per axis
  double enterTargetReward = 15.0;
  double stayInTargetReward = 0.2;
  double headingMilestoneDeg = 10.0;
  double headingBandDeg = 5.0;
  double distanceMilestoneM = 0.2;

  double minPerStep() const { return turnAwayPenalty + 2.0 * moveAwayPenalty; }
  double maxPerStep() const {
    return turnTowardReward + withinHeadingReward + 2.0 * moveTowardReward +
           enterTargetReward + stayInTargetReward;
  }
};

struct ProgressTracker {
  double lastMilestoneHeadingErrorDeg = 0.0;
  double lastMilestoneHorizontalDistanceM = 0.0;
  double lastMilestoneVerticalDistanceM = 0.0;
  bool inTarget = false;

  static ProgressTracker fromGroundTruth(const sim::GroundTruth& gt) {
    ProgressTracker t;
    t.lastMilestoneHeadingErrorDeg = std::abs(gt.headingErrorDeg);
    t.lastMilestoneHorizontalDistanceM = gt.horizontalDistanceM;
    t.lastMilestoneVerticalDistanceM = gt.heightM;
    t.inTarget = gt.insideTargetVolume;
    return t;
  }
};

struct RewardOutcome {
  double reward = 0.0;
  ProgressTracker tracker;
};

inline RewardOutcome compute_reward(const ProgressTracker& tracker, const sim::GroundTruth& gt,
                                    const RewardSpec& spec) {
  RewardOutcome out;
  out.tracker = tracker;
  double r = 0.0;

  const double headingErr = std::abs(gt.headingErrorDeg);
  if (tracker.lastMilestoneHeadingErrorDeg - headingErr >= spec.headingMilestoneDeg) {
    r += spec.turnTowardReward;
    out.tracker.lastMilestoneHeadingErrorDeg = headingErr;
  } else if (headingErr - tracker.lastMilestoneHeadingErrorDeg >= spec.headingMilestoneDeg) {
    r += spec.turnAwayPenalty;
    out.tracker.lastMilestoneHeadingErrorDeg = headingErr;
  }
  if (headingErr <= spec.headingBandDeg) r += spec.withinHeadingReward;

  if (tracker.lastMilestoneHorizontalDistanceM - gt.horizontalDistanceM >= spec.distanceMilestoneM) {
    r += spec.moveTowardReward;
    out.tracker.lastMilestoneHorizontalDistanceM = gt.horizontalDistanceM;
  } else if (gt.horizontalDistanceM - tracker.lastMilestoneHorizontalDistanceM >=
             spec.distanceMilestoneM) {
    r += spec.moveAwayPenalty;
    out.tracker.lastMilestoneHorizontalDistanceM = gt.horizontalDistanceM;
  }

  if (tracker.lastMilestoneVerticalDistanceM - gt.heightM >= spec.distanceMilestoneM) {
    r += spec.moveTowardReward;
    out.tracker.lastMilestoneVerticalDistanceM = gt.heightM;
  } else if (gt.heightM - tracker.lastMilestoneVerticalDistanceM >= spec.distanceMilestoneM) {
    r += spec.moveAwayPenalty;
    out.tracker.lastMilestoneVerticalDistanceM = gt.heightM;
  }

  if (gt.insideTargetVolume && !tracker.inTarget) r += spec.enterTargetReward;
  if (gt.insideTargetVolume) r += spec.stayInTargetReward;
  out.tracker.inTarget = gt.insideTargetVolume;

  out.reward = r;
  return out;
}

}  // namespace padland::rl
