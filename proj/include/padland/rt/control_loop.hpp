// Deployment control loop: one detection event in, one command out.
//
// With a detection present: extract the positional observation, slew the
// gimbal toward the measured vertical angle, normalize, run the policy, and
// command the distribution mean (no sampling at deployment). On a miss the
// last observation is held for up to holdLastFrames frames; after that the
// loop drops to the search fallback (zero lateral motion, hold altitude,
// gimbal frozen) until the detector reacquires or the abort window runs out.
//
// With sampling disabled the loop is a pure function of (state, event,
// policy): feeding the same canonical event sequence through run_stream
// reproduces in-process outputs byte for byte.
#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "padland/geometry.hpp"
#include "padland/nn/policy.hpp"
#include "padland/rl/normalize.hpp"
#include "padland/rt/protocol.hpp"
#include "padland/sim/detection.hpp"

namespace padland::rt {

enum class Phase { Searching, Tracking, Landed, Aborted };

inline const char* to_string(Phase p) {
  switch (p) {
    case Phase::Searching: return "searching";
    case Phase::Tracking: return "tracking";
    case Phase::Landed: return "landed";
    default: return "aborted";
  }
}

struct LoopConfig {
  geom::CameraModel camera = geom::CameraModel::defaults();
  rl::NormalizationBounds bounds;
  int holdLastFrames = 8;       // 1 s at 8 FPS
  int abortAfterFrames = 240;   // 30 s of fruitless searching
  double gimbalSlewDegPerS = 90.0;
  double nominalPeriodS = 0.125;
  double contactThresholdM = 0.05;
};

struct LoopState {
  Phase phase = Phase::Searching;
  std::optional<geom::PositionalObservation> lastObservation;
  std::array<double, 3> lastNormalized{0.0, 0.0, 0.0};
  double lastObservationTimestampS = 0.0;
  double lastTimestampS = 0.0;
  std::int64_t lastFrameId = -1;
  int missedFrames = 0;
  int searchingFrames = 0;
};

struct ControlStepOutput {
  ControlAction action;
  double gimbalCommandDeg = 0.0;
};

// One control step. Malformed events (non-finite fields, non-monotone frame
// id or timestamp, degenerate bbox) are rejected without touching the state.
template <typename PolicyT>
Result<ControlStepOutput> control_step(LoopState& state, const DetectionEvent& event,
                                       const PolicyT& policy, const LoopConfig& cfg,
                                       nn::Workspace& ws) {
  if (!std::isfinite(event.timestampS) || !std::isfinite(event.vehicle.heightM) ||
      !std::isfinite(event.vehicle.gimbalPitchDeg) || !std::isfinite(event.vehicle.speedMps))
    return Result<ControlStepOutput>::failure("control_step: non-finite event field");
  if (event.frameId <= state.lastFrameId)
    return Result<ControlStepOutput>::failure("control_step: non-monotone frame id");
  if (state.lastFrameId >= 0 && event.timestampS <= state.lastTimestampS)
    return Result<ControlStepOutput>::failure("control_step: non-increasing timestamp");
  if (event.bbox.has_value() && event.bbox->degenerate())
    return Result<ControlStepOutput>::failure("control_step: degenerate bounding box");

  const double framePeriod =
      state.lastFrameId >= 0 ? event.timestampS - state.lastTimestampS : cfg.nominalPeriodS;
  state.lastFrameId = event.frameId;
  state.lastTimestampS = event.timestampS;

  ControlStepOutput out;
  out.gimbalCommandDeg = event.vehicle.gimbalPitchDeg;

  const bool landedNow = state.phase == Phase::Landed ||
                         (state.phase == Phase::Tracking &&
                          event.vehicle.heightM <= cfg.contactThresholdM);
  if (landedNow) {
    state.phase = Phase::Landed;
    return out;  // zero action, gimbal held
  }
  if (state.phase == Phase::Aborted) return out;

  bool haveObservation = false;
  if (event.bbox.has_value() && event.vehicle.heightM > 0.0) {
    const double dt = state.lastObservation ? event.timestampS - state.lastObservationTimestampS
                                            : 0.0;
    auto extracted = geom::extract_observation(*event.bbox, cfg.camera, event.vehicle,
                                               state.lastObservation, dt);
    if (extracted.ok()) {
      const auto& obs = extracted.value();
      state.lastObservation = obs;
      state.lastObservationTimestampS = event.timestampS;
      state.lastNormalized =
          rl::normalize_observation(obs, event.vehicle.heightM, cfg.bounds);
      state.missedFrames = 0;
      state.searchingFrames = 0;
      state.phase = Phase::Tracking;
      out.gimbalCommandDeg =
          sim::gimbal_track(event.vehicle.gimbalPitchDeg, obs.signedVerticalAngleDeg,
                            cfg.gimbalSlewDegPerS, framePeriod);
      haveObservation = true;
    }
  }

  if (!haveObservation) {
    state.missedFrames += 1;
    if (state.lastObservation.has_value() && state.missedFrames <= cfg.holdLastFrames) {
      haveObservation = true;  // hold-last window: keep flying on the old observation
    } else {
      state.phase = Phase::Searching;
      state.searchingFrames += 1;
      if (state.searchingFrames > cfg.abortAfterFrames) state.phase = Phase::Aborted;
      return out;  // zero lateral, hold altitude, gimbal held
    }
  }

  const std::vector<double> mean = policy.actMean(state.lastNormalized, ws);
  out.action = ControlAction{mean[0], mean[1], mean[2], mean[3]};
  return out;
}

struct StreamStats {
  std::uint64_t eventsConsumed = 0;
  std::uint64_t commandsEmitted = 0;
  double meanLatencyUs = 0.0;
  double p99LatencyUs = 0.0;
  double maxLatencyUs = 0.0;
  Phase finalPhase = Phase::Searching;
};

// Pumps detection-event lines from `in` to command lines on `out` until EOF,
// recording per-event control_step latency. Event cadence is source-driven;
// `cfg.nominalPeriodS` only seeds the first gimbal slew window. Exactly one
// command is emitted per consumed event. Parse or sequencing failures abort
// with the offending line number.
template <typename PolicyT>
Result<StreamStats> run_stream(std::istream& in, std::ostream& out, const PolicyT& policy,
                               const LoopConfig& cfg) {
  LoopState state;
  nn::Workspace ws;
  StreamStats stats;
  std::vector<double> latenciesUs;
  std::string line;
  std::uint64_t lineNo = 0;

  while (std::getline(in, line)) {
    lineNo += 1;
    if (line.empty()) continue;
    const auto event = parse_detection_event(line);
    if (!event.ok())
      return Result<StreamStats>::failure("line " + std::to_string(lineNo) + ": " +
                                          event.error().message);

    const auto t0 = std::chrono::steady_clock::now();
    const auto result = control_step(state, event.value(), policy, cfg, ws);
    const auto t1 = std::chrono::steady_clock::now();
    if (!result.ok())
      return Result<StreamStats>::failure("line " + std::to_string(lineNo) + ": " +
                                          result.error().message);
    latenciesUs.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());

    out << format_command(result.value().action, result.value().gimbalCommandDeg,
                          event.value().frameId)
        << '\n';
    stats.eventsConsumed += 1;
    stats.commandsEmitted += 1;
  }

  if (!latenciesUs.empty()) {
    double sum = 0.0;
    for (double v : latenciesUs) sum += v;
    stats.meanLatencyUs = sum / latenciesUs.size();
    std::vector<double> sorted = latenciesUs;
    std::sort(sorted.begin(), sorted.end());
    stats.p99LatencyUs = sorted[static_cast<std::size_t>(0.99 * (sorted.size() - 1))];
    stats.maxLatencyUs = sorted.back();
  }
  stats.finalPhase = state.phase;
  return stats;
}

}  // namespace padland::rt
