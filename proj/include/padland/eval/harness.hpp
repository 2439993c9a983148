// Batched landing evaluation. Each run pins a start altitude, platform speed
// and path from the configured sets, then drives the simulator through the
// deployment control loop (canonical events, mean actions, hold-last rule).
// Touchdown offsets are measured from simulator ground truth in the
// platform's moving frame at the contact instant; the harness never trusts
// the vision pipeline it is evaluating.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "padland/nn/policy.hpp"
#include "padland/result.hpp"
#include "padland/rl/normalize.hpp"
#include "padland/rt/control_loop.hpp"
#include "padland/rt/protocol.hpp"
#include "padland/sim/world.hpp"

namespace padland::eval {

struct EvalConfig {
  int runs = 40;
  double startAltitudeMinM = 2.0;
  double startAltitudeMaxM = 20.0;
  std::vector<double> platformSpeedsMps{0.1, 0.2, 0.3, 0.4};
  std::vector<sim::PathKind> platformPaths{sim::PathKind::Linear, sim::PathKind::Circular,
                                           sim::PathKind::WaypointRandom};
  double uavSpeedCapMps = 0.4;
  sim::NoiseSpec noise;  // defaults: 2 px jitter, 2% dropouts
  std::uint64_t seed = 0;
  double maxSecondsPerRun = 90.0;
  sim::SimConfig baseSim;
  rl::NormalizationBounds bounds;
  int holdLastFrames = 8;

  void validate() const {
    if (runs <= 0) throw std::invalid_argument("EvalConfig: runs must be positive");
    if (platformSpeedsMps.empty() || platformPaths.empty())
      throw std::invalid_argument("EvalConfig: speed and path sets must be non-empty");
    for (double s : platformSpeedsMps)
      if (s < 0.0) throw std::invalid_argument("EvalConfig: speeds must be >= 0");
  }
};

struct RunRecord {
  int run = 0;
  std::uint64_t seed = 0;
  double startAltitudeM = 0.0;
  double platformSpeedMps = 0.0;
  sim::PathKind path = sim::PathKind::Linear;
  sim::Terminal terminal = sim::Terminal::None;
  double offsetXM = 0.0;  // platform frame, at the final step
  double offsetYM = 0.0;
  double offsetM = 0.0;
  bool insideTarget = false;
  double durationS = 0.0;
  double descentSpeedMps = 0.0;
};

struct EvalAggregates {
  int runs = 0;
  int landings = 0;
  int insideTargetCount = 0;
  double insideTargetRate = 0.0;
  double meanAbsDeviationM = 0.0;   // over landed runs
  double meanLandingSpeedMps = 0.0; // over landed runs
  double maxAltitudeTestedM = 0.0;
};

struct EvalReport {
  std::vector<RunRecord> runs;
  EvalAggregates aggregates;
};

struct RunLog {
  std::string events;      // canonical detection-event lines
  std::string commands;    // command lines
  std::string trajectory;  // one StepResult summary per line, for debugging
};

inline const char* to_string(sim::PathKind k) {
  switch (k) {
    case sim::PathKind::Linear: return "linear";
    case sim::PathKind::Circular: return "circular";
    default: return "waypoint";
  }
}

inline EvalAggregates compute_aggregates(const std::vector<RunRecord>& runs) {
  EvalAggregates agg;
  agg.runs = static_cast<int>(runs.size());
  double offsetSum = 0.0, speedSum = 0.0;
  for (const auto& r : runs) {
    agg.maxAltitudeTestedM = std::max(agg.maxAltitudeTestedM, r.startAltitudeM);
    if (r.terminal == sim::Terminal::Landing) {
      agg.landings += 1;
      offsetSum += r.offsetM;
      speedSum += r.descentSpeedMps;
      if (r.insideTarget) agg.insideTargetCount += 1;
    }
  }
  agg.insideTargetRate = agg.runs > 0 ? static_cast<double>(agg.insideTargetCount) / agg.runs : 0.0;
  agg.meanAbsDeviationM = agg.landings > 0 ? offsetSum / agg.landings : 0.0;
  agg.meanLandingSpeedMps = agg.landings > 0 ? speedSum / agg.landings : 0.0;
  return agg;
}

// Runs one seeded episode through the deployment loop. Exposed separately so
// transport-equivalence tests can replay the captured events.
template <typename PolicyT>
RunRecord evaluate_run(const PolicyT& policy, const EvalConfig& cfg, int runIndex,
                       RunLog* log = nullptr) {
  Rng setupRng = Rng(cfg.seed).fork(1000 + static_cast<std::uint64_t>(runIndex));
  const double altitude = setupRng.uniform(cfg.startAltitudeMinM, cfg.startAltitudeMaxM);
  const std::uint64_t episodeSeed = setupRng.nextU64();

  sim::SimConfig simCfg = cfg.baseSim;
  simCfg.episode.spawnAltitudeMin = altitude;
  simCfg.episode.spawnAltitudeMax = altitude;
  const double speed = cfg.platformSpeedsMps[runIndex % cfg.platformSpeedsMps.size()];
  simCfg.episode.platformSpeedMin = speed;
  simCfg.episode.platformSpeedMax = speed;
  simCfg.episode.paths = {cfg.platformPaths[runIndex % cfg.platformPaths.size()]};
  simCfg.episode.maxSeconds = cfg.maxSecondsPerRun;
  simCfg.control.horizontalSpeedCapMps = cfg.uavSpeedCapMps;
  simCfg.noise = cfg.noise;

  sim::SimWorld world(simCfg);
  sim::StepResult stepResult = world.reset(episodeSeed);

  rt::LoopConfig loopCfg;
  loopCfg.camera = simCfg.camera;
  loopCfg.bounds = cfg.bounds;
  loopCfg.holdLastFrames = cfg.holdLastFrames;
  loopCfg.gimbalSlewDegPerS = simCfg.control.gimbalSlewDegPerS;
  loopCfg.nominalPeriodS = simCfg.arena.controlPeriod();
  rt::LoopState loop;
  nn::Workspace ws;

  while (stepResult.terminal == sim::Terminal::None) {
    rt::DetectionEvent raw;
    raw.frameId = stepResult.state.frameId;
    raw.timestampS = stepResult.state.timeS;
    raw.bbox = stepResult.detection;
    raw.vehicle.heightM = stepResult.state.uav.position.z;
    raw.vehicle.gimbalPitchDeg = stepResult.state.uav.gimbalPitchDeg;
    raw.vehicle.speedMps = stepResult.groundTruth.uavRadialSpeedMps;
    const rt::DetectionEvent event = rt::canonicalize(raw);

    const auto out = rt::control_step(loop, event, policy, loopCfg, ws);
    const auto& step = out.value();  // events built here are always well-formed
    if (log) {
      log->events += rt::format_detection_event(event);
      log->events += '\n';
      log->commands += rt::format_command(step.action, step.gimbalCommandDeg, event.frameId);
      log->commands += '\n';
    }
    world.setGimbal(step.gimbalCommandDeg);
    stepResult = world.step(step.action);
    if (log) {
      log->trajectory += sim::format_step_record(stepResult);
      log->trajectory += '\n';
    }
  }

  RunRecord rec;
  rec.run = runIndex;
  rec.seed = episodeSeed;
  rec.startAltitudeM = altitude;
  rec.platformSpeedMps = speed;
  rec.path = simCfg.episode.paths[0];
  rec.terminal = stepResult.terminal;
  rec.offsetXM = stepResult.groundTruth.platformFrameX;
  rec.offsetYM = stepResult.groundTruth.platformFrameY;
  rec.offsetM = std::sqrt(rec.offsetXM * rec.offsetXM + rec.offsetYM * rec.offsetYM);
  rec.insideTarget = stepResult.terminal == sim::Terminal::Landing &&
                     std::abs(rec.offsetXM) <= simCfg.episode.targetHalfExtentM &&
                     std::abs(rec.offsetYM) <= simCfg.episode.targetHalfExtentM;
  rec.durationS = stepResult.state.timeS;
  rec.descentSpeedMps = stepResult.groundTruth.descentSpeedMps;
  return rec;
}

template <typename PolicyT>
EvalReport run_evaluation(const PolicyT& policy, const EvalConfig& cfg,
                          std::vector<RunLog>* logs = nullptr) {
  cfg.validate();
  EvalReport report;
  report.runs.reserve(cfg.runs);
  if (logs) logs->assign(cfg.runs, RunLog{});
  for (int i = 0; i < cfg.runs; ++i) {
    report.runs.push_back(evaluate_run(policy, cfg, i, logs ? &(*logs)[i] : nullptr));
  }
  report.aggregates = compute_aggregates(report.runs);
  return report;
}

// CSV: one row per run plus an aggregate footer. Reals use %.17g so parsing
// the file back reproduces every aggregate to the last bit.
inline std::string report_csv(const EvalReport& report) {
  std::string out =
      "run,seed,start_altitude_m,platform_speed_mps,path,terminal,offset_x_m,offset_y_m,"
      "offset_m,inside_target,duration_s,descent_speed_mps\n";
  char line[512];
  for (const auto& r : report.runs) {
    std::snprintf(line, sizeof(line), "%d,%llu,%.17g,%.17g,%s,%s,%.17g,%.17g,%.17g,%d,%.17g,%.17g\n",
                  r.run, static_cast<unsigned long long>(r.seed), r.startAltitudeM,
                  r.platformSpeedMps, to_string(r.path), sim::to_string(r.terminal), r.offsetXM,
                  r.offsetYM, r.offsetM, r.insideTarget ? 1 : 0, r.durationS, r.descentSpeedMps);
    out += line;
  }
  const auto& a = report.aggregates;
  std::snprintf(line, sizeof(line), "aggregate,runs,%d\n", a.runs);
  out += line;
  std::snprintf(line, sizeof(line), "aggregate,landings,%d\n", a.landings);
  out += line;
  std::snprintf(line, sizeof(line), "aggregate,inside_target_count,%d\n", a.insideTargetCount);
  out += line;
  std::snprintf(line, sizeof(line), "aggregate,inside_target_rate,%.17g\n", a.insideTargetRate);
  out += line;
  std::snprintf(line, sizeof(line), "aggregate,mean_abs_deviation_m,%.17g\n", a.meanAbsDeviationM);
  out += line;
  std::snprintf(line, sizeof(line), "aggregate,mean_landing_speed_mps,%.17g\n",
                a.meanLandingSpeedMps);
  out += line;
  std::snprintf(line, sizeof(line), "aggregate,max_altitude_m,%.17g\n", a.maxAltitudeTestedM);
  out += line;
  return out;
}

inline Result<EvalReport> parse_report_csv(const std::string& csv) {
  EvalReport report;
  std::istringstream in(csv);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    if (line.rfind("aggregate,", 0) == 0) continue;  // recomputed below
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = line.find(',', pos);
      fields.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                   : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (fields.size() != 12)
      return Result<EvalReport>::failure("report csv: expected 12 fields per run row");
    RunRecord r;
    r.run = std::stoi(fields[0]);
    r.seed = std::stoull(fields[1]);
    r.startAltitudeM = std::strtod(fields[2].c_str(), nullptr);
    r.platformSpeedMps = std::strtod(fields[3].c_str(), nullptr);
    r.path = fields[4] == "linear"     ? sim::PathKind::Linear
             : fields[4] == "circular" ? sim::PathKind::Circular
                                       : sim::PathKind::WaypointRandom;
    r.terminal = fields[5] == "landing"   ? sim::Terminal::Landing
                 : fields[5] == "crash"   ? sim::Terminal::Crash
                 : fields[5] == "timeout" ? sim::Terminal::Timeout
                                          : sim::Terminal::None;
    r.offsetXM = std::strtod(fields[6].c_str(), nullptr);
    r.offsetYM = std::strtod(fields[7].c_str(), nullptr);
    r.offsetM = std::strtod(fields[8].c_str(), nullptr);
    r.insideTarget = fields[9] == "1";
    r.durationS = std::strtod(fields[10].c_str(), nullptr);
    r.descentSpeedMps = std::strtod(fields[11].c_str(), nullptr);
    report.runs.push_back(r);
  }
  report.aggregates = compute_aggregates(report.runs);
  return report;
}

// Plain-text summary: one comparison row plus the per-batch table in 5-run
// groupings (mean offsets over landed runs in each batch).
inline std::string summarize(const EvalReport& report) {
  const auto& a = report.aggregates;
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof(buf), "accuracy_m %.4f\n", a.meanAbsDeviationM);
  out += buf;
  std::snprintf(buf, sizeof(buf), "landing_speed_mps %.4f\n", a.meanLandingSpeedMps);
  out += buf;
  std::snprintf(buf, sizeof(buf), "max_altitude_m %.2f\n", a.maxAltitudeTestedM);
  out += buf;
  out += "moving_target yes\n";
  std::snprintf(buf, sizeof(buf), "inside_target %d/%d (%.1f%%)\n", a.insideTargetCount, a.runs,
                100.0 * a.insideTargetRate);
  out += buf;
  out += "batches_of_5:\n";
  for (std::size_t start = 0; start < report.runs.size(); start += 5) {
    const std::size_t end = std::min(start + 5, report.runs.size());
    double offsetSum = 0.0;
    int landed = 0, inside = 0;
    for (std::size_t i = start; i < end; ++i) {
      const auto& r = report.runs[i];
      if (r.terminal == sim::Terminal::Landing) {
        offsetSum += r.offsetM;
        landed += 1;
        if (r.insideTarget) inside += 1;
      }
    }
    if (landed > 0) {
      std::snprintf(buf, sizeof(buf), "  runs %zu-%zu: mean_offset_m %.4f inside %d/%zu\n",
                    start + 1, end, offsetSum / landed, inside, end - start);
    } else {
      std::snprintf(buf, sizeof(buf), "  runs %zu-%zu: mean_offset_m - inside 0/%zu\n", start + 1,
                    end, end - start);
    }
    out += buf;
  }
  return out;
}

}  // namespace padland::eval
