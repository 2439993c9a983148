#include "padland/eval/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "padland/nn/policy.hpp"
#include "padland/rt/control_loop.hpp"

using namespace padland;
using eval::EvalConfig;
using eval::EvalReport;

namespace {

// Hand-coded landing controller driven only by the normalized observation.
// Cheats in skill, not in information: turns toward the target, closes in,
// and descends inside an approach cone. Used to sanity-check the harness.
struct ExpertController {
  std::vector<double> actMean(std::span<const double> obs, nn::Workspace&) const {
    const double thetaDeg = obs[0] * 180.0;
    const double groundDistM = obs[1] * 30.0;
    const double heightM = obs[2] * 20.0;
    const double yaw = std::clamp(-thetaDeg / 25.0, -1.0, 1.0);
    const double pitch = std::clamp(groundDistM * 1.5, 0.0, 1.0);
    const double cone = 0.35 * heightM + 0.3;
    double throttle = 0.0;
    if (groundDistM < cone) throttle = heightM < 1.5 ? -1.0 : -0.6;
    return {pitch, 0.0, yaw, throttle};
  }
};

EvalConfig quickConfig(int runs) {
  EvalConfig cfg;
  cfg.runs = runs;
  cfg.maxSecondsPerRun = 60.0;
  cfg.seed = 11;
  return cfg;
}

eval::RunRecord landedRun(int i, double offsetX, double offsetY) {
  eval::RunRecord r;
  r.run = i;
  r.startAltitudeM = 5.0 + i * 0.1;
  r.platformSpeedMps = 0.2;
  r.terminal = sim::Terminal::Landing;
  r.offsetXM = offsetX;
  r.offsetYM = offsetY;
  r.offsetM = std::sqrt(offsetX * offsetX + offsetY * offsetY);
  r.insideTarget = std::abs(offsetX) <= 0.3 && std::abs(offsetY) <= 0.3;
  r.durationS = 20.0;
  r.descentSpeedMps = 0.8;
  return r;
}

}  // namespace

TEST(Harness, ExpertControllerLandsInsideOnStationaryPlatform) {
  EvalConfig cfg = quickConfig(12);
  cfg.platformSpeedsMps = {0.0};
  const ExpertController expert;
  const EvalReport report = eval::run_evaluation(expert, cfg);
  EXPECT_EQ(report.aggregates.landings, 12);
  EXPECT_EQ(report.aggregates.insideTargetCount, 12);
  EXPECT_LT(report.aggregates.meanAbsDeviationM, 0.10);
}

TEST(Harness, RandomPolicyIsNoBetterThanChance) {
  EvalConfig cfg = quickConfig(20);
  const nn::Policy random = nn::Policy::randomInit(nn::PolicyArch{}, 5);
  const EvalReport report = eval::run_evaluation(random, cfg);
  const double landings = report.aggregates.landings;
  // Touchdowns that do happen should hit the 60x60 target at no better than
  // its area share of the 100x100 platform (0.36), with binomial slack.
  const double chanceBound = landings * 0.36 + 3.0 * std::sqrt(landings * 0.36 * 0.64) + 0.5;
  EXPECT_LE(report.aggregates.insideTargetCount, chanceBound);
}

TEST(Harness, DeterministicReportBytes) {
  EvalConfig cfg = quickConfig(6);
  const ExpertController expert;
  const std::string a = eval::report_csv(eval::run_evaluation(expert, cfg));
  const std::string b = eval::report_csv(eval::run_evaluation(expert, cfg));
  EXPECT_EQ(a, b);
}

TEST(Harness, EventLogReplaysToIdenticalCommands) {
  // Transport equivalence: the command log captured in-process must be
  // byte-identical to run_stream consuming the captured event log.
  EvalConfig cfg = quickConfig(3);
  cfg.platformSpeedsMps = {0.2};
  const ExpertController expert;
  std::vector<eval::RunLog> logs;
  eval::run_evaluation(expert, cfg, &logs);
  ASSERT_EQ(logs.size(), 3u);

  rt::LoopConfig loopCfg;
  loopCfg.camera = cfg.baseSim.camera;
  loopCfg.bounds = cfg.bounds;
  loopCfg.holdLastFrames = cfg.holdLastFrames;
  loopCfg.gimbalSlewDegPerS = cfg.baseSim.control.gimbalSlewDegPerS;
  loopCfg.nominalPeriodS = cfg.baseSim.arena.controlPeriod();
  for (const auto& log : logs) {
    ASSERT_FALSE(log.events.empty());
    std::istringstream in(log.events);
    std::ostringstream out;
    const auto stats = rt::run_stream(in, out, expert, loopCfg);
    ASSERT_TRUE(stats.ok()) << stats.error().message;
    EXPECT_EQ(out.str(), log.commands);
  }
}

TEST(Summarize, ReproducesBatchAverages) {
  // Synthetic 40-run report whose 5-run batch offsets average to 20, 4, 35,
  // 10, 21, 8, 15, 12 cm; the overall mean must come out at 15.625 cm.
  const double batchMeans[8] = {0.20, 0.04, 0.35, 0.10, 0.21, 0.08, 0.15, 0.12};
  EvalReport report;
  for (int b = 0; b < 8; ++b) {
    for (int k = 0; k < 5; ++k) {
      // Spread runs around the batch mean without changing it.
      const double delta = (k - 2) * 0.01;
      report.runs.push_back(landedRun(b * 5 + k, batchMeans[b] + delta, 0.0));
    }
  }
  report.aggregates = eval::compute_aggregates(report.runs);
  EXPECT_NEAR(report.aggregates.meanAbsDeviationM, 0.15625, 1e-12);

  const std::string summary = eval::summarize(report);
  EXPECT_NE(summary.find("accuracy_m 0.156"), std::string::npos);
  // Exactly 8 batch rows for 40 runs.
  std::size_t rows = 0, pos = 0;
  while ((pos = summary.find("  runs ", pos)) != std::string::npos) {
    rows += 1;
    pos += 1;
  }
  EXPECT_EQ(rows, 8u);
  EXPECT_NE(summary.find("runs 1-5: mean_offset_m 0.2000 inside 5/5"), std::string::npos);
}

TEST(Summarize, SingleRunAccuracyIsItsOffset) {
  EvalReport report;
  report.runs.push_back(landedRun(0, 0.12, 0.05));
  report.aggregates = eval::compute_aggregates(report.runs);
  EXPECT_DOUBLE_EQ(report.aggregates.meanAbsDeviationM, report.runs[0].offsetM);
}

TEST(ReportCsv, LossFreeRoundTrip) {
  EvalConfig cfg = quickConfig(5);
  const ExpertController expert;
  const EvalReport report = eval::run_evaluation(expert, cfg);
  const std::string csv = eval::report_csv(report);

  const auto parsed = eval::parse_report_csv(csv);
  ASSERT_TRUE(parsed.ok());
  ASSERT_EQ(parsed.value().runs.size(), report.runs.size());
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    EXPECT_EQ(parsed.value().runs[i].offsetXM, report.runs[i].offsetXM);
    EXPECT_EQ(parsed.value().runs[i].offsetM, report.runs[i].offsetM);
    EXPECT_EQ(parsed.value().runs[i].durationS, report.runs[i].durationS);
  }
  // Aggregates recomputed from the parsed rows match to the last bit.
  EXPECT_EQ(parsed.value().aggregates.meanAbsDeviationM, report.aggregates.meanAbsDeviationM);
  EXPECT_EQ(parsed.value().aggregates.meanLandingSpeedMps, report.aggregates.meanLandingSpeedMps);
  EXPECT_EQ(parsed.value().aggregates.insideTargetRate, report.aggregates.insideTargetRate);
  EXPECT_EQ(parsed.value().aggregates.landings, report.aggregates.landings);
}

TEST(ReportCsv, InsideTargetMatchesOffsetDefinition) {
  EvalReport report;
  report.runs.push_back(landedRun(0, 0.29, 0.29));
  report.runs.push_back(landedRun(1, 0.31, 0.0));
  report.runs.push_back(landedRun(2, 0.0, -0.31));
  report.runs.push_back(landedRun(3, -0.3, 0.3));
  report.aggregates = eval::compute_aggregates(report.runs);
  EXPECT_TRUE(report.runs[0].insideTarget);
  EXPECT_FALSE(report.runs[1].insideTarget);
  EXPECT_FALSE(report.runs[2].insideTarget);
  EXPECT_TRUE(report.runs[3].insideTarget);
  EXPECT_EQ(report.aggregates.insideTargetCount, 2);
}

TEST(EvalConfigValidation, RejectsBadSetups) {
  EvalConfig cfg;
  cfg.runs = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = EvalConfig{};
  cfg.platformSpeedsMps.clear();
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = EvalConfig{};
  cfg.platformSpeedsMps = {-0.1};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
